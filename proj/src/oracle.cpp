#include "stvcheck/anomaly.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "mods_internal.hpp"

namespace stv {

namespace {

using detail::in_top;
using detail::position_of;
using detail::ranked_above;
using detail::shift_to_position;

struct Oracle {
    const Election& election;
    TiePolicy policy;
    TabulationRecord base;
    std::set<int> base_winners;
    std::vector<AnomalyCertificate> certs;

    Oracle(const Election& e, TiePolicy p)
        : election(e), policy(p), base(tabulate(e, p)), base_winners(base.winner_set()) {}

    std::optional<std::set<int>> winners_after(const std::vector<BallotModification>& mods) {
        try {
            PreferenceProfile modified = apply_modifications(election.profile, mods);
            return tabulate(Election::make(modified, election.seats), policy).winner_set();
        } catch (const TieError&) {
            return std::nullopt;
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
    }

    void emit(AnomalyKind kind, int focal, int displaced, std::vector<BallotModification> mods,
              const std::set<int>& modified_winners) {
        AnomalyCertificate cert;
        cert.kind = kind;
        cert.seats = election.seats;
        cert.focal = focal;
        cert.displaced = displaced;
        cert.modifications = std::move(mods);
        cert.original_winners = base_winners;
        cert.modified_winners = modified_winners;
        VerifyResult vr = verify_certificate(election, cert, policy);
        if (vr.ok)
            certs.push_back(std::move(vr.certificate));
    }

    std::vector<int> losers() const {
        std::vector<int> out;
        for (int id : election.profile.eligible_ids())
            if (!base_winners.count(id))
                out.push_back(id);
        return out;
    }
};

} // namespace

// Brute-force ground truth for small instances: every admissible single-type
// modification at every count. Deliberately unclever; the searchers are
// measured against this.
std::vector<AnomalyCertificate> exhaustive_oracle(const Election& election, AnomalyKind kind,
                                                  const OracleCaps& caps, TiePolicy policy) {
    const auto& profile = election.profile;
    if (static_cast<int>(profile.eligible_ids().size()) > caps.max_candidates ||
        static_cast<int>(profile.ballots().size()) > caps.max_types ||
        profile.total_voters() > caps.max_voters)
        throw std::invalid_argument("election exceeds oracle caps");

    if (kind == AnomalyKind::CommitteeSize)
        return check_committee_size(election, policy);

    Oracle o(election, policy);
    if (o.base.first_round_decided() || election.degenerate())
        return {};
    const auto& ballots = profile.ballots();
    const int eligible = static_cast<int>(profile.eligible_ids().size());

    switch (kind) {
    case AnomalyKind::Upward:
        for (int x : o.base.winners) {
            for (const auto& b : ballots) {
                int pos = position_of(b.ranking, x);
                int max_target = pos >= 0 ? pos - 1 : static_cast<int>(b.ranking.size());
                for (int p = 0; p <= max_target; ++p) {
                    std::vector<int> result = shift_to_position(b.ranking, x, p);
                    if (!detail::valid_shift_up(b.ranking, result, x, eligible))
                        continue;
                    for (std::int64_t c = 1; c <= b.count; ++c) {
                        std::vector<BallotModification> mods{
                            BallotModification{ModKind::ShiftUp, b.ranking, result, c}};
                        auto winners = o.winners_after(mods);
                        if (winners && !winners->count(x))
                            o.emit(kind, x, -1, std::move(mods), *winners);
                    }
                }
            }
        }
        break;

    case AnomalyKind::DownwardStrong:
        for (int x : o.losers()) {
            for (const auto& b : ballots) {
                int pos = position_of(b.ranking, x);
                if (pos < 0)
                    continue;
                for (int p = pos + 1; p < static_cast<int>(b.ranking.size()); ++p) {
                    std::vector<int> result = shift_to_position(b.ranking, x, p);
                    if (!detail::valid_shift_down(b.ranking, result, x))
                        continue;
                    for (std::int64_t c = 1; c <= b.count; ++c) {
                        std::vector<BallotModification> mods{
                            BallotModification{ModKind::ShiftDown, b.ranking, result, c}};
                        auto winners = o.winners_after(mods);
                        if (winners && winners->count(x))
                            o.emit(kind, x, -1, std::move(mods), *winners);
                    }
                }
            }
        }
        break;

    case AnomalyKind::DownwardWeak:
        for (int x : o.losers()) {
            std::vector<int> bullet{x};
            auto it = std::find_if(ballots.begin(), ballots.end(),
                                   [&](const BallotType& b) { return b.ranking == bullet; });
            if (it == ballots.end())
                continue;
            for (int y : profile.eligible_ids()) {
                if (y == x)
                    continue;
                for (std::vector<int> result : {std::vector<int>{y, x}, std::vector<int>{y}}) {
                    for (std::int64_t c = 1; c <= it->count; ++c) {
                        std::vector<BallotModification> mods{
                            BallotModification{ModKind::BulletRewrite, bullet, result, c}};
                        auto winners = o.winners_after(mods);
                        if (winners && winners->count(x))
                            o.emit(kind, x, -1, std::move(mods), *winners);
                    }
                }
            }
        }
        break;

    case AnomalyKind::NoShow:
        for (int x : o.losers()) {
            for (int y : o.base.winners) {
                std::set<int> wanted = o.base_winners;
                wanted.erase(y);
                wanted.insert(x);
                for (const auto& b : ballots) {
                    if (!ranked_above(b.ranking, x, y) || in_top(b.ranking, y, election.seats))
                        continue;
                    for (std::int64_t c = 1; c <= b.count; ++c) {
                        std::vector<BallotModification> mods{
                            BallotModification{ModKind::Remove, b.ranking, {}, c}};
                        auto winners = o.winners_after(mods);
                        if (winners && *winners == wanted)
                            o.emit(kind, x, y, std::move(mods), *winners);
                    }
                }
            }
        }
        break;

    case AnomalyKind::CommitteeSize:
        break; // handled above
    }

    return std::move(o.certs);
}

} // namespace stv
