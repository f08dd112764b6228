#include "stvcheck/anomaly.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>

#include "mods_internal.hpp"

namespace stv {

namespace {

using detail::in_top;
using detail::position_of;
using detail::ranked_above;
using detail::shift_to_position;

struct Prober {
    const Election& election;
    TiePolicy policy;
    SearchBudget budget;
    SearchOutcome& out;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
    bool stopped = false;

    bool stop() {
        if (stopped)
            return true;
        if (out.probes_used >= budget.max_probes) {
            stopped = out.truncated = true;
            return true;
        }
        if (budget.max_seconds > 0) {
            auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
            if (elapsed.count() >= budget.max_seconds) {
                stopped = out.truncated = true;
                return true;
            }
        }
        return false;
    }

    // One exploratory tabulation. Ties and inapplicable modification sets
    // abandon the probe; both count against the budget.
    std::optional<std::set<int>> probe(const std::vector<BallotModification>& mods) {
        if (stop())
            return std::nullopt;
        ++out.probes_used;
        try {
            PreferenceProfile modified = apply_modifications(election.profile, mods);
            TabulationRecord rec = tabulate(Election::make(modified, election.seats), policy);
            return rec.winner_set();
        } catch (const TieError&) {
            return std::nullopt;
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
    }
};

struct CertKey {
    AnomalyKind kind;
    int focal;
    int displaced;
    friend auto operator<=>(const CertKey&, const CertKey&) = default;
};

struct Searcher {
    const Election& election;
    TiePolicy policy;
    TabulationRecord base;
    std::set<int> base_winners;
    std::int64_t quota_votes;
    Prober prober;
    std::map<CertKey, AnomalyCertificate> found;

    Searcher(const Election& e, const SearchBudget& b, TiePolicy p, SearchOutcome& out)
        : election(e), policy(p), base(tabulate(e, p)), base_winners(base.winner_set()),
          quota_votes(base.quota.units() / Fixed::scale), prober{e, p, b, out} {}

    bool skip_all() const { return base.first_round_decided() || election.degenerate(); }

    bool has(AnomalyKind kind, int focal, int displaced = -1) const {
        return found.count(CertKey{kind, focal, displaced}) > 0;
    }

    // Verifies and records; first certificate per (kind, focal, displaced)
    // wins unless the caller replaces it explicitly.
    std::optional<AnomalyCertificate> make_verified(AnomalyKind kind, int focal, int displaced,
                                                    std::vector<BallotModification> mods,
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
        if (!vr.ok)
            return std::nullopt;
        return vr.certificate;
    }

    bool emit(AnomalyKind kind, int focal, int displaced, std::vector<BallotModification> mods,
              const std::set<int>& modified_winners) {
        CertKey key{kind, focal, displaced};
        if (found.count(key))
            return true;
        auto cert = make_verified(kind, focal, displaced, std::move(mods), modified_winners);
        if (!cert)
            return false;
        found.emplace(key, std::move(*cert));
        return true;
    }

    std::vector<AnomalyCertificate> take_certificates() {
        std::vector<AnomalyCertificate> out;
        out.reserve(found.size());
        for (auto& [key, cert] : found)
            out.push_back(std::move(cert));
        return out;
    }

    std::vector<int> losers() const {
        std::vector<int> out;
        for (int id : election.profile.eligible_ids())
            if (!base_winners.count(id))
                out.push_back(id);
        return out;
    }

    std::vector<int> elimination_order() const {
        std::vector<int> out;
        for (const auto& r : base.rounds)
            if (r.event == Round::Event::Eliminated)
                out.push_back(r.eliminated);
        return out;
    }

    // Rankings with the peeled candidates deleted, indexed like the profile.
    std::vector<std::vector<int>> reduced_rankings(const std::set<int>& peeled) const {
        std::vector<std::vector<int>> out;
        out.reserve(election.profile.ballots().size());
        for (const auto& b : election.profile.ballots()) {
            std::vector<int> r;
            for (int id : b.ranking)
                if (!peeled.count(id))
                    r.push_back(id);
            out.push_back(std::move(r));
        }
        return out;
    }

    std::map<int, std::int64_t> reduced_tallies(const std::vector<std::vector<int>>& reduced,
                                                const std::set<int>& peeled) const {
        std::map<int, std::int64_t> tallies;
        for (int id : election.profile.eligible_ids())
            if (!peeled.count(id))
                tallies[id] = 0;
        const auto& ballots = election.profile.ballots();
        for (std::size_t t = 0; t < ballots.size(); ++t)
            if (!reduced[t].empty())
                tallies[reduced[t].front()] += ballots[t].count;
        return tallies;
    }
};

// ---------------------------------------------------------------------------
// upward

// Phase 1: force a different elimination order. At each level of the
// baseline elimination sequence, move the winner to the top of just enough
// ballots headed by another candidate to push that candidate out before the
// level's casualty, keeping the winner below quota on first preferences.
void upward_phase_elimination(Searcher& s) {
    const auto& ballots = s.election.profile.ballots();
    std::vector<int> elim = s.elimination_order();
    std::set<int> peeled;
    for (std::size_t level = 0; level < elim.size(); ++level) {
        int victim = elim[level];
        auto reduced = s.reduced_rankings(peeled);
        auto tallies = s.reduced_tallies(reduced, peeled);
        for (int wm : s.base.winners) {
            if (s.prober.stop())
                return;
            if (s.has(AnomalyKind::Upward, wm))
                continue;
            for (const auto& [ci, ci_tally] : tallies) {
                if (ci == wm || ci == victim)
                    continue;
                if (s.prober.stop())
                    return;
                std::int64_t need = ci_tally - tallies.at(victim) + 1;
                if (need <= 0)
                    continue;
                if (tallies.at(wm) + need >= s.quota_votes)
                    continue;

                // Candidate ballots: headed by ci after peeling, ordered by
                // how high the winner already sits.
                std::vector<std::size_t> types;
                for (std::size_t t = 0; t < ballots.size(); ++t)
                    if (!reduced[t].empty() && reduced[t].front() == ci)
                        types.push_back(t);
                std::stable_sort(types.begin(), types.end(), [&](std::size_t a, std::size_t b) {
                    int pa = position_of(reduced[a], wm), pb = position_of(reduced[b], wm);
                    unsigned ka = pa < 0 ? 1u << 30 : static_cast<unsigned>(pa);
                    unsigned kb = pb < 0 ? 1u << 30 : static_cast<unsigned>(pb);
                    return ka < kb;
                });
                std::vector<BallotModification> mods;
                std::int64_t remaining = need;
                for (std::size_t t : types) {
                    if (remaining <= 0)
                        break;
                    std::int64_t take = std::min(remaining, ballots[t].count);
                    std::vector<int> result = shift_to_position(ballots[t].ranking, wm, 0);
                    mods.push_back(BallotModification{ModKind::ShiftUp, ballots[t].ranking,
                                                      std::move(result), take});
                    remaining -= take;
                }
                if (remaining > 0)
                    continue;
                auto winners = s.prober.probe(mods);
                if (winners && !winners->count(wm))
                    s.emit(AnomalyKind::Upward, wm, -1, std::move(mods), *winners);
            }
        }
        peeled.insert(victim);
    }
}

// Phase 2: flip the order two winners take their seats. Lift the later
// winner over the earlier one on enough of the earlier winner's ballots to
// deny it quota in its round.
void upward_phase_seat_order(Searcher& s) {
    const auto& ballots = s.election.profile.ballots();
    const auto& order = s.base.winners;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (s.prober.stop())
                return;
            int w1 = order[i], w2 = order[j];
            if (s.has(AnomalyKind::Upward, w2))
                continue;
            Fixed elected_total;
            bool found_round = false;
            for (const auto& r : s.base.rounds) {
                if (std::find(r.elected.begin(), r.elected.end(), w1) != r.elected.end()) {
                    elected_total = r.totals.at(w1);
                    found_round = true;
                    break;
                }
            }
            if (!found_round || elected_total < s.base.quota)
                continue;
            std::int64_t need = (elected_total - s.base.quota).units() / Fixed::scale + 1;

            std::vector<BallotModification> mods;
            std::int64_t remaining = need;
            for (std::size_t t = 0; t < ballots.size() && remaining > 0; ++t) {
                const auto& r = ballots[t].ranking;
                if (r.size() < 2 || r[0] != w1 || r[1] != w2)
                    continue;
                std::int64_t take = std::min(remaining, ballots[t].count);
                mods.push_back(BallotModification{ModKind::ShiftUp, r, shift_to_position(r, w2, 0),
                                                  take});
                remaining -= take;
            }
            if (remaining > 0)
                continue;
            auto winners = s.prober.probe(mods);
            if (winners && !winners->count(w2))
                s.emit(AnomalyKind::Upward, w2, -1, std::move(mods), *winners);
        }
    }
}

// Brute force: single-type raises, incremental counts. First the sweep most
// likely to bite (to the top of ballots headed by each rival, nearest ranks
// first, then bullets), then every remaining single-type raise so that no
// single-type anomaly the oracle can see escapes.
void upward_brute_force(Searcher& s) {
    const auto& ballots = s.election.profile.ballots();
    const int eligible = static_cast<int>(s.election.profile.eligible_ids().size());
    for (int x : s.base.winners) {
        if (s.has(AnomalyKind::Upward, x))
            continue;
        bool done = false;
        for (int b : s.election.profile.eligible_ids()) {
            if (b == x || done)
                continue;
            std::vector<std::size_t> types;
            for (std::size_t t = 0; t < ballots.size(); ++t)
                if (ballots[t].ranking.front() == b && position_of(ballots[t].ranking, x) != 0)
                    types.push_back(t);
            std::stable_sort(types.begin(), types.end(), [&](std::size_t a, std::size_t c) {
                int pa = position_of(ballots[a].ranking, x), pc = position_of(ballots[c].ranking, x);
                auto key = [&](int p, std::size_t idx) {
                    // ranked positions first (2nd, 3rd, ...), then unranked,
                    // bullets ahead of longer rankings
                    return p >= 0 ? std::pair<int, std::size_t>(p, idx)
                                  : std::pair<int, std::size_t>(1 << 20,
                                                                ballots[idx].ranking.size() * 10000 + idx);
                };
                return key(pa, a) < key(pc, c);
            });
            for (std::size_t t : types) {
                std::vector<int> result = shift_to_position(ballots[t].ranking, x, 0);
                if (!detail::valid_shift_up(ballots[t].ranking, result, x, eligible))
                    continue;
                for (std::int64_t c = 1; c <= ballots[t].count && !done; ++c) {
                    if (s.prober.stop())
                        return;
                    std::vector<BallotModification> mods{
                        BallotModification{ModKind::ShiftUp, ballots[t].ranking, result, c}};
                    auto winners = s.prober.probe(mods);
                    if (winners && !winners->count(x))
                        done = s.emit(AnomalyKind::Upward, x, -1, std::move(mods), *winners);
                }
                if (done)
                    break;
            }
        }
        // remaining single-type raises: interior targets and insertions
        for (std::size_t t = 0; t < ballots.size() && !done; ++t) {
            const auto& r = ballots[t].ranking;
            int pos = position_of(r, x);
            int max_target = pos >= 0 ? pos - 1 : static_cast<int>(r.size());
            for (int p = 1; p <= max_target && !done; ++p) {
                std::vector<int> result = shift_to_position(r, x, p);
                if (!detail::valid_shift_up(r, result, x, eligible))
                    continue;
                for (std::int64_t c = 1; c <= ballots[t].count && !done; ++c) {
                    if (s.prober.stop())
                        return;
                    std::vector<BallotModification> mods{
                        BallotModification{ModKind::ShiftUp, r, result, c}};
                    auto winners = s.prober.probe(mods);
                    if (winners && !winners->count(x))
                        done = s.emit(AnomalyKind::Upward, x, -1, std::move(mods), *winners);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// downward

// Phase 1 analog of the upward elimination-order heuristic: hand the loser's
// first preferences to the runner-up on those ballots, either to push the
// runner-up to quota at this level or to rescue the level's casualty.
void downward_phase_elimination(Searcher& s) {
    const auto& ballots = s.election.profile.ballots();
    std::vector<int> elim = s.elimination_order();
    std::set<int> peeled;
    for (std::size_t level = 0; level < elim.size(); ++level) {
        int victim = elim[level];
        auto reduced = s.reduced_rankings(peeled);
        auto tallies = s.reduced_tallies(reduced, peeled);

        std::int64_t second_low = 0;
        {
            std::vector<std::int64_t> vals;
            for (const auto& [id, v] : tallies)
                if (id != victim)
                    vals.push_back(v);
            if (!vals.empty())
                second_low = *std::min_element(vals.begin(), vals.end());
        }

        for (int x : s.losers()) {
            if (peeled.count(x) || x == victim)
                continue;
            if (s.prober.stop())
                return;

            // group x-headed reduced ballots by the runner-up they reveal
            std::map<int, std::vector<std::size_t>> by_second;
            for (std::size_t t = 0; t < ballots.size(); ++t)
                if (reduced[t].size() >= 2 && reduced[t].front() == x)
                    by_second[reduced[t][1]].push_back(t);

            for (const auto& [c, types] : by_second) {
                std::int64_t available = 0;
                for (std::size_t t : types)
                    available += ballots[t].count;
                std::vector<std::int64_t> targets;
                targets.push_back(s.quota_votes - tallies.at(c)); // lift c to quota
                if (c == victim)
                    targets.push_back(second_low - tallies.at(victim) + 1); // let c outlive this level
                for (std::int64_t need : targets) {
                    bool strong_found = s.has(AnomalyKind::DownwardStrong, x);
                    if (strong_found || s.prober.stop())
                        break;
                    if (need <= 0 || need > available)
                        continue;
                    std::vector<BallotModification> mods;
                    std::int64_t remaining = need;
                    for (std::size_t t : types) {
                        if (remaining <= 0)
                            break;
                        std::int64_t take = std::min(remaining, ballots[t].count);
                        // drop x to just below the runner-up
                        const auto& src = ballots[t].ranking;
                        int cpos = position_of(src, c);
                        std::vector<int> result = shift_to_position(src, x, cpos);
                        mods.push_back(
                            BallotModification{ModKind::ShiftDown, src, std::move(result), take});
                        remaining -= take;
                    }
                    auto winners = s.prober.probe(mods);
                    if (winners && winners->count(x))
                        s.emit(AnomalyKind::DownwardStrong, x, -1, std::move(mods), *winners);
                }
            }
        }
        peeled.insert(victim);
    }
}

void downward_brute_force(Searcher& s) {
    const auto& ballots = s.election.profile.ballots();
    for (int x : s.losers()) {
        // strong: swap the loser below its runner-up, then every remaining
        // single-type drop
        bool strong_done = s.has(AnomalyKind::DownwardStrong, x);
        for (std::size_t t = 0; t < ballots.size() && !strong_done; ++t) {
            const auto& r = ballots[t].ranking;
            if (r.size() < 2 || r.front() != x)
                continue;
            std::vector<int> result = shift_to_position(r, x, 1);
            for (std::int64_t c = 1; c <= ballots[t].count && !strong_done; ++c) {
                if (s.prober.stop())
                    return;
                std::vector<BallotModification> mods{
                    BallotModification{ModKind::ShiftDown, r, result, c}};
                auto winners = s.prober.probe(mods);
                if (winners && winners->count(x))
                    strong_done = s.emit(AnomalyKind::DownwardStrong, x, -1, std::move(mods), *winners);
            }
        }
        for (std::size_t t = 0; t < ballots.size() && !strong_done; ++t) {
            const auto& r = ballots[t].ranking;
            int pos = position_of(r, x);
            if (pos < 0)
                continue;
            for (int p = pos + 1; p < static_cast<int>(r.size()) && !strong_done; ++p) {
                if (pos == 0 && p == 1)
                    continue; // covered above
                std::vector<int> result = shift_to_position(r, x, p);
                if (!detail::valid_shift_down(r, result, x))
                    continue;
                for (std::int64_t c = 1; c <= ballots[t].count && !strong_done; ++c) {
                    if (s.prober.stop())
                        return;
                    std::vector<BallotModification> mods{
                        BallotModification{ModKind::ShiftDown, r, result, c}};
                    auto winners = s.prober.probe(mods);
                    if (winners && winners->count(x))
                        strong_done =
                            s.emit(AnomalyKind::DownwardStrong, x, -1, std::move(mods), *winners);
                }
            }
        }

        // weak: rewrite bullet votes for the loser
        bool weak_done = s.has(AnomalyKind::DownwardWeak, x);
        std::vector<int> bullet{x};
        auto bullet_type = std::find_if(ballots.begin(), ballots.end(),
                                        [&](const BallotType& b) { return b.ranking == bullet; });
        if (bullet_type == ballots.end())
            continue;
        for (int y : s.election.profile.eligible_ids()) {
            if (y == x || weak_done)
                continue;
            for (std::vector<int> result : {std::vector<int>{y, x}, std::vector<int>{y}}) {
                if (weak_done)
                    break;
                for (std::int64_t c = 1; c <= bullet_type->count && !weak_done; ++c) {
                    if (s.prober.stop())
                        return;
                    std::vector<BallotModification> mods{
                        BallotModification{ModKind::BulletRewrite, bullet, result, c}};
                    auto winners = s.prober.probe(mods);
                    if (winners && winners->count(x))
                        weak_done = s.emit(AnomalyKind::DownwardWeak, x, -1, std::move(mods), *winners);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// no-show

struct NoShowPreference {
    bool ambiguous = true;
    std::int64_t removed = 0;
    std::vector<BallotModification> mods;

    static NoShowPreference of(const AnomalyCertificate& cert) {
        NoShowPreference p;
        p.ambiguous = cert.flags.count(CertFlag::AmbiguousNoShow) > 0;
        p.removed = 0;
        for (const auto& m : cert.modifications)
            p.removed += m.count;
        p.mods = cert.modifications;
        return p;
    }
    bool better_than(const NoShowPreference& o) const {
        if (ambiguous != o.ambiguous)
            return !ambiguous;
        if (removed != o.removed)
            return removed < o.removed;
        return mods < o.mods;
    }
};

void no_show_search(Searcher& s) {
    const auto& ballots = s.election.profile.ballots();
    const int seats = s.election.seats;

    for (int x : s.losers()) {
        for (int y : s.base.winners) {
            if (s.prober.stop())
                return;
            std::set<int> wanted = s.base_winners;
            wanted.erase(y);
            wanted.insert(x);

            std::vector<std::size_t> group;
            for (std::size_t t = 0; t < ballots.size(); ++t)
                if (ranked_above(ballots[t].ranking, x, y) && !in_top(ballots[t].ranking, y, seats))
                    group.push_back(t);
            if (group.empty())
                continue;

            std::optional<NoShowPreference> best;
            std::optional<AnomalyCertificate> best_cert;
            auto consider = [&](std::vector<BallotModification> mods,
                                const std::set<int>& winners) {
                auto cert = s.make_verified(AnomalyKind::NoShow, x, y, std::move(mods), winners);
                if (!cert)
                    return;
                auto pref = NoShowPreference::of(*cert);
                if (!best || pref.better_than(*best)) {
                    best = std::move(pref);
                    best_cert = std::move(*cert);
                }
            };

            // single-type sweeps
            for (std::size_t t : group) {
                for (std::int64_t c = 1; c <= ballots[t].count; ++c) {
                    if (s.prober.stop())
                        break;
                    std::vector<BallotModification> mods{
                        BallotModification{ModKind::Remove, ballots[t].ranking, {}, c}};
                    auto winners = s.prober.probe(mods);
                    if (winners && *winners == wanted) {
                        consider(std::move(mods), *winners);
                        break; // smallest count for this type found
                    }
                }
            }

            // greedy multi-type: remove the whole (x over y) group, then trim
            auto greedy = [&](const std::vector<std::size_t>& members) {
                if (members.size() < 2 || s.prober.stop())
                    return;
                std::map<std::size_t, std::int64_t> take;
                for (std::size_t t : members)
                    take[t] = ballots[t].count;
                auto mods_of = [&](const std::map<std::size_t, std::int64_t>& m) {
                    std::vector<BallotModification> mods;
                    for (const auto& [t, c] : m)
                        if (c > 0)
                            mods.push_back(
                                BallotModification{ModKind::Remove, ballots[t].ranking, {}, c});
                    return mods;
                };
                auto holds = [&](const std::map<std::size_t, std::int64_t>& m) {
                    auto winners = s.prober.probe(mods_of(m));
                    return winners && *winners == wanted;
                };
                if (!holds(take))
                    return;
                for (std::size_t t : members) { // drop whole types
                    if (s.prober.stop())
                        return;
                    auto trial = take;
                    trial.erase(t);
                    if (!trial.empty() && holds(trial))
                        take = std::move(trial);
                }
                for (auto& [t, c] : take) { // then shrink each kept type
                    std::int64_t lo = 1, hi = c;
                    while (lo < hi) {
                        if (s.prober.stop())
                            return;
                        std::int64_t mid = lo + (hi - lo) / 2;
                        auto trial = take;
                        trial[t] = mid;
                        if (holds(trial))
                            hi = mid;
                        else
                            lo = mid + 1;
                    }
                    take[t] = lo;
                }
                auto winners = s.prober.probe(mods_of(take));
                if (winners && *winners == wanted)
                    consider(mods_of(take), *winners);
            };
            greedy(group);
            std::vector<std::size_t> unambiguous;
            for (std::size_t t : group)
                if (in_top(ballots[t].ranking, x, seats))
                    unambiguous.push_back(t);
            if (unambiguous.size() != group.size())
                greedy(unambiguous);

            if (best_cert)
                s.found.emplace(CertKey{AnomalyKind::NoShow, x, y}, std::move(*best_cert));
        }
    }
}

} // namespace

SearchOutcome search_upward(const Election& election, const SearchBudget& budget, TiePolicy policy) {
    SearchOutcome out;
    Searcher s(election, budget, policy, out);
    if (s.skip_all())
        return out;
    upward_phase_elimination(s);
    upward_phase_seat_order(s);
    upward_brute_force(s);
    out.certificates = s.take_certificates();
    return out;
}

SearchOutcome search_downward(const Election& election, const SearchBudget& budget,
                              TiePolicy policy) {
    SearchOutcome out;
    Searcher s(election, budget, policy, out);
    if (s.skip_all())
        return out;
    downward_phase_elimination(s);
    downward_brute_force(s);
    out.certificates = s.take_certificates();
    return out;
}

SearchOutcome search_no_show(const Election& election, const SearchBudget& budget,
                             TiePolicy policy) {
    SearchOutcome out;
    Searcher s(election, budget, policy, out);
    if (s.skip_all())
        return out;
    no_show_search(s);
    out.certificates = s.take_certificates();
    return out;
}

} // namespace stv
