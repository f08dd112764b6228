#include "stvcheck/anomaly.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mods_internal.hpp"

namespace stv {

namespace {

using detail::in_top;
using detail::ranked_above;

std::set<CertFlag> derive_flags(const AnomalyCertificate& cert, bool tie_broken) {
    std::set<CertFlag> flags;
    if (tie_broken)
        flags.insert(CertFlag::TieEncountered);
    if (!cert.modifications.empty()) {
        std::set<std::vector<int>> sources;
        for (const auto& m : cert.modifications)
            sources.insert(m.source);
        if (sources.size() == 1)
            flags.insert(CertFlag::IdenticalBallotsUsed);
    }
    if (cert.kind == AnomalyKind::NoShow) {
        bool focal_always_top = true;
        for (const auto& m : cert.modifications)
            if (!in_top(m.source, cert.focal, cert.seats))
                focal_always_top = false;
        if (!focal_always_top)
            flags.insert(CertFlag::AmbiguousNoShow);
    }
    return flags;
}

VerifyResult reject(const std::string& reason) {
    VerifyResult r;
    r.ok = false;
    r.reason = reason;
    return r;
}

} // namespace

PreferenceProfile apply_modifications(const PreferenceProfile& profile,
                                      const std::vector<BallotModification>& mods) {
    std::map<std::vector<int>, std::int64_t> counts;
    for (const auto& b : profile.ballots())
        counts[b.ranking] += b.count;
    for (const auto& m : mods) {
        if (m.count < 1)
            throw std::invalid_argument("modification count must be positive");
        auto it = counts.find(m.source);
        if (it == counts.end() || it->second < m.count)
            throw std::invalid_argument("modification consumes more ballots than exist");
        it->second -= m.count;
        if (m.kind != ModKind::Remove)
            counts[m.result] += m.count;
    }
    std::vector<BallotType> ballots;
    for (const auto& [ranking, count] : counts)
        if (count > 0)
            ballots.push_back(BallotType{ranking, count});
    return PreferenceProfile::canonical(profile.roster(), std::move(ballots));
}

std::vector<AnomalyCertificate> check_committee_size(const Election& election, TiePolicy policy) {
    std::vector<AnomalyCertificate> certs;
    if (election.seats < 2)
        return certs;
    TabulationRecord base = tabulate(election, policy);
    std::set<int> winners = base.winner_set();
    for (int s = 1; s < election.seats; ++s) {
        TabulationRecord alt = tabulate(Election::make(election.profile, s), policy);
        std::set<int> alt_winners = alt.winner_set();
        bool contained = std::includes(winners.begin(), winners.end(), alt_winners.begin(),
                                       alt_winners.end());
        if (contained)
            continue;
        AnomalyCertificate cert;
        cert.kind = AnomalyKind::CommitteeSize;
        cert.seats = election.seats;
        cert.alt_seats = s;
        std::vector<int> outside;
        std::set_difference(alt_winners.begin(), alt_winners.end(), winners.begin(), winners.end(),
                            std::back_inserter(outside));
        cert.focal = outside.front(); // a witness: wins s seats, not seats
        cert.original_winners = winners;
        cert.modified_winners = alt_winners;
        cert.flags = derive_flags(cert, base.any_tie_broken || alt.any_tie_broken);
        certs.push_back(std::move(cert));
    }
    return certs;
}

VerifyResult verify_certificate(const Election& election, const AnomalyCertificate& cert,
                                TiePolicy policy) {
    if (cert.seats != election.seats)
        return reject("certificate seat count does not match the election");
    const int eligible = static_cast<int>(election.profile.eligible_ids().size());
    if (cert.focal < 1 || cert.focal > election.profile.num_candidates())
        return reject("focal candidate out of range");

    if (cert.kind == AnomalyKind::CommitteeSize) {
        if (!cert.modifications.empty())
            return reject("committee-size certificates carry no ballot changes");
        if (cert.alt_seats < 1 || cert.alt_seats >= cert.seats)
            return reject("alt_seats must be a smaller positive seat count");
        TabulationRecord base, alt;
        try {
            base = tabulate(election, policy);
            alt = tabulate(Election::make(election.profile, cert.alt_seats), policy);
        } catch (const TieError& e) {
            return reject(std::string("tie aborted the replay: ") + e.what());
        }
        std::set<int> w = base.winner_set(), wa = alt.winner_set();
        if (std::includes(w.begin(), w.end(), wa.begin(), wa.end()))
            return reject("smaller committee is contained in the larger one");
        if (w != cert.original_winners || wa != cert.modified_winners)
            return reject("winner sets do not match the certificate");
        if (!wa.count(cert.focal) || w.count(cert.focal))
            return reject("focal candidate is not a containment witness");
        VerifyResult ok;
        ok.ok = true;
        ok.certificate = cert;
        ok.certificate.flags = derive_flags(cert, base.any_tie_broken || alt.any_tie_broken);
        return ok;
    }

    if (cert.modifications.empty())
        return reject("no modifications");
    for (const auto& m : cert.modifications) {
        if (m.count < 1)
            return reject("modification count must be positive");
        switch (cert.kind) {
        case AnomalyKind::Upward:
            if (m.kind != ModKind::ShiftUp ||
                !detail::valid_shift_up(m.source, m.result, cert.focal, eligible))
                return reject("not a valid upward shift of the focal candidate");
            break;
        case AnomalyKind::DownwardStrong:
            if (m.kind != ModKind::ShiftDown ||
                !detail::valid_shift_down(m.source, m.result, cert.focal))
                return reject("not a valid downward shift of the focal candidate");
            break;
        case AnomalyKind::DownwardWeak:
            if (m.kind == ModKind::ShiftDown) {
                if (!detail::valid_shift_down(m.source, m.result, cert.focal))
                    return reject("not a valid downward shift of the focal candidate");
            } else if (m.kind == ModKind::BulletRewrite) {
                if (!detail::valid_bullet_rewrite(m.source, m.result, cert.focal))
                    return reject("not a valid bullet rewrite of the focal candidate");
            } else {
                return reject("weak downward certificates allow shifts and bullet rewrites only");
            }
            break;
        case AnomalyKind::NoShow:
            if (m.kind != ModKind::Remove || !m.result.empty())
                return reject("no-show certificates remove ballots only");
            if (!ranked_above(m.source, cert.focal, cert.displaced))
                return reject("removed ballots must rank the focal above the displaced winner");
            if (in_top(m.source, cert.displaced, cert.seats))
                return reject("removed ballots must not rank the displaced winner in the top seats");
            break;
        case AnomalyKind::CommitteeSize:
            break;
        }
    }
    if (cert.kind == AnomalyKind::DownwardWeak) {
        bool any_rewrite = std::any_of(cert.modifications.begin(), cert.modifications.end(),
                                       [](const auto& m) { return m.kind == ModKind::BulletRewrite; });
        if (!any_rewrite)
            return reject("weak downward certificate without a bullet rewrite is a strong one");
    }
    if (cert.kind == AnomalyKind::NoShow &&
        (cert.displaced < 1 || cert.displaced > election.profile.num_candidates() ||
         cert.displaced == cert.focal))
        return reject("displaced candidate out of range");

    PreferenceProfile modified;
    try {
        modified = apply_modifications(election.profile, cert.modifications);
    } catch (const std::invalid_argument& e) {
        return reject(std::string("modifications do not apply: ") + e.what());
    }
    TabulationRecord base, alt;
    try {
        base = tabulate(election, policy);
        alt = tabulate(Election::make(modified, cert.seats), policy);
    } catch (const TieError& e) {
        return reject(std::string("tie aborted the replay: ") + e.what());
    } catch (const std::invalid_argument& e) {
        return reject(std::string("modified election is not tabulatable: ") + e.what());
    }
    std::set<int> w = base.winner_set(), wm = alt.winner_set();
    if (w != cert.original_winners || wm != cert.modified_winners)
        return reject("winner sets do not match the certificate");

    switch (cert.kind) {
    case AnomalyKind::Upward:
        if (!w.count(cert.focal) || wm.count(cert.focal))
            return reject("raising the focal candidate did not cost it the seat");
        break;
    case AnomalyKind::DownwardStrong:
    case AnomalyKind::DownwardWeak:
        if (w.count(cert.focal) || !wm.count(cert.focal))
            return reject("lowering the focal candidate did not win it the seat");
        break;
    case AnomalyKind::NoShow: {
        if (!w.count(cert.displaced) || w.count(cert.focal))
            return reject("no-show relation does not hold in the baseline");
        std::set<int> expected = w;
        expected.erase(cert.displaced);
        expected.insert(cert.focal);
        if (wm != expected)
            return reject("removals do not swap exactly the displaced winner for the focal");
        break;
    }
    case AnomalyKind::CommitteeSize:
        break;
    }

    VerifyResult ok;
    ok.ok = true;
    ok.certificate = cert;
    ok.certificate.flags = derive_flags(cert, base.any_tie_broken || alt.any_tie_broken);
    return ok;
}

std::string to_string(AnomalyKind kind) {
    switch (kind) {
    case AnomalyKind::CommitteeSize: return "committee_size";
    case AnomalyKind::Upward: return "upward";
    case AnomalyKind::DownwardStrong: return "downward_strong";
    case AnomalyKind::DownwardWeak: return "downward_weak";
    case AnomalyKind::NoShow: return "no_show";
    }
    return "?";
}

std::string to_string(ModKind kind) {
    switch (kind) {
    case ModKind::ShiftUp: return "shift_up";
    case ModKind::ShiftDown: return "shift_down";
    case ModKind::BulletRewrite: return "bullet_rewrite";
    case ModKind::Remove: return "remove";
    }
    return "?";
}

std::string to_string(CertFlag flag) {
    switch (flag) {
    case CertFlag::AmbiguousNoShow: return "ambiguous_no_show";
    case CertFlag::IdenticalBallotsUsed: return "identical_ballots_used";
    case CertFlag::TieEncountered: return "tie_encountered";
    }
    return "?";
}

namespace {

AnomalyKind kind_from_string(const std::string& s) {
    if (s == "committee_size") return AnomalyKind::CommitteeSize;
    if (s == "upward") return AnomalyKind::Upward;
    if (s == "downward_strong") return AnomalyKind::DownwardStrong;
    if (s == "downward_weak") return AnomalyKind::DownwardWeak;
    if (s == "no_show") return AnomalyKind::NoShow;
    throw std::invalid_argument("unknown anomaly kind: " + s);
}

ModKind mod_from_string(const std::string& s) {
    if (s == "shift_up") return ModKind::ShiftUp;
    if (s == "shift_down") return ModKind::ShiftDown;
    if (s == "bullet_rewrite") return ModKind::BulletRewrite;
    if (s == "remove") return ModKind::Remove;
    throw std::invalid_argument("unknown modification kind: " + s);
}

CertFlag flag_from_string(const std::string& s) {
    if (s == "ambiguous_no_show") return CertFlag::AmbiguousNoShow;
    if (s == "identical_ballots_used") return CertFlag::IdenticalBallotsUsed;
    if (s == "tie_encountered") return CertFlag::TieEncountered;
    throw std::invalid_argument("unknown certificate flag: " + s);
}

} // namespace

nlohmann::ordered_json certificate_to_json(const AnomalyCertificate& cert,
                                           const PreferenceProfile& profile,
                                           const std::string& title) {
    nlohmann::ordered_json j;
    j["schema"] = "stvcheck-certificate/1";
    j["kind"] = to_string(cert.kind);
    j["election"] = {{"sha256", cert.election_hash}, {"title", title}, {"seats", cert.seats}};
    j["focal"] = {{"id", cert.focal}, {"name", profile.candidate(cert.focal).name}};
    if (cert.kind == AnomalyKind::NoShow)
        j["displaced"] = {{"id", cert.displaced}, {"name", profile.candidate(cert.displaced).name}};
    if (cert.kind == AnomalyKind::CommitteeSize)
        j["alt_seats"] = cert.alt_seats;
    nlohmann::ordered_json mods = nlohmann::ordered_json::array();
    for (const auto& m : cert.modifications) {
        nlohmann::ordered_json mj;
        mj["kind"] = to_string(m.kind);
        mj["source"] = m.source;
        if (m.kind != ModKind::Remove)
            mj["result"] = m.result;
        mj["count"] = m.count;
        mods.push_back(std::move(mj));
    }
    j["modifications"] = std::move(mods);
    j["original_winners"] = cert.original_winners;
    j["modified_winners"] = cert.modified_winners;
    nlohmann::ordered_json flags = nlohmann::ordered_json::array();
    for (CertFlag f : cert.flags)
        flags.push_back(to_string(f));
    j["flags"] = std::move(flags);
    return j;
}

AnomalyCertificate certificate_from_json(const nlohmann::json& j) {
    AnomalyCertificate cert;
    try {
        cert.kind = kind_from_string(j.at("kind").get<std::string>());
        cert.seats = j.at("election").at("seats").get<int>();
        cert.election_hash = j.at("election").at("sha256").get<std::string>();
        cert.focal = j.at("focal").at("id").get<int>();
        if (j.contains("displaced"))
            cert.displaced = j.at("displaced").at("id").get<int>();
        if (j.contains("alt_seats"))
            cert.alt_seats = j.at("alt_seats").get<int>();
        for (const auto& mj : j.at("modifications")) {
            BallotModification m;
            m.kind = mod_from_string(mj.at("kind").get<std::string>());
            m.source = mj.at("source").get<std::vector<int>>();
            if (mj.contains("result"))
                m.result = mj.at("result").get<std::vector<int>>();
            m.count = mj.at("count").get<std::int64_t>();
            cert.modifications.push_back(std::move(m));
        }
        for (int id : j.at("original_winners").get<std::vector<int>>())
            cert.original_winners.insert(id);
        for (int id : j.at("modified_winners").get<std::vector<int>>())
            cert.modified_winners.insert(id);
        for (const auto& f : j.at("flags"))
            cert.flags.insert(flag_from_string(f.get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed certificate: ") + e.what());
    }
    return cert;
}

} // namespace stv
