#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "stvcheck/engine.hpp"
#include "stvcheck/model.hpp"

namespace stv {

enum class AnomalyKind {
    CommitteeSize,
    Upward,
    DownwardStrong,
    DownwardWeak,
    NoShow,
};

enum class ModKind {
    ShiftUp,      // focal moves strictly higher; may insert an unlisted focal at rank 1
    ShiftDown,    // focal moves strictly lower, stays ranked
    BulletRewrite, // bullet for focal becomes Y or Y then focal
    Remove,       // ballots leave the election (no-show only)
};

struct BallotModification {
    ModKind kind = ModKind::ShiftUp;
    std::vector<int> source;
    std::vector<int> result; // empty for Remove
    std::int64_t count = 0;

    friend bool operator==(const BallotModification&, const BallotModification&) = default;
    friend auto operator<=>(const BallotModification&, const BallotModification&) = default;
};

enum class CertFlag {
    AmbiguousNoShow,      // focal not in the top S of every removed ballot
    IdenticalBallotsUsed, // all modified ballots share one ranking
    TieEncountered,       // a tabulation behind this certificate broke a tie by index
};

// A replayable claim: apply the modifications to the referenced election and
// the stated winner-set relation holds.
struct AnomalyCertificate {
    AnomalyKind kind = AnomalyKind::Upward;
    int seats = 0;
    std::string election_hash;
    int focal = 0;
    int displaced = -1;  // no-show: the winner pushed out
    int alt_seats = -1;  // committee-size: the offending smaller seat count
    std::vector<BallotModification> modifications;
    std::set<int> original_winners;
    std::set<int> modified_winners;
    std::set<CertFlag> flags;

    friend bool operator==(const AnomalyCertificate&, const AnomalyCertificate&) = default;
};

struct SearchBudget {
    std::uint64_t max_probes = 1000000;
    double max_seconds = 0.0; // 0 = no wall-clock cap
};

struct SearchOutcome {
    std::vector<AnomalyCertificate> certificates;
    std::uint64_t probes_used = 0;
    bool truncated = false; // budget ran out before the sweep finished
};

struct VerifyResult {
    bool ok = false;
    std::string reason;                   // set when !ok
    AnomalyCertificate certificate;       // flags recomputed on success
};

// Applies modifications to a profile: subtracts from source types, adds
// result types, recanonicalizes. Throws std::invalid_argument if a source
// type is missing or over-consumed.
PreferenceProfile apply_modifications(const PreferenceProfile& profile,
                                      const std::vector<BallotModification>& mods);

// Independent replay of a certificate against the election it references:
// re-checks modification legality, re-runs both counts, re-derives flags.
VerifyResult verify_certificate(const Election& election, const AnomalyCertificate& cert,
                                TiePolicy policy = TiePolicy::Fail);

// Complete by construction: compares W(P, s) for every s < seats.
std::vector<AnomalyCertificate> check_committee_size(const Election& election,
                                                     TiePolicy policy = TiePolicy::Fail);

SearchOutcome search_upward(const Election& election, const SearchBudget& budget = {},
                            TiePolicy policy = TiePolicy::Fail);
SearchOutcome search_downward(const Election& election, const SearchBudget& budget = {},
                              TiePolicy policy = TiePolicy::Fail);
SearchOutcome search_no_show(const Election& election, const SearchBudget& budget = {},
                             TiePolicy policy = TiePolicy::Fail);

struct OracleCaps {
    int max_candidates = 4;
    int max_types = 6;
    std::int64_t max_voters = 40;
};

// Enumerates every admissible single-type modification (all counts, all
// target positions; all removal sizes of one type for no-show) and returns
// every certificate whose relation replays. Throws std::invalid_argument
// when the election exceeds the caps.
std::vector<AnomalyCertificate> exhaustive_oracle(const Election& election, AnomalyKind kind,
                                                  const OracleCaps& caps = {},
                                                  TiePolicy policy = TiePolicy::Fail);

nlohmann::ordered_json certificate_to_json(const AnomalyCertificate& cert,
                                           const PreferenceProfile& profile,
                                           const std::string& title);
AnomalyCertificate certificate_from_json(const nlohmann::json& j);

std::string to_string(AnomalyKind kind);
std::string to_string(ModKind kind);
std::string to_string(CertFlag flag);

} // namespace stv
