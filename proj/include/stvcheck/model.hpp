#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stvcheck/fixed.hpp"

namespace stv {

struct Candidate {
    int id = 0; // 1-based, stable against the source file
    std::string name;
    std::string party;
    bool withdrawn = false;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

// A distinct ranking together with how many voters cast it. Rankings are
// strict partial lists: candidates left off a ballot sit below every ranked
// candidate and carry no mutual order.
struct BallotType {
    std::vector<int> ranking;
    std::int64_t count = 0;

    friend bool operator==(const BallotType&, const BallotType&) = default;
};

class PreferenceProfile {
public:
    PreferenceProfile() = default;

    // Validates and canonicalizes: merges identical rankings, drops zero
    // counts, sorts lexicographically by ranking. Throws std::invalid_argument
    // on duplicate candidates within a ranking, unknown or withdrawn ids,
    // negative counts, or empty rankings.
    static PreferenceProfile canonical(std::vector<Candidate> roster,
                                       std::vector<BallotType> ballots);

    const std::vector<Candidate>& roster() const { return roster_; }
    const std::vector<BallotType>& ballots() const { return ballots_; }
    const Candidate& candidate(int id) const { return roster_.at(static_cast<std::size_t>(id) - 1); }

    std::int64_t total_voters() const;
    int num_candidates() const { return static_cast<int>(roster_.size()); }
    std::vector<int> eligible_ids() const; // non-withdrawn, ascending

    friend bool operator==(const PreferenceProfile&, const PreferenceProfile&) = default;

private:
    std::vector<Candidate> roster_;
    std::vector<BallotType> ballots_;
};

struct Election {
    PreferenceProfile profile;
    int seats = 1;

    // Throws if seats < 1 or seats exceeds the number of eligible candidates.
    // seats == eligible candidates is accepted but degenerate: every
    // candidate wins no matter the ballots.
    static Election make(PreferenceProfile profile, int seats);
    bool degenerate() const;

    friend bool operator==(const Election&, const Election&) = default;
};

// First-preference counts for every eligible candidate (zeros included).
std::map<int, std::int64_t> first_place_tallies(const PreferenceProfile& profile);

} // namespace stv
