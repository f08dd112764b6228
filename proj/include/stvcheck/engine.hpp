#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stvcheck/model.hpp"

namespace stv {

enum class TiePolicy {
    Fail,  // unresolved tie aborts the count
    Index, // lowest candidate id, flagged in the record
};

// Raised when candidates are tied for exclusion (or surplus order) and the
// totals of every earlier round are tied as well, under TiePolicy::Fail.
class TieError : public std::runtime_error {
public:
    TieError(int round, std::vector<int> tied, std::string context);
    int round() const { return round_; }
    const std::vector<int>& tied() const { return tied_; }
    const std::string& context() const { return context_; }

private:
    int round_;
    std::vector<int> tied_;
    std::string context_;
};

struct Transfer {
    enum class Kind { Surplus, Exclusion };
    Kind kind = Kind::Surplus;
    int from = 0;
    // Nominal per-unit value floor5(surplus/total) for surplus transfers,
    // recorded for display; credits below are the exact amounts applied.
    Fixed transfer_value;
    std::map<int, Fixed> credits;
    Fixed exhausted;
    Fixed truncation_loss;

    friend bool operator==(const Transfer&, const Transfer&) = default;
};

struct Round {
    enum class Event { Elected, Eliminated };

    // Opening totals: every candidate still in play this round (continuing
    // plus any candidate whose election is declared this round).
    std::map<int, Fixed> totals;
    Event event = Event::Elected;
    std::vector<int> elected;   // declared this round, in order
    int eliminated = -1;        // valid when event == Eliminated
    bool quota_met = true;      // false when seats were filled without quota
    bool tie_broken_by_index = false;

    // Accounting at round opening; with totals they partition the vote.
    Fixed retained;        // held by previously elected candidates
    Fixed exhausted;       // cumulative
    Fixed truncation_loss; // cumulative

    std::vector<Transfer> transfers; // applied during this round

    friend bool operator==(const Round&, const Round&) = default;
};

struct TabulationRecord {
    int seats = 0;
    std::int64_t total_voters = 0;
    Fixed quota;
    std::vector<Round> rounds;
    std::vector<int> winners; // in order elected
    Fixed final_exhausted;
    Fixed final_truncation_loss;
    bool any_tie_broken = false;

    std::set<int> winner_set() const { return {winners.begin(), winners.end()}; }
    // Every seat went to a candidate at or above quota in round one.
    bool first_round_decided() const;

    friend bool operator==(const TabulationRecord&, const TabulationRecord&) = default;
};

// floor(total_voters / (seats + 1)) + 1. Throws on non-positive voters.
std::int64_t compute_quota(std::int64_t total_voters, int seats);

// Runs the full count. Deterministic; throws TieError only under
// TiePolicy::Fail when the backward comparison cannot resolve a tie.
TabulationRecord tabulate(const Election& election, TiePolicy policy = TiePolicy::Fail);

// Winner sets for every seat count 1..max_seats on the same profile.
std::map<int, std::set<int>> winner_sets_for_all_seat_counts(const PreferenceProfile& profile,
                                                             int max_seats,
                                                             TiePolicy policy = TiePolicy::Fail);

} // namespace stv
