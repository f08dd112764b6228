#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stvcheck/engine.hpp"
#include "stvcheck/model.hpp"

namespace stv {

// Closeness parameter grid used throughout: integer percentages 50..95.
inline constexpr int kClosenessMin = 50;
inline constexpr int kClosenessMax = 95;

// True iff some round has three candidates still in play, at least one an
// eventual winner and one an eventual loser, whose round-opening totals
// satisfy min * 100 >= percent * max. Exact integer arithmetic throughout.
bool three_candidate_close(const TabulationRecord& record, int percent);

// Pair version: one eventual winner, one eventual loser.
bool two_candidate_close(const TabulationRecord& record, int percent);

// The size-seats set whose every member strictly beats every non-member in
// pairwise majority (unranked candidates tie below all ranked). At most one
// such set exists; nullopt when none does.
std::optional<std::set<int>> condorcet_committee(const PreferenceProfile& profile, int seats);

// Top-seats candidates by first-place votes. A tie across the seat boundary
// throws TieError under TiePolicy::Fail, resolves by lowest id otherwise
// (reported through tie_broken when provided).
std::set<int> sntv_winners(const PreferenceProfile& profile, int seats,
                           TiePolicy policy = TiePolicy::Fail, bool* tie_broken = nullptr);

struct ClosenessReport {
    std::string election;
    bool first_round_terminated = false;
    std::map<int, bool> three_close; // percent -> close?
    std::map<int, bool> two_close;
    std::optional<std::set<int>> condorcet;
    std::set<int> sntv;
    bool sntv_tie_broken = false;
    bool methods_agree = false; // STV, SNTV and Condorcet committee coincide
};

ClosenessReport build_closeness_report(const Election& election, const TabulationRecord& record,
                                       const std::string& label,
                                       TiePolicy policy = TiePolicy::Fail);

struct CorpusElectionResult {
    std::string name;
    ClosenessReport report;
    bool any_anomaly = false;           // any certificate, committee-size included
    bool non_committee_anomaly = false; // upward / downward / no-show only
};

struct SeriesRow {
    int percent = 0;
    std::int64_t close_count = 0;
    std::int64_t anomalous_close_count = 0;
    double ratio = 0.0; // 0 when close_count is 0
};

// One row per percent in [50, 95]. use_three selects the three-candidate
// metric, otherwise the pair metric; exclude_committee_size switches the
// anomaly predicate to non_committee_anomaly. Empty input -> empty series.
std::vector<SeriesRow> closeness_series(const std::vector<CorpusElectionResult>& corpus,
                                        bool use_three, bool exclude_committee_size);

// CSV with header p,close_count,anomalous_close_count,ratio.
std::string series_to_csv(const std::vector<SeriesRow>& series);

} // namespace stv
