#include "stvcheck/closeness.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

#include "mods_internal.hpp"

namespace stv {

namespace {

// Round pools: candidates shown with totals in the round (continuing plus
// those elected that round); previously elected and eliminated candidates
// are out.
std::vector<std::pair<int, std::int64_t>> round_pool(const Round& round) {
    std::vector<std::pair<int, std::int64_t>> pool;
    pool.reserve(round.totals.size());
    for (const auto& [id, total] : round.totals)
        pool.emplace_back(id, total.units());
    return pool;
}

bool close_somewhere(const TabulationRecord& record, int percent, int subset_size) {
    std::set<int> winners = record.winner_set();
    for (const auto& round : record.rounds) {
        auto pool = round_pool(round);
        const int n = static_cast<int>(pool.size());
        if (n < subset_size)
            continue;
        std::vector<int> pick(subset_size);
        // enumerate index subsets of the pool
        for (int i = 0; i < subset_size; ++i)
            pick[i] = i;
        while (true) {
            int winners_in = 0;
            std::int64_t lo = -1, hi = -1;
            for (int idx : pick) {
                winners_in += winners.count(pool[idx].first) ? 1 : 0;
                std::int64_t u = pool[idx].second;
                lo = lo < 0 ? u : std::min(lo, u);
                hi = std::max(hi, u);
            }
            bool mixed = subset_size == 2 ? winners_in == 1
                                          : (winners_in >= 1 && winners_in < subset_size);
            if (mixed && lo * 100 >= static_cast<std::int64_t>(percent) * hi)
                return true;
            // next combination
            int i = subset_size - 1;
            while (i >= 0 && pick[i] == n - subset_size + i)
                --i;
            if (i < 0)
                break;
            ++pick[i];
            for (int j = i + 1; j < subset_size; ++j)
                pick[j] = pick[j - 1] + 1;
        }
    }
    return false;
}

} // namespace

bool three_candidate_close(const TabulationRecord& record, int percent) {
    return close_somewhere(record, percent, 3);
}

bool two_candidate_close(const TabulationRecord& record, int percent) {
    return close_somewhere(record, percent, 2);
}

std::optional<std::set<int>> condorcet_committee(const PreferenceProfile& profile, int seats) {
    std::vector<int> ids = profile.eligible_ids();
    const int n = static_cast<int>(ids.size());
    if (seats < 1 || seats > n)
        throw std::invalid_argument("condorcet_committee: seat count out of range");

    // prefer[a][b]: voters ranking a above b (weak order: unranked ties lose
    // to ranked, contribute nothing against each other)
    std::map<int, std::map<int, std::int64_t>> prefer;
    for (int a : ids)
        for (int b : ids)
            if (a != b)
                prefer[a][b] = 0;
    for (const auto& ballot : profile.ballots())
        for (int a : ids)
            for (int b : ids)
                if (a != b && detail::ranked_above(ballot.ranking, a, b))
                    prefer[a][b] += ballot.count;

    auto beats = [&](int a, int b) { return prefer[a][b] > prefer[b][a]; };

    std::optional<std::set<int>> committee;
    std::vector<int> pick(seats);
    for (int i = 0; i < seats; ++i)
        pick[i] = i;
    while (true) {
        std::set<int> inside;
        for (int idx : pick)
            inside.insert(ids[idx]);
        bool ok = true;
        for (int a : inside) {
            for (int b : ids) {
                if (inside.count(b))
                    continue;
                if (!beats(a, b)) {
                    ok = false;
                    break;
                }
            }
            if (!ok)
                break;
        }
        if (ok) {
            assert(!committee && "pairwise-strict Condorcet committee must be unique");
            committee = std::move(inside);
        }
        int i = seats - 1;
        while (i >= 0 && pick[i] == n - seats + i)
            --i;
        if (i < 0)
            break;
        ++pick[i];
        for (int j = i + 1; j < seats; ++j)
            pick[j] = pick[j - 1] + 1;
    }
    return committee;
}

std::set<int> sntv_winners(const PreferenceProfile& profile, int seats, TiePolicy policy,
                           bool* tie_broken) {
    if (tie_broken)
        *tie_broken = false;
    auto tallies = first_place_tallies(profile);
    std::vector<std::pair<int, std::int64_t>> order(tallies.begin(), tallies.end());
    if (seats < 1 || seats > static_cast<int>(order.size()))
        throw std::invalid_argument("sntv_winners: seat count out of range");
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    if (seats < static_cast<int>(order.size()) &&
        order[seats - 1].second == order[seats].second) {
        if (policy == TiePolicy::Fail) {
            std::vector<int> tied;
            for (const auto& [id, tally] : order)
                if (tally == order[seats - 1].second)
                    tied.push_back(id);
            throw TieError(0, tied, "sntv seat boundary");
        }
        if (tie_broken)
            *tie_broken = true;
    }
    std::set<int> winners;
    for (int i = 0; i < seats; ++i)
        winners.insert(order[i].first);
    return winners;
}

ClosenessReport build_closeness_report(const Election& election, const TabulationRecord& record,
                                       const std::string& label, TiePolicy policy) {
    ClosenessReport report;
    report.election = label;
    report.first_round_terminated = record.first_round_decided();
    for (int p = kClosenessMin; p <= kClosenessMax; ++p) {
        report.three_close[p] = three_candidate_close(record, p);
        report.two_close[p] = two_candidate_close(record, p);
    }
    report.condorcet = condorcet_committee(election.profile, election.seats);
    report.sntv = sntv_winners(election.profile, election.seats, policy, &report.sntv_tie_broken);
    std::set<int> stv = record.winner_set();
    report.methods_agree =
        report.condorcet.has_value() && *report.condorcet == stv && report.sntv == stv;
    return report;
}

std::vector<SeriesRow> closeness_series(const std::vector<CorpusElectionResult>& corpus,
                                        bool use_three, bool exclude_committee_size) {
    std::vector<SeriesRow> series;
    if (corpus.empty())
        return series;
    for (int p = kClosenessMin; p <= kClosenessMax; ++p) {
        SeriesRow row;
        row.percent = p;
        for (const auto& result : corpus) {
            const auto& close_map =
                use_three ? result.report.three_close : result.report.two_close;
            auto it = close_map.find(p);
            if (it == close_map.end() || !it->second)
                continue;
            ++row.close_count;
            bool anomalous =
                exclude_committee_size ? result.non_committee_anomaly : result.any_anomaly;
            if (anomalous)
                ++row.anomalous_close_count;
        }
        row.ratio = row.close_count == 0
                        ? 0.0
                        : static_cast<double>(row.anomalous_close_count) /
                              static_cast<double>(row.close_count);
        series.push_back(row);
    }
    return series;
}

std::string series_to_csv(const std::vector<SeriesRow>& series) {
    std::ostringstream out;
    out << "p,close_count,anomalous_close_count,ratio\n";
    for (const auto& row : series) {
        out << row.percent << ',' << row.close_count << ',' << row.anomalous_close_count << ',';
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", row.ratio);
        out << buf << '\n';
    }
    return out.str();
}

} // namespace stv
