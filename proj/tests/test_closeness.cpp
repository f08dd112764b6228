#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "stvcheck/closeness.hpp"
#include "stvcheck/engine.hpp"

using namespace stv;

namespace {

PreferenceProfile tiny(std::vector<BallotType> ballots, int n = 3) {
    std::vector<Candidate> roster;
    for (int id = 1; id <= n; ++id)
        roster.push_back({id, std::string(1, static_cast<char>('A' + id - 1)), "", false});
    return PreferenceProfile::canonical(std::move(roster), std::move(ballots));
}

void check_monotone(const std::map<int, bool>& close) {
    for (int p = kClosenessMin + 1; p <= kClosenessMax; ++p)
        if (close.at(p))
            CHECK(close.at(p - 1));
}

} // namespace

TEST_CASE("closeness thresholds on the reference elections") {
    Election e = Election::make(example_profile(), 2);
    TabulationRecord rec = tabulate(e, TiePolicy::Fail);

    // Tightest mixed triple: 109 against 135 in the first round (80.7%).
    CHECK(three_candidate_close(rec, 50));
    CHECK(three_candidate_close(rec, 80));
    CHECK_FALSE(three_candidate_close(rec, 81));
    // The penultimate round pits the last two at 162.5 against 163.375.
    CHECK(two_candidate_close(rec, 95));

    Election perth = Election::make(perth_profile(), 1);
    TabulationRecord prec = tabulate(perth, TiePolicy::Fail);
    // First round 1733 / 1762 / 1883: a 92% three-way squeeze.
    CHECK(three_candidate_close(prec, 92));
    CHECK_FALSE(three_candidate_close(prec, 93));
    CHECK(two_candidate_close(prec, 95));
}

TEST_CASE("closeness is monotone in the percentage") {
    for (auto [profile, seats] :
         {std::pair{example_profile(), 2}, std::pair{perth_profile(), 1}}) {
        Election e = Election::make(profile, seats);
        ClosenessReport r = build_closeness_report(e, tabulate(e, TiePolicy::Fail), "x");
        check_monotone(r.three_close);
        check_monotone(r.two_close);
    }
}

TEST_CASE("condorcet committee on a profile with a cycle") {
    PreferenceProfile p = example_profile();
    // A beats D, D beats B, B beats A and C, C beats A and D: every
    // committee of every size has an outside candidate it fails against.
    CHECK_FALSE(condorcet_committee(p, 1).has_value());
    CHECK_FALSE(condorcet_committee(p, 2).has_value());
    CHECK_FALSE(condorcet_committee(p, 3).has_value());
    CHECK_THROWS_AS(condorcet_committee(p, 0), std::invalid_argument);
    CHECK_THROWS_AS(condorcet_committee(p, 5), std::invalid_argument);
}

TEST_CASE("condorcet committee when majorities line up") {
    CHECK(condorcet_committee(perth_profile(), 1) == std::set<int>{1});

    PreferenceProfile p = tiny({{{1, 2}, 6}, {{2}, 5}, {{3, 1}, 4}});
    CHECK(condorcet_committee(p, 1) == std::set<int>{1});
    CHECK(condorcet_committee(p, 2) == std::set<int>{1, 2});
    // Every candidate seated: vacuously a committee.
    CHECK(condorcet_committee(p, 3) == std::set<int>{1, 2, 3});
}

TEST_CASE("sntv takes the top first-preference tallies") {
    CHECK(sntv_winners(example_profile(), 2) == std::set<int>{1, 2});
    CHECK(sntv_winners(example_profile(), 1) == std::set<int>{2});
    CHECK(sntv_winners(perth_profile(), 1) == std::set<int>{3});
    CHECK_THROWS_AS(sntv_winners(example_profile(), 0), std::invalid_argument);
    CHECK_THROWS_AS(sntv_winners(example_profile(), 5), std::invalid_argument);

    PreferenceProfile tied = tiny({{{1}, 5}, {{2}, 5}, {{3}, 2}});
    CHECK_THROWS_AS(sntv_winners(tied, 1, TiePolicy::Fail), TieError);
    try {
        sntv_winners(tied, 1, TiePolicy::Fail);
    } catch (const TieError& e) {
        CHECK(e.tied() == std::vector<int>{1, 2});
        CHECK(std::string(e.what()).find("sntv seat boundary") != std::string::npos);
    }
    bool broke = false;
    CHECK(sntv_winners(tied, 1, TiePolicy::Index, &broke) == std::set<int>{1});
    CHECK(broke);
    // A tie above the boundary is not a tie at it.
    broke = false;
    CHECK(sntv_winners(tied, 2, TiePolicy::Fail, &broke) == std::set<int>{1, 2});
    CHECK_FALSE(broke);
}

TEST_CASE("closeness report pulls the three methods together") {
    Election e = Election::make(example_profile(), 2);
    ClosenessReport r = build_closeness_report(e, tabulate(e, TiePolicy::Fail), "example");
    CHECK(r.election == "example");
    CHECK_FALSE(r.first_round_terminated);
    CHECK(r.three_close.size() == 46);
    CHECK(r.two_close.size() == 46);
    CHECK(r.three_close.at(80));
    CHECK_FALSE(r.three_close.at(81));
    CHECK(r.two_close.at(95));
    CHECK_FALSE(r.condorcet.has_value());
    CHECK(r.sntv == std::set<int>{1, 2});
    CHECK_FALSE(r.sntv_tie_broken);
    CHECK_FALSE(r.methods_agree);

    Election perth = Election::make(perth_profile(), 1);
    TabulationRecord prec = tabulate(perth, TiePolicy::Fail);
    ClosenessReport pr = build_closeness_report(perth, prec, "perth");
    // Three methods, three different answers.
    CHECK(pr.condorcet == std::set<int>{1});
    CHECK(pr.sntv == std::set<int>{3});
    CHECK(prec.winner_set() == std::set<int>{2});
    CHECK_FALSE(pr.methods_agree);

    Election landslide = Election::make(tiny({{{1}, 10}, {{2}, 3}}, 2), 1);
    ClosenessReport lr =
        build_closeness_report(landslide, tabulate(landslide, TiePolicy::Fail), "safe");
    CHECK(lr.first_round_terminated);
    CHECK(lr.methods_agree);
}

TEST_CASE("closeness series counts close and anomalous elections per cutoff") {
    CorpusElectionResult a;
    a.name = "a";
    a.any_anomaly = true;
    a.non_committee_anomaly = false;
    CorpusElectionResult b;
    b.name = "b";
    for (int p = kClosenessMin; p <= kClosenessMax; ++p) {
        a.report.three_close[p] = p <= 60;
        a.report.two_close[p] = true;
        b.report.three_close[p] = p <= 55;
        b.report.two_close[p] = p <= 90;
    }

    CHECK(closeness_series({}, true, false).empty());

    auto series = closeness_series({a, b}, true, false);
    REQUIRE(series.size() == 46);
    CHECK(series.front().percent == 50);
    CHECK(series.back().percent == 95);
    CHECK(series[0].close_count == 2);
    CHECK(series[0].anomalous_close_count == 1);
    CHECK(series[0].ratio == doctest::Approx(0.5));
    CHECK(series[6].percent == 56); // only a remains close
    CHECK(series[6].close_count == 1);
    CHECK(series[6].ratio == doctest::Approx(1.0));
    CHECK(series[11].percent == 61);
    CHECK(series[11].close_count == 0);
    CHECK(series[11].ratio == 0.0);

    // Committee-size-only anomalies can be excluded from the numerator.
    auto filtered = closeness_series({a, b}, true, true);
    CHECK(filtered[0].close_count == 2);
    CHECK(filtered[0].anomalous_close_count == 0);

    auto pairs = closeness_series({a, b}, false, false);
    CHECK(pairs[45].percent == 95);
    CHECK(pairs[45].close_count == 1); // only a's pair metric reaches 95

    std::string csv = series_to_csv(series);
    CHECK(csv.find("p,close_count,anomalous_close_count,ratio\n") == 0);
    CHECK(csv.find("50,2,1,0.500000\n") != std::string::npos);
    CHECK(csv.find("61,0,0,0.000000\n") != std::string::npos);
    CHECK(series_to_csv({}) == "p,close_count,anomalous_close_count,ratio\n");
}
