#pragma once

#include <vector>

#include "stvcheck/model.hpp"

// The two profiles most of the suite revolves around: a four-candidate
// two-seat election with 501 voters whose counts are known by hand, and the
// three-candidate reduction of a real single-seat by-election.

inline stv::PreferenceProfile example_profile() {
    std::vector<stv::Candidate> roster{{1, "Candidate A", "", false},
                                       {2, "Candidate B", "", false},
                                       {3, "Candidate C", "", false},
                                       {4, "Candidate D", "", false}};
    std::vector<stv::BallotType> ballots{
        {{1, 2}, 19},       {{1, 2, 3, 4}, 41}, {{1, 3, 4}, 60}, {{1, 4}, 15},
        {{2, 3, 1}, 73},    {{2, 1, 4, 3}, 51}, {{2, 4, 3, 1}, 19},
        {{3, 1}, 57},       {{3, 2, 1, 4}, 12}, {{3, 4, 2, 1}, 40},
        {{4, 1, 3}, 8},     {{4, 3, 2}, 47},    {{4, 2}, 59}};
    return stv::PreferenceProfile::canonical(std::move(roster), std::move(ballots));
}

inline stv::PreferenceProfile perth_profile() {
    std::vector<stv::Candidate> roster{{1, "Barrett", "LD", false},
                                       {2, "Coates", "Con", false},
                                       {3, "Leitch", "SNP", false}};
    std::vector<stv::BallotType> ballots{{{1}, 770},       {{1, 2, 3}, 619}, {{1, 3, 2}, 344},
                                         {{2}, 846},       {{2, 1, 3}, 867}, {{2, 3, 1}, 49},
                                         {{3}, 1167},      {{3, 1, 2}, 620}, {{3, 2, 1}, 96}};
    return stv::PreferenceProfile::canonical(std::move(roster), std::move(ballots));
}
