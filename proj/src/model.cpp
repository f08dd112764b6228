#include "stvcheck/model.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace stv {

namespace {

void validate_roster(const std::vector<Candidate>& roster) {
    if (roster.empty())
        throw std::invalid_argument("profile: empty roster");
    for (std::size_t i = 0; i < roster.size(); ++i) {
        if (roster[i].id != static_cast<int>(i) + 1)
            throw std::invalid_argument("profile: roster ids must be 1..n in order");
        if (roster[i].name.empty())
            throw std::invalid_argument("profile: candidate " + std::to_string(roster[i].id) +
                                        " has an empty name");
    }
}

} // namespace

PreferenceProfile PreferenceProfile::canonical(std::vector<Candidate> roster,
                                               std::vector<BallotType> ballots) {
    validate_roster(roster);
    const int n = static_cast<int>(roster.size());

    std::map<std::vector<int>, std::int64_t> merged;
    for (const auto& b : ballots) {
        if (b.count < 0)
            throw std::invalid_argument("profile: negative ballot count");
        if (b.count == 0)
            continue;
        if (b.ranking.empty())
            throw std::invalid_argument("profile: empty ranking");
        std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
        for (int id : b.ranking) {
            if (id < 1 || id > n)
                throw std::invalid_argument("profile: unknown candidate id " + std::to_string(id));
            if (roster[static_cast<std::size_t>(id) - 1].withdrawn)
                throw std::invalid_argument("profile: withdrawn candidate " + std::to_string(id) +
                                            " in ranking");
            if (seen[static_cast<std::size_t>(id)])
                throw std::invalid_argument("profile: duplicate candidate " + std::to_string(id) +
                                            " in ranking");
            seen[static_cast<std::size_t>(id)] = true;
        }
        merged[b.ranking] += b.count;
    }

    PreferenceProfile p;
    p.roster_ = std::move(roster);
    p.ballots_.reserve(merged.size());
    for (auto& [ranking, count] : merged)
        p.ballots_.push_back(BallotType{ranking, count});
    return p;
}

std::int64_t PreferenceProfile::total_voters() const {
    std::int64_t total = 0;
    for (const auto& b : ballots_)
        total += b.count;
    return total;
}

std::vector<int> PreferenceProfile::eligible_ids() const {
    std::vector<int> ids;
    for (const auto& c : roster_)
        if (!c.withdrawn)
            ids.push_back(c.id);
    return ids;
}

Election Election::make(PreferenceProfile profile, int seats) {
    const int eligible = static_cast<int>(profile.eligible_ids().size());
    if (seats < 1)
        throw std::invalid_argument("election: seats must be at least 1");
    if (seats > eligible)
        throw std::invalid_argument("election: " + std::to_string(seats) + " seats but only " +
                                    std::to_string(eligible) + " eligible candidates");
    return Election{std::move(profile), seats};
}

bool Election::degenerate() const {
    return seats == static_cast<int>(profile.eligible_ids().size());
}

std::map<int, std::int64_t> first_place_tallies(const PreferenceProfile& profile) {
    std::map<int, std::int64_t> tallies;
    for (int id : profile.eligible_ids())
        tallies[id] = 0;
    for (const auto& b : profile.ballots())
        tallies[b.ranking.front()] += b.count;
    return tallies;
}

} // namespace stv
