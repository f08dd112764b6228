#include "stvcheck/engine.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace stv {

namespace {

std::string join_ids(const std::vector<int>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i)
            out += ", ";
        out += std::to_string(ids[i]);
    }
    return out;
}

enum class Status { Continuing, Elected, Excluded };

struct Entry {
    int type = 0; // index into profile.ballots()
    std::int64_t count = 0;
    Fixed value;
    int pos = 0; // position in the ranking of the candidate holding it
};

// Papers received in one stage form one parcel; exclusion transfers route
// parcels in the order they were received.
struct Parcel {
    std::vector<Entry> entries;
};

struct CandState {
    Status status = Status::Continuing;
    std::vector<Parcel> pile;
    Fixed total;
    Fixed retained;
    bool surplus_pending = false;
};

struct Count {
    const PreferenceProfile& profile;
    int seats;
    Fixed quota;
    TiePolicy policy;

    std::map<int, CandState> cand;
    std::vector<int> winners;
    std::vector<int> newly_elected; // declared but not yet displayed
    Fixed exhausted;
    Fixed loss;
    TabulationRecord rec;

    Count(const Election& e, TiePolicy p) : profile(e.profile), seats(e.seats), policy(p) {
        rec.seats = seats;
        rec.total_voters = profile.total_voters();
        rec.quota = Fixed::whole(compute_quota(rec.total_voters, seats));
        quota = rec.quota;
        for (int id : profile.eligible_ids())
            cand[id] = CandState{};
        const auto& ballots = profile.ballots();
        for (std::size_t t = 0; t < ballots.size(); ++t) {
            int head = ballots[t].ranking.front();
            auto& st = cand[head];
            if (st.pile.empty())
                st.pile.emplace_back();
            st.pile[0].entries.push_back(
                Entry{static_cast<int>(t), ballots[t].count, Fixed::whole(ballots[t].count), 0});
            st.total += Fixed::whole(ballots[t].count);
        }
        for (auto& [id, st] : cand)
            if (st.pile.empty())
                st.pile.emplace_back();
    }

    std::vector<int> continuing() const {
        std::vector<int> out;
        for (const auto& [id, st] : cand)
            if (st.status == Status::Continuing)
                out.push_back(id);
        return out;
    }

    int elected_count() const { return static_cast<int>(winners.size()); }

    // Descending total, ascending id: declaration order within a round.
    void sort_for_declaration(std::vector<int>& ids) const {
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            if (cand.at(a).total != cand.at(b).total)
                return cand.at(a).total > cand.at(b).total;
            return a < b;
        });
    }

    void declare_elected(int id) {
        auto& st = cand[id];
        st.status = Status::Elected;
        st.retained = st.total;
        st.surplus_pending = true; // exact quota still logs a no-op transfer
        winners.push_back(id);
        newly_elected.push_back(id);
    }

    void declare_elected_without_quota(int id) {
        auto& st = cand[id];
        st.status = Status::Elected;
        st.retained = st.total;
        st.surplus_pending = false;
        winners.push_back(id);
    }

    // Narrows a tied set using the most recent earlier round where the tied
    // candidates' totals differ. want_min selects exclusion semantics.
    std::vector<int> backward_narrow(std::vector<int> tied, bool want_min) const {
        for (auto it = rec.rounds.rbegin(); it != rec.rounds.rend() && tied.size() > 1; ++it) {
            const auto& totals = it->totals;
            bool all_present = std::all_of(tied.begin(), tied.end(),
                                           [&](int id) { return totals.count(id) > 0; });
            if (!all_present)
                continue;
            Fixed best = totals.at(tied.front());
            for (int id : tied) {
                Fixed v = totals.at(id);
                if (want_min ? v < best : v > best)
                    best = v;
            }
            std::vector<int> narrowed;
            for (int id : tied)
                if (totals.at(id) == best)
                    narrowed.push_back(id);
            tied = std::move(narrowed);
        }
        return tied;
    }

    int resolve_tie(std::vector<int> tied, bool want_min, Round& round, const char* context) {
        tied = backward_narrow(std::move(tied), want_min);
        if (tied.size() == 1)
            return tied.front();
        if (policy == TiePolicy::Fail)
            throw TieError(static_cast<int>(rec.rounds.size()), tied, context);
        round.tie_broken_by_index = true;
        rec.any_tie_broken = true;
        return *std::min_element(tied.begin(), tied.end());
    }

    // Next continuing candidate on the ranking after position pos, or -1.
    int next_continuing(const std::vector<int>& ranking, int pos) const {
        for (std::size_t i = static_cast<std::size_t>(pos) + 1; i < ranking.size(); ++i) {
            int id = ranking[i];
            if (cand.at(id).status == Status::Continuing)
                return id;
        }
        return -1;
    }

    void check_quota_achievers() {
        std::vector<int> at_quota;
        for (int id : continuing())
            if (cand[id].total >= quota)
                at_quota.push_back(id);
        sort_for_declaration(at_quota);
        for (int id : at_quota)
            declare_elected(id);
    }

    void transfer_surplus(int from, Round& round) {
        auto& st = cand[from];
        Fixed total = st.total;
        Fixed surplus = total - quota;
        Transfer tr;
        tr.kind = Transfer::Kind::Surplus;
        tr.from = from;
        if (surplus.is_zero()) {
            st.retained = quota;
            st.surplus_pending = false;
            st.pile.clear();
            round.transfers.push_back(std::move(tr));
            return;
        }
        tr.transfer_value = Fixed::mul_div(Fixed::whole(1), surplus, total);

        // All papers held transfer at floor5(value * surplus / total),
        // aggregated per ballot-type entry; the ratio stays exact until the
        // single truncation.
        std::map<int, Parcel> received;
        Fixed routed;
        for (const auto& parcel : st.pile) {
            for (const auto& e : parcel.entries) {
                Fixed slice = Fixed::mul_div(e.value, surplus, total);
                routed += slice;
                const auto& ranking = profile.ballots()[static_cast<std::size_t>(e.type)].ranking;
                int to = next_continuing(ranking, e.pos);
                if (to < 0) {
                    tr.exhausted += slice;
                    exhausted += slice;
                    continue;
                }
                if (slice.is_zero())
                    continue;
                int pos = 0;
                while (ranking[static_cast<std::size_t>(pos)] != to)
                    ++pos;
                received[to].entries.push_back(Entry{e.type, e.count, slice, pos});
                tr.credits[to] += slice;
                cand[to].total += slice;
            }
        }
        tr.truncation_loss = surplus - routed;
        loss += tr.truncation_loss;
        for (auto& [id, parcel] : received)
            cand[id].pile.push_back(std::move(parcel));
        st.retained = quota;
        st.total = quota;
        st.surplus_pending = false;
        st.pile.clear();
        round.transfers.push_back(std::move(tr));
    }

    // Largest surplus first among this round's queue; backward comparison
    // then policy on ties.
    int pick_pending_surplus(const std::vector<int>& queue, Round& round) {
        std::vector<int> pending;
        for (int id : queue)
            if (cand[id].surplus_pending)
                pending.push_back(id);
        if (pending.empty())
            return -1;
        Fixed best;
        for (int id : pending)
            best = std::max(best, cand[id].total - quota);
        std::vector<int> top;
        for (int id : pending)
            if (cand[id].total - quota == best)
                top.push_back(id);
        if (top.size() == 1)
            return top.front();
        return resolve_tie(std::move(top), /*want_min=*/false, round, "surplus order");
    }

    // Routes the excluded candidate's parcels in receipt order. An exclusion
    // is a single stage: candidates crossing quota during it keep receiving
    // until it completes. The one early exit: when every continuing
    // candidate holds quota the outcome is determined, so the remaining
    // parcels are abandoned to the non-transferable pile.
    void exclude(int loser, Round& round) {
        auto& st = cand[loser];
        st.status = Status::Excluded;
        std::vector<Parcel> pile = std::move(st.pile);
        st.pile.clear();
        std::size_t next_parcel = 0;
        for (; next_parcel < pile.size(); ++next_parcel) {
            const Parcel& parcel = pile[next_parcel];
            if (parcel.entries.empty())
                continue;
            Transfer tr;
            tr.kind = Transfer::Kind::Exclusion;
            tr.from = loser;
            std::map<int, Parcel> received;
            for (const auto& e : parcel.entries) {
                const auto& ranking = profile.ballots()[static_cast<std::size_t>(e.type)].ranking;
                int to = next_continuing(ranking, e.pos);
                st.total -= e.value;
                if (to < 0) {
                    tr.exhausted += e.value;
                    exhausted += e.value;
                    continue;
                }
                int pos = 0;
                while (ranking[static_cast<std::size_t>(pos)] != to)
                    ++pos;
                received[to].entries.push_back(Entry{e.type, e.count, e.value, pos});
                tr.credits[to] += e.value;
                cand[to].total += e.value;
            }
            for (auto& [id, p] : received)
                cand[id].pile.push_back(std::move(p));
            round.transfers.push_back(std::move(tr));
            bool sealed = true;
            for (int id : continuing()) {
                if (cand[id].total < quota) {
                    sealed = false;
                    break;
                }
            }
            if (sealed) {
                ++next_parcel;
                break;
            }
        }
        if (next_parcel < pile.size()) {
            Transfer sweep;
            sweep.kind = Transfer::Kind::Exclusion;
            sweep.from = loser;
            for (; next_parcel < pile.size(); ++next_parcel) {
                for (const auto& e : pile[next_parcel].entries) {
                    sweep.exhausted += e.value;
                    exhausted += e.value;
                    st.total -= e.value;
                }
            }
            round.transfers.push_back(std::move(sweep));
        }
        assert(st.total.is_zero());
    }

    Round open_round() const {
        Round r;
        for (int id : continuing())
            r.totals[id] = cand.at(id).total;
        for (int id : newly_elected)
            r.totals[id] = cand.at(id).total;
        Fixed retained;
        for (const auto& [id, st] : cand)
            if (st.status == Status::Elected &&
                std::find(newly_elected.begin(), newly_elected.end(), id) == newly_elected.end())
                retained += st.retained;
        r.retained = retained;
        r.exhausted = exhausted;
        r.truncation_loss = loss;
        return r;
    }

    TabulationRecord run() {
        const int n = static_cast<int>(cand.size());
        for (int guard = 0; guard <= 3 * n + 5; ++guard) {
            Round r = open_round();

            std::vector<int> at_quota;
            for (int id : continuing())
                if (cand[id].total >= quota)
                    at_quota.push_back(id);
            sort_for_declaration(at_quota);

            if (!newly_elected.empty() || !at_quota.empty()) {
                std::vector<int> declared = newly_elected;
                newly_elected.clear();
                for (int id : at_quota)
                    declare_elected(id);
                newly_elected.clear();
                declared.insert(declared.end(), at_quota.begin(), at_quota.end());
                r.event = Round::Event::Elected;
                r.elected = declared;
                if (elected_count() == seats) {
                    rec.rounds.push_back(std::move(r));
                    break;
                }
                // Only this round's declared surpluses transfer now; a
                // candidate pushed over quota by one of them is displayed,
                // and transfers, next round.
                while (true) {
                    int from = pick_pending_surplus(declared, r);
                    if (from < 0)
                        break;
                    transfer_surplus(from, r);
                    check_quota_achievers();
                    if (elected_count() == seats)
                        break;
                }
                rec.rounds.push_back(std::move(r));
                continue;
            }

            std::vector<int> cont = continuing();
            if (elected_count() + static_cast<int>(cont.size()) == seats) {
                sort_for_declaration(cont);
                for (int id : cont)
                    declare_elected_without_quota(id);
                r.event = Round::Event::Elected;
                r.elected = cont;
                r.quota_met = false;
                rec.rounds.push_back(std::move(r));
                break;
            }

            Fixed low;
            bool first = true;
            for (int id : cont) {
                if (first || cand[id].total < low) {
                    low = cand[id].total;
                    first = false;
                }
            }
            std::vector<int> lowest;
            for (int id : cont)
                if (cand[id].total == low)
                    lowest.push_back(id);
            int loser = lowest.size() == 1
                            ? lowest.front()
                            : resolve_tie(std::move(lowest), /*want_min=*/true, r, "exclusion");
            r.event = Round::Event::Eliminated;
            r.eliminated = loser;
            exclude(loser, r);
            rec.rounds.push_back(std::move(r));
        }

        if (elected_count() != seats)
            throw std::logic_error("tabulate: count failed to converge");
        rec.winners = winners;
        rec.final_exhausted = exhausted;
        rec.final_truncation_loss = loss;
        return rec;
    }
};

} // namespace

TieError::TieError(int round, std::vector<int> tied, std::string context)
    : std::runtime_error("unresolved tie at round " + std::to_string(round + 1) +
                         " between candidates " + join_ids(tied) + " (" + context + ")"),
      round_(round),
      tied_(std::move(tied)),
      context_(std::move(context)) {}

bool TabulationRecord::first_round_decided() const {
    return rounds.size() == 1 && rounds.front().quota_met;
}

std::int64_t compute_quota(std::int64_t total_voters, int seats) {
    if (total_voters < 1)
        throw std::invalid_argument("quota: need at least one voter");
    if (seats < 1)
        throw std::invalid_argument("quota: need at least one seat");
    return total_voters / (seats + 1) + 1;
}

TabulationRecord tabulate(const Election& election, TiePolicy policy) {
    Count count(election, policy);
    return count.run();
}

std::map<int, std::set<int>> winner_sets_for_all_seat_counts(const PreferenceProfile& profile,
                                                             int max_seats, TiePolicy policy) {
    std::map<int, std::set<int>> out;
    for (int s = 1; s <= max_seats; ++s)
        out[s] = tabulate(Election::make(profile, s), policy).winner_set();
    return out;
}

} // namespace stv
