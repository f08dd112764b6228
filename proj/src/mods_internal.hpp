#pragma once

#include <algorithm>
#include <vector>

#include "stvcheck/anomaly.hpp"

namespace stv::detail {

inline int position_of(const std::vector<int>& ranking, int id) {
    auto it = std::find(ranking.begin(), ranking.end(), id);
    return it == ranking.end() ? -1 : static_cast<int>(it - ranking.begin());
}

inline bool in_top(const std::vector<int>& ranking, int id, int top) {
    int pos = position_of(ranking, id);
    return pos >= 0 && pos < top;
}

// Weak-order comparison: unranked sits below every ranked candidate.
inline bool ranked_above(const std::vector<int>& ranking, int x, int y) {
    int px = position_of(ranking, x);
    if (px < 0)
        return false;
    int py = position_of(ranking, y);
    return py < 0 || px < py;
}

inline std::vector<int> without(const std::vector<int>& ranking, int id) {
    std::vector<int> out;
    out.reserve(ranking.size());
    for (int c : ranking)
        if (c != id)
            out.push_back(c);
    return out;
}

// Everyone else's relative order must survive the shift.
inline bool same_order_without(const std::vector<int>& a, const std::vector<int>& b, int focal) {
    return without(a, focal) == without(b, focal);
}

// eligible_others: number of eligible candidates outside the result ranking
// (used to decide whether appending an unlisted focal actually raises it).
inline bool valid_shift_up(const std::vector<int>& source, const std::vector<int>& result,
                           int focal, int eligible_total) {
    if (source.empty() || result.empty())
        return false;
    int pr = position_of(result, focal);
    if (pr < 0)
        return false;
    if (!same_order_without(source, result, focal))
        return false;
    int ps = position_of(source, focal);
    if (ps >= 0)
        return pr < ps;

    // Inserting an unlisted focal: strictly higher only if it lands above a
    // ranked candidate or above some other still-unlisted candidate.
    if (pr < static_cast<int>(result.size()) - 1)
        return true;
    return static_cast<int>(result.size()) < eligible_total;
}

inline bool valid_shift_down(const std::vector<int>& source, const std::vector<int>& result,
                             int focal) {
    if (source.empty() || result.empty())
        return false;
    int ps = position_of(source, focal);
    int pr = position_of(result, focal);
    if (ps < 0 || pr < 0)
        return false;
    return same_order_without(source, result, focal) && pr > ps;
}

inline bool valid_bullet_rewrite(const std::vector<int>& source, const std::vector<int>& result,
                                 int focal) {
    if (source.size() != 1 || source[0] != focal)
        return false;
    if (result.size() == 1)
        return result[0] != focal;
    if (result.size() == 2)
        return result[0] != focal && result[1] == focal;
    return false;
}

// Ranking with focal moved (or inserted) so it lands at target_pos.
inline std::vector<int> shift_to_position(const std::vector<int>& source, int focal,
                                          int target_pos) {
    std::vector<int> rest = without(source, focal);
    std::vector<int> out;
    out.reserve(rest.size() + 1);
    for (int i = 0; i < static_cast<int>(rest.size()) + 1; ++i) {
        if (i == target_pos)
            out.push_back(focal);
        if (i < static_cast<int>(rest.size()))
            out.push_back(rest[static_cast<std::size_t>(i)]);
    }
    return out;
}

} // namespace stv::detail
