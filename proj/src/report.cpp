#include "stvcheck/report.hpp"

#include <algorithm>
#include <sstream>

namespace stv {

namespace {

enum class CellState { Active, ElectedNow, EliminatedNow, Out };

// What the count sheet shows for candidate id in this round.
std::pair<CellState, std::string> cell(const Round& round, int id) {
    auto it = round.totals.find(id);
    if (it == round.totals.end())
        return {CellState::Out, "-"};
    std::string value = it->second.str();
    if (std::find(round.elected.begin(), round.elected.end(), id) != round.elected.end())
        return {CellState::ElectedNow, value + "*"};
    if (round.event == Round::Event::Eliminated && round.eliminated == id)
        return {CellState::EliminatedNow, value + "x"};
    return {CellState::Active, value};
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string votes_by_round_table(const PreferenceProfile& profile,
                                 const TabulationRecord& record) {
    const std::size_t rounds = record.rounds.size();
    std::vector<std::vector<std::string>> grid;

    std::vector<std::string> header{"candidate"};
    for (std::size_t r = 0; r < rounds; ++r)
        header.push_back("R" + std::to_string(r + 1));
    grid.push_back(std::move(header));

    for (int id : profile.eligible_ids()) {
        std::vector<std::string> row{profile.candidate(id).name};
        for (const auto& round : record.rounds)
            row.push_back(cell(round, id).second);
        grid.push_back(std::move(row));
    }
    {
        std::vector<std::string> row{"exhausted"};
        for (const auto& round : record.rounds)
            row.push_back(round.exhausted.str());
        grid.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(rounds + 1, 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    out << "quota " << record.quota.str() << ", " << record.seats
        << (record.seats == 1 ? " seat, " : " seats, ") << record.total_voters << " ballots\n";
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == 0) {
                out << row[c] << std::string(widths[c] - row[c].size(), ' ');
            } else {
                out << "  " << std::string(widths[c] - row[c].size(), ' ') << row[c];
            }
        }
        out << '\n';
    }

    out << "elected:";
    for (std::size_t i = 0; i < record.winners.size(); ++i)
        out << (i ? ", " : " ") << profile.candidate(record.winners[i]).name;
    out << '\n';
    if (record.any_tie_broken)
        out << "note: a tie was broken by candidate order\n";
    return out.str();
}

std::string votes_by_round_csv(const PreferenceProfile& profile, const TabulationRecord& record) {
    std::ostringstream out;
    out << "candidate,party";
    for (std::size_t r = 0; r < record.rounds.size(); ++r)
        out << ",r" << (r + 1);
    out << ",result\n";

    for (int id : profile.eligible_ids()) {
        const Candidate& c = profile.candidate(id);
        out << csv_quote(c.name) << ',' << csv_quote(c.party);
        std::string result = "defeated";
        for (std::size_t r = 0; r < record.rounds.size(); ++r) {
            const Round& round = record.rounds[r];
            auto it = round.totals.find(id);
            out << ',' << (it == round.totals.end() ? "" : it->second.str());
            if (std::find(round.elected.begin(), round.elected.end(), id) != round.elected.end())
                result = "elected r" + std::to_string(r + 1);
            else if (round.event == Round::Event::Eliminated && round.eliminated == id)
                result = "excluded r" + std::to_string(r + 1);
        }
        out << ',' << result << '\n';
    }
    out << "exhausted,";
    for (const auto& round : record.rounds)
        out << ',' << round.exhausted.str();
    out << ",\ntruncation_loss,";
    for (const auto& round : record.rounds)
        out << ',' << round.truncation_loss.str();
    out << ",\n";
    return out.str();
}

nlohmann::ordered_json record_to_json(const PreferenceProfile& profile,
                                      const TabulationRecord& record) {
    nlohmann::ordered_json j;
    j["seats"] = record.seats;
    j["total_voters"] = record.total_voters;
    j["quota"] = record.quota.str();
    j["winners"] = nlohmann::ordered_json::array();
    for (int id : record.winners)
        j["winners"].push_back(
            nlohmann::ordered_json{{"id", id}, {"name", profile.candidate(id).name}});
    j["rounds"] = nlohmann::ordered_json::array();
    for (const auto& round : record.rounds) {
        nlohmann::ordered_json rj;
        rj["totals"] = nlohmann::ordered_json::object();
        for (const auto& [id, total] : round.totals)
            rj["totals"][std::to_string(id)] = total.str();
        rj["event"] = round.event == Round::Event::Elected ? "elected" : "eliminated";
        if (round.event == Round::Event::Elected)
            rj["elected"] = round.elected;
        else
            rj["eliminated"] = round.eliminated;
        rj["quota_met"] = round.quota_met;
        rj["exhausted"] = round.exhausted.str();
        rj["truncation_loss"] = round.truncation_loss.str();
        if (round.tie_broken_by_index)
            rj["tie_broken_by_index"] = true;
        j["rounds"].push_back(std::move(rj));
    }
    j["final_exhausted"] = record.final_exhausted.str();
    j["final_truncation_loss"] = record.final_truncation_loss.str();
    j["any_tie_broken"] = record.any_tie_broken;
    return j;
}

AnomalySummaryRow summarize_anomalies(const std::string& name,
                                      const std::vector<AnomalyCertificate>& certs,
                                      bool truncated) {
    AnomalySummaryRow row;
    row.name = name;
    row.truncated = truncated;
    bool any_noshow = false, all_noshow_ambiguous = true;
    for (const auto& cert : certs) {
        switch (cert.kind) {
        case AnomalyKind::CommitteeSize:
            row.committee_size = true;
            break;
        case AnomalyKind::Upward:
            row.upward = true;
            break;
        case AnomalyKind::DownwardStrong:
            row.downward_strong = true;
            break;
        case AnomalyKind::DownwardWeak:
            row.downward_weak = true;
            break;
        case AnomalyKind::NoShow:
            any_noshow = true;
            if (!cert.flags.count(CertFlag::AmbiguousNoShow))
                all_noshow_ambiguous = false;
            break;
        }
    }
    row.no_show = any_noshow;
    row.no_show_ambiguous_only = any_noshow && all_noshow_ambiguous;
    return row;
}

namespace {

std::string downward_cell(const AnomalySummaryRow& r) {
    if (r.downward_strong && r.downward_weak)
        return "S+W";
    if (r.downward_strong)
        return "S";
    if (r.downward_weak)
        return "W";
    return "no";
}

std::string noshow_cell(const AnomalySummaryRow& r) {
    if (!r.no_show)
        return "no";
    return r.no_show_ambiguous_only ? "yes+" : "yes";
}

} // namespace

std::string anomaly_matrix(const std::vector<AnomalySummaryRow>& rows) {
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"election", "comm.size", "upward", "downward", "no-show", "truncated"});
    for (const auto& r : rows)
        grid.push_back({r.name, r.committee_size ? "yes" : "no", r.upward ? "yes" : "no",
                        downward_cell(r), noshow_cell(r), r.truncated ? "yes" : ""});

    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    std::ostringstream out;
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "  " : "") << row[c]
                << std::string(c + 1 < row.size() ? widths[c] - row[c].size() : 0, ' ');
        out << '\n';
    }
    out << "(downward: S strong, W weak; no-show yes+ = only ambiguous certificates)\n";
    return out.str();
}

std::string anomaly_matrix_csv(const std::vector<AnomalySummaryRow>& rows) {
    std::ostringstream out;
    out << "election,committee_size,upward,downward_strong,downward_weak,no_show,"
           "no_show_ambiguous_only,truncated\n";
    auto b = [](bool v) { return v ? "1" : "0"; };
    for (const auto& r : rows)
        out << csv_quote(r.name) << ',' << b(r.committee_size) << ',' << b(r.upward) << ','
            << b(r.downward_strong) << ',' << b(r.downward_weak) << ',' << b(r.no_show) << ','
            << b(r.no_show_ambiguous_only) << ',' << b(r.truncated) << '\n';
    return out.str();
}

} // namespace stv
