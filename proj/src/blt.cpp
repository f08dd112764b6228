#include "stvcheck/blt.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

namespace stv {

namespace {

std::vector<std::string> split_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : content) {
        if (c == '\n') {
            if (!current.empty() && current.back() == '\r')
                current.pop_back();
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty() && current.back() == '\r')
        current.pop_back();
    lines.push_back(std::move(current));
    return lines;
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> toks;
    std::string t;
    while (in >> t)
        toks.push_back(std::move(t));
    return toks;
}

std::int64_t parse_int(const std::string& tok, const std::string& origin, int line) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(origin, line, "expected an integer, got '" + tok + "'");
    return value;
}

// "Jane Doe (Example Party)" -> name "Jane Doe", party "Example Party".
void split_party(const std::string& full, std::string& name, std::string& party) {
    name = full;
    party.clear();
    if (full.empty() || full.back() != ')')
        return;
    std::size_t open = full.rfind('(');
    if (open == std::string::npos || open == 0)
        return;
    party = full.substr(open + 1, full.size() - open - 2);
    name = full.substr(0, open);
    while (!name.empty() && name.back() == ' ')
        name.pop_back();
    if (name.empty()) {
        name = full;
        party.clear();
    }
}

std::string unquote(const std::string& line, const std::string& origin, int lineno) {
    std::size_t first = line.find('"');
    std::size_t last = line.rfind('"');
    if (first == std::string::npos || last == first)
        throw ParseError(origin, lineno, "expected a quoted string");
    return line.substr(first + 1, last - first - 1);
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

} // namespace

ParseError::ParseError(const std::string& origin, int line, const std::string& message)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + message), line_(line) {}

BallotFile parse_blt(const std::string& content, const std::string& origin) {
    std::vector<std::string> lines = split_lines(content);

    // Walk over non-blank lines, carrying original numbers for errors.
    std::vector<std::pair<int, std::string>> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!tokens_of(lines[i]).empty() || lines[i].find('"') != std::string::npos)
            if (!lines[i].empty() &&
                lines[i].find_first_not_of(" \t") != std::string::npos)
                rows.emplace_back(static_cast<int>(i) + 1, lines[i]);
    }
    std::size_t at = 0;
    auto need_row = [&](const char* what) -> const std::pair<int, std::string>& {
        if (at >= rows.size())
            throw ParseError(origin, static_cast<int>(lines.size()), std::string("unexpected end of file, expected ") + what);
        return rows[at];
    };

    const auto& [header_line, header] = need_row("header");
    auto header_toks = tokens_of(header);
    if (header_toks.size() != 2)
        throw ParseError(origin, header_line, "header must be 'candidates seats'");
    std::int64_t n = parse_int(header_toks[0], origin, header_line);
    std::int64_t seats = parse_int(header_toks[1], origin, header_line);
    if (n < 1 || n > 1000)
        throw ParseError(origin, header_line, "candidate count out of range");
    if (seats < 1)
        throw ParseError(origin, header_line, "seat count must be positive");
    ++at;

    // Withdrawal lines: every token negative.
    std::vector<bool> withdrawn(static_cast<std::size_t>(n) + 1, false);
    while (at < rows.size()) {
        const auto& [lineno, row] = rows[at];
        auto toks = tokens_of(row);
        if (toks.empty() || toks[0][0] != '-')
            break;
        for (const auto& t : toks) {
            std::int64_t v = parse_int(t, origin, lineno);
            if (v >= 0)
                throw ParseError(origin, lineno, "withdrawal lines must contain negative ids only");
            std::int64_t id = -v;
            if (id < 1 || id > n)
                throw ParseError(origin, lineno, "withdrawn candidate " + std::to_string(id) + " out of range");
            withdrawn[static_cast<std::size_t>(id)] = true;
        }
        ++at;
    }

    // Ballot lines up to the lone zero.
    std::vector<BallotType> ballots;
    bool terminated = false;
    while (at < rows.size()) {
        const auto& [lineno, row] = rows[at];
        auto toks = tokens_of(row);
        if (toks.size() == 1 && toks[0] == "0") {
            terminated = true;
            ++at;
            break;
        }
        if (toks.size() < 2)
            throw ParseError(origin, lineno, "ballot line must be 'count preferences... 0'");
        std::int64_t count = parse_int(toks[0], origin, lineno);
        if (count < 1)
            throw ParseError(origin, lineno, "ballot count must be positive");
        if (toks.back() != "0")
            throw ParseError(origin, lineno, "ballot line must end with 0");
        std::vector<int> ranking;
        std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
        for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
            std::int64_t id = parse_int(toks[i], origin, lineno);
            if (id < 1 || id > n)
                throw ParseError(origin, lineno, "candidate " + std::to_string(id) + " out of range");
            if (seen[static_cast<std::size_t>(id)])
                throw ParseError(origin, lineno,
                                 "candidate " + std::to_string(id) + " repeated in ranking");
            seen[static_cast<std::size_t>(id)] = true;
            if (!withdrawn[static_cast<std::size_t>(id)])
                ranking.push_back(static_cast<int>(id));
        }
        if (toks.size() == 2)
            throw ParseError(origin, lineno, "empty ranking");
        // A ballot listing only withdrawn candidates carries no preference.
        if (!ranking.empty())
            ballots.push_back(BallotType{std::move(ranking), count});
        ++at;
    }
    if (!terminated)
        throw ParseError(origin, static_cast<int>(lines.size()), "missing '0' terminator");
    if (ballots.empty())
        throw ParseError(origin, static_cast<int>(lines.size()), "no voters");

    std::vector<Candidate> roster;
    for (std::int64_t id = 1; id <= n; ++id) {
        const auto& [lineno, row] = need_row("candidate name");
        Candidate c;
        c.id = static_cast<int>(id);
        std::string full = unquote(row, origin, lineno);
        split_party(full, c.name, c.party);
        if (c.name.empty())
            throw ParseError(origin, lineno, "empty candidate name");
        c.withdrawn = withdrawn[static_cast<std::size_t>(id)];
        roster.push_back(std::move(c));
        ++at;
    }

    const auto& [title_line, title_row] = need_row("title");
    std::string title = unquote(title_row, origin, title_line);
    ++at;

    BallotFile bf;
    try {
        bf.election = Election::make(PreferenceProfile::canonical(std::move(roster), std::move(ballots)),
                                     static_cast<int>(seats));
    } catch (const std::invalid_argument& e) {
        throw ParseError(origin, header_line, e.what());
    }
    bf.title = std::move(title);
    bf.origin = origin;
    bf.sha256 = sha256_hex(content);
    return bf;
}

BallotFile parse_blt_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(path.string(), 0, "cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    BallotFile bf = parse_blt(buffer.str(), path.string());

    std::filesystem::path sidecar = path;
    sidecar += ".manifest.json";
    if (std::filesystem::exists(sidecar)) {
        std::ifstream min(sidecar);
        nlohmann::json j;
        try {
            min >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(sidecar.string(), 0, std::string("bad manifest: ") + e.what());
        }
        if (!j.is_object())
            throw ParseError(sidecar.string(), 0, "manifest must be a JSON object");
        for (const auto& [key, value] : j.items())
            if (value.is_string())
                bf.metadata[key] = value.get<std::string>();
    }
    return bf;
}

std::string serialize_blt(const Election& election, const std::string& title) {
    const auto& profile = election.profile;
    std::ostringstream out;
    out << profile.num_candidates() << " " << election.seats << "\n";
    for (const auto& c : profile.roster())
        if (c.withdrawn)
            out << "-" << c.id << "\n";
    for (const auto& b : profile.ballots()) {
        out << b.count;
        for (int id : b.ranking)
            out << " " << id;
        out << " 0\n";
    }
    out << "0\n";
    for (const auto& c : profile.roster()) {
        if (c.party.empty())
            out << quote(c.name) << "\n";
        else
            out << quote(c.name + " (" + c.party + ")") << "\n";
    }
    out << quote(title) << "\n";
    return out.str();
}

std::string canonical_hash(const Election& election, const std::string& title) {
    return sha256_hex(serialize_blt(election, title));
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

CorpusStats descriptive_stats(const Election& election) {
    const auto& profile = election.profile;
    CorpusStats s;
    s.voters = profile.total_voters();
    s.candidates = static_cast<int>(profile.eligible_ids().size());
    s.seats = election.seats;

    std::int64_t rankings = 0;
    std::vector<std::pair<std::size_t, std::int64_t>> lengths; // (length, count)
    for (const auto& b : profile.ballots()) {
        rankings += static_cast<std::int64_t>(b.ranking.size()) * b.count;
        lengths.emplace_back(b.ranking.size(), b.count);
    }
    s.mean_ballot_length = s.voters ? static_cast<double>(rankings) / static_cast<double>(s.voters) : 0.0;

    std::sort(lengths.begin(), lengths.end());
    auto length_at = [&](std::int64_t index) -> double {
        std::int64_t seen = 0;
        for (const auto& [len, count] : lengths) {
            seen += count;
            if (index < seen)
                return static_cast<double>(len);
        }
        return 0.0;
    };
    if (s.voters > 0) {
        if (s.voters % 2 == 1)
            s.median_ballot_length = length_at(s.voters / 2);
        else
            s.median_ballot_length =
                (length_at(s.voters / 2 - 1) + length_at(s.voters / 2)) / 2.0;
    }
    return s;
}

} // namespace stv
