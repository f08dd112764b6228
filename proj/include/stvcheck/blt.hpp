#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "stvcheck/model.hpp"

namespace stv {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& origin, int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

// One parsed ballot file: the election plus provenance. The content hash is
// what certificates reference.
struct BallotFile {
    Election election;
    std::string title;
    std::string origin;                         // path or "<memory>"
    std::string sha256;                         // hex digest of the raw bytes
    std::map<std::string, std::string> metadata; // sidecar manifest, if any
};

// Grammar: header "candidates seats"; optional withdrawal lines of negative
// ids; ballot lines "count pref1 pref2 ... 0"; a lone "0"; one quoted name
// per candidate (trailing parenthetical taken as party); a quoted title.
// Whitespace-lenient, CRLF tolerant. Throws ParseError with a line number.
BallotFile parse_blt(const std::string& content, const std::string& origin = "<memory>");

// Reads, hashes, and parses; merges <path>.manifest.json metadata when that
// sidecar exists.
BallotFile parse_blt_file(const std::filesystem::path& path);

// Canonical writer: canonical ballot order, withdrawals listed, names with
// party parentheticals. parse_blt(serialize_blt(e)) == canonical e.
std::string serialize_blt(const Election& election, const std::string& title);

// Hash of the canonical serialization; stable identity for in-memory
// elections.
std::string canonical_hash(const Election& election, const std::string& title);

std::string sha256_hex(const std::string& bytes);

struct CorpusStats {
    std::int64_t voters = 0;
    int candidates = 0;
    int seats = 0;
    double mean_ballot_length = 0.0;
    double median_ballot_length = 0.0;
};

CorpusStats descriptive_stats(const Election& election);

} // namespace stv
