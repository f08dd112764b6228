// stvcheck: tabulate ranked-ballot elections under the Scottish STV rules
// and audit them for monotonicity anomalies.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stvcheck/anomaly.hpp"
#include "stvcheck/blt.hpp"
#include "stvcheck/closeness.hpp"
#include "stvcheck/engine.hpp"
#include "stvcheck/report.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitTie = 3;

struct CommonOpts {
    std::vector<std::string> inputs;
    int seats = 0; // 0 = use the file header
    std::string tie_policy = "fail";
    std::string format = "table";
    std::string out_dir;
    unsigned jobs = 0;
};

stv::TiePolicy tie_policy_of(const CommonOpts& o) {
    return o.tie_policy == "index" ? stv::TiePolicy::Index : stv::TiePolicy::Fail;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_format = true) {
    cmd->add_option("inputs", o.inputs, "ballot files or directories of .blt files")
        ->required()
        ->expected(-1);
    cmd->add_option("--seats", o.seats, "override the seat count from the file header")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tie-policy", o.tie_policy, "fail | index (default fail)")
        ->check(CLI::IsMember({"fail", "index"}));
    if (with_format)
        cmd->add_option("--format", o.format, "table | csv | json (default table)")
            ->check(CLI::IsMember({"table", "csv", "json"}));
    cmd->add_option("--out", o.out_dir, "directory for generated files (default stdout)");
    cmd->add_option("--jobs", o.jobs, "worker threads (default: hardware)");
}

// Expands directories (one level, *.blt), sorts, parses. Parse failures are
// reported and dropped; the run continues with what loads.
struct LoadedCorpus {
    std::vector<stv::BallotFile> files;
    bool had_parse_errors = false;
};

LoadedCorpus load_corpus(const std::vector<std::string>& inputs, int seats_override) {
    LoadedCorpus corpus;
    std::vector<fs::path> paths;
    for (const auto& input : inputs) {
        fs::path p(input);
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".blt")
                    paths.push_back(entry.path());
            }
        } else if (fs::is_regular_file(p, ec)) {
            paths.push_back(p);
        } else {
            std::cerr << "error: " << input << ": no such file or directory\n";
            corpus.had_parse_errors = true;
        }
    }
    std::sort(paths.begin(), paths.end());
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());

    for (const auto& path : paths) {
        try {
            stv::BallotFile file = stv::parse_blt_file(path);
            if (seats_override > 0)
                file.election = stv::Election::make(file.election.profile, seats_override);
            corpus.files.push_back(std::move(file));
        } catch (const stv::ParseError& e) {
            std::cerr << "error: " << e.what() << '\n';
            corpus.had_parse_errors = true;
        } catch (const std::exception& e) {
            std::cerr << "error: " << path.string() << ": " << e.what() << '\n';
            corpus.had_parse_errors = true;
        }
    }
    return corpus;
}

std::string stem_of(const stv::BallotFile& file) {
    return fs::path(file.origin).stem().string();
}

// Deterministic pool: workers pull indices, results land in slots, callers
// consume in input order.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn fn) {
    if (jobs == 0) {
        jobs = std::thread::hardware_concurrency();
        if (jobs == 0)
            jobs = 1;
    }
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) {
        threads.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    }
    for (auto& th : threads)
        th.join();
}

bool write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        std::cerr << "error: cannot write " << path.string() << '\n';
        return false;
    }
    return true;
}

std::optional<fs::path> prepare_out_dir(const std::string& out_dir) {
    if (out_dir.empty())
        return std::nullopt;
    fs::path p(out_dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) {
        std::cerr << "error: cannot create " << p.string() << ": " << ec.message() << '\n';
        return std::nullopt;
    }
    return p;
}

// ---------------------------------------------------------------------------
// tabulate

int cmd_tabulate(const CommonOpts& opts) {
    LoadedCorpus corpus = load_corpus(opts.inputs, opts.seats);
    stv::TiePolicy policy = tie_policy_of(opts);

    struct Slot {
        std::optional<stv::TabulationRecord> record;
        std::string error;
        bool tie = false;
    };
    std::vector<Slot> slots(corpus.files.size());
    parallel_for(corpus.files.size(), opts.jobs, [&](std::size_t i) {
        try {
            slots[i].record = stv::tabulate(corpus.files[i].election, policy);
        } catch (const stv::TieError& e) {
            slots[i].tie = true;
            slots[i].error = e.what();
        } catch (const std::exception& e) {
            slots[i].error = e.what();
        }
    });

    auto out_dir = prepare_out_dir(opts.out_dir);
    int exit_code = corpus.had_parse_errors ? kExitParse : kExitOk;
    for (std::size_t i = 0; i < corpus.files.size(); ++i) {
        const auto& file = corpus.files[i];
        if (!slots[i].record) {
            std::cerr << "error: " << file.origin << ": " << slots[i].error << '\n';
            exit_code = std::max(exit_code, slots[i].tie ? kExitTie : kExitParse);
            continue;
        }
        const auto& record = *slots[i].record;
        const auto& profile = file.election.profile;
        std::string rendered;
        std::string ext;
        if (opts.format == "csv") {
            rendered = stv::votes_by_round_csv(profile, record);
            ext = ".rounds.csv";
        } else if (opts.format == "json") {
            rendered = stv::record_to_json(profile, record).dump(2) + "\n";
            ext = ".rounds.json";
        } else {
            rendered = stv::votes_by_round_table(profile, record);
            ext = ".rounds.txt";
        }
        if (out_dir) {
            if (!write_file(*out_dir / (stem_of(file) + ext), rendered))
                exit_code = std::max(exit_code, kExitParse);
        } else {
            std::cout << "== " << file.origin << " ==\n" << rendered << '\n';
        }
    }
    return exit_code;
}

// ---------------------------------------------------------------------------
// anomalies

struct KindSelection {
    bool committee = true;
    bool upward = true;
    bool downward = true;
    bool noshow = true;
};

KindSelection parse_kinds(const std::vector<std::string>& kinds) {
    if (kinds.empty())
        return {};
    KindSelection sel{false, false, false, false};
    for (const auto& k : kinds) {
        if (k == "committee")
            sel.committee = true;
        else if (k == "upward")
            sel.upward = true;
        else if (k == "downward")
            sel.downward = true;
        else if (k == "noshow")
            sel.noshow = true;
    }
    return sel;
}

struct AnomalySlot {
    std::vector<stv::AnomalyCertificate> certs;
    std::uint64_t probes = 0;
    bool truncated = false;
    bool tie = false;
    std::string error;
};

AnomalySlot run_searches(const stv::BallotFile& file, const KindSelection& sel,
                         const stv::SearchBudget& budget, stv::TiePolicy policy) {
    AnomalySlot slot;
    try {
        if (sel.committee) {
            auto certs = stv::check_committee_size(file.election, policy);
            slot.certs.insert(slot.certs.end(), certs.begin(), certs.end());
        }
        auto absorb = [&](stv::SearchOutcome outcome) {
            slot.probes += outcome.probes_used;
            slot.truncated = slot.truncated || outcome.truncated;
            slot.certs.insert(slot.certs.end(), outcome.certificates.begin(),
                              outcome.certificates.end());
        };
        if (sel.upward)
            absorb(stv::search_upward(file.election, budget, policy));
        if (sel.downward)
            absorb(stv::search_downward(file.election, budget, policy));
        if (sel.noshow)
            absorb(stv::search_no_show(file.election, budget, policy));
        for (auto& cert : slot.certs)
            cert.election_hash = file.sha256;
    } catch (const stv::TieError& e) {
        slot.tie = true;
        slot.error = e.what();
    } catch (const std::exception& e) {
        slot.error = e.what();
    }
    return slot;
}

std::string cert_filename(const std::string& stem, const stv::AnomalyCertificate& cert) {
    std::string name = stem + "." + stv::to_string(cert.kind) + "." + std::to_string(cert.focal);
    if (cert.kind == stv::AnomalyKind::NoShow)
        name += "." + std::to_string(cert.displaced);
    return name + ".cert.json";
}

int cmd_anomalies(const CommonOpts& opts, const std::vector<std::string>& kinds,
                  std::uint64_t budget_probes, double budget_seconds) {
    LoadedCorpus corpus = load_corpus(opts.inputs, opts.seats);
    stv::TiePolicy policy = tie_policy_of(opts);
    KindSelection sel = parse_kinds(kinds);
    stv::SearchBudget budget{budget_probes, budget_seconds};

    std::vector<AnomalySlot> slots(corpus.files.size());
    parallel_for(corpus.files.size(), opts.jobs, [&](std::size_t i) {
        slots[i] = run_searches(corpus.files[i], sel, budget, policy);
    });

    auto out_dir = prepare_out_dir(opts.out_dir);
    int exit_code = corpus.had_parse_errors ? kExitParse : kExitOk;
    std::vector<stv::AnomalySummaryRow> rows;
    for (std::size_t i = 0; i < corpus.files.size(); ++i) {
        const auto& file = corpus.files[i];
        auto& slot = slots[i];
        if (!slot.error.empty()) {
            std::cerr << "error: " << file.origin << ": " << slot.error << '\n';
            exit_code = std::max(exit_code, slot.tie ? kExitTie : kExitParse);
            continue;
        }
        rows.push_back(stv::summarize_anomalies(stem_of(file), slot.certs, slot.truncated));
        if (out_dir) {
            for (const auto& cert : slot.certs) {
                auto j = stv::certificate_to_json(cert, file.election.profile, file.title);
                if (!write_file(*out_dir / cert_filename(stem_of(file), cert), j.dump(2) + "\n"))
                    exit_code = std::max(exit_code, kExitParse);
            }
        }
    }

    std::string summary = opts.format == "csv" ? stv::anomaly_matrix_csv(rows)
                                               : stv::anomaly_matrix(rows);
    std::cout << summary;
    if (out_dir)
        write_file(*out_dir / "anomaly_summary.csv", stv::anomaly_matrix_csv(rows));
    return exit_code;
}

// ---------------------------------------------------------------------------
// closeness

int cmd_closeness(const CommonOpts& opts, std::uint64_t budget_probes, double budget_seconds) {
    LoadedCorpus corpus = load_corpus(opts.inputs, opts.seats);
    stv::TiePolicy policy = tie_policy_of(opts);
    stv::SearchBudget budget{budget_probes, budget_seconds};

    struct Slot {
        std::optional<stv::CorpusElectionResult> result;
        bool tie = false;
        std::string error;
    };
    std::vector<Slot> slots(corpus.files.size());
    parallel_for(corpus.files.size(), opts.jobs, [&](std::size_t i) {
        const auto& file = corpus.files[i];
        try {
            stv::TabulationRecord record = stv::tabulate(file.election, policy);
            stv::CorpusElectionResult result;
            result.name = stem_of(file);
            result.report =
                stv::build_closeness_report(file.election, record, result.name, policy);
            AnomalySlot anomalies = run_searches(file, KindSelection{}, budget, policy);
            if (!anomalies.error.empty())
                throw std::runtime_error(anomalies.error);
            for (const auto& cert : anomalies.certs) {
                result.any_anomaly = true;
                if (cert.kind != stv::AnomalyKind::CommitteeSize)
                    result.non_committee_anomaly = true;
            }
            slots[i].result = std::move(result);
        } catch (const stv::TieError& e) {
            slots[i].tie = true;
            slots[i].error = e.what();
        } catch (const std::exception& e) {
            slots[i].error = e.what();
        }
    });

    auto out_dir = prepare_out_dir(opts.out_dir);
    int exit_code = corpus.had_parse_errors ? kExitParse : kExitOk;
    std::vector<stv::CorpusElectionResult> results;
    for (std::size_t i = 0; i < corpus.files.size(); ++i) {
        if (!slots[i].result) {
            std::cerr << "error: " << corpus.files[i].origin << ": " << slots[i].error << '\n';
            exit_code = std::max(exit_code, slots[i].tie ? kExitTie : kExitParse);
            continue;
        }
        results.push_back(std::move(*slots[i].result));
    }

    auto id_list = [](const std::set<int>& ids) {
        std::string s;
        for (int id : ids)
            s += (s.empty() ? "" : " ") + std::to_string(id);
        return s;
    };
    std::ostringstream rows;
    rows << "election,first_round_terminated,three_close_p50,three_close_p75,three_close_p95,"
            "two_close_p50,two_close_p75,two_close_p95,condorcet_committee,sntv_winners,"
            "methods_agree,any_anomaly,non_committee_anomaly\n";
    std::int64_t no_committee = 0;
    for (const auto& r : results) {
        const auto& rep = r.report;
        if (!rep.condorcet)
            ++no_committee;
        rows << r.name << ',' << (rep.first_round_terminated ? 1 : 0) << ','
             << rep.three_close.at(50) << ',' << rep.three_close.at(75) << ','
             << rep.three_close.at(95) << ',' << rep.two_close.at(50) << ','
             << rep.two_close.at(75) << ',' << rep.two_close.at(95) << ','
             << (rep.condorcet ? id_list(*rep.condorcet) : std::string("none")) << ','
             << id_list(rep.sntv) << ',' << (rep.methods_agree ? 1 : 0) << ','
             << (r.any_anomaly ? 1 : 0) << ',' << (r.non_committee_anomaly ? 1 : 0) << '\n';
    }

    struct SeriesSpec {
        const char* file;
        bool three;
        bool excl;
    };
    const SeriesSpec specs[] = {
        {"series_three_any.csv", true, false},
        {"series_three_excl_committee.csv", true, true},
        {"series_two_any.csv", false, false},
        {"series_two_excl_committee.csv", false, true},
    };
    if (out_dir) {
        write_file(*out_dir / "closeness_reports.csv", rows.str());
        for (const auto& spec : specs)
            write_file(*out_dir / spec.file,
                       stv::series_to_csv(stv::closeness_series(results, spec.three, spec.excl)));
        std::cout << "elections: " << results.size()
                  << ", without a condorcet committee: " << no_committee << '\n';
    } else {
        std::cout << rows.str();
        for (const auto& spec : specs) {
            std::cout << "\n# " << spec.file << '\n'
                      << stv::series_to_csv(stv::closeness_series(results, spec.three, spec.excl));
        }
        std::cout << "\nelections: " << results.size()
                  << ", without a condorcet committee: " << no_committee << '\n';
    }
    return exit_code;
}

// ---------------------------------------------------------------------------
// stats

int cmd_stats(const CommonOpts& opts) {
    LoadedCorpus corpus = load_corpus(opts.inputs, opts.seats);
    int exit_code = corpus.had_parse_errors ? kExitParse : kExitOk;

    std::ostringstream rows;
    rows << "election,voters,candidates,seats,mean_ballot_length,median_ballot_length\n";
    struct Agg {
        std::int64_t elections = 0;
        std::int64_t voters = 0;
        std::int64_t rankings = 0;
    };
    std::map<int, Agg> by_seats, by_candidates;
    for (const auto& file : corpus.files) {
        stv::CorpusStats stats = stv::descriptive_stats(file.election);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4f,%.1f", stats.mean_ballot_length,
                      stats.median_ballot_length);
        rows << stem_of(file) << ',' << stats.voters << ',' << stats.candidates << ','
             << stats.seats << ',' << buf << '\n';
        std::int64_t rankings = 0;
        for (const auto& b : file.election.profile.ballots())
            rankings += b.count * static_cast<std::int64_t>(b.ranking.size());
        for (auto* agg : {&by_seats[stats.seats], &by_candidates[stats.candidates]}) {
            agg->elections += 1;
            agg->voters += stats.voters;
            agg->rankings += rankings;
        }
    }
    auto agg_csv = [](const std::map<int, Agg>& m, const char* key) {
        std::ostringstream out;
        out << key << ",elections,mean_ballot_length\n";
        for (const auto& [k, agg] : m) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4f",
                          agg.voters ? static_cast<double>(agg.rankings) /
                                           static_cast<double>(agg.voters)
                                     : 0.0);
            out << k << ',' << agg.elections << ',' << buf << '\n';
        }
        return out.str();
    };

    auto out_dir = prepare_out_dir(opts.out_dir);
    if (out_dir) {
        write_file(*out_dir / "election_stats.csv", rows.str());
        write_file(*out_dir / "stats_by_seats.csv", agg_csv(by_seats, "seats"));
        write_file(*out_dir / "stats_by_candidates.csv", agg_csv(by_candidates, "candidates"));
    } else {
        std::cout << rows.str() << "\n# by seats\n" << agg_csv(by_seats, "seats")
                  << "\n# by candidates\n" << agg_csv(by_candidates, "candidates");
    }
    return exit_code;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& ballot_path, const std::vector<std::string>& cert_paths,
               const std::string& tie_policy) {
    stv::BallotFile file;
    try {
        file = stv::parse_blt_file(ballot_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    }
    stv::TiePolicy policy = tie_policy == "index" ? stv::TiePolicy::Index : stv::TiePolicy::Fail;

    int exit_code = kExitOk;
    for (const auto& cert_path : cert_paths) {
        std::ifstream in(cert_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot read " << cert_path << '\n';
            exit_code = std::max(exit_code, kExitParse);
            continue;
        }
        std::string reason;
        bool ok = false;
        try {
            nlohmann::json j = nlohmann::json::parse(in);
            stv::AnomalyCertificate cert = stv::certificate_from_json(j);
            if (!cert.election_hash.empty() && cert.election_hash != file.sha256) {
                reason = "certificate references a different ballot file (hash mismatch)";
            } else {
                stv::Election election =
                    cert.seats == file.election.seats
                        ? file.election
                        : stv::Election::make(file.election.profile, cert.seats);
                stv::VerifyResult vr = stv::verify_certificate(election, cert, policy);
                ok = vr.ok;
                reason = vr.reason;
            }
        } catch (const std::exception& e) {
            reason = e.what();
        }
        if (ok) {
            std::cout << "OK " << cert_path << '\n';
        } else {
            std::cout << "REJECTED " << cert_path << ": " << reason << '\n';
            exit_code = std::max(exit_code, kExitUsage);
        }
    }
    return exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stvcheck: Scottish STV tabulation and monotonicity-anomaly audit"};
    app.require_subcommand(1);

    CommonOpts tab_opts;
    CLI::App* tab = app.add_subcommand("tabulate", "print votes-by-round tables");
    add_common(tab, tab_opts);

    CommonOpts anom_opts;
    std::vector<std::string> kinds;
    std::uint64_t budget_probes = 1000000;
    double budget_seconds = 0.0;
    CLI::App* anom = app.add_subcommand("anomalies", "search for anomalies, emit certificates");
    add_common(anom, anom_opts);
    anom->add_option("--kinds", kinds,
                     "comma-separated subset of committee,upward,downward,noshow")
        ->delimiter(',')
        ->check(CLI::IsMember({"committee", "upward", "downward", "noshow"}));
    anom->add_option("--budget-probes", budget_probes, "probe cap per search (default 1000000)")
        ->check(CLI::PositiveNumber);
    anom->add_option("--budget-seconds", budget_seconds,
                     "wall-clock cap per search, 0 = none (default 0)");

    CommonOpts close_opts;
    std::uint64_t close_probes = 1000000;
    double close_seconds = 0.0;
    CLI::App* close = app.add_subcommand("closeness", "closeness metrics and anomaly-rate series");
    add_common(close, close_opts, false);
    close->add_option("--budget-probes", close_probes, "probe cap per search (default 1000000)")
        ->check(CLI::PositiveNumber);
    close->add_option("--budget-seconds", close_seconds,
                      "wall-clock cap per search, 0 = none (default 0)");

    CommonOpts stats_opts;
    CLI::App* stats = app.add_subcommand("stats", "descriptive ballot statistics");
    add_common(stats, stats_opts, false);

    std::string verify_ballot;
    std::vector<std::string> verify_certs;
    std::string verify_policy = "fail";
    CLI::App* verify = app.add_subcommand("verify", "replay anomaly certificates against a file");
    verify->add_option("ballot", verify_ballot, "the .blt file the certificates reference")
        ->required();
    verify->add_option("certificates", verify_certs, "certificate JSON files")
        ->required()
        ->expected(-1);
    verify->add_option("--tie-policy", verify_policy, "fail | index (default fail)")
        ->check(CLI::IsMember({"fail", "index"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (tab->parsed())
            return cmd_tabulate(tab_opts);
        if (anom->parsed())
            return cmd_anomalies(anom_opts, kinds, budget_probes, budget_seconds);
        if (close->parsed())
            return cmd_closeness(close_opts, close_probes, close_seconds);
        if (stats->parsed())
            return cmd_stats(stats_opts);
        if (verify->parsed())
            return cmd_verify(verify_ballot, verify_certs, verify_policy);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    }
    return kExitOk;
}
