#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "stvcheck/anomaly.hpp"
#include "stvcheck/engine.hpp"
#include "stvcheck/model.hpp"

namespace stv {

// Votes-by-round table in the shape of the published count sheets: one row
// per candidate, one column per round. "*" marks the round a candidate is
// declared elected, "x" the round it is excluded, "-" rounds it is out of.
std::string votes_by_round_table(const PreferenceProfile& profile, const TabulationRecord& record);

// Same content, machine-readable. Columns: candidate,party,r1..rk,result.
// Footer rows carry the per-round exhausted and truncation-loss accounting.
std::string votes_by_round_csv(const PreferenceProfile& profile, const TabulationRecord& record);

nlohmann::ordered_json record_to_json(const PreferenceProfile& profile,
                                      const TabulationRecord& record);

struct AnomalySummaryRow {
    std::string name;
    bool committee_size = false;
    bool upward = false;
    bool downward_strong = false;
    bool downward_weak = false;
    bool no_show = false;
    bool no_show_ambiguous_only = false; // every no-show certificate is ambiguous
    bool truncated = false;              // a search ran out of budget
};

AnomalySummaryRow summarize_anomalies(const std::string& name,
                                      const std::vector<AnomalyCertificate>& certs,
                                      bool truncated);

// Per-election matrix: Comm.Size | Upward | Downward (S/W) | No-show (yes†
// when only ambiguous certificates exist) | truncated.
std::string anomaly_matrix(const std::vector<AnomalySummaryRow>& rows);
std::string anomaly_matrix_csv(const std::vector<AnomalySummaryRow>& rows);

} // namespace stv
