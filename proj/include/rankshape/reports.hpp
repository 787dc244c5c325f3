#pragma once

// Machine-readable output records: JSON for profiles, plans and fits; CSV for
// simulator traces.

#include <iosfwd>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rankshape/collapse_sim.hpp"
#include "rankshape/eval_stats.hpp"
#include "rankshape/run_config.hpp"
#include "rankshape/soe_geometry.hpp"
#include "rankshape/trajectory_metrics.hpp"

namespace rankshape {

nlohmann::json to_json(const WindowRankProfile& profile);

/// Fields: query_id, prefix_length (null when unknown), probe_label,
/// probe_index, omega, basis_k, warning.
nlohmann::json to_json(const StitchPlan& plan);

nlohmann::json to_json(const LogitFit& fit);

nlohmann::json to_json(const RunConfig& config);

inline constexpr std::string_view kSimTraceHeader =
    "iteration,mean_windowed_erank,success_rate,mean_reward,policy_entropy";

/// Full-precision CSV; identical traces give identical bytes.
void write_sim_trace_csv(std::ostream& out, const SimTrace& trace);
std::vector<SimRecord> parse_sim_trace_csv(std::string_view text);

/// CSV with header eff_rank,entropy,correct.
std::vector<DecouplingSample> parse_decoupling_csv(std::string_view text);

}  // namespace rankshape
