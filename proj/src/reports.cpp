#include "rankshape/reports.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "rankshape/error.hpp"

namespace rankshape {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    if (!line.empty()) lines.push_back(line);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  return lines;
}

std::vector<double> parse_row(std::string_view line, std::size_t line_no) {
  std::vector<double> cells;
  while (true) {
    const auto comma = line.find(',');
    const std::string_view cell = trim(line.substr(0, comma));
    double v = 0.0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": not a number: \"" + std::string(cell) + "\"");
    }
    cells.push_back(v);
    if (comma == std::string_view::npos) break;
    line = line.substr(comma + 1);
  }
  return cells;
}

}  // namespace

nlohmann::json to_json(const WindowRankProfile& profile) {
  return {
      {"window_width", profile.window_width},
      {"stride", profile.stride},
      {"r_max", profile.r_max},
      {"window_starts", profile.window_starts},
      {"per_window_erank", profile.per_window_erank},
      {"min_erank", profile.min_erank},
  };
}

nlohmann::json to_json(const StitchPlan& plan) {
  nlohmann::json j;
  j["query_id"] = plan.query_id;
  j["prefix_length"] = plan.prefix_length ? nlohmann::json(*plan.prefix_length) : nlohmann::json(nullptr);
  j["probe_label"] = plan.selected.label;
  j["probe_index"] = plan.selected.index;
  j["omega"] = plan.omega_score;
  j["basis_k"] = plan.basis_k;
  j["warning"] = plan.low_orthogonality ? nlohmann::json("low_orthogonality") : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const LogitFit& fit) {
  return {
      {"beta0", fit.beta0},
      {"beta_r", fit.beta_r},
      {"beta_e", fit.beta_e},
      {"std_errors", fit.std_errors},
      {"p_values", fit.p_values},
      {"converged", fit.converged},
      {"iterations", fit.iterations},
      {"n_samples", fit.n_samples},
      {"gradient_norm", fit.gradient_norm},
      {"features", "z-scored"},
  };
}

nlohmann::json to_json(const RunConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : config.values()) {
    std::visit([&](const auto& v) { j[key] = v; }, value);
  }
  return j;
}

void write_sim_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << kSimTraceHeader << '\n';
  char buf[160];
  for (const SimRecord& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.iteration, r.mean_windowed_erank,
                  r.success_rate, r.mean_reward, r.policy_entropy);
    out << buf;
  }
}

std::vector<SimRecord> parse_sim_trace_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != kSimTraceHeader) {
    throw Error(ErrorCode::kParse, "trace CSV must start with header " + std::string(kSimTraceHeader));
  }
  std::vector<SimRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = parse_row(lines[i], i + 1);
    if (cells.size() != 5) throw Error(ErrorCode::kDimensionMismatch, "trace row " + std::to_string(i + 1));
    records.push_back({static_cast<int>(cells[0]), cells[1], cells[2], cells[3], cells[4]});
  }
  return records;
}

std::vector<DecouplingSample> parse_decoupling_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::kParse, "empty samples file");
  std::string header;
  for (const char ch : lines.front()) {
    if (ch != ' ' && ch != '\t') header.push_back(ch);
  }
  if (header != "eff_rank,entropy,correct") {
    throw Error(ErrorCode::kParse, "expected header eff_rank,entropy,correct");
  }
  std::vector<DecouplingSample> samples;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = parse_row(lines[i], i + 1);
    if (cells.size() != 3) {
      throw Error(ErrorCode::kDimensionMismatch, "line " + std::to_string(i + 1) + " needs 3 columns");
    }
    if (cells[2] != 0.0 && cells[2] != 1.0) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(i + 1) + ": correct must be 0 or 1");
    }
    if (!std::isfinite(cells[0]) || !std::isfinite(cells[1])) {
      throw Error(ErrorCode::kNonFiniteValue, "line " + std::to_string(i + 1));
    }
    samples.push_back({cells[0], cells[1], cells[2] == 1.0});
  }
  return samples;
}

}  // namespace rankshape
