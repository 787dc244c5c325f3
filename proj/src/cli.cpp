#include "rankshape/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rankshape/collapse_sim.hpp"
#include "rankshape/error.hpp"
#include "rankshape/eval_stats.hpp"
#include "rankshape/reports.hpp"
#include "rankshape/reward_shaping.hpp"
#include "rankshape/run_config.hpp"
#include "rankshape/soe_geometry.hpp"
#include "rankshape/spectral_core.hpp"
#include "rankshape/trajectory_io.hpp"
#include "rankshape/trajectory_metrics.hpp"

namespace rankshape {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> nonempty_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    if (!line.empty()) lines.push_back(line);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }
  return lines;
}

template <typename T>
std::vector<T> parse_numbers(std::string_view line, std::size_t line_no) {
  std::vector<T> out;
  while (true) {
    const auto comma = line.find(',');
    const std::string_view cell = trim(line.substr(0, comma));
    T v{};
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": not a number: \"" + std::string(cell) + "\"");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    line = line.substr(comma + 1);
  }
  return out;
}

std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Attaches the offending file to an error without changing its code.
template <typename F>
auto with_file(const std::string& file, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), (e.detail().empty() ? std::string() : e.detail() + " ") + "(" + file + ")");
  }
}

// Evaluates `work` for every file concurrently and emits results in input
// order; the first failure in input order stops the output.
template <typename F>
void for_each_file(const std::vector<std::string>& files, std::ostream& out, F work) {
  std::vector<std::future<json>> pending;
  pending.reserve(files.size());
  for (const auto& file : files) {
    pending.push_back(std::async(std::launch::async, [&work, file] { return with_file(file, [&] { return work(file); }); }));
  }
  for (auto& f : pending) out << f.get().dump() << '\n';
}

int cmd_effrank(const std::vector<std::string>& files, std::ostream& out) {
  for_each_file(files, out, [](const std::string& file) {
    const Trajectory h = read_trajectory(file);
    const Spectrum s = covariance_spectrum(h);
    const double entropy = spectral_entropy(s);
    return json{{"file", file},
                {"rows", h.rows()},
                {"dim", h.dim()},
                {"nonzero_eigenvalues", s.nonzero_count()},
                {"spectral_entropy", entropy},
                {"effective_rank", std::exp(entropy)}};
  });
  return kExitOk;
}

int cmd_window_rank(const std::vector<std::string>& files, long w, long stride, std::ostream& out) {
  for_each_file(files, out, [w, stride](const std::string& file) {
    const WindowRankProfile profile = windowed_min_effrank(read_trajectory(file), w, stride);
    json j = to_json(profile);
    j["file"] = file;
    j["norm_rank"] = norm_rank(profile);
    return j;
  });
  return kExitOk;
}

int cmd_reward(const std::string& file, double alpha, std::ostream& out) {
  const std::string text = read_text_file(file);
  const auto lines = nonempty_lines(text);
  std::vector<json> results;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json rec;
    try {
      rec = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, "record " + std::to_string(i) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("correct") || !rec.contains("norm_rank") || !rec["norm_rank"].is_number()) {
      throw Error(ErrorCode::kParse, "record " + std::to_string(i) + " needs fields correct and norm_rank");
    }
    RolloutOutcome o;
    const json& c = rec["correct"];
    if (c.is_boolean()) {
      o.correct = c.get<bool>();
    } else if (c.is_number_integer() && (c.get<int>() == 0 || c.get<int>() == 1)) {
      o.correct = c.get<int>() == 1;
    } else {
      throw Error(ErrorCode::kParse, "record " + std::to_string(i) + ": correct must be a boolean or 0/1");
    }
    o.norm_rank = rec["norm_rank"].get<double>();
    results.push_back({{"index", i}, {"correct", o.correct}, {"norm_rank", o.norm_rank},
                       {"reward", total_reward(o, alpha)}});
  }
  for (const auto& r : results) out << r.dump() << '\n';
  return kExitOk;
}

int cmd_advantage(const std::string& file, double eps, std::ostream& out) {
  const std::string text = read_text_file(file);
  const auto lines = nonempty_lines(text);
  std::string buffer;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto rewards = parse_numbers<double>(lines[i], i + 1);
    const auto adv = group_advantages(rewards, eps);
    for (std::size_t j = 0; j < adv.size(); ++j) {
      if (j > 0) buffer += ',';
      buffer += format_g(adv[j] == 0.0 ? 0.0 : adv[j], 12);
    }
    buffer += '\n';
  }
  out << buffer;
  return kExitOk;
}

int cmd_passk(const std::string& file, long n, std::vector<long> ks, std::ostream& out) {
  PassCounts pc;
  pc.n = n;
  const std::string text = read_text_file(file);
  const auto lines = nonempty_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (const long c : parse_numbers<long>(lines[i], i + 1)) pc.counts.push_back(c);
  }
  if (ks.empty()) {
    for (const long k : {1L, 4L, 8L, 16L, 32L, 64L}) {
      if (k <= n) ks.push_back(k);
    }
  }
  const auto curve = pass_curve(pc, ks);
  std::string buffer = "k,pass_at_k\n";
  char row[64];
  for (std::size_t i = 0; i < ks.size(); ++i) {
    std::snprintf(row, sizeof row, "%ld,%.6f\n", ks[i], curve[i]);
    buffer += row;
  }
  out << buffer;
  return kExitOk;
}

int cmd_fit_decouple(const std::string& file, const LogitOptions& options, std::ostream& out) {
  const auto samples = parse_decoupling_csv(read_text_file(file));
  out << to_json(fit_decoupling_logit(samples, options)).dump() << '\n';
  return kExitOk;
}

struct SoeArgs {
  std::string basis;
  std::string probes;
  std::string teacher;
  long prefix = 0;
  std::string query_id;
  double threshold = kDefaultEnergyThreshold;
  double eps = kDefaultOmegaEps;
  double warn_below = kDefaultLowOrthogonality;
};

int cmd_soe_select(const SoeArgs& a, std::ostream& out) {
  const Trajectory states = with_file(a.basis, [&] { return read_trajectory(a.basis); });
  const TrajectoryFile probe_file = with_file(a.probes, [&] { return read_trajectory_file(a.probes); });
  std::vector<std::string> labels;
  if (probe_file.metadata) {
    const json meta = json::parse(*probe_file.metadata, nullptr, false);
    if (meta.is_object() && meta.contains("labels") && meta["labels"].is_array()) {
      for (const auto& l : meta["labels"]) labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    }
  }
  const ProbeSet probes(probe_file.matrix.values(), labels);
  StitchOptions options;
  options.energy_threshold = a.threshold;
  options.omega_eps = a.eps;
  options.low_orthogonality = a.warn_below;

  StitchPlan plan;
  if (!a.teacher.empty()) {
    const Trajectory teacher = with_file(a.teacher, [&] { return read_trajectory(a.teacher); });
    const long prefix = a.prefix > 0 ? a.prefix : static_cast<long>(teacher.rows());
    plan = plan_stitch(teacher, prefix, states.values(), probes, options);
  } else {
    plan = plan_from_manifold(lookahead_manifold(states.values(), a.threshold), probes, options);
    if (a.prefix > 0) plan.prefix_length = a.prefix;
  }
  plan.query_id = a.query_id;
  out << to_json(plan).dump() << '\n';
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& out_dir, std::ostream& out) {
  RunConfig config;
  if (!config_path.empty()) config.load(config_path);
  for (const auto& o : overrides) config.set_assignment(o);

  const EnvSpec env = build_env(config.env_params());
  const PolicyParams init = biased_policy(env, config.get_double("bias_logit_offset"));
  const TrainConfig train_cfg = config.train_config();
  const SimTrace trace = train(env, init, train_cfg);

  const int eval_rollouts = static_cast<int>(config.get_int("eval_rollouts"));
  const long pass_k = config.get_int("pass_k");
  const PolicyEvaluation ev = evaluate_policy(trace.final_policy, env, eval_rollouts, derive_seed(train_cfg.seed, 0x6576616c));

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir + ": " + ec.message());
  const std::string label = config.label();
  const fs::path trace_path = fs::path(out_dir) / (label + ".trace.csv");
  const fs::path config_path_out = fs::path(out_dir) / (label + ".config.json");

  std::ostringstream csv;
  write_sim_trace_csv(csv, trace);
  {
    std::ofstream f(trace_path, std::ios::binary);
    f << csv.str();
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + trace_path.string());
  }

  const SimRecord& first = trace.records.front();
  const SimRecord& last = trace.records.back();
  json summary = {
      {"initial_windowed_erank", first.mean_windowed_erank},
      {"final_windowed_erank", last.mean_windowed_erank},
      {"initial_policy_entropy", first.policy_entropy},
      {"final_policy_entropy", last.policy_entropy},
      {"final_success_rate", last.success_rate},
      {"eval_rollouts", ev.rollouts},
      {"eval_successes", ev.successes},
      {"eval_mean_erank", ev.mean_erank},
      {"pass_k", pass_k},
      {"pass_at_k", pass_k <= ev.rollouts ? json(pass_at_k(ev.rollouts, ev.successes, pass_k)) : json(nullptr)},
  };
  const json sidecar = {{"label", label},
                        {"trace_file", trace_path.filename().string()},
                        {"config", to_json(config)},
                        {"summary", summary}};
  {
    std::ofstream f(config_path_out, std::ios::binary);
    f << sidecar.dump(2) << '\n';
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + config_path_out.string());
  }
  out << json{{"label", label}, {"trace", trace_path.string()}, {"config", config_path_out.string()}, {"summary", summary}}.dump()
      << '\n';
  return kExitOk;
}

int cmd_report(const std::string& runs_dir, std::ostream& out) {
  if (!fs::is_directory(runs_dir)) throw Error(ErrorCode::kIo, "not a directory: " + runs_dir);
  std::vector<fs::path> sidecars;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 12 && name.ends_with(".config.json")) sidecars.push_back(entry.path());
  }
  if (sidecars.empty()) throw Error(ErrorCode::kIo, "no *.config.json files in " + runs_dir);

  struct Row {
    std::string label;
    double alpha;
    long long seed;
    long long env_seed;
    double initial_erank;
    double final_erank;
    double final_success;
    double final_entropy;
    long eval_successes;
    json pass;
  };
  std::vector<Row> rows;
  for (const auto& path : sidecars) {
    json j;
    try {
      j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
    }
    try {
      const auto records = with_file(path.string(), [&] {
        return parse_sim_trace_csv(read_text_file(path.parent_path() / j.at("trace_file").get<std::string>()));
      });
      if (records.empty()) throw Error(ErrorCode::kParse, "empty trace for " + path.string());
      const json& cfg = j.at("config");
      const json& sum = j.at("summary");
      rows.push_back({j.at("label").get<std::string>(), cfg.at("alpha").get<double>(), cfg.at("seed").get<long long>(),
                      cfg.at("env_seed").get<long long>(), records.front().mean_windowed_erank,
                      records.back().mean_windowed_erank, records.back().success_rate, records.back().policy_entropy,
                      sum.at("eval_successes").get<long>(), sum.at("pass_at_k")});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.alpha, a.seed, a.label) < std::tie(b.alpha, b.seed, b.label);
  });

  std::string buffer =
      "label,alpha,seed,env_seed,initial_windowed_erank,final_windowed_erank,final_success_rate,final_policy_entropy,"
      "eval_successes,pass_at_k\n";
  for (const Row& r : rows) {
    buffer += r.label + "," + format_g(r.alpha, 10) + "," + std::to_string(r.seed) + "," + std::to_string(r.env_seed) +
              "," + format_g(r.initial_erank, 10) + "," + format_g(r.final_erank, 10) + "," +
              format_g(r.final_success, 10) + "," + format_g(r.final_entropy, 10) + "," +
              std::to_string(r.eval_successes) + "," + (r.pass.is_number() ? format_g(r.pass.get<double>(), 10) : "") +
              "\n";
  }

  struct Agg {
    int runs = 0;
    double erank = 0, success = 0, pass = 0;
    int pass_runs = 0;
  };
  std::map<double, Agg> by_alpha;
  for (const Row& r : rows) {
    Agg& a = by_alpha[r.alpha];
    ++a.runs;
    a.erank += r.final_erank;
    a.success += r.final_success;
    if (r.pass.is_number()) {
      a.pass += r.pass.get<double>();
      ++a.pass_runs;
    }
  }
  buffer += "\nalpha,runs,mean_final_windowed_erank,mean_final_success_rate,mean_pass_at_k\n";
  for (const auto& [alpha, a] : by_alpha) {
    buffer += format_g(alpha, 10) + "," + std::to_string(a.runs) + "," + format_g(a.erank / a.runs, 10) + "," +
              format_g(a.success / a.runs, 10) + "," + (a.pass_runs ? format_g(a.pass / a.pass_runs, 10) : "") + "\n";
  }
  out << buffer;
  return kExitOk;
}

void report_error(std::ostream& err, std::string_view id, const std::string& message) {
  err << json{{"error", id}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Effective-rank trajectory analysis, rank-aware rewards and the collapse simulator", "rankshape"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::vector<std::string> files;
  auto* effrank = app.add_subcommand("effrank", "Effective rank of each trajectory file (JSON lines)");
  effrank->add_option("files", files, "HSTB or .csv trajectory files")->required();

  std::vector<std::string> wr_files;
  long window = kDefaultWindow;
  long stride = kDefaultStride;
  auto* window_rank = app.add_subcommand("window-rank", "Sliding-window minimum effective rank and NormRank");
  window_rank->add_option("files", wr_files, "HSTB or .csv trajectory files")->required();
  window_rank->add_option("--w,--window", window, "window width in steps")->capture_default_str();
  window_rank->add_option("--stride", stride, "window stride in steps")->capture_default_str();

  std::string reward_file;
  double alpha = kDefaultAlpha;
  auto* reward = app.add_subcommand("reward", "R_total per JSON-lines record {correct, norm_rank}");
  reward->add_option("records", reward_file, "JSON-lines file")->required();
  reward->add_option("--alpha", alpha, "rank bonus weight")->capture_default_str();

  std::string adv_file;
  double adv_eps = kDefaultAdvantageEps;
  auto* advantage = app.add_subcommand("advantage", "Group-relative advantages, one group per CSV row");
  advantage->add_option("rewards", adv_file, "CSV of rewards")->required();
  advantage->add_option("--eps", adv_eps, "std floor below which a group gets zero advantages")->capture_default_str();

  std::string counts_file;
  long n = 0;
  std::vector<long> ks;
  auto* passk = app.add_subcommand("passk", "Unbiased pass@k curve from per-problem correct counts");
  passk->add_option("counts", counts_file, "file of correct counts, one per problem")->required();
  passk->add_option("--n", n, "samples per problem")->required();
  passk->add_option("--ks", ks, "comma-separated k values")->delimiter(',');

  std::string samples_file;
  LogitOptions logit;
  auto* fit = app.add_subcommand("fit-decouple", "Logistic regression of correctness on rank and entropy");
  fit->add_option("samples", samples_file, "CSV with header eff_rank,entropy,correct")->required();
  fit->add_option("--max-iter", logit.max_iter)->capture_default_str();
  fit->add_option("--tol", logit.tol)->capture_default_str();

  SoeArgs soe;
  auto* soe_cmd = app.add_subcommand("soe-select", "Pick the probe most orthogonal to the look-ahead manifold");
  soe_cmd->add_option("--basis", soe.basis, "look-ahead states, one per row")->required();
  soe_cmd->add_option("--probes", soe.probes, "probe vectors, one per row")->required();
  soe_cmd->add_option("--teacher", soe.teacher, "teacher trace (validates --prefix)");
  soe_cmd->add_option("--prefix", soe.prefix, "teacher steps kept before the stitch");
  soe_cmd->add_option("--query-id", soe.query_id);
  soe_cmd->add_option("--threshold", soe.threshold, "manifold energy threshold")->capture_default_str();
  soe_cmd->add_option("--eps", soe.eps)->capture_default_str();
  soe_cmd->add_option("--warn-below", soe.warn_below, "low-orthogonality warning threshold")->capture_default_str();

  std::string config_file;
  std::vector<std::string> overrides;
  std::string out_dir;
  auto* simulate = app.add_subcommand("simulate", "Train the collapse simulator; write trace CSV and config JSON");
  simulate->add_option("--config", config_file, "key = value config file");
  simulate->add_option("--set", overrides, "override, key=value (repeatable)");
  simulate->add_option("--out", out_dir, "output directory")->required();

  std::string runs_dir;
  auto* report = app.add_subcommand("report", "Compare simulator runs by alpha and seed (CSV)");
  report->add_option("--runs", runs_dir, "directory of simulate outputs")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    report_error(err, "usage", msg);
    return kExitInputError;
  }

  try {
    if (effrank->parsed()) return cmd_effrank(files, out);
    if (window_rank->parsed()) return cmd_window_rank(wr_files, window, stride, out);
    if (reward->parsed()) return cmd_reward(reward_file, alpha, out);
    if (advantage->parsed()) return cmd_advantage(adv_file, adv_eps, out);
    if (passk->parsed()) return cmd_passk(counts_file, n, ks, out);
    if (fit->parsed()) return cmd_fit_decouple(samples_file, logit, out);
    if (soe_cmd->parsed()) return cmd_soe_select(soe, out);
    if (simulate->parsed()) return cmd_simulate(config_file, overrides, out_dir, out);
    if (report->parsed()) return cmd_report(runs_dir, out);
  } catch (const Error& e) {
    report_error(err, error_code_id(e.code()), e.what());
    return error_class(e.code()) == ErrorClass::kNumerical ? kExitNumericalError : kExitInputError;
  } catch (const std::exception& e) {
    report_error(err, "input", e.what());
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace rankshape
