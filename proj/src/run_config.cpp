#include "rankshape/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "rankshape/error.hpp"
#include "rankshape/reward_shaping.hpp"
#include "rankshape/trajectory_io.hpp"
#include "rankshape/trajectory_metrics.hpp"

namespace rankshape {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string join_keys(const std::map<std::string, ConfigValue, std::less<>>& values) {
  std::string out;
  for (const auto& [k, v] : values) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  const EnvParams env;
  const TrainConfig train;
  values_ = {
      {"alpha", kDefaultAlpha},
      {"window", std::int64_t{kDefaultWindow}},
      {"stride", std::int64_t{kDefaultStride}},
      {"group_size", std::int64_t{kDefaultGroupSize}},
      {"iterations", std::int64_t{train.iterations}},
      {"learning_rate", train.learning_rate},
      {"seed", std::int64_t{0}},
      {"env_seed", static_cast<std::int64_t>(env.seed)},
      {"dim", std::int64_t{env.dim}},
      {"vocab", std::int64_t{env.vocab}},
      {"bias_dim", std::int64_t{env.bias_dim}},
      {"n_null", std::int64_t{env.n_null}},
      {"tau", env.tau},
      {"horizon", std::int64_t{env.horizon}},
      {"decay", env.decay},
      {"bias_logit_offset", kDefaultBiasLogitOffset},
      {"eval_rollouts", std::int64_t{64}},
      {"pass_k", std::int64_t{16}},
      {"label", std::string{}},
  };
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorCode::kUnknownConfigKey, "\"" + std::string(key) + "\"; accepted keys: " + join_keys(values_));
  }
  const std::string_view value = trim(raw);
  const auto bad = [&](const char* type) {
    return Error(ErrorCode::kParse, "key \"" + std::string(key) + "\" expects " + type + ", got \"" +
                                        std::string(value) + "\"");
  };
  std::visit(
      [&](auto& slot) {
        using T = std::decay_t<decltype(slot)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          std::int64_t v = 0;
          const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
          if (value.empty() || r.ec != std::errc() || r.ptr != value.data() + value.size()) throw bad("an integer");
          slot = v;
        } else if constexpr (std::is_same_v<T, double>) {
          double v = 0.0;
          const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
          if (value.empty() || r.ec != std::errc() || r.ptr != value.data() + value.size() || !std::isfinite(v)) {
            throw bad("a finite number");
          }
          slot = v;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") {
            slot = true;
          } else if (value == "false" || value == "0") {
            slot = false;
          } else {
            throw bad("a boolean");
          }
        } else {
          std::string_view s = value;
          if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
          slot = std::string(s);
        }
      },
      it->second);
}

void RunConfig::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::kParse, "expected key=value, got \"" + std::string(assignment) + "\"");
  }
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::parse(std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string_view::npos) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected key = value");
    }
    set_assignment(line);
  }
}

void RunConfig::load(const std::filesystem::path& path) { parse(read_text_file(path)); }

const ConfigValue& RunConfig::at(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::kUnknownConfigKey, std::string(key));
  return it->second;
}

std::int64_t RunConfig::get_int(std::string_view key) const { return std::get<std::int64_t>(at(key)); }
double RunConfig::get_double(std::string_view key) const { return std::get<double>(at(key)); }
bool RunConfig::get_bool(std::string_view key) const { return std::get<bool>(at(key)); }
const std::string& RunConfig::get_string(std::string_view key) const { return std::get<std::string>(at(key)); }

std::vector<std::string> RunConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

EnvParams RunConfig::env_params() const {
  EnvParams p;
  p.seed = static_cast<std::uint64_t>(get_int("env_seed"));
  p.dim = static_cast<int>(get_int("dim"));
  p.vocab = static_cast<int>(get_int("vocab"));
  p.bias_dim = static_cast<int>(get_int("bias_dim"));
  p.n_null = static_cast<int>(get_int("n_null"));
  p.tau = get_double("tau");
  p.horizon = static_cast<int>(get_int("horizon"));
  p.decay = get_double("decay");
  return p;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.alpha = get_double("alpha");
  c.group_size = static_cast<int>(get_int("group_size"));
  c.iterations = static_cast<int>(get_int("iterations"));
  c.learning_rate = get_double("learning_rate");
  c.seed = static_cast<std::uint64_t>(get_int("seed"));
  c.window = get_int("window");
  c.stride = get_int("stride");
  return c;
}

std::string RunConfig::label() const {
  if (!get_string("label").empty()) return get_string("label");
  char buf[96];
  std::snprintf(buf, sizeof buf, "alpha%g_seed%lld", get_double("alpha"), static_cast<long long>(get_int("seed")));
  return buf;
}

}  // namespace rankshape
