#include "rankshape/collapse_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "rankshape/error.hpp"
#include "rankshape/reward_shaping.hpp"
#include "rankshape/trajectory_metrics.hpp"

namespace rankshape {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Portable draws: the standard distributions are implementation-defined, and
// runs must reproduce bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Eigen::VectorXd unit_gaussian(Eigen::Index n) {
    Eigen::VectorXd v(n);
    double norm = 0.0;
    while (!(norm > 1e-8)) {
      for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
      norm = v.norm();
    }
    return v / norm;
  }

 private:
  std::mt19937_64 engine_;
};

int sample_index(const Eigen::VectorXd& cdf, double u) {
  const double x = u * cdf(cdf.size() - 1);
  const auto* begin = cdf.data();
  const auto* end = begin + cdf.size();
  const auto* it = std::upper_bound(begin, end, x);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - begin, cdf.size() - 1));
}

void check_policy(const PolicyParams& policy, const EnvSpec& env) {
  if (policy.logits.size() != env.params.vocab) {
    throw Error(ErrorCode::kDimensionMismatch, "policy has " + std::to_string(policy.logits.size()) +
                                                   " logits, vocabulary has " +
                                                   std::to_string(env.params.vocab));
  }
  if (!policy.logits.allFinite() || !std::isfinite(policy.scale)) {
    throw Error(ErrorCode::kNonFiniteValue, "policy parameters");
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

EnvSpec build_env(const EnvParams& p) {
  if (p.dim < 2) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 2");
  if (p.bias_dim < 1 || p.bias_dim >= p.dim) {
    throw Error(ErrorCode::kInvalidArgument, "bias_dim must lie in [1, dim)");
  }
  if (p.n_null < 1 || p.n_null >= p.vocab) {
    throw Error(ErrorCode::kInvalidArgument, "n_null must lie in [1, vocab)");
  }
  if (p.horizon < 2) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 2");
  if (!(p.tau > -1.0 && p.tau < 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must lie in (-1, 1)");
  if (!(p.decay >= 0.0 && p.decay < 1.0)) throw Error(ErrorCode::kInvalidArgument, "decay must lie in [0, 1)");

  Rng rng(derive_seed(p.seed, 0x656e76));
  const Eigen::Index d = p.dim;
  const Eigen::Index kb = p.bias_dim;
  const Eigen::Index null_dim = d - kb;

  Eigen::MatrixXd gaussian(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) gaussian(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd rotation = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);

  EnvSpec env;
  env.params = p;
  env.bias_basis = rotation.leftCols(kb);
  env.null_basis = rotation.rightCols(null_dim);
  env.directions.resize(p.vocab, d);

  const int n_bias = p.vocab - p.n_null;
  for (int t = 0; t < n_bias; ++t) {
    env.directions.row(t) = (env.bias_basis * rng.unit_gaussian(kb)).transpose();
  }

  // Null tokens: an orthonormal null direction each while they last, random
  // null directions after that, plus a small bias component.
  std::vector<Eigen::VectorXd> null_parts;
  for (int j = 0; j < p.n_null; ++j) {
    Eigen::VectorXd null_part = j < null_dim ? Eigen::VectorXd(env.null_basis.col(j))
                                             : Eigen::VectorXd(env.null_basis * rng.unit_gaussian(null_dim));
    const double null_mass = 0.85 + 0.15 * rng.uniform();
    const Eigen::VectorXd bias_part = env.bias_basis * rng.unit_gaussian(kb);
    Eigen::VectorXd v = null_mass * null_part + std::sqrt(1.0 - null_mass * null_mass) * bias_part;
    env.directions.row(n_bias + j) = (v / v.norm()).transpose();
    null_parts.push_back(std::move(null_part));
  }

  // u* leans on the first half of the null tokens.
  const int aligned = std::max(1, p.n_null / 2);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < aligned; ++j) target += null_parts[static_cast<std::size_t>(j)];
  if (!(target.norm() > 1e-8)) target = env.null_basis.col(0);
  // Project out any bias leakage from rounding.
  target = env.null_basis * (env.null_basis.transpose() * target);
  env.target = target / target.norm();
  return env;
}

Eigen::VectorXd PolicyParams::log_probabilities() const {
  const Eigen::VectorXd z = scale * logits;
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return z.array() - lse;
}

Eigen::VectorXd PolicyParams::probabilities() const { return log_probabilities().array().exp(); }

double PolicyParams::entropy() const {
  const Eigen::VectorXd logp = log_probabilities();
  double h = 0.0;
  for (Eigen::Index i = 0; i < logp.size(); ++i) {
    const double p = std::exp(logp(i));
    if (p > 0.0) h -= p * logp(i);
  }
  return std::max(h, 0.0);
}

PolicyParams biased_policy(const EnvSpec& env, double offset) {
  PolicyParams policy;
  policy.logits = Eigen::VectorXd::Zero(env.params.vocab);
  policy.logits.head(env.first_null_token()).setConstant(offset);
  return policy;
}

Rollout rollout(const PolicyParams& policy, const EnvSpec& env, std::uint64_t seed) {
  check_policy(policy, env);
  const Eigen::VectorXd logp = policy.log_probabilities();
  Eigen::VectorXd cdf = logp.array().exp();
  for (Eigen::Index i = 1; i < cdf.size(); ++i) cdf(i) += cdf(i - 1);

  Rng rng(seed);
  const int horizon = env.params.horizon;
  Rollout out;
  out.tokens.reserve(static_cast<std::size_t>(horizon));
  out.states.resize(horizon, env.params.dim);
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(env.params.dim);
  for (int t = 0; t < horizon; ++t) {
    const int a = sample_index(cdf, rng.uniform());
    out.tokens.push_back(a);
    out.log_prob += logp(a);
    h = env.params.decay * h + env.directions.row(a);
    out.states.row(t) = h;
  }
  const double norm = h.norm();
  out.correct = norm > 0.0 && h.dot(env.target.transpose()) / norm >= env.params.tau;
  return out;
}

Eigen::VectorXd grpo_policy_gradient(const PolicyParams& policy,
                                     std::span<const std::vector<int>> token_sequences,
                                     std::span<const double> advantages) {
  if (token_sequences.size() != advantages.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one advantage per rollout required");
  }
  const Eigen::Index v = policy.logits.size();
  const Eigen::VectorXd probs = policy.probabilities();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(v);
  if (token_sequences.empty()) return grad;
  // d/dtheta log pi(y) = s * (counts(y) - |y| * pi)
  for (std::size_t i = 0; i < token_sequences.size(); ++i) {
    if (advantages[i] == 0.0) continue;
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(v);
    for (const int a : token_sequences[i]) {
      if (a < 0 || a >= v) throw Error(ErrorCode::kRange, "token out of vocabulary");
      counts(a) += 1.0;
    }
    const double len = static_cast<double>(token_sequences[i].size());
    grad += advantages[i] * (counts - len * probs);
  }
  return grad * (policy.scale / static_cast<double>(token_sequences.size()));
}

double trajectory_erank(const Eigen::MatrixXd& states) {
  const Spectrum s = covariance_spectrum(Trajectory(states));
  return s.total_mass() > 0.0 ? effective_rank(s) : 1.0;
}

SimTrace train(const EnvSpec& env, const PolicyParams& init_policy, const TrainConfig& config) {
  check_policy(init_policy, env);
  if (config.group_size < 2) throw Error(ErrorCode::kGroupTooSmall, "group_size must be >= 2");
  if (!(config.alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  if (config.iterations < 0) throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 0");
  if (!std::isfinite(config.learning_rate) || config.learning_rate < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be finite and >= 0");
  }

  SimTrace trace;
  trace.env = env.params;
  trace.config = config;
  trace.records.reserve(static_cast<std::size_t>(config.iterations) + 1);
  PolicyParams policy = init_policy;
  const Eigen::Index window = std::min<Eigen::Index>(config.window, env.params.horizon);
  const auto g = static_cast<std::size_t>(config.group_size);

  std::vector<std::vector<int>> tokens(g);
  std::vector<RolloutOutcome> outcomes(g);
  std::vector<double> windowed(g);
  for (int it = 0; it <= config.iterations; ++it) {
    for (std::size_t i = 0; i < g; ++i) {
      Rollout r = rollout(policy, env, derive_seed(config.seed, static_cast<std::uint64_t>(it), i));
      const WindowRankProfile profile = windowed_min_effrank(Trajectory(r.states), window, config.stride);
      windowed[i] = profile.min_erank;
      outcomes[i] = {r.correct, norm_rank(profile), r.log_prob};
      tokens[i] = std::move(r.tokens);
    }
    const GroupSample group = score_group("sim", outcomes, config.alpha);

    SimRecord rec;
    rec.iteration = it;
    rec.policy_entropy = policy.entropy();
    for (std::size_t i = 0; i < g; ++i) {
      rec.mean_windowed_erank += windowed[i];
      rec.success_rate += outcomes[i].correct ? 1.0 : 0.0;
      rec.mean_reward += group.rewards[i];
    }
    rec.mean_windowed_erank /= static_cast<double>(g);
    rec.success_rate /= static_cast<double>(g);
    rec.mean_reward /= static_cast<double>(g);
    trace.records.push_back(rec);

    if (it < config.iterations && config.learning_rate > 0.0) {
      policy.logits += config.learning_rate * grpo_policy_gradient(policy, tokens, group.advantages);
    }
  }
  trace.final_policy = policy;
  return trace;
}

std::vector<SweepPoint> temperature_sweep(const PolicyParams& policy, const EnvSpec& env,
                                          std::span<const double> scales, int samples_per_scale,
                                          std::uint64_t seed) {
  if (samples_per_scale < 2) throw Error(ErrorCode::kRange, "samples_per_scale must be >= 2");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scales must be positive");
    if (i > 0 && !(scales[i] > scales[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "scales must be ascending");
    }
  }
  std::vector<SweepPoint> out;
  for (std::size_t si = 0; si < scales.size(); ++si) {
    PolicyParams scaled = policy;
    scaled.scale = scales[si];
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int n = 0; n < samples_per_scale; ++n) {
      const Rollout r = rollout(scaled, env, derive_seed(seed, si, static_cast<std::uint64_t>(n)));
      const double e = trajectory_erank(r.states);
      sum += e;
      sum_sq += e * e;
    }
    const double count = samples_per_scale;
    const double mean = sum / count;
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
    out.push_back({scales[si], mean, std::sqrt(var / count)});
  }
  return out;
}

double geometric_barrier_probe(const PolicyParams& policy, const EnvSpec& env, double delta,
                               int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::kRange, "samples must be >= 1");
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be > 0");
  int hits = 0;
  for (int n = 0; n < samples; ++n) {
    const Rollout r = rollout(policy, env, derive_seed(seed, static_cast<std::uint64_t>(n)));
    const Eigen::VectorXd last = r.states.bottomRows(1).transpose();
    if ((env.null_basis.transpose() * last).norm() > delta) ++hits;
  }
  return static_cast<double>(hits) / samples;
}

PolicyEvaluation evaluate_policy(const PolicyParams& policy, const EnvSpec& env, int rollouts,
                                 std::uint64_t seed) {
  if (rollouts < 1) throw Error(ErrorCode::kRange, "rollouts must be >= 1");
  PolicyEvaluation ev;
  ev.rollouts = rollouts;
  for (int n = 0; n < rollouts; ++n) {
    const Rollout r = rollout(policy, env, derive_seed(seed, static_cast<std::uint64_t>(n), 0x6576));
    ev.successes += r.correct ? 1 : 0;
    ev.mean_erank += trajectory_erank(r.states);
  }
  ev.mean_erank /= rollouts;
  return ev;
}

}  // namespace rankshape
