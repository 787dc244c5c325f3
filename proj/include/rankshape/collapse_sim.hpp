#pragma once

// A desk-scale "subspace bandit": tokens are unit directions in R^d, most of
// them confined to a low-dimensional bias subspace, and a policy-gradient loop
// trained on correctness-gated, rank-augmented rewards.

#include <cstdint>
#include <span>
#include <vector>

#include "rankshape/spectral_core.hpp"

namespace rankshape {

struct EnvParams {
  std::uint64_t seed = 42;
  int dim = 16;        // d
  int vocab = 32;      // V
  int bias_dim = 4;    // k_b
  int n_null = 8;      // tokens pointing mostly out of the bias subspace
  double tau = 0.3;    // success threshold on <h_T / |h_T|, u*>
  int horizon = 32;    // T
  double decay = 0.7;  // h_t = decay * h_{t-1} + v_{a_t}
};

struct EnvSpec {
  EnvParams params;
  Eigen::MatrixXd directions;  // V x d; rows [0, V - n_null) are bias tokens
  Eigen::MatrixXd bias_basis;  // d x k_b, orthonormal
  Eigen::MatrixXd null_basis;  // d x (d - k_b), orthonormal complement
  Eigen::VectorXd target;      // u*, unit, inside the null space

  int first_null_token() const noexcept { return params.vocab - params.n_null; }
  bool is_null_token(int token) const noexcept { return token >= first_null_token(); }
};

inline constexpr double kMinNullMass = 0.8;

/// Deterministic in `params`; identical params give a bit-identical spec.
EnvSpec build_env(const EnvParams& params);

struct PolicyParams {
  Eigen::VectorXd logits;  // theta, one per token
  double scale = 1.0;      // s; sampling uses softmax(s * theta)

  Eigen::VectorXd probabilities() const;
  Eigen::VectorXd log_probabilities() const;
  double entropy() const;
};

inline constexpr double kDefaultBiasLogitOffset = 2.0;

/// Logits of `offset` on bias tokens and 0 on null tokens.
PolicyParams biased_policy(const EnvSpec& env, double offset = kDefaultBiasLogitOffset);

struct Rollout {
  std::vector<int> tokens;
  Eigen::MatrixXd states;  // T x d, rows h_1 .. h_T
  bool correct = false;
  double log_prob = 0.0;
};

/// Samples T tokens i.i.d. from softmax(s * theta) and runs the recurrence.
Rollout rollout(const PolicyParams& policy, const EnvSpec& env, std::uint64_t seed);

/// Derives an independent sub-seed; used so per-rollout streams do not depend
/// on evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Gradient of (1/G) sum_i A_i log pi(y_i) with respect to theta.
Eigen::VectorXd grpo_policy_gradient(const PolicyParams& policy,
                                     std::span<const std::vector<int>> token_sequences,
                                     std::span<const double> advantages);

struct TrainConfig {
  double alpha = 0.5;
  int group_size = 8;
  int iterations = 500;
  double learning_rate = 0.2;
  std::uint64_t seed = 0;
  Eigen::Index window = 64;  // clipped to the horizon
  Eigen::Index stride = 16;
};

struct SimRecord {
  int iteration = 0;
  double mean_windowed_erank = 0.0;
  double success_rate = 0.0;
  double mean_reward = 0.0;
  double policy_entropy = 0.0;
};

/// One record per iteration 0..iterations. Record i describes the rollouts
/// sampled from the policy before the i-th update; the last record is taken
/// from the final policy.
struct SimTrace {
  EnvParams env;
  TrainConfig config;
  std::vector<SimRecord> records;
  PolicyParams final_policy;
};

SimTrace train(const EnvSpec& env, const PolicyParams& init_policy, const TrainConfig& config);

struct SweepPoint {
  double scale = 1.0;
  double mean_erank = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E[erank(H)] at each logit scale.
std::vector<SweepPoint> temperature_sweep(const PolicyParams& policy, const EnvSpec& env,
                                          std::span<const double> scales, int samples_per_scale,
                                          std::uint64_t seed);

/// Monte Carlo estimate of P(|Proj_null(h_T)| > delta).
double geometric_barrier_probe(const PolicyParams& policy, const EnvSpec& env, double delta,
                               int samples, std::uint64_t seed);

struct PolicyEvaluation {
  int rollouts = 0;
  int successes = 0;
  double mean_erank = 0.0;
};

PolicyEvaluation evaluate_policy(const PolicyParams& policy, const EnvSpec& env, int rollouts,
                                 std::uint64_t seed);

/// erank of a full trajectory, counting zero variance as 1.
double trajectory_erank(const Eigen::MatrixXd& states);

}  // namespace rankshape
