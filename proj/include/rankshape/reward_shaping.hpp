#pragma once

// Rank-augmented rewards, group-relative advantages and the GRPO objective.

#include <span>
#include <string>
#include <vector>

namespace rankshape {

struct RolloutOutcome {
  bool correct = false;
  double norm_rank = 0.0;  // in [0, 1]
  double log_prob = 0.0;   // nats
};

inline constexpr double kDefaultAlpha = 0.5;
inline constexpr double kDefaultAdvantageEps = 1e-6;
inline constexpr int kDefaultGroupSize = 8;

/// 1(correct) * (1 + alpha * norm_rank).
double total_reward(const RolloutOutcome& o, double alpha = kDefaultAlpha);

/// (R_i - mean) / population_std. A group whose std falls below `eps`
/// carries no signal and gets all-zero advantages.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double eps = kDefaultAdvantageEps);

/// -(1/G) sum A_i log pi(y_i). Advantages are constants.
double grpo_objective(std::span<const double> advantages, std::span<const double> log_probs);

struct GroupSample {
  std::string query_id;
  std::vector<RolloutOutcome> outcomes;
  std::vector<double> rewards;
  std::vector<double> advantages;

  std::size_t size() const noexcept { return outcomes.size(); }
};

/// Scores and normalizes one group of rollouts for a query.
GroupSample score_group(std::string query_id, std::vector<RolloutOutcome> outcomes,
                        double alpha = kDefaultAlpha, double eps = kDefaultAdvantageEps);

}  // namespace rankshape
