#include "rankshape/reward_shaping.hpp"

#include <cmath>

#include "rankshape/error.hpp"

namespace rankshape {

double total_reward(const RolloutOutcome& o, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  if (!(o.norm_rank >= 0.0 && o.norm_rank <= 1.0)) {
    throw Error(ErrorCode::kRange, "norm_rank must lie in [0, 1]");
  }
  return o.correct ? 1.0 + alpha * o.norm_rank : 0.0;
}

std::vector<double> group_advantages(std::span<const double> rewards, double eps) {
  const std::size_t g = rewards.size();
  if (g < 2) throw Error(ErrorCode::kGroupTooSmall, "need at least 2 rewards, got " + std::to_string(g));
  for (const double r : rewards) {
    if (!std::isfinite(r)) throw Error(ErrorCode::kNonFiniteValue, "reward is not finite");
  }
  double mean = 0.0;
  for (const double r : rewards) mean += r;
  mean /= static_cast<double>(g);
  double var = 0.0;
  for (const double r : rewards) var += (r - mean) * (r - mean);
  const double sigma = std::sqrt(var / static_cast<double>(g));

  std::vector<double> adv(g, 0.0);
  if (sigma < eps) return adv;
  for (std::size_t i = 0; i < g; ++i) adv[i] = (rewards[i] - mean) / sigma;
  return adv;
}

double grpo_objective(std::span<const double> advantages, std::span<const double> log_probs) {
  if (advantages.size() != log_probs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "advantages and log_probs differ in length");
  }
  if (advantages.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < advantages.size(); ++i) acc += advantages[i] * log_probs[i];
  return -acc / static_cast<double>(advantages.size());
}

GroupSample score_group(std::string query_id, std::vector<RolloutOutcome> outcomes, double alpha,
                        double eps) {
  GroupSample group;
  group.query_id = std::move(query_id);
  group.outcomes = std::move(outcomes);
  group.rewards.reserve(group.outcomes.size());
  for (const auto& o : group.outcomes) group.rewards.push_back(total_reward(o, alpha));
  group.advantages = group_advantages(group.rewards, eps);
  return group;
}

}  // namespace rankshape
