#pragma once

// Evaluation statistics: unbiased pass@k and the logistic regression that
// separates trajectory rank from predictive entropy.

#include <array>
#include <span>
#include <vector>

namespace rankshape {

/// 1 - C(n-c, k) / C(n, k), evaluated as a running product.
double pass_at_k(long n, long c, long k);

struct PassCounts {
  long n = 0;
  std::vector<long> counts;  // correct samples per problem, each in [0, n]
};

/// Mean pass@k over problems for each k.
std::vector<double> pass_curve(const PassCounts& pc, std::span<const long> ks);

/// Mean over steps of -sum p ln p. Each row must be a probability vector.
double mean_token_entropy(std::span<const std::vector<double>> step_distributions);

struct DecouplingSample {
  double eff_rank = 1.0;
  double entropy = 0.0;
  bool correct = false;
};

struct LogitOptions {
  int max_iter = 100;
  double tol = 1e-8;
  double separation_bound = 30.0;
};

/// Coefficients are on z-scored features, ordered (intercept, rank, entropy).
struct LogitFit {
  double beta0 = 0.0;
  double beta_r = 0.0;
  double beta_e = 0.0;
  std::array<double, 3> std_errors{};
  std::array<double, 3> p_values{};
  bool converged = false;
  int iterations = 0;
  std::size_t n_samples = 0;
  double gradient_norm = 0.0;
};

/// Newton/IRLS fit of P(correct) = sigmoid(b0 + br * z(rank) + be * z(entropy))
/// with Wald standard errors and two-sided normal p-values.
LogitFit fit_decoupling_logit(std::span<const DecouplingSample> samples,
                              const LogitOptions& options = {});

/// Two-sided normal p-value for a z statistic.
double two_sided_p_value(double z);

}  // namespace rankshape
