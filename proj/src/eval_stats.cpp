#include "rankshape/eval_stats.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "rankshape/error.hpp"

namespace rankshape {

double pass_at_k(long n, long c, long k) {
  if (n < 1) throw Error(ErrorCode::kRange, "n must be >= 1");
  if (k < 1 || k > n) throw Error(ErrorCode::kRange, "k must lie in [1, n], got " + std::to_string(k));
  if (c < 0 || c > n) throw Error(ErrorCode::kRange, "c must lie in [0, n], got " + std::to_string(c));
  if (n - c < k) return 1.0;
  // C(n-c, k) / C(n, k) = prod_{i<k} (n-c-i) / (n-i)
  double all_wrong = 1.0;
  for (long i = 0; i < k; ++i) {
    all_wrong *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  }
  return 1.0 - all_wrong;
}

std::vector<double> pass_curve(const PassCounts& pc, std::span<const long> ks) {
  if (pc.counts.empty()) throw Error(ErrorCode::kInvalidArgument, "no problems");
  std::vector<double> curve;
  curve.reserve(ks.size());
  for (const long k : ks) {
    double sum = 0.0;
    for (const long c : pc.counts) sum += pass_at_k(pc.n, c, k);
    curve.push_back(sum / static_cast<double>(pc.counts.size()));
  }
  return curve;
}

double mean_token_entropy(std::span<const std::vector<double>> steps) {
  if (steps.empty()) throw Error(ErrorCode::kInvalidArgument, "no steps");
  double total = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    double mass = 0.0;
    double h = 0.0;
    for (const double p : steps[t]) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::kInvalidArgument, "step " + std::to_string(t) + " has a negative or non-finite entry");
      }
      mass += p;
      if (p > 0.0) h -= p * std::log(p);
    }
    if (std::abs(mass - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "step " + std::to_string(t) + " does not sum to 1");
    }
    total += h;
  }
  return total / static_cast<double>(steps.size());
}

double two_sided_p_value(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

namespace {

Eigen::VectorXd zscore(const Eigen::VectorXd& x, const char* name) {
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().mean());
  if (!(sd > 0.0)) throw Error(ErrorCode::kDegenerateFeature, std::string(name) + " is constant");
  return (x.array() - mean) / sd;
}

}  // namespace

LogitFit fit_decoupling_logit(std::span<const DecouplingSample> samples, const LogitOptions& options) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 20) throw Error(ErrorCode::kInvalidArgument, "need at least 20 samples, got " + std::to_string(n));

  Eigen::VectorXd rank(n), entropy(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (!std::isfinite(s.eff_rank) || !std::isfinite(s.entropy)) {
      throw Error(ErrorCode::kNonFiniteValue, "sample " + std::to_string(i));
    }
    rank(i) = s.eff_rank;
    entropy(i) = s.entropy;
    y(i) = s.correct ? 1.0 : 0.0;
  }
  const double positives = y.sum();
  if (positives == 0.0 || positives == static_cast<double>(n)) {
    throw Error(ErrorCode::kDegenerateLabels, "all labels are identical");
  }

  Eigen::MatrixXd x(n, 3);
  x.col(0).setOnes();
  x.col(1) = zscore(rank, "eff_rank");
  x.col(2) = zscore(entropy, "entropy");

  LogitFit fit;
  fit.n_samples = samples.size();
  Eigen::Vector3d beta = Eigen::Vector3d::Zero();
  Eigen::Matrix3d info;
  Eigen::VectorXd p(n);

  auto evaluate = [&]() {
    p = (x * beta).unaryExpr([](double eta) { return 1.0 / (1.0 + std::exp(-eta)); });
    const Eigen::VectorXd w = p.array() * (1.0 - p.array());
    info = x.transpose() * w.asDiagonal() * x;
    const Eigen::Vector3d grad = x.transpose() * (y - p);
    fit.gradient_norm = grad.norm();
    return grad;
  };

  Eigen::Vector3d grad = evaluate();
  for (int it = 0; it < options.max_iter; ++it) {
    if (fit.gradient_norm < options.tol) {
      fit.converged = true;
      break;
    }
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(info);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
      throw Error(ErrorCode::kSeparableData, "information matrix is singular");
    }
    beta += ldlt.solve(grad);
    fit.iterations = it + 1;
    if (!beta.allFinite() || beta.norm() > options.separation_bound) {
      throw Error(ErrorCode::kSeparableData,
                  "coefficient norm exceeded " + std::to_string(options.separation_bound));
    }
    grad = evaluate();
  }
  if (!fit.converged && fit.gradient_norm < options.tol) fit.converged = true;

  const Eigen::Matrix3d cov = info.inverse();
  fit.beta0 = beta(0);
  fit.beta_r = beta(1);
  fit.beta_e = beta(2);
  for (int j = 0; j < 3; ++j) {
    fit.std_errors[j] = std::sqrt(std::max(cov(j, j), 0.0));
    fit.p_values[j] = fit.std_errors[j] > 0.0 ? two_sided_p_value(beta(j) / fit.std_errors[j]) : 1.0;
  }
  return fit;
}

}  // namespace rankshape
