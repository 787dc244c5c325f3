#include "rankshape/soe_geometry.hpp"

#include <cmath>

#include "rankshape/error.hpp"

namespace rankshape {

ProbeSet::ProbeSet(Eigen::MatrixXd p, std::vector<std::string> l)
    : probes(std::move(p)), labels(std::move(l)) {
  if (probes.rows() < 1) throw Error(ErrorCode::kInvalidArgument, "probe set is empty");
  if (labels.empty()) {
    labels.reserve(static_cast<std::size_t>(probes.rows()));
    for (Eigen::Index i = 0; i < probes.rows(); ++i) labels.push_back("p" + std::to_string(i));
  }
  if (static_cast<Eigen::Index>(labels.size()) != probes.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "one label per probe required");
  }
  if (!probes.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "probe vector");
}

ManifoldBasis lookahead_manifold(const Eigen::MatrixXd& states, double energy_threshold) {
  if (states.rows() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 look-ahead states");
  }
  try {
    return principal_subspace(Trajectory(states), energy_threshold);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kZeroVariance) {
      throw Error(ErrorCode::kZeroVarianceLookahead, "all look-ahead states are identical");
    }
    throw;
  }
}

ManifoldBasis lookahead_manifold(std::span<const Trajectory> samples, LookaheadAggregation aggregation,
                                 double energy_threshold) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 look-ahead samples");
  }
  const Eigen::Index d = samples.front().dim();
  Eigen::Index rows = 0;
  for (const auto& s : samples) {
    if (s.dim() != d) throw Error(ErrorCode::kDimensionMismatch, "look-ahead widths differ");
    rows += s.rows();
  }
  Eigen::MatrixXd states;
  if (aggregation == LookaheadAggregation::kMeanPool) {
    states.resize(static_cast<Eigen::Index>(samples.size()), d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      states.row(static_cast<Eigen::Index>(i)) = samples[i].values().colwise().mean();
    }
  } else {
    states.resize(rows, d);
    Eigen::Index at = 0;
    for (const auto& s : samples) {
      states.middleRows(at, s.rows()) = s.values();
      at += s.rows();
    }
  }
  return lookahead_manifold(states, energy_threshold);
}

double orthogonality_score(const Eigen::VectorXd& z, const ManifoldBasis& basis, double eps) {
  if (z.size() != basis.dim() || basis.mean.size() != basis.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "probe has dimension " + std::to_string(z.size()) + ", basis has " +
                    std::to_string(basis.dim()));
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  const Eigen::VectorXd offset = z - basis.mean;
  const Eigen::VectorXd residual =
      offset - basis.directions * (basis.directions.transpose() * offset);
  return residual.norm() / (offset.norm() + eps);
}

ProbeSelection select_probe(const ProbeSet& probes, const ManifoldBasis& basis, double eps) {
  constexpr double kTie = 1e-12;
  ProbeSelection best;
  best.omega = -1.0;
  for (Eigen::Index i = 0; i < probes.size(); ++i) {
    const double omega = orthogonality_score(probes.probes.row(i).transpose(), basis, eps);
    if (omega > best.omega + kTie) {
      best.index = i;
      best.omega = omega;
    }
  }
  best.label = probes.labels[static_cast<std::size_t>(best.index)];
  return best;
}

StitchPlan plan_from_manifold(const ManifoldBasis& basis, const ProbeSet& probes,
                              const StitchOptions& options) {
  StitchPlan plan;
  plan.selected = select_probe(probes, basis, options.omega_eps);
  plan.omega_score = plan.selected.omega;
  plan.basis_k = basis.k();
  plan.low_orthogonality = plan.omega_score < options.low_orthogonality;
  return plan;
}

StitchPlan plan_stitch(const Trajectory& teacher_trace, Eigen::Index prefix_length,
                       const Eigen::MatrixXd& lookahead_states, const ProbeSet& probes,
                       const StitchOptions& options) {
  if (prefix_length < 1 || prefix_length > teacher_trace.rows()) {
    throw Error(ErrorCode::kRange, "prefix length must lie in [1, " +
                                       std::to_string(teacher_trace.rows()) + "]");
  }
  if (lookahead_states.cols() != teacher_trace.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "look-ahead width differs from teacher trace");
  }
  const ManifoldBasis basis = lookahead_manifold(lookahead_states, options.energy_threshold);
  StitchPlan plan = plan_from_manifold(basis, probes, options);
  plan.prefix_length = prefix_length;
  return plan;
}

}  // namespace rankshape
