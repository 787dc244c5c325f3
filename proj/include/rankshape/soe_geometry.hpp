#pragma once

// Geometry of spectral orthogonal exploration: a local manifold from
// look-ahead hidden states, orthogonality scores for candidate probes, and the
// resulting stitch decision.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankshape/spectral_core.hpp"

namespace rankshape {

/// Candidate probe vectors in the teacher's latent space, one per row.
struct ProbeSet {
  Eigen::MatrixXd probes;  // M x d
  std::vector<std::string> labels;

  /// Labels default to "p0", "p1", ... when `labels` is empty.
  ProbeSet(Eigen::MatrixXd probes, std::vector<std::string> labels = {});

  Eigen::Index size() const noexcept { return probes.rows(); }
  Eigen::Index dim() const noexcept { return probes.cols(); }
};

enum class LookaheadAggregation {
  kMeanPool,  // one mean-pooled summary row per sample
  kStack,     // all rows of all samples stacked
};

inline constexpr double kDefaultOmegaEps = 1e-8;
inline constexpr double kDefaultLowOrthogonality = 0.1;

/// Manifold of N summary states (rows of `states`).
ManifoldBasis lookahead_manifold(const Eigen::MatrixXd& states,
                                 double energy_threshold = kDefaultEnergyThreshold);

/// Manifold of N look-ahead trajectories sharing a hidden width.
ManifoldBasis lookahead_manifold(std::span<const Trajectory> samples, LookaheadAggregation aggregation,
                                 double energy_threshold = kDefaultEnergyThreshold);

/// ||(I - U U^T)(z - mu)|| / (||z - mu|| + eps).
double orthogonality_score(const Eigen::VectorXd& z, const ManifoldBasis& basis,
                           double eps = kDefaultOmegaEps);

struct ProbeSelection {
  Eigen::Index index = 0;
  std::string label;
  double omega = 0.0;
};

/// Highest-Omega probe. Scores within 1e-12 of each other tie, and ties go to
/// the lowest index.
ProbeSelection select_probe(const ProbeSet& probes, const ManifoldBasis& basis,
                            double eps = kDefaultOmegaEps);

struct StitchOptions {
  double energy_threshold = kDefaultEnergyThreshold;
  double omega_eps = kDefaultOmegaEps;
  double low_orthogonality = kDefaultLowOrthogonality;
};

struct StitchPlan {
  std::string query_id;
  std::optional<Eigen::Index> prefix_length;  // teacher steps kept before the stitch
  ProbeSelection selected;
  double omega_score = 0.0;
  Eigen::Index basis_k = 0;
  bool low_orthogonality = false;
};

/// Scores probes against an already-built manifold.
StitchPlan plan_from_manifold(const ManifoldBasis& basis, const ProbeSet& probes,
                              const StitchOptions& options = {});

/// Full decision for one teacher trace: builds the manifold from the
/// look-ahead states, picks the most orthogonal probe, and records where the
/// probe is stitched in.
StitchPlan plan_stitch(const Trajectory& teacher_trace, Eigen::Index prefix_length,
                       const Eigen::MatrixXd& lookahead_states, const ProbeSet& probes,
                       const StitchOptions& options = {});

}  // namespace rankshape
