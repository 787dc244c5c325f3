#pragma once

// Covariance spectra of hidden-state trajectories and the quantities derived
// from them: spectral entropy, effective rank, principal subspaces and
// confinement ratios.

#include <Eigen/Dense>
#include <cstddef>

namespace rankshape {

/// A T x d matrix of per-step hidden states, one row per step.
/// Construction rejects empty shapes and non-finite entries.
class Trajectory {
 public:
  explicit Trajectory(Eigen::MatrixXd values);

  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index dim() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  /// Rows [begin, begin + count) as a new trajectory.
  Trajectory slice(Eigen::Index begin, Eigen::Index count) const;

 private:
  Eigen::MatrixXd values_;
};

struct Centered {
  Eigen::MatrixXd values;
  Eigen::VectorXd mean;
};

/// Descending, nonnegative eigenvalues of a centered covariance.
class Spectrum {
 public:
  Spectrum() = default;

  /// Sorts descending, clamps negatives to 0 and zeroes entries below
  /// kRelativeFloor * (largest eigenvalue).
  static Spectrum from_eigenvalues(const Eigen::VectorXd& raw);

  static constexpr double kRelativeFloor = 1e-12;

  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  Eigen::Index size() const noexcept { return eigenvalues_.size(); }
  double total_mass() const noexcept { return total_mass_; }
  Eigen::Index nonzero_count() const;

  /// p_i = lambda_i / sum(lambda); throws kDegenerateSpectrum on zero mass.
  Eigen::VectorXd probabilities() const;

 private:
  Eigen::VectorXd eigenvalues_;
  double total_mass_ = 0.0;
};

/// Orthonormal principal directions of a trajectory plus its mean.
struct ManifoldBasis {
  Eigen::VectorXd mean;        // d
  Eigen::MatrixXd directions;  // d x k, orthonormal columns
  double captured_energy = 0.0;

  Eigen::Index k() const noexcept { return directions.cols(); }
  Eigen::Index dim() const noexcept { return directions.rows(); }
};

enum class SpectrumPath {
  kAuto,        // Gram when T < d, covariance otherwise
  kGram,        // eigenvalues of (1/T) C C^T, C the centered rows
  kCovariance,  // eigenvalues of (1/T) C^T C
};

Centered center(const Trajectory& h);

/// Spectrum of (1/T)(H - mu)^T (H - mu). The result has min(T, d) entries.
Spectrum covariance_spectrum(const Trajectory& h,
                             SpectrumPath path = SpectrumPath::kAuto);

/// -sum p_i ln p_i in nats, with 0 ln 0 = 0.
double spectral_entropy(const Spectrum& s);

/// exp(spectral_entropy(s)).
double effective_rank(const Spectrum& s);

inline constexpr double kDefaultEnergyThreshold = 0.90;

/// Smallest set of leading eigen-directions whose cumulative eigenvalue mass
/// reaches `energy_threshold` of the total.
ManifoldBasis principal_subspace(const Trajectory& h,
                                 double energy_threshold = kDefaultEnergyThreshold);

/// Fraction of eigenvalue mass held by the top k components.
double confinement_ratio(const Spectrum& s, Eigen::Index k);

}  // namespace rankshape
