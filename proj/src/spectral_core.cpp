#include "rankshape/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "rankshape/error.hpp"

namespace rankshape {

namespace {

struct EigenPairs {
  Eigen::VectorXd values;   // descending, raw (uncleaned)
  Eigen::MatrixXd vectors;  // d x m, directions in feature space
};

// Eigen-decomposition of the centered covariance. Directions are only
// reconstructed when requested, since the Gram path needs an extra product.
EigenPairs centered_eigen(const Eigen::MatrixXd& centered, SpectrumPath path,
                          bool want_vectors) {
  const Eigen::Index t = centered.rows();
  const Eigen::Index d = centered.cols();
  const double inv_t = 1.0 / static_cast<double>(t);
  if (path == SpectrumPath::kAuto) {
    path = t < d ? SpectrumPath::kGram : SpectrumPath::kCovariance;
  }
  const auto options = want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;

  EigenPairs out;
  const Eigen::Index m = std::min(t, d);
  if (path == SpectrumPath::kGram) {
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, options);
    // Ascending from the solver; the top m are the last m.
    out.values = solver.eigenvalues().tail(m).reverse() * inv_t;
    if (want_vectors) {
      out.vectors.resize(d, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index src = t - 1 - i;
        const double g = solver.eigenvalues()(src);
        Eigen::VectorXd u = centered.transpose() * solver.eigenvectors().col(src);
        const double norm = u.norm();
        if (g > 0.0 && norm > 0.0) {
          out.vectors.col(i) = u / norm;
        } else {
          out.vectors.col(i).setZero();
        }
      }
    }
  } else {
    const Eigen::MatrixXd cov = centered.transpose() * centered * inv_t;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, options);
    out.values = solver.eigenvalues().tail(m).reverse();
    if (want_vectors) {
      out.vectors = solver.eigenvectors().rightCols(m).rowwise().reverse();
    }
  }
  return out;
}

}  // namespace

Trajectory::Trajectory(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory must have at least one row and column");
  }
  for (Eigen::Index r = 0; r < values_.rows(); ++r) {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
      if (!std::isfinite(values_(r, c))) {
        throw Error(ErrorCode::kNonFiniteValue,
                    "row " + std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
}

Trajectory Trajectory::slice(Eigen::Index begin, Eigen::Index count) const {
  if (begin < 0 || count < 1 || begin + count > rows()) {
    throw Error(ErrorCode::kRange, "slice out of bounds");
  }
  return Trajectory(values_.middleRows(begin, count));
}

Spectrum Spectrum::from_eigenvalues(const Eigen::VectorXd& raw) {
  Spectrum s;
  s.eigenvalues_ = raw;
  auto* first = s.eigenvalues_.data();
  std::sort(first, first + s.eigenvalues_.size(), std::greater<>());
  for (auto& v : s.eigenvalues_) {
    if (!(v > 0.0)) v = 0.0;
  }
  const double top = s.eigenvalues_.size() > 0 ? s.eigenvalues_(0) : 0.0;
  for (auto& v : s.eigenvalues_) {
    if (v < kRelativeFloor * top) v = 0.0;
  }
  s.total_mass_ = s.eigenvalues_.sum();
  return s;
}

Eigen::Index Spectrum::nonzero_count() const {
  return (eigenvalues_.array() > 0.0).count();
}

Eigen::VectorXd Spectrum::probabilities() const {
  if (!(total_mass_ > 0.0)) {
    throw Error(ErrorCode::kDegenerateSpectrum, "zero total eigenvalue mass");
  }
  return eigenvalues_ / total_mass_;
}

Centered center(const Trajectory& h) {
  Centered out;
  out.mean = h.values().colwise().mean().transpose();
  out.values = h.values().rowwise() - out.mean.transpose();
  return out;
}

Spectrum covariance_spectrum(const Trajectory& h, SpectrumPath path) {
  const Centered c = center(h);
  return Spectrum::from_eigenvalues(centered_eigen(c.values, path, false).values);
}

double spectral_entropy(const Spectrum& s) {
  const Eigen::VectorXd p = s.probabilities();
  double entropy = 0.0;
  for (const double pi : p) {
    if (pi > 0.0) entropy -= pi * std::log(pi);
  }
  return std::max(entropy, 0.0);
}

double effective_rank(const Spectrum& s) { return std::exp(spectral_entropy(s)); }

ManifoldBasis principal_subspace(const Trajectory& h, double energy_threshold) {
  if (!(energy_threshold > 0.0 && energy_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "energy threshold must lie in (0, 1]");
  }
  if (h.rows() < 2) {
    throw Error(ErrorCode::kTrajectoryTooShort, "principal subspace needs at least 2 rows");
  }
  const Centered c = center(h);
  EigenPairs pairs = centered_eigen(c.values, SpectrumPath::kAuto, true);
  const Spectrum s = Spectrum::from_eigenvalues(pairs.values);
  if (!(s.total_mass() > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "all rows are identical");
  }

  const Eigen::VectorXd& lambda = s.eigenvalues();
  const Eigen::Index available = s.nonzero_count();
  const double target = energy_threshold * s.total_mass() * (1.0 - 1e-12);
  Eigen::Index k = 0;
  double cumulative = 0.0;
  while (k < available) {
    cumulative += lambda(k);
    ++k;
    if (cumulative >= target) break;
  }

  // Re-orthonormalize; Gram-path directions lose orthogonality for small
  // eigenvalues. Signs follow the original eigen-directions.
  const Eigen::MatrixXd raw = pairs.vectors.leftCols(k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(raw.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (q.col(j).dot(raw.col(j)) < 0.0) q.col(j) *= -1.0;
  }

  ManifoldBasis basis;
  basis.mean = c.mean;
  basis.directions = std::move(q);
  basis.captured_energy = std::min(1.0, cumulative / s.total_mass());
  return basis;
}

double confinement_ratio(const Spectrum& s, Eigen::Index k) {
  if (k < 1 || k > s.size()) {
    throw Error(ErrorCode::kRange, "k must lie in [1, " + std::to_string(s.size()) + "]");
  }
  if (!(s.total_mass() > 0.0)) {
    throw Error(ErrorCode::kDegenerateSpectrum, "zero total eigenvalue mass");
  }
  if (k == s.size()) return 1.0;
  return std::min(1.0, s.eigenvalues().head(k).sum() / s.total_mass());
}

}  // namespace rankshape
