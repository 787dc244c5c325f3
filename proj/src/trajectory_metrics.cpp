#include "rankshape/trajectory_metrics.hpp"

#include <algorithm>

#include "rankshape/error.hpp"

namespace rankshape {

namespace {

double window_erank(const Trajectory& window) {
  const Spectrum s = covariance_spectrum(window);
  if (!(s.total_mass() > 0.0)) return 1.0;  // constant window: maximal collapse
  return effective_rank(s);
}

}  // namespace

std::vector<Eigen::Index> window_starts(Eigen::Index rows, Eigen::Index w, Eigen::Index stride) {
  if (w < 2) throw Error(ErrorCode::kInvalidArgument, "window width must be >= 2");
  if (stride < 1) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  std::vector<Eigen::Index> starts;
  if (rows <= w) {
    starts.push_back(0);
    return starts;
  }
  Eigen::Index i = 0;
  for (; i + w <= rows; i += stride) starts.push_back(i);
  if (starts.back() + w < rows) starts.push_back(rows - w);
  return starts;
}

WindowRankProfile windowed_min_effrank(const Trajectory& h, Eigen::Index w, Eigen::Index stride) {
  if (h.rows() < 2) {
    throw Error(ErrorCode::kTrajectoryTooShort, "windowed rank needs at least 2 rows");
  }
  WindowRankProfile profile;
  profile.window_width = w;
  profile.stride = stride;
  profile.window_starts = window_starts(h.rows(), w, stride);
  profile.r_max = std::min(w, h.dim());

  const Eigen::Index width = std::min(w, h.rows());
  profile.per_window_erank.reserve(profile.window_starts.size());
  for (const Eigen::Index start : profile.window_starts) {
    profile.per_window_erank.push_back(window_erank(h.slice(start, width)));
  }
  profile.min_erank =
      *std::min_element(profile.per_window_erank.begin(), profile.per_window_erank.end());
  return profile;
}

double norm_rank(const WindowRankProfile& profile) {
  if (profile.r_max < 2) {
    throw Error(ErrorCode::kNormalizationDegenerate, "r_max must be >= 2");
  }
  const double r_max = static_cast<double>(profile.r_max);
  return std::clamp((profile.min_erank - 1.0) / (r_max - 1.0), 0.0, 1.0);
}

}  // namespace rankshape
