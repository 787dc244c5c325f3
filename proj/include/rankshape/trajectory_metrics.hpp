#pragma once

#include <vector>

#include "rankshape/spectral_core.hpp"

namespace rankshape {

struct WindowRankProfile {
  Eigen::Index window_width = 0;
  Eigen::Index stride = 0;
  std::vector<Eigen::Index> window_starts;
  std::vector<double> per_window_erank;
  double min_erank = 1.0;
  Eigen::Index r_max = 0;  // min(window_width, d)
};

inline constexpr Eigen::Index kDefaultWindow = 64;
inline constexpr Eigen::Index kDefaultStride = 16;

/// Start offsets of the windows [i, i + w) covering a trajectory of `rows`
/// steps: 0, stride, 2*stride, ... plus a final window flushed to the end.
/// A trajectory no longer than w is a single window.
std::vector<Eigen::Index> window_starts(Eigen::Index rows, Eigen::Index w, Eigen::Index stride);

/// Effective rank of each sliding window and their minimum. A zero-variance
/// window counts as erank 1.
WindowRankProfile windowed_min_effrank(const Trajectory& h, Eigen::Index w = kDefaultWindow,
                                       Eigen::Index stride = kDefaultStride);

/// (min_erank - 1) / (r_max - 1), clamped to [0, 1].
double norm_rank(const WindowRankProfile& profile);

}  // namespace rankshape
