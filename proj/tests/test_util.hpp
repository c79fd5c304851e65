#pragma once

#include <Eigen/Core>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

#include "l2ot/cloud.hpp"
#include "l2ot/rng.hpp"
#include "l2ot/tps.hpp"

namespace testutil {

// Distance in representable doubles between two finite values of equal sign.
inline std::uint64_t ulps_between(double a, double b) {
  if (a == b) return 0;
  const auto ia = std::bit_cast<std::int64_t>(a);
  const auto ib = std::bit_cast<std::int64_t>(b);
  if ((ia < 0) != (ib < 0)) return UINT64_MAX;
  return static_cast<std::uint64_t>(ia > ib ? ia - ib : ib - ia);
}

inline Eigen::MatrixXd random_points(std::mt19937_64& rng, Eigen::Index n, int d,
                                     double lo = 0.0, double hi = 1.0) {
  Eigen::MatrixXd pts(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) pts(i, c) = l2ot::uniform_in(rng, lo, hi);
  }
  return pts;
}

inline l2ot::PointCloud random_cloud(std::mt19937_64& rng, Eigen::Index n, int d,
                                     double lo = 0.0, double hi = 1.0) {
  return l2ot::PointCloud(random_points(rng, n, d, lo, hi));
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int d, double lo = 0.0,
                                     double hi = 1.0) {
  Eigen::VectorXd v(d);
  for (int c = 0; c < d; ++c) v[c] = l2ot::uniform_in(rng, lo, hi);
  return v;
}

// A mild ground-truth warp: near-identity affine plus a small projected
// spline correction on a coarse lattice.
inline l2ot::TpsTransform random_mild_warp(std::mt19937_64& rng, int d,
                                           double affine_mag = 0.05, double spline_mag = 0.02) {
  l2ot::TpsTransform t = l2ot::TpsTransform::identity(d);
  t.controls = l2ot::grid_controls(d, 3);
  t.weights = Eigen::MatrixXd::Zero(t.controls.rows(), d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      t.affine(r, c) += l2ot::uniform_in(rng, -affine_mag, affine_mag);
    }
    t.offset[r] = l2ot::uniform_in(rng, -affine_mag, affine_mag);
  }
  if (spline_mag > 0.0) {
    for (Eigen::Index r = 0; r < t.weights.rows(); ++r) {
      for (int c = 0; c < d; ++c) {
        t.weights(r, c) = l2ot::uniform_in(rng, -spline_mag, spline_mag);
      }
    }
    t.weights = l2ot::project_side_conditions(t.weights, t.controls);
  }
  return t;
}

}  // namespace testutil
