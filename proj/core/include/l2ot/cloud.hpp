#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace l2ot {

/// A finite sample set in R^d, one point per row. Iteration order is the
/// input order everywhere in the library so runs are reproducible.
struct PointCloud {
  Eigen::MatrixXd points;  // n x d

  PointCloud() = default;
  explicit PointCloud(Eigen::MatrixXd pts);

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// Paired samples (target y^(k), source x^(k)). May be empty; operations that
/// need pairs treat an empty set as "no supervised data".
struct CorrespondenceSet {
  Eigen::MatrixXd target;  // k x d
  Eigen::MatrixXd source;  // k x d

  CorrespondenceSet() = default;
  CorrespondenceSet(Eigen::MatrixXd target_pts, Eigen::MatrixXd source_pts);

  Eigen::Index size() const { return target.rows(); }
  int dim() const { return static_cast<int>(target.cols()); }
};

/// Per-dimension affine map produced by unit-box normalisation:
///   normalised u_d = (x_d - offset_d) / scale_d      (0.5 on degenerate dims)
///   denormalised x_d = offset_d + scale_d * u_d
struct UnitBoxMap {
  Eigen::VectorXd offset;           // per-dim minimum
  Eigen::VectorXd scale;            // per-dim span (0 on degenerate dims)
  std::vector<std::uint8_t> degenerate;

  bool is_identity(double tol = 0.0) const;
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& u) const;
  Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& pts) const;
  Eigen::MatrixXd denormalize_rows(const Eigen::MatrixXd& pts) const;
};

/// Scale/shift each dimension into [0, 1]; returns the cloud and the map whose
/// `denormalize` restores the original coordinates. A dimension with
/// max == min is degenerate and maps to 0.5.
std::pair<PointCloud, UnitBoxMap> normalize_cloud(const PointCloud& raw);

/// Uniform sample without replacement of at most max_n points, deterministic
/// per seed (the draw does not depend on the platform's distribution
/// implementations). Clouds already within the cap are returned unchanged;
/// sampled points keep their input order.
PointCloud subsample(const PointCloud& cloud, Eigen::Index max_n, std::uint64_t seed);

}  // namespace l2ot
