#include "l2ot/cloud.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "l2ot/rng.hpp"

namespace l2ot {

PointCloud::PointCloud(Eigen::MatrixXd pts) : points(std::move(pts)) {
  if (points.rows() < 1 || points.cols() < 1) {
    throw std::invalid_argument("PointCloud: must be non-empty with dim >= 1");
  }
}

CorrespondenceSet::CorrespondenceSet(Eigen::MatrixXd target_pts, Eigen::MatrixXd source_pts)
    : target(std::move(target_pts)), source(std::move(source_pts)) {
  if (target.rows() != source.rows() || target.cols() != source.cols()) {
    throw std::invalid_argument("CorrespondenceSet: target/source shape mismatch");
  }
  if (target.cols() < 1) {
    throw std::invalid_argument("CorrespondenceSet: dim must be >= 1");
  }
}

bool UnitBoxMap::is_identity(double tol) const {
  for (Eigen::Index d = 0; d < offset.size(); ++d) {
    if (degenerate[static_cast<std::size_t>(d)]) return false;
    if (std::abs(offset[d]) > tol || std::abs(scale[d] - 1.0) > tol) return false;
  }
  return true;
}

Eigen::VectorXd UnitBoxMap::normalize(const Eigen::VectorXd& x) const {
  Eigen::VectorXd u(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    u[d] = degenerate[static_cast<std::size_t>(d)] ? 0.5 : (x[d] - offset[d]) / scale[d];
  }
  return u;
}

Eigen::VectorXd UnitBoxMap::denormalize(const Eigen::VectorXd& u) const {
  return offset + scale.cwiseProduct(u);
}

Eigen::MatrixXd UnitBoxMap::normalize_rows(const Eigen::MatrixXd& pts) const {
  Eigen::MatrixXd out(pts.rows(), pts.cols());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    out.row(i) = normalize(pts.row(i).transpose()).transpose();
  }
  return out;
}

Eigen::MatrixXd UnitBoxMap::denormalize_rows(const Eigen::MatrixXd& pts) const {
  Eigen::MatrixXd out(pts.rows(), pts.cols());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    out.row(i) = denormalize(pts.row(i).transpose()).transpose();
  }
  return out;
}

std::pair<PointCloud, UnitBoxMap> normalize_cloud(const PointCloud& raw) {
  const int d = raw.dim();
  UnitBoxMap map;
  map.offset.resize(d);
  map.scale.resize(d);
  map.degenerate.assign(static_cast<std::size_t>(d), 0);

  for (int c = 0; c < d; ++c) {
    const double lo = raw.points.col(c).minCoeff();
    const double hi = raw.points.col(c).maxCoeff();
    map.offset[c] = lo;
    if (hi == lo) {
      map.scale[c] = 0.0;
      map.degenerate[static_cast<std::size_t>(c)] = 1;
    } else {
      map.scale[c] = hi - lo;
    }
  }
  return {PointCloud(map.normalize_rows(raw.points)), map};
}

PointCloud subsample(const PointCloud& cloud, Eigen::Index max_n, std::uint64_t seed) {
  if (max_n < 1) throw std::invalid_argument("subsample: max_n must be >= 1");
  const Eigen::Index n = cloud.size();
  if (n <= max_n) return cloud;

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < max_n; ++i) {
    const auto j = i + static_cast<Eigen::Index>(
                           bounded_rand(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(max_n));
  std::sort(idx.begin(), idx.end());  // keep input order

  Eigen::MatrixXd out(max_n, cloud.dim());
  for (Eigen::Index i = 0; i < max_n; ++i) {
    out.row(i) = cloud.points.row(idx[static_cast<std::size_t>(i)]);
  }
  return PointCloud(std::move(out));
}

}  // namespace l2ot
