#include "l2ot/density.hpp"

#include <stdexcept>

#include "l2ot/kernel.hpp"

namespace l2ot {

KdeModel::KdeModel(PointCloud support_cloud, double bandwidth_sq_value)
    : support(std::move(support_cloud)), bandwidth_sq(bandwidth_sq_value) {
  if (bandwidth_sq < 0.0) throw std::domain_error("KdeModel: bandwidth_sq must be >= 0");
}

Eigen::VectorXd KdeModel::mean() const {
  return support.points.colwise().mean().transpose();
}

Eigen::MatrixXd KdeModel::covariance() const {
  const Eigen::Index n = support.size();
  const Eigen::MatrixXd centered = support.points.rowwise() - support.points.colwise().mean();
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n);  // population moments
  cov.diagonal().array() += bandwidth_sq;
  return cov;
}

double kde_eval(const KdeModel& model, const Eigen::VectorXd& y) {
  if (y.size() != model.dim()) throw std::invalid_argument("kde_eval: dimension mismatch");
  if (model.is_dirac()) {
    throw std::domain_error(
        "kde_eval: Dirac model has no density; use the moment accessors or the "
        "closed-form convolution terms");
  }
  const Eigen::Index n = model.support.size();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    acc += gaussian_pdf(y, model.support.points.row(j).transpose(), model.bandwidth_sq);
  }
  return acc / static_cast<double>(n);
}

namespace {

double supervised_eval(const SupervisedJoint& m, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& y_tilde) {
  const Eigen::Index k = m.pairs.size();
  if (k == 0) throw std::invalid_argument("joint_eval: empty correspondence set");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += gaussian_pdf(y, m.pairs.target.row(i).transpose(), m.h_sq) *
           gaussian_pdf(y_tilde, m.pairs.source.row(i).transpose(), m.ht_sq);
  }
  return acc / static_cast<double>(k);
}

}  // namespace

double joint_eval(const JointModel& model, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& y_tilde) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UnsupervisedJoint>) {
          return kde_eval(m.target, y) * kde_eval(m.transformed_source, y_tilde);
        } else if constexpr (std::is_same_v<T, SupervisedJoint>) {
          return supervised_eval(m, y, y_tilde);
        } else {
          if (m.lambda < 0.0 || m.lambda > 1.0) {
            throw std::domain_error("joint_eval: lambda must be in [0, 1]");
          }
          const double u = kde_eval(m.unsup.target, y) *
                           kde_eval(m.unsup.transformed_source, y_tilde);
          const double s = supervised_eval(m.sup, y, y_tilde);
          return (1.0 - m.lambda) * u + m.lambda * s;
        }
      },
      model);
}

}  // namespace l2ot
