#pragma once

#include <Eigen/Core>
#include <variant>

#include "l2ot/cloud.hpp"

namespace l2ot {

/// Isotropic-Gaussian KDE with uniform weights 1/n over a point cloud.
/// bandwidth_sq == 0 denotes the empirical (Dirac) measure: density
/// evaluation is then undefined, but the moment accessors remain exact.
struct KdeModel {
  PointCloud support;
  double bandwidth_sq = 0.0;

  KdeModel() = default;
  KdeModel(PointCloud support_cloud, double bandwidth_sq_value);

  int dim() const { return support.dim(); }
  bool is_dirac() const { return bandwidth_sq == 0.0; }

  /// Mixture mean; equals the empirical mean for every bandwidth.
  Eigen::VectorXd mean() const;
  /// Mixture covariance: empirical (population) covariance + bandwidth_sq * I.
  Eigen::MatrixXd covariance() const;
};

/// Mixture density value at y. Requires bandwidth_sq > 0; Dirac models must
/// be queried through the moment accessors or the closed-form cost terms.
double kde_eval(const KdeModel& model, const Eigen::VectorXd& y);

/// Joint density over (y, y_tilde) built from independent marginals:
/// gamma(y, y~) = target(y) * transformed_source(y~).
struct UnsupervisedJoint {
  KdeModel target;
  KdeModel transformed_source;
};

/// Joint density from correspondences. `pairs.source` holds the transformed
/// source side phi(x^(k)); the transform is applied before construction so
/// one dataset serves every transform iterate.
struct SupervisedJoint {
  CorrespondenceSet pairs;
  double h_sq = 0.0;   // kernel variance on the target side
  double ht_sq = 0.0;  // kernel variance on the transformed-source side
};

/// Convex mixture (1 - lambda) * unsupervised + lambda * supervised.
struct SemiSupervisedJoint {
  UnsupervisedJoint unsup;
  SupervisedJoint sup;
  double lambda = 0.5;  // in [0, 1]
};

using JointModel = std::variant<UnsupervisedJoint, SupervisedJoint, SemiSupervisedJoint>;

/// Joint density at (y, y_tilde). All component bandwidths must be positive.
double joint_eval(const JointModel& model, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& y_tilde);

}  // namespace l2ot
