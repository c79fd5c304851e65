#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "l2ot/cloud.hpp"

namespace l2ot {

/// Radial basis of the spline correction term.
///   ThinPlate2d:   U(r) = r^2 log r  (U(0) = 0), the planar thin-plate kernel
///   Biharmonic3d:  U(r) = -r, the odd-dimension polyharmonic choice
enum class RadialKernel { ThinPlate2d, Biharmonic3d };

RadialKernel default_kernel(int dim);
double radial_value(RadialKernel kernel, double r);
std::string kernel_name(RadialKernel kernel);

/// Smooth parametric transfer function
///   phi(x) = A x + b + sum_m W[m,:] U(|x - c_m|)
/// Side conditions sum_m W[m,:] = 0 and sum_m c_m W[m,:]^T = 0 keep the
/// bending energy finite; fitting and the solver's projection steps maintain
/// them. With W = 0 the map is exactly affine.
struct TpsTransform {
  int dim = 0;
  RadialKernel kernel = RadialKernel::Biharmonic3d;
  Eigen::MatrixXd controls;  // m x dim, m >= dim + 1, affinely independent
  Eigen::MatrixXd affine;    // dim x dim (A)
  Eigen::VectorXd offset;    // dim (b)
  Eigen::MatrixXd weights;   // m x dim (W)

  /// Identity map with a minimal simplex of control points and W = 0.
  static TpsTransform identity(int dim);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& points) const;

  Eigen::Index control_count() const { return controls.rows(); }

  // --- linear parameterisation -------------------------------------------
  // phi(x)^T = f(x)^T Theta with feature f(x) = [x; 1; U(|x - c_m|)_m] and
  // Theta = [A^T; b^T; W]  ((dim + 1 + m) x dim). The flat parameter vector
  // used by gradients and finite differences is vec(Theta), column-major.

  Eigen::VectorXd features(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd feature_rows(const Eigen::MatrixXd& points) const;

  Eigen::Index param_count() const { return (dim + 1 + control_count()) * dim; }
  Eigen::MatrixXd packed() const;                    // Theta
  void set_packed(const Eigen::MatrixXd& theta);
  Eigen::VectorXd param_vector() const;              // vec(Theta)
  void set_param_vector(const Eigen::VectorXd& p);

  void validate() const;
};

/// Exact linear map from parameter perturbations to output perturbations at x:
/// a dim x param_count() matrix J with phi_{theta+delta}(x) = phi_theta(x) + J delta.
Eigen::MatrixXd tps_param_jacobian(const TpsTransform& t, const Eigen::VectorXd& x);

/// Interpolating (ridge = 0) or ridge-regularised TPS through landmark pairs;
/// control points are the sources. Throws SolveError on degenerate (affinely
/// dependent) sources. The default ridge tames near-singular configurations.
TpsTransform tps_fit_landmarks(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& targets,
                               double ridge = 1e-8);

/// Least-squares TPS with a fixed control set (regression form, used for
/// warm starts): minimises |phi(sources) - targets|^2 + ridge * bending,
/// subject to the side conditions.
TpsTransform tps_fit_regression(const Eigen::MatrixXd& control_points,
                                const Eigen::MatrixXd& sources,
                                const Eigen::MatrixXd& targets, double ridge);

/// K[i,j] = U(|c_i - c_j|) over the control points.
Eigen::MatrixXd bending_matrix(const Eigen::MatrixXd& controls, RadialKernel kernel);

/// trace(W^T K W): the discrete thin-plate smoothness quadratic. Zero iff the
/// map is affine. The continuous curvature integral over R^d equals 8*pi
/// times this value for both kernels; the constant is absorbed by the
/// smoothness weight.
double bending_energy(const TpsTransform& t);

/// Remove the side-condition-violating component of W (projection onto the
/// span orthogonal to [controls, 1]).
Eigen::MatrixXd project_side_conditions(const Eigen::MatrixXd& weights,
                                        const Eigen::MatrixXd& controls);

/// Weights and box for the out-of-range and smoothness penalties.
struct PenaltyParams {
  double lambda2 = 0.1;    // range-penalty weight
  double lambda3 = 1e-3;   // smoothness weight
  double range_lo = 0.0;
  double range_hi = 1.0;

  void validate() const;
};

/// Mean over points of the summed squared hinge distance to the box
/// [range_lo, range_hi]^d. Zero iff every point is inside; the one-sided
/// gradient at an exact boundary is 0.
double range_penalty(const Eigen::MatrixXd& points, const PenaltyParams& p);

/// d(range_penalty)/d(points), same shape as points.
Eigen::MatrixXd range_penalty_gradient(const Eigen::MatrixXd& points, const PenaltyParams& p);

/// Flat key-value text record; numbers carry 17 significant digits so the
/// round trip is bit-exact.
void write_transform(std::ostream& os, const TpsTransform& t);
TpsTransform read_transform(std::istream& is);
void save_transform(const std::string& path, const TpsTransform& t);
TpsTransform load_transform(const std::string& path);

/// Regular g^dim lattice over the unit box.
Eigen::MatrixXd grid_controls(int dim, int per_axis);

/// Deterministic k-means centroids of a cloud (k-means++ seeding, fixed
/// iteration cap); the data-adaptive alternative to the lattice.
Eigen::MatrixXd kmeans_controls(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                                int max_iters = 25);

int default_grid_size(int dim);

}  // namespace l2ot
