#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "l2ot/density.hpp"

namespace l2ot::oracle {

// Brute-force verifiers for the closed-form machinery. They are a documented
// developer API so alternate implementations can reuse them, but they belong
// to the test workflow: everything here evaluates densities pointwise with
// its own direct normal-pdf formula and integrates by trapezoid, independent
// of the convolution identities it is used to check.

/// One trapezoid axis: [lo, hi] sampled at n equally spaced nodes.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 2001;

  double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }
};

/// Tensor trapezoid grid, one axis per integration dimension (d <= 2).
/// Bounds must cover all but <= 1e-9 of every component kernel's mass and the
/// spacing must resolve the narrowest kernel (spacing <= bandwidth / 4).
struct QuadratureGrid {
  std::vector<Axis> axes;

  int dim() const { return static_cast<int>(axes.size()); }
  /// Throws std::invalid_argument when the spacing rule is violated for the
  /// given minimum bandwidth (standard deviation).
  void check_spacing(double min_bandwidth) const;
};

/// Auto-sized axis covering [center_lo, center_hi] padded by 6.5 times the
/// widest kernel, with spacing at most min(bandwidth)/4 and at least
/// min_points nodes.
Axis auto_axis(double center_lo, double center_hi, const std::vector<double>& bandwidth_sqs,
               int min_points = 2001);

/// Trapezoid integral of a scalar function over one axis.
double quad_1d(const std::function<double(double)>& f, const Axis& axis);

/// Trapezoid integral over the product of two axes. Rows of the outer axis
/// are reduced with a fixed pairwise tree, deterministically for any worker
/// count.
double quad_2d(const std::function<double(double, double)>& f, const Axis& ay, const Axis& ax);

/// Trapezoid estimate of the total mass of a KDE (d <= 2).
double quad_mass(const KdeModel& model, const QuadratureGrid& grid);

/// Trapezoid estimate of the squared L2 distance between two KDEs (d <= 2).
double quad_l2(const KdeModel& a, const KdeModel& b, const QuadratureGrid& grid);

/// Trapezoid estimate of <cost | gamma> = integral integral cost(y, y~)
/// gamma(y, y~) dy dy~ for 1-D variables; used to validate the closed-form
/// transport terms and the flat-prior inner-product identity.
double quad_expectation(const std::function<double(double, double)>& cost,
                        const JointModel& joint, const Axis& axis_y, const Axis& axis_yt);

/// Central finite differences per coordinate with step_i = step * (1 + |x_i|).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& theta, double step = 1e-5);

/// Direct-formula isotropic normal density; intentionally a separate code
/// path from the log-space kernel used by the cost engine.
double direct_normal_pdf(double sq_dist, double variance, int dim);

}  // namespace l2ot::oracle
