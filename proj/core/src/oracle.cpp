#include "l2ot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "l2ot/parallel.hpp"

namespace l2ot::oracle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

double kde_direct(const KdeModel& model, const Eigen::VectorXd& y) {
  const Eigen::Index n = model.support.size();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double sq = (y - model.support.points.row(j).transpose()).squaredNorm();
    acc += direct_normal_pdf(sq, model.bandwidth_sq, model.dim());
  }
  return acc / static_cast<double>(n);
}

double kde_direct_1d(const KdeModel& model, double y) {
  const Eigen::Index n = model.support.size();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double diff = y - model.support.points(j, 0);
    acc += direct_normal_pdf(diff * diff, model.bandwidth_sq, 1);
  }
  return acc / static_cast<double>(n);
}

double joint_direct(const JointModel& joint, double y, double yt) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UnsupervisedJoint>) {
          return kde_direct_1d(m.target, y) * kde_direct_1d(m.transformed_source, yt);
        } else if constexpr (std::is_same_v<T, SupervisedJoint>) {
          const Eigen::Index k = m.pairs.size();
          double acc = 0.0;
          for (Eigen::Index i = 0; i < k; ++i) {
            const double dy = y - m.pairs.target(i, 0);
            const double dt = yt - m.pairs.source(i, 0);
            acc += direct_normal_pdf(dy * dy, m.h_sq, 1) *
                   direct_normal_pdf(dt * dt, m.ht_sq, 1);
          }
          return acc / static_cast<double>(k);
        } else {
          const double u =
              kde_direct_1d(m.unsup.target, y) * kde_direct_1d(m.unsup.transformed_source, yt);
          const Eigen::Index k = m.sup.pairs.size();
          double s = 0.0;
          for (Eigen::Index i = 0; i < k; ++i) {
            const double dy = y - m.sup.pairs.target(i, 0);
            const double dt = yt - m.sup.pairs.source(i, 0);
            s += direct_normal_pdf(dy * dy, m.sup.h_sq, 1) *
                 direct_normal_pdf(dt * dt, m.sup.ht_sq, 1);
          }
          s /= static_cast<double>(k);
          return (1.0 - m.lambda) * u + m.lambda * s;
        }
      },
      joint);
}

double trapezoid_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

}  // namespace

double direct_normal_pdf(double sq_dist, double variance, int dim) {
  if (!(variance > 0.0)) throw std::domain_error("direct_normal_pdf: variance must be positive");
  return std::pow(kTwoPi * variance, -0.5 * dim) * std::exp(-0.5 * sq_dist / variance);
}

void QuadratureGrid::check_spacing(double min_bandwidth) const {
  if (!(min_bandwidth > 0.0)) {
    throw std::invalid_argument("QuadratureGrid: bandwidth must be positive");
  }
  for (const Axis& a : axes) {
    if (a.n < 2 || !(a.hi > a.lo)) throw std::invalid_argument("QuadratureGrid: bad axis");
    if (a.spacing() > min_bandwidth / 4.0) {
      throw std::invalid_argument("QuadratureGrid: spacing too coarse for the bandwidth");
    }
  }
}

Axis auto_axis(double center_lo, double center_hi, const std::vector<double>& bandwidth_sqs,
               int min_points) {
  if (bandwidth_sqs.empty()) throw std::invalid_argument("auto_axis: no bandwidths");
  double max_bw = 0.0;
  double min_bw = std::numeric_limits<double>::infinity();
  for (double v : bandwidth_sqs) {
    if (!(v > 0.0)) throw std::invalid_argument("auto_axis: bandwidths must be positive");
    const double bw = std::sqrt(v);
    max_bw = std::max(max_bw, bw);
    min_bw = std::min(min_bw, bw);
  }
  Axis axis;
  axis.lo = center_lo - 6.5 * max_bw;
  axis.hi = center_hi + 6.5 * max_bw;
  const double span = axis.hi - axis.lo;
  const int needed = static_cast<int>(std::ceil(span / (min_bw / 4.0))) + 2;
  axis.n = std::max(min_points, needed);
  return axis;
}

double quad_1d(const std::function<double(double)>& f, const Axis& axis) {
  const double h = axis.spacing();
  std::vector<double> partials(static_cast<std::size_t>(axis.n), 0.0);
  for (int i = 0; i < axis.n; ++i) {
    const double y = axis.lo + h * i;
    partials[static_cast<std::size_t>(i)] = trapezoid_weight(i, axis.n) * f(y);
  }
  return h * pairwise_tree_sum(std::move(partials));
}

double quad_2d(const std::function<double(double, double)>& f, const Axis& ay, const Axis& ax) {
  const double hy = ay.spacing();
  const double hx = ax.spacing();
  std::vector<double> row_partials(static_cast<std::size_t>(ay.n), 0.0);

#ifdef L2OT_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < ay.n; ++i) {
    const double y = ay.lo + hy * i;
    std::vector<double> cols(static_cast<std::size_t>(ax.n), 0.0);
    for (int j = 0; j < ax.n; ++j) {
      const double x = ax.lo + hx * j;
      cols[static_cast<std::size_t>(j)] = trapezoid_weight(j, ax.n) * f(y, x);
    }
    row_partials[static_cast<std::size_t>(i)] =
        trapezoid_weight(i, ay.n) * pairwise_tree_sum(std::move(cols));
  }
  return hy * hx * pairwise_tree_sum(std::move(row_partials));
}

double quad_mass(const KdeModel& model, const QuadratureGrid& grid) {
  if (model.dim() != grid.dim() || grid.dim() < 1 || grid.dim() > 2) {
    throw std::invalid_argument("quad_mass: grid/model dimension mismatch (d <= 2)");
  }
  grid.check_spacing(std::sqrt(model.bandwidth_sq));
  if (grid.dim() == 1) {
    return quad_1d([&](double y) { return kde_direct_1d(model, y); }, grid.axes[0]);
  }
  return quad_2d(
      [&](double y0, double y1) {
        Eigen::Vector2d y(y0, y1);
        return kde_direct(model, y);
      },
      grid.axes[0], grid.axes[1]);
}

double quad_l2(const KdeModel& a, const KdeModel& b, const QuadratureGrid& grid) {
  if (a.dim() != b.dim() || a.dim() != grid.dim() || grid.dim() > 2) {
    throw std::invalid_argument("quad_l2: dimension mismatch (d <= 2)");
  }
  grid.check_spacing(std::sqrt(std::min(a.bandwidth_sq, b.bandwidth_sq)));
  if (grid.dim() == 1) {
    return quad_1d(
        [&](double y) {
          const double diff = kde_direct_1d(a, y) - kde_direct_1d(b, y);
          return diff * diff;
        },
        grid.axes[0]);
  }
  return quad_2d(
      [&](double y0, double y1) {
        Eigen::Vector2d y(y0, y1);
        const double diff = kde_direct(a, y) - kde_direct(b, y);
        return diff * diff;
      },
      grid.axes[0], grid.axes[1]);
}

double quad_expectation(const std::function<double(double, double)>& cost,
                        const JointModel& joint, const Axis& axis_y, const Axis& axis_yt) {
  return quad_2d([&](double y, double yt) { return cost(y, yt) * joint_direct(joint, y, yt); },
                 axis_y, axis_yt);
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& theta, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Eigen::VectorXd grad(theta.size());
  Eigen::VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = step * (1.0 + std::abs(theta[i]));
    probe[i] = theta[i] + h;
    const double f_plus = f(probe);
    probe[i] = theta[i] - h;
    const double f_minus = f(probe);
    probe[i] = theta[i];
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      throw std::domain_error("fd_gradient: non-finite function value near theta");
    }
    grad[i] = (f_plus - f_minus) / (2.0 * h);
  }
  return grad;
}

}  // namespace l2ot::oracle
