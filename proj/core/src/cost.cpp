#include "l2ot/cost.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "l2ot/parallel.hpp"

namespace l2ot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

double norm_const(double variance, int dim) {
  return std::exp(-0.5 * static_cast<double>(dim) * std::log(kTwoPi * variance));
}

// S = sum_i sum_j exp(-|A_i - B_j|^2 / (2v)). If grad_a is non-null it
// receives dS/dA (same shape as A). Rows of A are processed independently and
// the row partials are combined with a fixed pairwise tree, so the result is
// bit-identical for any worker count.
double exp_cross_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double v,
                     Eigen::MatrixXd* grad_a) {
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();
  const Eigen::Index d = a.cols();
  std::vector<double> partials(static_cast<std::size_t>(na), 0.0);
  if (grad_a) grad_a->setZero(na, d);
  const double inv_two_v = 0.5 / v;
  const double inv_v = 1.0 / v;

#ifdef L2OT_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index i = 0; i < na; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < nb; ++j) {
      double sq = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = a(i, c) - b(j, c);
        sq += diff * diff;
      }
      const double e = std::exp(-sq * inv_two_v);
      row_sum += e;
      if (grad_a) {
        for (Eigen::Index c = 0; c < d; ++c) {
          (*grad_a)(i, c) += e * (b(j, c) - a(i, c)) * inv_v;
        }
      }
    }
    partials[static_cast<std::size_t>(i)] = row_sum;
  }
  return pairwise_tree_sum(std::move(partials));
}

// S = sum_{i1,i2} exp(-|A_i1 - A_i2|^2 / (2v)) over all ordered pairs,
// including i1 == i2. dS/dA_i counts each unordered pair twice.
double exp_self_sum(const Eigen::MatrixXd& a, double v, Eigen::MatrixXd* grad_a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index d = a.cols();
  std::vector<double> partials(static_cast<std::size_t>(n), 0.0);
  if (grad_a) grad_a->setZero(n, d);
  const double inv_two_v = 0.5 / v;
  const double two_inv_v = 2.0 / v;

#ifdef L2OT_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double sq = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = a(i, c) - a(j, c);
        sq += diff * diff;
      }
      const double e = std::exp(-sq * inv_two_v);
      row_sum += e;
      if (grad_a) {
        for (Eigen::Index c = 0; c < d; ++c) {
          (*grad_a)(i, c) += e * (a(j, c) - a(i, c)) * two_inv_v;
        }
      }
    }
    partials[static_cast<std::size_t>(i)] = row_sum;
  }
  return pairwise_tree_sum(std::move(partials));
}

// S = sum_k exp(-|P_k - Q_k|^2 / (2v)) over matched rows.
double exp_paired_sum(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, double v,
                      Eigen::MatrixXd* grad_p) {
  const Eigen::Index k = p.rows();
  const Eigen::Index d = p.cols();
  std::vector<double> partials(static_cast<std::size_t>(k), 0.0);
  if (grad_p) grad_p->setZero(k, d);
  const double inv_two_v = 0.5 / v;
  const double inv_v = 1.0 / v;
  for (Eigen::Index i = 0; i < k; ++i) {
    double sq = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double diff = p(i, c) - q(i, c);
      sq += diff * diff;
    }
    const double e = std::exp(-sq * inv_two_v);
    partials[static_cast<std::size_t>(i)] = e;
    if (grad_p) {
      for (Eigen::Index c = 0; c < d; ++c) {
        (*grad_p)(i, c) = e * (q(i, c) - p(i, c)) * inv_v;
      }
    }
  }
  return pairwise_tree_sum(std::move(partials));
}

void check_cloud_dims(const PointCloud& a, const PointCloud& b, const char* where) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(where) + ": cloud dimension mismatch");
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double CostConfig::pair_variance() const {
  return mode == CostMode::LegacyWeights ? h_sq + ht_sq : h_sq + ht_sq + hc_sq;
}

void CostConfig::validate() const {
  if (h_sq < 0.0 || ht_sq < 0.0) {
    throw std::domain_error("CostConfig: bandwidth variances must be >= 0");
  }
  if (!(hc_sq > 0.0)) throw std::domain_error("CostConfig: hc_sq must be positive");
  if (lambda < 0.0 || lambda > 1.0) throw std::domain_error("CostConfig: lambda must be in [0, 1]");
  if (lambda1 < 0.0) throw std::domain_error("CostConfig: lambda1 must be >= 0");
}

std::string CostBreakdown::to_record() const {
  std::ostringstream os;
  os << "t0 " << fmt17(t0) << '\n'
     << "t1 " << fmt17(t1) << '\n'
     << "t2 " << fmt17(t2) << '\n'
     << "t3 " << fmt17(t3) << '\n'
     << "t4 " << fmt17(t4) << '\n'
     << "t5 " << fmt17(t5) << '\n'
     << "combined_T " << fmt17(combined_t) << '\n'
     << "total " << fmt17(total) << '\n';
  return os.str();
}

double term_T0(const PointCloud& target, double h_sq) {
  if (!(h_sq > 0.0)) {
    throw std::domain_error("term_T0: Dirac bandwidth makes the self-term infinite");
  }
  const double v = 2.0 * h_sq;
  const double n = static_cast<double>(target.size());
  return norm_const(v, target.dim()) / (n * n) * exp_self_sum(target.points, v, nullptr);
}

double term_T1(const PointCloud& transformed_source, double ht_sq) {
  if (!(ht_sq > 0.0)) {
    throw std::domain_error("term_T1: Dirac bandwidth makes the self-term infinite");
  }
  const double v = 2.0 * ht_sq;
  const double n = static_cast<double>(transformed_source.size());
  return norm_const(v, transformed_source.dim()) / (n * n) *
         exp_self_sum(transformed_source.points, v, nullptr);
}

double term_T2(const PointCloud& target, const PointCloud& transformed_source,
               const CostConfig& cfg) {
  cfg.validate();
  check_cloud_dims(target, transformed_source, "term_T2");
  const double v = cfg.pair_variance();
  if (!(v > 0.0)) throw std::domain_error("term_T2: zero combined variance");
  const double n = static_cast<double>(target.size());
  const double ns = static_cast<double>(transformed_source.size());
  const double s = exp_cross_sum(transformed_source.points, target.points, v, nullptr);
  return -2.0 / (n * ns) * norm_const(v, target.dim()) * s;
}

double term_T3(const CorrespondenceSet& correspondences, const TpsTransform& transform,
               const CostConfig& cfg) {
  cfg.validate();
  if (correspondences.size() == 0) return 0.0;
  const double v = cfg.pair_variance();
  if (!(v > 0.0)) throw std::domain_error("term_T3: zero combined variance");
  const Eigen::MatrixXd moved = transform.apply_rows(correspondences.source);
  const double k = static_cast<double>(correspondences.size());
  const double s = exp_paired_sum(moved, correspondences.target, v, nullptr);
  return -norm_const(v, correspondences.dim()) / k * s;
}

double robust_ot_unsup(const PointCloud& target, const PointCloud& transformed_source,
                       const CostConfig& cfg) {
  cfg.validate();
  check_cloud_dims(target, transformed_source, "robust_ot_unsup");
  const double v = cfg.h_sq + cfg.ht_sq + cfg.hc_sq;
  const double n = static_cast<double>(target.size());
  const double ns = static_cast<double>(transformed_source.size());
  const double s = exp_cross_sum(transformed_source.points, target.points, v, nullptr);
  return -1.0 / (n * ns) * norm_const(v, target.dim()) * s;
}

double robust_ot_sup(const CorrespondenceSet& correspondences, const TpsTransform& transform,
                     const CostConfig& cfg) {
  cfg.validate();
  if (correspondences.size() == 0) return 0.0;
  const double v = cfg.h_sq + cfg.ht_sq + cfg.hc_sq;
  const Eigen::MatrixXd moved = transform.apply_rows(correspondences.source);
  const double k = static_cast<double>(correspondences.size());
  const double s = exp_paired_sum(moved, correspondences.target, v, nullptr);
  return -norm_const(v, correspondences.dim()) / k * s;
}

double robust_ot_combined(const PointCloud& target, const PointCloud& transformed_source,
                          const CorrespondenceSet* correspondences,
                          const TpsTransform& transform, const CostConfig& cfg) {
  cfg.validate();
  const double u = robust_ot_unsup(target, transformed_source, cfg);
  const double s = (correspondences && correspondences->size() > 0)
                       ? robust_ot_sup(*correspondences, transform, cfg)
                       : 0.0;
  return (1.0 - cfg.lambda) * u + cfg.lambda * s;
}

CostBreakdown full_cost(const PointCloud& target, const PointCloud& source,
                        const CorrespondenceSet* correspondences, const TpsTransform& transform,
                        const CostConfig& cfg, const PenaltyParams& penalties,
                        bool with_gradient) {
  cfg.validate();
  penalties.validate();
  transform.validate();
  check_cloud_dims(target, source, "full_cost");
  if (source.dim() != transform.dim) {
    throw std::invalid_argument("full_cost: transform dimension mismatch");
  }
  const bool have_corr = correspondences && correspondences->size() > 0;
  if (have_corr && correspondences->dim() != transform.dim) {
    throw std::invalid_argument("full_cost: correspondence dimension mismatch");
  }
  if (cfg.mode == CostMode::CombinedMixture && cfg.lambda == 1.0 && !have_corr) {
    throw std::invalid_argument(
        "full_cost: no active data term (lambda = 1 without correspondences)");
  }

  const int d = transform.dim;
  const Eigen::Index n = target.size();
  const Eigen::Index ns = source.size();
  const Eigen::Index m = transform.control_count();

  const Eigen::MatrixXd feats = transform.feature_rows(source.points);
  const Eigen::MatrixXd transformed_pts = feats * transform.packed();
  const PointCloud transformed{Eigen::MatrixXd(transformed_pts)};

  CostBreakdown b;
  b.empty_correspondences = correspondences != nullptr && correspondences->size() == 0;

  Eigen::MatrixXd g_pts;   // d(total)/d(transformed source points)
  Eigen::MatrixXd g_corr;  // d(total)/d(transformed correspondence points)
  if (with_gradient) g_pts.setZero(ns, d);

  if (cfg.include_t0) b.t0 = term_T0(target, cfg.h_sq);

  if (cfg.include_t1) {
    if (!(cfg.ht_sq > 0.0)) {
      throw std::domain_error("full_cost: T1 is undefined for a Dirac source bandwidth");
    }
    const double v1 = 2.0 * cfg.ht_sq;
    const double coef = norm_const(v1, d) / (static_cast<double>(ns) * static_cast<double>(ns));
    Eigen::MatrixXd g1;
    const double s = exp_self_sum(transformed_pts, v1, with_gradient ? &g1 : nullptr);
    b.t1 = coef * s;
    if (with_gradient) g_pts += coef * g1;
  }

  const double v_pair = cfg.pair_variance();
  if (!(v_pair > 0.0)) throw std::domain_error("full_cost: zero combined variance");
  const double pair_norm = norm_const(v_pair, d);

  Eigen::MatrixXd moved_corr;
  if (have_corr) moved_corr = transform.apply_rows(correspondences->source);

  if (cfg.mode == CostMode::LegacyWeights) {
    const double coef2 =
        -2.0 / (static_cast<double>(n) * static_cast<double>(ns)) * pair_norm;
    Eigen::MatrixXd g2;
    const double s2 =
        exp_cross_sum(transformed_pts, target.points, v_pair, with_gradient ? &g2 : nullptr);
    b.t2 = coef2 * s2;
    if (with_gradient) g_pts += coef2 * g2;

    if (have_corr) {
      const double k = static_cast<double>(correspondences->size());
      const double coef3 = -pair_norm / k;
      Eigen::MatrixXd g3;
      const double s3 = exp_paired_sum(moved_corr, correspondences->target, v_pair,
                                       with_gradient ? &g3 : nullptr);
      b.t3 = coef3 * s3;
      if (with_gradient) g_corr = (cfg.lambda1 * coef3) * g3;
    }
    b.combined_t = b.t2 + cfg.lambda1 * b.t3;
  } else {
    const double coef_u =
        -1.0 / (static_cast<double>(n) * static_cast<double>(ns)) * pair_norm;
    Eigen::MatrixXd gu;
    const double su =
        exp_cross_sum(transformed_pts, target.points, v_pair, with_gradient ? &gu : nullptr);
    b.t2 = coef_u * su;
    if (with_gradient) g_pts += ((1.0 - cfg.lambda) * coef_u) * gu;

    if (have_corr) {
      const double k = static_cast<double>(correspondences->size());
      const double coef_s = -pair_norm / k;
      Eigen::MatrixXd gs;
      const double ss = exp_paired_sum(moved_corr, correspondences->target, v_pair,
                                       with_gradient ? &gs : nullptr);
      b.t3 = coef_s * ss;
      if (with_gradient) g_corr = (cfg.lambda * coef_s) * gs;
    }
    b.combined_t = (1.0 - cfg.lambda) * b.t2 + cfg.lambda * b.t3;
  }

  b.t4 = range_penalty(transformed_pts, penalties);
  if (with_gradient && penalties.lambda2 > 0.0) {
    g_pts += penalties.lambda2 * range_penalty_gradient(transformed_pts, penalties);
  }

  b.t5 = bending_energy(transform);

  b.total = (cfg.include_t0 ? b.t0 : 0.0) + (cfg.include_t1 ? b.t1 : 0.0) + b.combined_t +
            penalties.lambda2 * b.t4 + penalties.lambda3 * b.t5;

  if (with_gradient) {
    Eigen::MatrixXd g_theta = feats.transpose() * g_pts;
    if (have_corr && g_corr.size() > 0) {
      g_theta += transform.feature_rows(correspondences->source).transpose() * g_corr;
    }
    if (penalties.lambda3 > 0.0) {
      g_theta.bottomRows(m) += (2.0 * penalties.lambda3) *
                               (bending_matrix(transform.controls, transform.kernel) *
                                transform.weights);
    }
    b.gradient = Eigen::Map<const Eigen::VectorXd>(g_theta.data(), g_theta.size());
  }
  return b;
}

double l2_divergence(const KdeModel& target, const KdeModel& other) {
  if (target.dim() != other.dim()) {
    throw std::invalid_argument("l2_divergence: dimension mismatch");
  }
  if (target.is_dirac() || other.is_dirac()) {
    throw std::domain_error("l2_divergence: undefined for Dirac models");
  }
  const int d = target.dim();
  const double na = static_cast<double>(target.support.size());
  const double nb = static_cast<double>(other.support.size());
  const double va = 2.0 * target.bandwidth_sq;
  const double vb = 2.0 * other.bandwidth_sq;
  const double vab = target.bandwidth_sq + other.bandwidth_sq;

  const double t0 =
      norm_const(va, d) / (na * na) * exp_self_sum(target.support.points, va, nullptr);
  const double t1 =
      norm_const(vb, d) / (nb * nb) * exp_self_sum(other.support.points, vb, nullptr);
  const double cross = norm_const(vab, d) / (na * nb) *
                       exp_cross_sum(target.support.points, other.support.points, vab, nullptr);
  return t0 + t1 - 2.0 * cross;
}

double crossproduct_diagnostic(const CorrespondenceSet& correspondences,
                               const TpsTransform& transform, double h_sq, double ht_sq) {
  const double v = h_sq + ht_sq;
  if (!(v > 0.0)) throw std::domain_error("crossproduct_diagnostic: zero combined variance");
  if (correspondences.size() == 0) {
    throw std::invalid_argument("crossproduct_diagnostic: empty correspondence set");
  }
  const Eigen::MatrixXd moved = transform.apply_rows(correspondences.source);
  const double k = static_cast<double>(correspondences.size());
  const double s = exp_cross_sum(correspondences.target, moved, v, nullptr);
  return norm_const(v, correspondences.dim()) / (k * k) * s;
}

}  // namespace l2ot
