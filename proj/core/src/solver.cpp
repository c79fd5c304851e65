#include "l2ot/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "l2ot/errors.hpp"

namespace l2ot {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Zero the side-condition-violating component of the W block of a packed
// gradient; steps along the projected direction keep the spline weights in
// the finite-bending subspace.
Eigen::MatrixXd project_gradient(const Eigen::MatrixXd& g_theta, const TpsTransform& t) {
  Eigen::MatrixXd out = g_theta;
  out.bottomRows(t.control_count()) =
      project_side_conditions(out.bottomRows(t.control_count()), t.controls);
  return out;
}

CostBreakdown checked_eval(const PointCloud& target, const PointCloud& source,
                           const CorrespondenceSet* corr, const TpsTransform& t,
                           const CostConfig& cfg, const PenaltyParams& pen, bool with_grad,
                           int stage, int iter) {
  CostBreakdown b = full_cost(target, source, corr, t, cfg, pen, with_grad);
  const bool grad_ok = !with_grad || b.gradient.allFinite();
  if (!std::isfinite(b.total) || !grad_ok) {
    throw NumericalError("solve: non-finite cost or gradient at stage " + std::to_string(stage) +
                         ", iterate " + std::to_string(iter));
  }
  return b;
}

IterRecord make_record(int stage, int iter, double step, const CostBreakdown& b,
                       double grad_norm) {
  IterRecord r;
  r.stage = stage;
  r.iter = iter;
  r.step = step;
  r.breakdown = b;
  r.breakdown.gradient.resize(0);
  r.grad_norm = grad_norm;
  return r;
}

}  // namespace

void SolverConfig::validate() const {
  if (max_outer < 1 || inner_iters < 1) throw std::invalid_argument("SolverConfig: counts >= 1");
  if (!(anneal_factor > 0.0 && anneal_factor < 1.0)) {
    throw std::invalid_argument("SolverConfig: anneal_factor must be in (0, 1)");
  }
  if (initial_h < 0.0) throw std::invalid_argument("SolverConfig: initial_h must be >= 0");
  if (!(grad_tol > 0.0) || !(ls_decrease > 0.0) || !(ls_shrink > 0.0 && ls_shrink < 1.0)) {
    throw std::invalid_argument("SolverConfig: bad tolerance or line-search parameter");
  }
  if (grid_size < 0) throw std::invalid_argument("SolverConfig: grid_size must be >= 0");
}

std::vector<double> anneal_schedule(const SolverConfig& cfg) {
  cfg.validate();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(cfg.max_outer));
  double h = cfg.initial_h;
  for (int s = 0; s < cfg.max_outer; ++s) {
    out.push_back(h);
    h *= cfg.anneal_factor;
  }
  return out;
}

double evaluate_fit(const TpsTransform& transform, const CorrespondenceSet& pairs) {
  if (pairs.size() == 0) throw std::invalid_argument("evaluate_fit: empty correspondence set");
  const Eigen::MatrixXd moved = transform.apply_rows(pairs.source);
  const double mse =
      (moved - pairs.target).rowwise().squaredNorm().sum() / static_cast<double>(pairs.size());
  return std::sqrt(mse);
}

SolveReport solve(const PointCloud& target, const PointCloud& source,
                  const CorrespondenceSet* correspondences, const CostConfig& cost_cfg,
                  const PenaltyParams& penalties, const SolverConfig& solver_cfg) {
  solver_cfg.validate();
  cost_cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  const int d = source.dim();
  const bool have_corr = correspondences && correspondences->size() > 0;

  const int g = solver_cfg.grid_size > 0 ? solver_cfg.grid_size : default_grid_size(d);
  Eigen::MatrixXd controls;
  if (solver_cfg.placement == ControlPlacement::Grid) {
    controls = grid_controls(d, g);
  } else {
    Eigen::Index k = 1;
    for (int i = 0; i < d; ++i) k *= g;
    k = std::min<Eigen::Index>(k, source.size());
    k = std::max<Eigen::Index>(k, d + 1);
    controls = kmeans_controls(source.points, static_cast<int>(k), solver_cfg.seed);
  }

  TpsTransform t = TpsTransform::identity(d);
  t.kernel = default_kernel(d);
  t.controls = controls;
  t.weights = Eigen::MatrixXd::Zero(controls.rows(), d);

  const std::vector<double> schedule = anneal_schedule(solver_cfg);

  // Per-stage configuration: h and h~ take the schedule value; hc optionally
  // decays along the same ratio, ending at the configured value.
  auto stage_cfg = [&](int s) {
    CostConfig cfg = cost_cfg;
    const double h = schedule[static_cast<std::size_t>(s)];
    cfg.h_sq = h * h;
    cfg.ht_sq = h * h;
    if (solver_cfg.anneal_hc) {
      const double decay =
          std::pow(solver_cfg.anneal_factor, static_cast<double>(s + 1 - solver_cfg.max_outer));
      const double hc = std::sqrt(cost_cfg.hc_sq) * decay;
      cfg.hc_sq = hc * hc;
    }
    return cfg;
  };

  // Warm start from a ridge regression to the correspondences when it has the
  // lower initial cost than the identity.
  if (have_corr) {
    TpsTransform warm = tps_fit_regression(controls, correspondences->source,
                                           correspondences->target, 1e-8);
    warm.weights = project_side_conditions(warm.weights, warm.controls);
    const CostConfig cfg0 = stage_cfg(0);
    const double f_id =
        full_cost(target, source, correspondences, t, cfg0, penalties, false).total;
    const double f_warm =
        full_cost(target, source, correspondences, warm, cfg0, penalties, false).total;
    if (std::isfinite(f_warm) && f_warm <= f_id) t = warm;
  }
  const TpsTransform initial = t;

  SolveReport report;
  report.converged = false;

  for (int s = 0; s < solver_cfg.max_outer; ++s) {
    const CostConfig cfg = stage_cfg(s);
    report.stage_starts.push_back(report.trace.size());

    CostBreakdown cur = checked_eval(target, source, correspondences, t, cfg, penalties, true,
                                     s, 0);
    Eigen::MatrixXd theta = t.packed();
    const Eigen::Index rows = theta.rows();
    auto grad_of = [&](const CostBreakdown& b) {
      Eigen::Map<const Eigen::MatrixXd> gm(b.gradient.data(), rows, d);
      return project_gradient(gm, t);
    };

    Eigen::MatrixXd grad = grad_of(cur);
    double gnorm = grad.norm();
    report.trace.push_back(make_record(s, 0, 0.0, cur, gnorm));

    double step = 0.0;
    Eigen::MatrixXd prev_theta, prev_grad;
    bool stage_converged = false;

    for (int it = 1; it <= solver_cfg.inner_iters; ++it) {
      if (gnorm <= solver_cfg.grad_tol) {
        stage_converged = true;
        break;
      }

      // Trial step: Barzilai-Borwein when history exists, else a conservative
      // first move; Armijo backtracking guarantees descent either way.
      double trial = step;
      if (prev_theta.size() > 0) {
        const Eigen::MatrixXd ds = theta - prev_theta;
        const Eigen::MatrixXd dg = grad - prev_grad;
        const double denom = (ds.array() * dg.array()).sum();
        if (denom > 0.0) trial = (ds.array() * ds.array()).sum() / denom;
      }
      if (!(trial > 0.0) || !std::isfinite(trial)) trial = 0.25 / std::max(gnorm, 1e-12);
      trial = std::min(trial, 1e6);

      const double g2 = gnorm * gnorm;
      bool accepted = false;
      CostBreakdown next;
      Eigen::MatrixXd next_theta;
      while (trial > 1e-16) {
        next_theta = theta - trial * grad;
        TpsTransform cand = t;
        cand.set_packed(next_theta);
        next = checked_eval(target, source, correspondences, cand, cfg, penalties, true, s, it);
        if (next.total <= cur.total - solver_cfg.ls_decrease * trial * g2) {
          accepted = true;
          t = cand;
          break;
        }
        trial *= solver_cfg.ls_shrink;
      }
      if (!accepted) break;  // no descent step at this precision

      prev_theta = theta;
      prev_grad = grad;
      theta = next_theta;
      cur = next;
      grad = grad_of(cur);
      gnorm = grad.norm();
      step = trial;
      report.trace.push_back(make_record(s, it, step, cur, gnorm));
    }
    if (s == solver_cfg.max_outer - 1) report.converged = stage_converged;
  }

  // Guarantee the post-condition: never return something worse than the
  // starting point under the final-stage configuration.
  const CostConfig final_cfg = stage_cfg(solver_cfg.max_outer - 1);
  CostBreakdown final_b =
      full_cost(target, source, correspondences, t, final_cfg, penalties, true);
  const CostBreakdown initial_b =
      full_cost(target, source, correspondences, initial, final_cfg, penalties, true);
  if (!(final_b.total <= initial_b.total)) {
    t = initial;
    final_b = initial_b;
  }

  report.transform = t;
  report.final_breakdown = final_b;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

void write_trace_csv(std::ostream& os, const SolveReport& report) {
  os << "stage,iter,step,t0,t1,t2,t3,t4,t5,combined_T,total,grad_norm\n";
  for (const IterRecord& r : report.trace) {
    const CostBreakdown& b = r.breakdown;
    os << r.stage << ',' << r.iter << ',' << fmt17(r.step) << ',' << fmt17(b.t0) << ','
       << fmt17(b.t1) << ',' << fmt17(b.t2) << ',' << fmt17(b.t3) << ',' << fmt17(b.t4) << ','
       << fmt17(b.t5) << ',' << fmt17(b.combined_t) << ',' << fmt17(b.total) << ','
       << fmt17(r.grad_norm) << '\n';
  }
}

}  // namespace l2ot
