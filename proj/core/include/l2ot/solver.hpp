#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "l2ot/cost.hpp"

namespace l2ot {

enum class ControlPlacement { Grid, KMeans };

/// Optimiser configuration. The annealing schedule and stopping rules are
/// engineering defaults, not values taken from any reference; tune freely.
struct SolverConfig {
  int max_outer = 4;           // annealing stages
  double anneal_factor = 0.5;  // bandwidth decay per stage, in (0, 1)
  double initial_h = 0.5;      // starting bandwidth in unit-box units (0 = Dirac)
  int inner_iters = 200;       // max accepted steps per stage
  double grad_tol = 1e-6;      // projected-gradient stop
  double ls_shrink = 0.5;      // backtracking factor
  double ls_decrease = 1e-4;   // Armijo sufficient-decrease constant
  std::uint64_t seed = 0;
  bool anneal_hc = false;      // also anneal the robustness scale (ends at cfg.hc)
  ControlPlacement placement = ControlPlacement::Grid;
  int grid_size = 0;           // control lattice points per axis; 0 = per-dim default

  void validate() const;
};

/// One accepted iterate (iter 0 is the stage's starting point).
struct IterRecord {
  int stage = 0;
  int iter = 0;
  double step = 0.0;
  CostBreakdown breakdown;  // gradient omitted
  double grad_norm = 0.0;   // projected-gradient L2 norm at this iterate
};

struct SolveReport {
  TpsTransform transform;
  std::vector<IterRecord> trace;
  std::vector<std::size_t> stage_starts;  // index into trace per stage
  bool converged = false;                 // grad_tol reached in the final stage
  double wall_seconds = 0.0;              // not part of any serialised output
  CostBreakdown final_breakdown;
};

/// Geometric bandwidth sequence initial_h * anneal_factor^s, s = 0..max_outer-1.
std::vector<double> anneal_schedule(const SolverConfig& cfg);

/// Estimate the transform minimising the configured cost by projected
/// gradient descent with Armijo backtracking, annealing h (and h~ jointly)
/// across stages. Deterministic for fixed inputs, config and seed. Starts
/// from the identity, or from a ridge regression fit to the correspondences
/// when that has the lower initial cost.
SolveReport solve(const PointCloud& target, const PointCloud& source,
                  const CorrespondenceSet* correspondences, const CostConfig& cost_cfg,
                  const PenaltyParams& penalties, const SolverConfig& solver_cfg);

/// Root-mean-square of |phi(x^(k)) - y^(k)| over the pairs.
double evaluate_fit(const TpsTransform& transform, const CorrespondenceSet& pairs);

/// CSV trace: stage,iter,step,t0..t5,combined_T,total,grad_norm per accepted
/// iterate, 17 significant digits, stable column order.
void write_trace_csv(std::ostream& os, const SolveReport& report);

}  // namespace l2ot
