#pragma once

#include <Eigen/Core>
#include <string>

#include "l2ot/cloud.hpp"
#include "l2ot/density.hpp"
#include "l2ot/tps.hpp"

namespace l2ot {

/// Which data-term formulation the aggregate cost uses.
///   LegacyWeights:   t2 + lambda1 * t3, pair variance h^2 + h~^2
///   CombinedMixture: (1 - lambda) * unsup + lambda * sup, pair variance
///                    h^2 + h~^2 + hc^2 (the robust-transport form)
/// The factor 2 on the unsupervised double sum belongs to LegacyWeights only;
/// the two conventions are never mixed.
enum class CostMode { LegacyWeights, CombinedMixture };

struct CostConfig {
  double h_sq = 0.01;    // target-side kernel variance (h = 0.1)
  double ht_sq = 0.01;   // transformed-source-side kernel variance
  double hc_sq = 0.0025; // robust-cost variance (hc = 0.05), must stay positive
  // Legacy is the default: with T1 included, its factor-2 attraction balances
  // the self-term so matched densities are a stationary point. The combined
  // form is the transport reading; use it with the self-terms off (Dirac
  // bandwidths) or expect a spread bias.
  CostMode mode = CostMode::LegacyWeights;
  double lambda = 0.5;   // CombinedMixture mixing weight, in [0, 1]
  double lambda1 = 1.0;  // LegacyWeights correspondence weight
  bool include_t0 = false;  // constant in the transform; off while optimising
  bool include_t1 = true;

  /// Effective variance of the pairwise data terms for the active mode.
  double pair_variance() const;

  void validate() const;
};

/// Per-term values of one cost evaluation. Component fields are unweighted;
/// the weights appear once, in `total`:
///   total = [include_t0] t0 + [include_t1] t1 + combined_t
///           + lambda2 * t4 + lambda3 * t5
/// In LegacyWeights mode combined_t = t2 + lambda1 * t3; in CombinedMixture
/// mode t2/t3 hold the unsupervised/supervised robust-transport components and
/// combined_t = (1 - lambda) * t2 + lambda * t3.
struct CostBreakdown {
  double t0 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double t4 = 0.0;
  double t5 = 0.0;
  double combined_t = 0.0;
  double total = 0.0;
  Eigen::VectorXd gradient;  // d(total)/d(param_vector), empty if not requested
  bool empty_correspondences = false;

  /// "name value" lines, 17 significant digits; parses back bit-exact.
  std::string to_record() const;
};

/// (1/n^2) sum_{j1,j2} N(0; y^(j1) - y^(j2), 2 h^2 I). Constant in the
/// transform; exp(-log) of it is the quadratic Renyi entropy estimate.
double term_T0(const PointCloud& target, double h_sq);

/// Same self-energy over the transformed source cloud with variance 2 h~^2.
double term_T1(const PointCloud& transformed_source, double ht_sq);

/// -(2 / (n n~)) sum_i sum_j N(0; y~^(i) - y^(j), v I) with v the mode's pair
/// variance. Always <= 0.
double term_T2(const PointCloud& target, const PointCloud& transformed_source,
               const CostConfig& cfg);

/// Single sum over correspondence pairs (not the double sum of the cross
/// product): -(1/k) sum_k N(0; phi(x^(k)) - y^(k), v I). The lambda1 weight is
/// applied by the aggregate, not here. Empty set evaluates to 0.
double term_T3(const CorrespondenceSet& correspondences, const TpsTransform& transform,
               const CostConfig& cfg);

/// Unsupervised robust-transport term
/// -(1 / (n n~)) sum_i sum_j N(0; y~^(i) - y^(j), (h^2 + h~^2 + hc^2) I).
/// Negative so that minimisation attracts the clouds; with offset 0 its
/// magnitude is the transport-cost inner product against the independent
/// joint model.
double robust_ot_unsup(const PointCloud& target, const PointCloud& transformed_source,
                       const CostConfig& cfg);

/// Supervised counterpart over correspondence pairs (single sum). Empty set
/// evaluates to 0.
double robust_ot_sup(const CorrespondenceSet& correspondences, const TpsTransform& transform,
                     const CostConfig& cfg);

/// (1 - lambda) * robust_ot_unsup + lambda * robust_ot_sup, exactly.
/// `correspondences` may be null when lambda == 0.
double robust_ot_combined(const PointCloud& target, const PointCloud& transformed_source,
                          const CorrespondenceSet* correspondences,
                          const TpsTransform& transform, const CostConfig& cfg);

/// Evaluate every active term at `transform`, with the analytic gradient with
/// respect to the transform parameters when requested. Deterministic: equal
/// inputs give bit-identical breakdowns for any worker count.
CostBreakdown full_cost(const PointCloud& target, const PointCloud& source,
                        const CorrespondenceSet* correspondences, const TpsTransform& transform,
                        const CostConfig& cfg, const PenaltyParams& penalties,
                        bool with_gradient = true);

/// Closed-form squared L2 distance between two mixture densities:
/// |mu|^2 - 2 <mu, mu~> + |mu~|^2 with the matched convolution variances.
double l2_divergence(const KdeModel& target, const KdeModel& other);

/// The double-sum cross product over a correspondence set that the inner
/// product notation would suggest; diagnostic only, to show it differs from
/// the single-sum term_T3 on sets with more than one distinct pair.
double crossproduct_diagnostic(const CorrespondenceSet& correspondences,
                               const TpsTransform& transform, double h_sq, double ht_sq);

}  // namespace l2ot
