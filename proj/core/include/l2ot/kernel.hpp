#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace l2ot {

// Scalar Gaussian-kernel maths and the robust loss family. All bandwidth-like
// quantities are stored as variances; callers square bandwidths at the
// boundary so the convolution identity v1 + v2 stays exact and branch-free.

/// Isotropic normal N(z; a, variance * I) in R^dim.
struct IsoGaussian {
  int dim;
  double variance;

  IsoGaussian(int dim, double variance);

  /// (2*pi*variance)^(-dim/2)
  double norm_const() const;
};

/// Density of N(mean, variance * I) at z. Computed in log-space and
/// exponentiated once, which stays stable for small variances in low
/// dimensions (d = 3, h = 0.01 gives normalisers around 6e4).
double gaussian_pdf(const Eigen::VectorXd& z, const Eigen::VectorXd& mean, double variance);

/// Value of the Gaussian product integral:
///   integral N(y; a, v1*I) N(y; b, v2*I) dy  ==  N(0; a - b, (v1 + v2) * I).
/// Either variance may be zero (Dirac sifting), but not both.
double gaussian_conv_value(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           double v1, double v2);

/// Parameters of the robust transport cost  c(y, y~) = offset_a - N(y; y~, hc^2 I).
/// The offset shifts the cost without moving any argmin; it defaults to 0.
struct RobustCostParams {
  double hc = 0.05;      // bandwidth (standard deviation) of the cost kernel
  double offset_a = 0.0; // nonnegative shift

  void validate() const;
};

/// offset_a - N(y; y_tilde, hc^2 I). Minimised at y == y_tilde, approaches
/// offset_a as the residual grows. Up to an affine renormalisation this is
/// the Welsch-Leclerc loss with scale hc (see `rho`).
double robust_cost(const Eigen::VectorXd& y, const Eigen::VectorXd& y_tilde,
                   const RobustCostParams& p);

enum class LossKind { LeastSquares, Absolute, WelschLeclerc, GemanMcClure };

/// A loss function plus its scale; the scale is ignored by the unscaled kinds.
struct LossSpec {
  LossKind kind = LossKind::WelschLeclerc;
  double scale = 1.0;

  static LossSpec least_squares() { return {LossKind::LeastSquares, 1.0}; }
  static LossSpec absolute() { return {LossKind::Absolute, 1.0}; }
  static LossSpec welsch_leclerc(double scale = 1.0) { return {LossKind::WelschLeclerc, scale}; }
  static LossSpec geman_mcclure(double scale = 1.0) { return {LossKind::GemanMcClure, scale}; }
};

bool loss_has_scale(LossKind kind);
std::string loss_name(LossKind kind);

/// rho(eps):
///   LeastSquares       eps^2
///   Absolute           eps
///   WelschLeclerc(s)   1 - exp(-eps^2 / (2 s^2))   (bounded by 1)
///   GemanMcClure(s)    (eps/s)^2 / ((eps/s)^2 + 1) (bounded by 1)
/// Requires eps >= 0.
double rho(const LossSpec& loss, double eps);

/// Tabulated loss curves over an eps grid. Scaled losses get an extra
/// `<name>_taylor` column holding eps^2 / (2 scale^2), the small-residual
/// quadratic that the bounded losses approach near zero.
struct LossCurveTable {
  std::vector<std::string> columns;           // "eps", then per-kind columns
  std::vector<std::vector<double>> rows;      // one row per grid point

  /// CSV, header then rows, 9 significant digits.
  void write_csv(std::ostream& os) const;
};

/// Requires a non-empty grid of nonnegative values sorted ascending.
LossCurveTable emit_loss_curves(const std::vector<LossSpec>& kinds,
                                const std::vector<double>& eps_grid);

}  // namespace l2ot
