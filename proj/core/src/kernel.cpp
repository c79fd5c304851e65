#include "l2ot/kernel.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace l2ot {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

void check_same_dim(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 1) {
    throw std::invalid_argument("gaussian kernel: dimension mismatch");
  }
}

std::string format_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

}  // namespace

IsoGaussian::IsoGaussian(int dim_, double variance_) : dim(dim_), variance(variance_) {
  if (dim < 1) throw std::invalid_argument("IsoGaussian: dim must be >= 1");
  if (!(variance > 0.0)) throw std::domain_error("IsoGaussian: variance must be positive");
}

double IsoGaussian::norm_const() const {
  return std::exp(-0.5 * dim * std::log(kTwoPi * variance));
}

double gaussian_pdf(const Eigen::VectorXd& z, const Eigen::VectorXd& mean, double variance) {
  check_same_dim(z, mean);
  if (!(variance > 0.0)) throw std::domain_error("gaussian_pdf: variance must be positive");
  const double sq = (z - mean).squaredNorm();
  const double d = static_cast<double>(z.size());
  return std::exp(-0.5 * d * std::log(kTwoPi * variance) - 0.5 * sq / variance);
}

double gaussian_conv_value(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           double v1, double v2) {
  check_same_dim(a, b);
  if (v1 < 0.0 || v2 < 0.0) {
    throw std::domain_error("gaussian_conv_value: variances must be nonnegative");
  }
  const double v = v1 + v2;
  if (!(v > 0.0)) {
    throw std::domain_error("gaussian_conv_value: Dirac-Dirac product is undefined");
  }
  const double sq = (a - b).squaredNorm();
  const double d = static_cast<double>(a.size());
  return std::exp(-0.5 * d * std::log(kTwoPi * v) - 0.5 * sq / v);
}

void RobustCostParams::validate() const {
  if (!(hc > 0.0)) throw std::domain_error("RobustCostParams: hc must be positive");
  if (offset_a < 0.0) throw std::domain_error("RobustCostParams: offset_a must be nonnegative");
}

double robust_cost(const Eigen::VectorXd& y, const Eigen::VectorXd& y_tilde,
                   const RobustCostParams& p) {
  p.validate();
  return p.offset_a - gaussian_pdf(y, y_tilde, p.hc * p.hc);
}

bool loss_has_scale(LossKind kind) {
  return kind == LossKind::WelschLeclerc || kind == LossKind::GemanMcClure;
}

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::LeastSquares: return "least_squares";
    case LossKind::Absolute: return "absolute";
    case LossKind::WelschLeclerc: return "welsch_leclerc";
    case LossKind::GemanMcClure: return "geman_mcclure";
  }
  throw std::invalid_argument("loss_name: unknown kind");
}

double rho(const LossSpec& loss, double eps) {
  if (eps < 0.0) throw std::invalid_argument("rho: eps must be nonnegative");
  if (loss_has_scale(loss.kind) && !(loss.scale > 0.0)) {
    throw std::domain_error("rho: scale must be positive");
  }
  switch (loss.kind) {
    case LossKind::LeastSquares:
      return eps * eps;
    case LossKind::Absolute:
      return eps;
    case LossKind::WelschLeclerc: {
      const double u = eps / loss.scale;
      // 1 - exp(-x) via expm1 keeps the small-residual regime accurate.
      return -std::expm1(-0.5 * u * u);
    }
    case LossKind::GemanMcClure: {
      const double u2 = (eps / loss.scale) * (eps / loss.scale);
      return u2 / (u2 + 1.0);
    }
  }
  throw std::invalid_argument("rho: unknown kind");
}

LossCurveTable emit_loss_curves(const std::vector<LossSpec>& kinds,
                                const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw std::invalid_argument("emit_loss_curves: empty grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (eps_grid[i] < 0.0) throw std::invalid_argument("emit_loss_curves: negative eps");
    if (i > 0 && eps_grid[i] < eps_grid[i - 1]) {
      throw std::invalid_argument("emit_loss_curves: grid must be sorted ascending");
    }
  }

  LossCurveTable table;
  table.columns.push_back("eps");
  for (const LossSpec& k : kinds) {
    table.columns.push_back(loss_name(k.kind));
    if (loss_has_scale(k.kind)) table.columns.push_back(loss_name(k.kind) + "_taylor");
  }

  table.rows.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    std::vector<double> row;
    row.reserve(table.columns.size());
    row.push_back(eps);
    for (const LossSpec& k : kinds) {
      row.push_back(rho(k, eps));
      if (loss_has_scale(k.kind)) {
        row.push_back(eps * eps / (2.0 * k.scale * k.scale));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void LossCurveTable::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) os << ',';
    os << columns[c];
  }
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      os << format_sig(row[c], 9);
    }
    os << '\n';
  }
}

}  // namespace l2ot
