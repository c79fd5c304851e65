#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "l2ot/cost.hpp"
#include "l2ot/kernel.hpp"
#include "l2ot/oracle.hpp"
#include "l2ot/parallel.hpp"
#include "test_util.hpp"

using namespace l2ot;
using testutil::random_cloud;
using testutil::random_points;
using testutil::ulps_between;

namespace {
constexpr double kPi = std::numbers::pi_v<double>;

PointCloud cloud1d(std::initializer_list<double> values) {
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) pts(i++, 0) = v;
  return PointCloud(pts);
}

CostConfig legacy_cfg(double h_sq, double ht_sq) {
  CostConfig cfg;
  cfg.mode = CostMode::LegacyWeights;
  cfg.h_sq = h_sq;
  cfg.ht_sq = ht_sq;
  return cfg;
}

CostConfig combined_cfg(double h_sq, double ht_sq, double hc_sq, double lambda = 0.5) {
  CostConfig cfg;
  cfg.mode = CostMode::CombinedMixture;
  cfg.h_sq = h_sq;
  cfg.ht_sq = ht_sq;
  cfg.hc_sq = hc_sq;
  cfg.lambda = lambda;
  return cfg;
}

// Mild random transform over its own small control set.
TpsTransform random_transform(std::mt19937_64& rng, int d, Eigen::Index m = 5,
                              double spline_mag = 0.05) {
  TpsTransform t = TpsTransform::identity(d);
  t.controls = random_points(rng, m, d);
  t.weights = Eigen::MatrixXd::Zero(m, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) t.affine(r, c) += uniform_in(rng, -0.1, 0.1);
    t.offset[r] = uniform_in(rng, -0.1, 0.1);
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    for (int c = 0; c < d; ++c) t.weights(r, c) = uniform_in(rng, -spline_mag, spline_mag);
  }
  t.weights = project_side_conditions(t.weights, t.controls);
  return t;
}

}  // namespace

TEST_CASE("term_T0: single point, quadrature, and entropy reading") {
  const double h_sq = 0.02;
  CHECK(term_T0(cloud1d({0.3}), h_sq) ==
        doctest::Approx(std::pow(4.0 * kPi * h_sq, -0.5)).epsilon(1e-14));

  const PointCloud two = cloud1d({0.25, 0.75});
  const double closed = term_T0(two, h_sq);
  // Closed 2x2 sum.
  const Eigen::VectorXd a = two.points.row(0).transpose();
  const Eigen::VectorXd b = two.points.row(1).transpose();
  const double direct = (gaussian_conv_value(a, a, h_sq, h_sq) +
                         gaussian_conv_value(b, b, h_sq, h_sq) +
                         2.0 * gaussian_conv_value(a, b, h_sq, h_sq)) /
                        4.0;
  CHECK(closed == doctest::Approx(direct).epsilon(1e-14));

  // Equals the integral of mu^2 (d = 1).
  const KdeModel mu{two, h_sq};
  const oracle::Axis axis = oracle::auto_axis(0.25, 0.75, {h_sq});
  const double quad =
      oracle::quad_1d([&](double y) {
        Eigen::VectorXd p(1);
        p[0] = y;
        const double v = kde_eval(mu, p);
        return v * v;
      }, axis);
  CHECK(std::abs(closed - quad) < 1e-6);

  // -log(T0) is the quadratic Renyi entropy estimate of mu.
  CHECK(-std::log(closed) == doctest::Approx(-std::log(quad)).epsilon(1e-6));

  CHECK_THROWS_AS(term_T0(two, 0.0), std::domain_error);
}

TEST_CASE("term_T1: single point, translation invariance, quadrature") {
  const double ht_sq = 0.03;
  CHECK(term_T1(cloud1d({0.4}), ht_sq) ==
        doctest::Approx(std::pow(4.0 * kPi * ht_sq, -0.5)).epsilon(1e-14));

  std::mt19937_64 rng(51);
  const PointCloud cloud = random_cloud(rng, 6, 2);
  PointCloud shifted = cloud;
  shifted.points.rowwise() += Eigen::RowVector2d(3.0, -1.0);
  CHECK(term_T1(cloud, ht_sq) == doctest::Approx(term_T1(shifted, ht_sq)).epsilon(1e-12));

  const PointCloud line = random_cloud(rng, 5, 1);
  const KdeModel mu{line, ht_sq};
  const oracle::Axis axis =
      oracle::auto_axis(line.points.minCoeff(), line.points.maxCoeff(), {ht_sq});
  const double quad =
      oracle::quad_1d([&](double y) {
        Eigen::VectorXd p(1);
        p[0] = y;
        const double v = kde_eval(mu, p);
        return v * v;
      }, axis);
  CHECK(std::abs(term_T1(line, ht_sq) - quad) < 1e-6);
}

TEST_CASE("term_T2: coincident pair, decay, and -2<mu,mu~> by quadrature") {
  const double h_sq = 0.02;
  const CostConfig cfg = legacy_cfg(h_sq, h_sq);  // pair variance 2 h^2
  CHECK(term_T2(cloud1d({0.5}), cloud1d({0.5}), cfg) ==
        doctest::Approx(-2.0 * std::pow(4.0 * kPi * h_sq, -0.5)).epsilon(1e-14));

  const double far = term_T2(cloud1d({0.0}), cloud1d({100.0}), cfg);
  CHECK(far <= 0.0);
  CHECK(far > -1e-12);

  std::mt19937_64 rng(52);
  const PointCloud target = random_cloud(rng, 5, 1);
  const PointCloud moved = random_cloud(rng, 4, 1);
  const CostConfig rnd = legacy_cfg(0.02, 0.045);
  const KdeModel mu{target, rnd.h_sq};
  const KdeModel mut{moved, rnd.ht_sq};
  const oracle::Axis axis = oracle::auto_axis(-0.2, 1.2, {rnd.h_sq, rnd.ht_sq});
  const double cross = oracle::quad_1d(
      [&](double y) {
        Eigen::VectorXd p(1);
        p[0] = y;
        return kde_eval(mu, p) * kde_eval(mut, p);
      },
      axis);
  CHECK(std::abs(term_T2(target, moved, rnd) - (-2.0 * cross)) < 1e-6);

  CostConfig dirac = legacy_cfg(0.0, 0.0);
  CHECK_THROWS_AS(term_T2(target, moved, dirac), std::domain_error);
}

TEST_CASE("term_T3: perfect pairs, one-pair residual, and the single-sum distinction") {
  std::mt19937_64 rng(53);
  const CostConfig cfg = legacy_cfg(0.02, 0.02);
  const double v = cfg.pair_variance();

  const Eigen::MatrixXd pts = random_points(rng, 4, 3);
  const CorrespondenceSet perfect(pts, pts);
  const TpsTransform id = TpsTransform::identity(3);
  CHECK(term_T3(perfect, id, cfg) ==
        doctest::Approx(-std::pow(2.0 * kPi * v, -1.5)).epsilon(1e-12));

  Eigen::MatrixXd y(1, 3), x(1, 3);
  y << 0.2, 0.4, 0.6;
  x << 0.25, 0.35, 0.65;
  const CorrespondenceSet one(y, x);
  const double expect = -gaussian_pdf(x.row(0).transpose(), y.row(0).transpose(), v);
  CHECK(term_T3(one, id, cfg) == doctest::Approx(expect).epsilon(1e-12));

  CHECK(term_T3(CorrespondenceSet{}, id, cfg) == 0.0);
}

TEST_CASE("the double-sum cross product differs from the single-sum term") {
  const CostConfig cfg = legacy_cfg(0.02, 0.02);
  const TpsTransform id = TpsTransform::identity(1);

  Eigen::MatrixXd y1(1, 1), x1(1, 1);
  y1 << 0.3;
  x1 << 0.45;
  const CorrespondenceSet single(y1, x1);
  CHECK(crossproduct_diagnostic(single, id, cfg.h_sq, cfg.ht_sq) ==
        doctest::Approx(-term_T3(single, id, cfg)).epsilon(1e-12));

  Eigen::MatrixXd y2(2, 1), x2(2, 1);
  y2 << 0.2, 0.8;
  x2 << 0.25, 0.7;
  const CorrespondenceSet pairs(y2, x2);
  const double dbl = crossproduct_diagnostic(pairs, id, cfg.h_sq, cfg.ht_sq);
  const double single_sum = -term_T3(pairs, id, cfg);
  CHECK(std::abs(dbl - single_sum) > 1e-6);

  // Swapping the two marginals' roles leaves the double sum unchanged.
  const CorrespondenceSet swapped(x2, y2);
  CHECK(crossproduct_diagnostic(swapped, id, cfg.ht_sq, cfg.h_sq) ==
        doctest::Approx(dbl).epsilon(1e-12));
}

TEST_CASE("robust_ot_unsup: Dirac limit and the factor-two relation") {
  std::mt19937_64 rng(54);
  const PointCloud target = random_cloud(rng, 4, 2);
  const PointCloud moved = random_cloud(rng, 3, 2);

  const CostConfig dirac = combined_cfg(0.0, 0.0, 0.09);
  double manual = 0.0;
  for (Eigen::Index i = 0; i < moved.size(); ++i) {
    for (Eigen::Index j = 0; j < target.size(); ++j) {
      manual += gaussian_pdf(moved.points.row(i).transpose(), target.points.row(j).transpose(),
                             dirac.hc_sq);
    }
  }
  manual /= static_cast<double>(moved.size() * target.size());
  CHECK(robust_ot_unsup(target, moved, dirac) == doctest::Approx(-manual).epsilon(1e-12));

  // Folding hc into a legacy pair variance halves T2.
  const CostConfig ot = combined_cfg(0.02, 0.03, 0.04);
  const CostConfig folded = legacy_cfg(0.05, 0.04);  // same total variance 0.09
  CHECK(robust_ot_unsup(target, moved, ot) ==
        doctest::Approx(term_T2(target, moved, folded) / 2.0).epsilon(1e-12));
}

TEST_CASE("robust_ot_sup: perfect pairs and the M-estimation reading") {
  std::mt19937_64 rng(55);
  const CostConfig cfg = combined_cfg(0.01, 0.015, 0.02);
  const double v = cfg.h_sq + cfg.ht_sq + cfg.hc_sq;
  const Eigen::MatrixXd pts = random_points(rng, 5, 1);
  const TpsTransform id = TpsTransform::identity(1);
  CHECK(robust_ot_sup(CorrespondenceSet(pts, pts), id, cfg) ==
        doctest::Approx(-std::pow(2.0 * kPi * v, -0.5)).epsilon(1e-12));

  // Dirac kernels: the term is a Welsch-Leclerc objective up to the Gaussian
  // normaliser and sign.
  const CostConfig dirac = combined_cfg(0.0, 0.0, 0.0625);
  const Eigen::MatrixXd y = random_points(rng, 6, 1);
  const Eigen::MatrixXd x = random_points(rng, 6, 1);
  const CorrespondenceSet pairs(y, x);
  const double term = robust_ot_sup(pairs, id, dirac);
  const double hc = std::sqrt(dirac.hc_sq);
  const double norm = IsoGaussian(1, dirac.hc_sq).norm_const();
  double mean_rho = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    mean_rho += rho(LossSpec::welsch_leclerc(hc), std::abs(x(i, 0) - y(i, 0)));
  }
  mean_rho /= 6.0;
  CHECK(term == doctest::Approx(-norm * (1.0 - mean_rho)).epsilon(1e-12));

  CHECK(robust_ot_sup(CorrespondenceSet{}, id, cfg) == 0.0);
}

TEST_CASE("robust_ot_combined: endpoints exact, midpoint is the mean") {
  std::mt19937_64 rng(56);
  const PointCloud target = random_cloud(rng, 5, 2);
  const PointCloud moved = random_cloud(rng, 4, 2);
  const CorrespondenceSet pairs(random_points(rng, 3, 2), random_points(rng, 3, 2));
  const TpsTransform id = TpsTransform::identity(2);

  CostConfig cfg = combined_cfg(0.01, 0.02, 0.03, 0.0);
  const double u = robust_ot_unsup(target, moved, cfg);
  CHECK(robust_ot_combined(target, moved, &pairs, id, cfg) == u);

  cfg.lambda = 1.0;
  const double s = robust_ot_sup(pairs, id, cfg);
  CHECK(robust_ot_combined(target, moved, &pairs, id, cfg) == s);

  cfg.lambda = 0.5;
  const double mid = robust_ot_combined(target, moved, &pairs, id, cfg);
  CHECK(ulps_between(mid, 0.5 * u + 0.5 * s) <= 2);
}

TEST_CASE("full_cost: the L2 self-distance is zero") {
  std::mt19937_64 rng(57);
  const PointCloud cloud = random_cloud(rng, 8, 3, 0.1, 0.9);
  CostConfig cfg = legacy_cfg(0.02, 0.02);
  cfg.include_t0 = true;
  cfg.include_t1 = true;
  PenaltyParams pen;
  const TpsTransform id = TpsTransform::identity(3);

  const CostBreakdown b = full_cost(cloud, cloud, nullptr, id, cfg, pen, false);
  CHECK(b.t2 == doctest::Approx(-2.0 * b.t0).epsilon(1e-12));
  CHECK(std::abs(b.total) < 1e-10);
  CHECK(b.t4 == 0.0);
  CHECK(b.t5 == 0.0);
}

TEST_CASE("full_cost: totals recompute from components in both modes") {
  std::mt19937_64 rng(58);
  const PointCloud target = random_cloud(rng, 7, 2);
  const PointCloud source = random_cloud(rng, 6, 2);
  const CorrespondenceSet pairs(random_points(rng, 4, 2), random_points(rng, 4, 2));
  const TpsTransform t = random_transform(rng, 2);
  PenaltyParams pen;

  for (const CostMode mode : {CostMode::LegacyWeights, CostMode::CombinedMixture}) {
    CostConfig cfg = combined_cfg(0.02, 0.03, 0.04, 0.35);
    cfg.mode = mode;
    cfg.lambda1 = 0.8;
    cfg.include_t0 = true;
    cfg.include_t1 = true;
    const CostBreakdown b = full_cost(target, source, &pairs, t, cfg, pen, false);

    const double data = mode == CostMode::LegacyWeights ? b.t2 + cfg.lambda1 * b.t3
                                                        : (1.0 - cfg.lambda) * b.t2 +
                                                              cfg.lambda * b.t3;
    CHECK(b.combined_t == data);
    CHECK(b.total ==
          b.t0 + b.t1 + b.combined_t + pen.lambda2 * b.t4 + pen.lambda3 * b.t5);

    // Free functions agree with the breakdown's components.
    PointCloud moved{t.apply_rows(source.points)};
    if (mode == CostMode::LegacyWeights) {
      CHECK(b.t2 == term_T2(target, moved, cfg));
      CHECK(b.t3 == term_T3(pairs, t, cfg));
    } else {
      CHECK(b.t2 == robust_ot_unsup(target, moved, cfg));
      CHECK(b.t3 == robust_ot_sup(pairs, t, cfg));
    }
  }
}

TEST_CASE("full_cost sign structure") {
  std::mt19937_64 rng(59);
  for (int rep = 0; rep < 10; ++rep) {
    const PointCloud target = random_cloud(rng, 6, 2);
    const PointCloud source = random_cloud(rng, 5, 2);
    const CorrespondenceSet pairs(random_points(rng, 3, 2), random_points(rng, 3, 2));
    const TpsTransform t = random_transform(rng, 2);
    CostConfig cfg = combined_cfg(uniform_in(rng, 0.01, 0.05), uniform_in(rng, 0.01, 0.05),
                                  uniform_in(rng, 0.01, 0.05), uniform_unit(rng));
    cfg.include_t0 = true;
    cfg.include_t1 = true;
    const CostBreakdown b = full_cost(target, source, &pairs, t, cfg, PenaltyParams{}, false);
    CHECK(b.t0 > 0.0);
    CHECK(b.t1 > 0.0);
    CHECK(b.t2 <= 0.0);
    CHECK(b.t3 <= 0.0);
    CHECK(b.combined_t <= 0.0);
    CHECK(b.t4 >= 0.0);
    CHECK(b.t5 >= 0.0);
  }
}

TEST_CASE("translation equivariance of the data terms") {
  std::mt19937_64 rng(60);
  const PointCloud target = random_cloud(rng, 6, 2);
  const PointCloud source = random_cloud(rng, 5, 2);
  const CorrespondenceSet pairs(random_points(rng, 3, 2), random_points(rng, 3, 2));
  const TpsTransform t = random_transform(rng, 2);
  CostConfig cfg = combined_cfg(0.02, 0.03, 0.04, 0.4);
  cfg.include_t1 = true;

  const Eigen::RowVector2d shift(1.7, -0.9);
  PointCloud target2 = target, source2 = source;
  target2.points.rowwise() += shift;
  source2.points.rowwise() += shift;
  const CorrespondenceSet pairs2(pairs.target.rowwise() + shift,
                                 pairs.source.rowwise() + shift);

  // Conjugate the transform by the translation: phi'(x) = phi(x - s) + s.
  TpsTransform t2 = t;
  t2.controls = t.controls.rowwise() + shift;
  t2.offset = t.offset + shift.transpose() - t.affine * shift.transpose();

  // The transform must commute with the shift pointwise.
  for (Eigen::Index i = 0; i < source.size(); ++i) {
    const Eigen::Vector2d lhs = t2.apply(source2.points.row(i).transpose());
    const Eigen::Vector2d rhs = t.apply(source.points.row(i).transpose()) + shift.transpose();
    CHECK((lhs - rhs).norm() < 1e-12);
  }

  PenaltyParams pen;
  pen.lambda2 = 0.0;  // the range box is anchored; exclude it from equivariance
  const CostBreakdown a = full_cost(target, source, &pairs, t, cfg, pen, false);
  const CostBreakdown b = full_cost(target2, source2, &pairs2, t2, cfg, pen, false);
  CHECK(b.t1 == doctest::Approx(a.t1).epsilon(1e-11));
  CHECK(b.t2 == doctest::Approx(a.t2).epsilon(1e-11));
  CHECK(b.t3 == doctest::Approx(a.t3).epsilon(1e-11));
  CHECK(b.combined_t == doctest::Approx(a.combined_t).epsilon(1e-11));
  CHECK(b.t5 == doctest::Approx(a.t5).epsilon(1e-11));
}

TEST_CASE("analytic gradients match finite differences in both modes") {
  std::mt19937_64 rng(61);
  PenaltyParams pen;
  int checked = 0;
  for (int rep = 0; rep < 8; ++rep) {
    const int d = rep % 2 == 0 ? 2 : 3;
    const PointCloud target = random_cloud(rng, 6, d, 0.15, 0.85);
    const PointCloud source = random_cloud(rng, 5, d, 0.15, 0.85);
    const CorrespondenceSet pairs(random_points(rng, 3, d, 0.15, 0.85),
                                  random_points(rng, 3, d, 0.15, 0.85));
    TpsTransform t = random_transform(rng, d, d + 3);
    CostConfig cfg = combined_cfg(uniform_in(rng, 0.01, 0.05), uniform_in(rng, 0.01, 0.05),
                                  uniform_in(rng, 0.01, 0.05), uniform_in(rng, 0.1, 0.9));
    cfg.mode = rep % 2 == 0 ? CostMode::LegacyWeights : CostMode::CombinedMixture;
    cfg.lambda1 = uniform_in(rng, 0.2, 1.5);
    cfg.include_t1 = true;

    const CostBreakdown b = full_cost(target, source, &pairs, t, cfg, pen, true);
    const auto f = [&](const Eigen::VectorXd& p) {
      TpsTransform probe = t;
      probe.set_param_vector(p);
      return full_cost(target, source, &pairs, probe, cfg, pen, false).total;
    };
    const Eigen::VectorXd fd = oracle::fd_gradient(f, t.param_vector(), 1e-5);
    const double floor = 1e-8 * (1.0 + b.gradient.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < fd.size(); ++i) {
      const double denom = std::max({std::abs(b.gradient[i]), std::abs(fd[i]), floor});
      CHECK(std::abs(b.gradient[i] - fd[i]) / denom <= 1e-5);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("Wasserstein limit: the scaled supervised term approaches the MSE") {
  std::mt19937_64 rng(62);
  const Eigen::MatrixXd y = random_points(rng, 10, 2);
  const Eigen::MatrixXd x = y + 0.05 * random_points(rng, 10, 2, -1.0, 1.0);
  const CorrespondenceSet pairs(y, x);
  const TpsTransform id = TpsTransform::identity(2);

  double msr = 0.0, m4 = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double sq = (x.row(i) - y.row(i)).squaredNorm();
    msr += sq;
    m4 += sq * sq;
  }
  msr /= static_cast<double>(y.rows());
  m4 /= static_cast<double>(y.rows());

  double prev_gap = std::numeric_limits<double>::infinity();
  for (double hc : {2.0, 4.0, 8.0, 16.0}) {
    const CostConfig cfg = combined_cfg(0.0, 0.0, hc * hc);
    const double v = cfg.hc_sq;
    const double loss = std::pow(2.0 * kPi * v, -1.0) + robust_ot_sup(pairs, id, cfg);
    const double scaled = std::pow(2.0 * kPi * v, 1.0) * 2.0 * v * loss;
    const double gap = msr - scaled;
    // Termwise Taylor bound: 0 <= msr - scaled <= E[|r|^4] / (4 v). The
    // rescaling by 2v amplifies exp() roundoff to about v * eps, so allow it.
    const double roundoff = 16.0 * v * std::numeric_limits<double>::epsilon();
    CHECK(gap >= -roundoff);
    CHECK(gap <= m4 / (4.0 * v) + roundoff);
    CHECK(gap <= prev_gap + roundoff);
    prev_gap = gap;
  }
}

TEST_CASE("l2_divergence: identical, symmetric, nonnegative") {
  std::mt19937_64 rng(63);
  const KdeModel a{random_cloud(rng, 6, 2), 0.04};
  const KdeModel b{random_cloud(rng, 5, 2), 0.0625};
  CHECK(std::abs(l2_divergence(a, a)) < 1e-12);
  CHECK(l2_divergence(a, b) == doctest::Approx(l2_divergence(b, a)).epsilon(1e-12));
  CHECK(l2_divergence(a, b) >= 0.0);
  CHECK_THROWS_AS(l2_divergence(a, KdeModel{b.support, 0.0}), std::domain_error);
}

TEST_CASE("T0 is bit-identical across transform iterates") {
  std::mt19937_64 rng(64);
  const PointCloud target = random_cloud(rng, 20, 3);
  const double first = term_T0(target, 0.02);
  for (int i = 0; i < 5; ++i) {
    const double again = term_T0(target, 0.02);
    CHECK(std::memcmp(&first, &again, sizeof(double)) == 0);
  }
}

TEST_CASE("breakdowns are bit-identical across worker counts") {
  std::mt19937_64 rng(65);
  const PointCloud target = random_cloud(rng, 40, 3);
  const PointCloud source = random_cloud(rng, 35, 3);
  const CorrespondenceSet pairs(random_points(rng, 8, 3), random_points(rng, 8, 3));
  const TpsTransform t = random_transform(rng, 3, 8);
  CostConfig cfg = combined_cfg(0.02, 0.03, 0.04, 0.4);
  cfg.include_t0 = true;
  cfg.include_t1 = true;

  set_num_threads(1);
  const CostBreakdown one = full_cost(target, source, &pairs, t, cfg, PenaltyParams{}, true);
  set_num_threads(4);
  const CostBreakdown four = full_cost(target, source, &pairs, t, cfg, PenaltyParams{}, true);
  set_num_threads(0);

  CHECK(std::memcmp(&one.total, &four.total, sizeof(double)) == 0);
  CHECK(std::memcmp(&one.t0, &four.t0, sizeof(double)) == 0);
  CHECK(std::memcmp(&one.t1, &four.t1, sizeof(double)) == 0);
  CHECK(std::memcmp(&one.t2, &four.t2, sizeof(double)) == 0);
  REQUIRE(one.gradient.size() == four.gradient.size());
  CHECK(std::memcmp(one.gradient.data(), four.gradient.data(),
                    sizeof(double) * static_cast<std::size_t>(one.gradient.size())) == 0);
}

TEST_CASE("full_cost usage and domain errors") {
  std::mt19937_64 rng(66);
  const PointCloud target = random_cloud(rng, 5, 2);
  const PointCloud source = random_cloud(rng, 5, 2);
  const TpsTransform id = TpsTransform::identity(2);

  CostConfig lone = combined_cfg(0.01, 0.01, 0.01, 1.0);
  CHECK_THROWS_AS(full_cost(target, source, nullptr, id, lone, PenaltyParams{}, false),
                  std::invalid_argument);

  CostConfig dirac = combined_cfg(0.0, 0.0, 0.01, 0.0);
  dirac.include_t1 = true;
  CHECK_THROWS_AS(full_cost(target, source, nullptr, id, dirac, PenaltyParams{}, false),
                  std::domain_error);
  dirac.include_t1 = false;
  CHECK_NOTHROW(full_cost(target, source, nullptr, id, dirac, PenaltyParams{}, false));

  // Empty correspondence set: flagged, contributes zero.
  const CorrespondenceSet empty;
  CostConfig cfg = combined_cfg(0.01, 0.01, 0.01, 0.5);
  const CostBreakdown b = full_cost(target, source, &empty, id, cfg, PenaltyParams{}, false);
  CHECK(b.empty_correspondences);
  CHECK(b.t3 == 0.0);
}
