#include "l2ot/tps.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "l2ot/errors.hpp"
#include "l2ot/rng.hpp"

namespace l2ot {

RadialKernel default_kernel(int dim) {
  return dim == 2 ? RadialKernel::ThinPlate2d : RadialKernel::Biharmonic3d;
}

double radial_value(RadialKernel kernel, double r) {
  switch (kernel) {
    case RadialKernel::ThinPlate2d:
      return r > 0.0 ? r * r * std::log(r) : 0.0;
    case RadialKernel::Biharmonic3d:
      return -r;
  }
  throw std::invalid_argument("radial_value: unknown kernel");
}

std::string kernel_name(RadialKernel kernel) {
  switch (kernel) {
    case RadialKernel::ThinPlate2d: return "thin_plate_2d";
    case RadialKernel::Biharmonic3d: return "biharmonic_3d";
  }
  throw std::invalid_argument("kernel_name: unknown kernel");
}

namespace {

RadialKernel kernel_from_name(const std::string& name) {
  if (name == "thin_plate_2d") return RadialKernel::ThinPlate2d;
  if (name == "biharmonic_3d") return RadialKernel::Biharmonic3d;
  throw ParseError("unknown radial kernel '" + name + "'");
}

// [controls, 1]: the polynomial block whose orthogonality defines the side
// conditions.
Eigen::MatrixXd poly_block(const Eigen::MatrixXd& controls) {
  Eigen::MatrixXd p(controls.rows(), controls.cols() + 1);
  p.leftCols(controls.cols()) = controls;
  p.col(controls.cols()).setOnes();
  return p;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TpsTransform TpsTransform::identity(int dim) {
  if (dim < 1) throw std::invalid_argument("TpsTransform: dim must be >= 1");
  TpsTransform t;
  t.dim = dim;
  t.kernel = default_kernel(dim);
  t.controls = Eigen::MatrixXd::Zero(dim + 1, dim);
  for (int i = 0; i < dim; ++i) t.controls(i + 1, i) = 1.0;  // origin + unit simplex
  t.affine = Eigen::MatrixXd::Identity(dim, dim);
  t.offset = Eigen::VectorXd::Zero(dim);
  t.weights = Eigen::MatrixXd::Zero(dim + 1, dim);
  return t;
}

void TpsTransform::validate() const {
  if (dim < 1) throw std::invalid_argument("TpsTransform: dim must be >= 1");
  if (controls.cols() != dim || controls.rows() < dim + 1) {
    throw std::invalid_argument("TpsTransform: need at least dim + 1 control points");
  }
  if (affine.rows() != dim || affine.cols() != dim || offset.size() != dim ||
      weights.rows() != controls.rows() || weights.cols() != dim) {
    throw std::invalid_argument("TpsTransform: inconsistent parameter shapes");
  }
}

Eigen::VectorXd TpsTransform::features(const Eigen::VectorXd& x) const {
  if (x.size() != dim) throw std::invalid_argument("TpsTransform: dimension mismatch");
  const Eigen::Index m = control_count();
  Eigen::VectorXd f(dim + 1 + m);
  f.head(dim) = x;
  f[dim] = 1.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    f[dim + 1 + j] = radial_value(kernel, (x - controls.row(j).transpose()).norm());
  }
  return f;
}

Eigen::MatrixXd TpsTransform::feature_rows(const Eigen::MatrixXd& points) const {
  if (points.cols() != dim) throw std::invalid_argument("TpsTransform: dimension mismatch");
  const Eigen::Index n = points.rows();
  const Eigen::Index m = control_count();
  Eigen::MatrixXd f(n, dim + 1 + m);
  f.leftCols(dim) = points;
  f.col(dim).setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      f(i, dim + 1 + j) = radial_value(kernel, (points.row(i) - controls.row(j)).norm());
    }
  }
  return f;
}

Eigen::VectorXd TpsTransform::apply(const Eigen::VectorXd& x) const {
  return packed().transpose() * features(x);
}

Eigen::MatrixXd TpsTransform::apply_rows(const Eigen::MatrixXd& points) const {
  return feature_rows(points) * packed();
}

Eigen::MatrixXd TpsTransform::packed() const {
  const Eigen::Index m = control_count();
  Eigen::MatrixXd theta(dim + 1 + m, dim);
  theta.topRows(dim) = affine.transpose();
  theta.row(dim) = offset.transpose();
  theta.bottomRows(m) = weights;
  return theta;
}

void TpsTransform::set_packed(const Eigen::MatrixXd& theta) {
  const Eigen::Index m = control_count();
  if (theta.rows() != dim + 1 + m || theta.cols() != dim) {
    throw std::invalid_argument("TpsTransform: packed parameter shape mismatch");
  }
  affine = theta.topRows(dim).transpose();
  offset = theta.row(dim).transpose();
  weights = theta.bottomRows(m);
}

Eigen::VectorXd TpsTransform::param_vector() const {
  const Eigen::MatrixXd theta = packed();
  return Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
}

void TpsTransform::set_param_vector(const Eigen::VectorXd& p) {
  const Eigen::Index rows = dim + 1 + control_count();
  if (p.size() != rows * dim) {
    throw std::invalid_argument("TpsTransform: parameter vector size mismatch");
  }
  set_packed(Eigen::Map<const Eigen::MatrixXd>(p.data(), rows, dim));
}

Eigen::MatrixXd tps_param_jacobian(const TpsTransform& t, const Eigen::VectorXd& x) {
  const Eigen::VectorXd f = t.features(x);
  const Eigen::Index rows = f.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(t.dim, t.param_count());
  for (int c = 0; c < t.dim; ++c) {
    jac.block(c, c * rows, 1, rows) = f.transpose();
  }
  return jac;
}

Eigen::MatrixXd bending_matrix(const Eigen::MatrixXd& controls, RadialKernel kernel) {
  const Eigen::Index m = controls.rows();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    k(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double v = radial_value(kernel, (controls.row(i) - controls.row(j)).norm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double bending_energy(const TpsTransform& t) {
  if (t.weights.isZero(0.0)) return 0.0;
  const Eigen::MatrixXd k = bending_matrix(t.controls, t.kernel);
  const double e = (t.weights.transpose() * k * t.weights).trace();
  return e > 0.0 ? e : 0.0;
}

Eigen::MatrixXd project_side_conditions(const Eigen::MatrixXd& weights,
                                        const Eigen::MatrixXd& controls) {
  const Eigen::MatrixXd p = poly_block(controls);
  const Eigen::MatrixXd gram = p.transpose() * p;
  return weights - p * gram.ldlt().solve(p.transpose() * weights);
}

TpsTransform tps_fit_landmarks(const Eigen::MatrixXd& sources, const Eigen::MatrixXd& targets,
                               double ridge) {
  const Eigen::Index m = sources.rows();
  const int d = static_cast<int>(sources.cols());
  if (m != targets.rows() || d != targets.cols()) {
    throw std::invalid_argument("tps_fit_landmarks: source/target shape mismatch");
  }
  if (m < d + 1) throw std::invalid_argument("tps_fit_landmarks: need at least dim + 1 pairs");
  if (ridge < 0.0) throw std::invalid_argument("tps_fit_landmarks: ridge must be >= 0");

  const RadialKernel kernel = default_kernel(d);
  const Eigen::MatrixXd k = bending_matrix(sources, kernel);
  const Eigen::MatrixXd p = poly_block(sources);

  // Bordered system [[K + ridge I, P]; [P^T, 0]] [W; a] = [targets; 0].
  const Eigen::Index nb = m + d + 1;
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(nb, nb);
  sys.topLeftCorner(m, m) = k;
  sys.topLeftCorner(m, m).diagonal().array() += ridge;
  sys.topRightCorner(m, d + 1) = p;
  sys.bottomLeftCorner(d + 1, m) = p.transpose();

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, d);
  rhs.topRows(m) = targets;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) {
    throw SolveError("tps_fit_landmarks: singular system (affinely dependent sources)");
  }
  const Eigen::MatrixXd sol = lu.solve(rhs);

  TpsTransform t;
  t.dim = d;
  t.kernel = kernel;
  t.controls = sources;
  t.weights = sol.topRows(m);
  const Eigen::MatrixXd a = sol.bottomRows(d + 1);  // (d+1) x d, rows [A^T; b^T]
  t.affine = a.topRows(d).transpose();
  t.offset = a.row(d).transpose();
  return t;
}

TpsTransform tps_fit_regression(const Eigen::MatrixXd& control_points,
                                const Eigen::MatrixXd& sources,
                                const Eigen::MatrixXd& targets, double ridge) {
  const Eigen::Index m = control_points.rows();
  const int d = static_cast<int>(control_points.cols());
  if (sources.rows() != targets.rows() || sources.cols() != d || targets.cols() != d) {
    throw std::invalid_argument("tps_fit_regression: shape mismatch");
  }
  if (m < d + 1) throw std::invalid_argument("tps_fit_regression: need at least dim + 1 controls");

  TpsTransform t;
  t.dim = d;
  t.kernel = default_kernel(d);
  t.controls = control_points;
  t.affine = Eigen::MatrixXd::Identity(d, d);
  t.offset = Eigen::VectorXd::Zero(d);
  t.weights = Eigen::MatrixXd::Zero(m, d);

  // Null-space basis of the side conditions: W = Z V keeps P^T W = 0 exact.
  const Eigen::MatrixXd p = poly_block(control_points);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(p);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::Index nz = m - (d + 1);
  if (nz <= 0) {
    // No spline freedom: plain affine least squares.
    const Eigen::MatrixXd fa = poly_block(sources);
    const Eigen::MatrixXd a =
        (fa.transpose() * fa + 1e-12 * Eigen::MatrixXd::Identity(d + 1, d + 1))
            .ldlt()
            .solve(fa.transpose() * targets);
    t.affine = a.topRows(d).transpose();
    t.offset = a.row(d).transpose();
    return t;
  }
  const Eigen::MatrixXd z = q.rightCols(nz);

  const Eigen::MatrixXd feats = t.feature_rows(sources);     // n x (d+1+m)
  const Eigen::MatrixXd fa = feats.leftCols(d + 1);          // affine features
  const Eigen::MatrixXd fu = feats.rightCols(m) * z;         // reduced spline features

  Eigen::MatrixXd g(sources.rows(), d + 1 + nz);
  g.leftCols(d + 1) = fa;
  g.rightCols(nz) = fu;

  const Eigen::MatrixXd kz =
      z.transpose() * bending_matrix(control_points, t.kernel) * z;  // PSD on the subspace
  Eigen::MatrixXd normal = g.transpose() * g;
  normal.bottomRightCorner(nz, nz) += ridge * kz;
  normal.diagonal().array() += 1e-12;

  const Eigen::MatrixXd sol = normal.ldlt().solve(g.transpose() * targets);
  const Eigen::MatrixXd a = sol.topRows(d + 1);
  t.affine = a.topRows(d).transpose();
  t.offset = a.row(d).transpose();
  t.weights = z * sol.bottomRows(nz);
  return t;
}

void PenaltyParams::validate() const {
  if (lambda2 < 0.0 || lambda3 < 0.0) {
    throw std::invalid_argument("PenaltyParams: weights must be >= 0");
  }
  if (!(range_lo < range_hi)) {
    throw std::invalid_argument("PenaltyParams: range_lo must be < range_hi");
  }
}

double range_penalty(const Eigen::MatrixXd& points, const PenaltyParams& p) {
  p.validate();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      const double v = points(i, c);
      const double h = std::max(0.0, p.range_lo - v) + std::max(0.0, v - p.range_hi);
      acc += h * h;
    }
  }
  return acc / static_cast<double>(points.rows());
}

Eigen::MatrixXd range_penalty_gradient(const Eigen::MatrixXd& points, const PenaltyParams& p) {
  p.validate();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(points.rows(), points.cols());
  const double inv_n = 1.0 / static_cast<double>(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      const double v = points(i, c);
      if (v < p.range_lo) {
        grad(i, c) = 2.0 * (v - p.range_lo) * inv_n;
      } else if (v > p.range_hi) {
        grad(i, c) = 2.0 * (v - p.range_hi) * inv_n;
      }
    }
  }
  return grad;
}

void write_transform(std::ostream& os, const TpsTransform& t) {
  t.validate();
  os << "l2ot_transform v1\n";
  os << "dim " << t.dim << "\n";
  os << "kernel " << kernel_name(t.kernel) << "\n";
  os << "controls " << t.control_count() << "\n";
  auto write_row = [&os](const char* tag, const auto& row) {
    os << tag;
    for (Eigen::Index c = 0; c < row.size(); ++c) os << ' ' << fmt17(row[c]);
    os << '\n';
  };
  for (Eigen::Index r = 0; r < t.dim; ++r) write_row("affine", t.affine.row(r));
  write_row("offset", t.offset.transpose());
  for (Eigen::Index r = 0; r < t.control_count(); ++r) write_row("control", t.controls.row(r));
  for (Eigen::Index r = 0; r < t.control_count(); ++r) write_row("weight", t.weights.row(r));
  os << "end\n";
}

namespace {

std::vector<double> parse_row(std::istream& line_stream, Eigen::Index expect, int line_no) {
  std::vector<double> out;
  double v;
  while (line_stream >> v) out.push_back(v);
  if (static_cast<Eigen::Index>(out.size()) != expect) {
    throw ParseError("transform record: expected " + std::to_string(expect) + " values",
                     line_no);
  }
  return out;
}

}  // namespace

TpsTransform read_transform(std::istream& is) {
  std::string line;
  int line_no = 0;
  auto next_line = [&](const char* what) {
    if (!std::getline(is, line)) throw ParseError(std::string("transform record: missing ") + what,
                                                  line_no);
    ++line_no;
    return std::istringstream(line);
  };

  {
    auto ls = next_line("magic");
    std::string magic, version;
    ls >> magic >> version;
    if (magic != "l2ot_transform" || version != "v1") {
      throw ParseError("transform record: bad magic line", line_no);
    }
  }

  TpsTransform t;
  Eigen::Index m = 0;
  {
    auto ls = next_line("dim");
    std::string key;
    ls >> key >> t.dim;
    if (key != "dim" || t.dim < 1) throw ParseError("transform record: bad dim", line_no);
  }
  {
    auto ls = next_line("kernel");
    std::string key, name;
    ls >> key >> name;
    if (key != "kernel") throw ParseError("transform record: bad kernel line", line_no);
    t.kernel = kernel_from_name(name);
  }
  {
    auto ls = next_line("controls");
    std::string key;
    ls >> key >> m;
    if (key != "controls" || m < t.dim + 1) {
      throw ParseError("transform record: bad control count", line_no);
    }
  }

  t.affine.resize(t.dim, t.dim);
  t.offset.resize(t.dim);
  t.controls.resize(m, t.dim);
  t.weights.resize(m, t.dim);

  auto read_tagged = [&](const char* tag, auto&& store, Eigen::Index rows) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      auto ls = next_line(tag);
      std::string key;
      ls >> key;
      if (key != tag) throw ParseError(std::string("transform record: expected ") + tag, line_no);
      const auto vals = parse_row(ls, t.dim, line_no);
      store(r, vals);
    }
  };

  read_tagged("affine", [&](Eigen::Index r, const std::vector<double>& v) {
    for (int c = 0; c < t.dim; ++c) t.affine(r, c) = v[static_cast<std::size_t>(c)];
  }, t.dim);
  read_tagged("offset", [&](Eigen::Index, const std::vector<double>& v) {
    for (int c = 0; c < t.dim; ++c) t.offset[c] = v[static_cast<std::size_t>(c)];
  }, 1);
  read_tagged("control", [&](Eigen::Index r, const std::vector<double>& v) {
    for (int c = 0; c < t.dim; ++c) t.controls(r, c) = v[static_cast<std::size_t>(c)];
  }, m);
  read_tagged("weight", [&](Eigen::Index r, const std::vector<double>& v) {
    for (int c = 0; c < t.dim; ++c) t.weights(r, c) = v[static_cast<std::size_t>(c)];
  }, m);

  {
    auto ls = next_line("end");
    std::string key;
    ls >> key;
    if (key != "end") throw ParseError("transform record: missing end marker", line_no);
  }
  t.validate();
  return t;
}

void save_transform(const std::string& path, const TpsTransform& t) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  write_transform(os, t);
}

TpsTransform load_transform(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open transform file '" + path + "'");
  return read_transform(is);
}

Eigen::MatrixXd grid_controls(int dim, int per_axis) {
  if (dim < 1 || per_axis < 2) {
    throw std::invalid_argument("grid_controls: need dim >= 1 and per_axis >= 2");
  }
  Eigen::Index m = 1;
  for (int i = 0; i < dim; ++i) m *= per_axis;
  Eigen::MatrixXd out(m, dim);
  for (Eigen::Index idx = 0; idx < m; ++idx) {
    Eigen::Index rest = idx;
    for (int c = 0; c < dim; ++c) {
      const Eigen::Index q = rest % per_axis;
      rest /= per_axis;
      out(idx, c) = static_cast<double>(q) / static_cast<double>(per_axis - 1);
    }
  }
  return out;
}

Eigen::MatrixXd kmeans_controls(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                                int max_iters) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw std::invalid_argument("kmeans_controls: k must be >= 1");
  if (n < k) throw std::invalid_argument("kmeans_controls: fewer points than clusters");

  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centers(k, points.cols());

  // k-means++ seeding.
  centers.row(0) = points.row(static_cast<Eigen::Index>(bounded_rand(rng, static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = uniform_unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= d2[i];
        if (target <= 0.0) { pick = i; break; }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(bounded_rand(rng, static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) { best_d = d; best = c; }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      counts[assign[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        centers.row(c) =
            points.row(static_cast<Eigen::Index>(bounded_rand(rng, static_cast<std::uint64_t>(n))));
      }
    }
    if (!changed && iter > 0) break;
  }
  return centers;
}

int default_grid_size(int dim) {
  if (dim == 2) return 7;
  if (dim == 3) return 5;
  return 5;
}

}  // namespace l2ot
