#include "hamplug/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hamplug {

Dimension::Dimension(int n) : n_(n) {
  if (n < 3) {
    throw PreconditionError("dimension n=" + std::to_string(n) +
                            " rejected: hypersurface dimension 2n-1 must be at least 5");
  }
  if (n > kMaxN) {
    throw PreconditionError("dimension n=" + std::to_string(n) + " exceeds supported maximum " +
                            std::to_string(kMaxN));
  }
}

void check_state(const Dimension& dim, const Vec& p) {
  if (p.size() != dim.odd()) {
    throw DimensionMismatch("state point has " + std::to_string(p.size()) +
                            " coordinates, expected " + std::to_string(dim.odd()));
  }
}

void check_ambient(const Dimension& dim, const Vec& p) {
  if (p.size() != dim.even()) {
    throw DimensionMismatch("ambient point has " + std::to_string(p.size()) +
                            " coordinates, expected " + std::to_string(dim.even()));
  }
}

Vec unit_z(const Dimension& dim) {
  Vec e = Vec::Zero(dim.odd());
  e[dim.z()] = 1.0;
  return e;
}

void BilinearForm::add_wedge(const Vec& a, const Vec& b, double scale) {
  // (a ^ b)(u, v) = a(u) b(v) - a(v) b(u)
  m_.noalias() += scale * (a * b.transpose() - b * a.transpose());
}

BilinearForm BilinearForm::pullback(const Mat& jacobian) const {
  BilinearForm out(static_cast<int>(jacobian.cols()));
  out.m_ = jacobian.transpose() * m_ * jacobian;
  return out;
}

Covector eval_alpha_st(const Dimension& dim, const Vec& p) {
  check_state(dim, p);
  Vec a = Vec::Zero(dim.odd());
  for (int j = 0; j < dim.planes(); ++j) {
    a[dim.x(j)] = -0.5 * p[dim.y(j)];
    a[dim.y(j)] = 0.5 * p[dim.x(j)];
  }
  a[dim.z()] = 1.0;
  return Covector{a};
}

BilinearForm eval_dalpha_st(const Dimension& dim) {
  BilinearForm m(dim.odd());
  for (int j = 0; j < dim.planes(); ++j) m.add_wedge(dim.x(j), dim.y(j), 1.0);
  return m;
}

ContactFormValue standard_contact_form(const Dimension& dim, const Vec& p) {
  return {eval_alpha_st(dim, p), eval_dalpha_st(dim)};
}

ContactFormValue divided_contact_form(const Dimension& dim, const Vec& p, double h,
                                      const Vec& grad_h) {
  Covector a = eval_alpha_st(dim, p);
  BilinearForm m = eval_dalpha_st(dim);
  // d(alpha/h) = d(alpha)/h - dh ^ alpha / h^2
  m.scale(1.0 / h);
  m.add_wedge(grad_h, a.coeffs, -1.0 / (h * h));
  a.coeffs /= h;
  return {a, m};
}

namespace {

constexpr double kSingularThreshold = 1e-13;

// Gaussian elimination with partial pivoting for the tiny dense systems
// solved at every field evaluation. Returns the smallest pivot relative to
// the largest matrix entry through `pivot_ratio`.
template <int MaxN>
Eigen::Matrix<double, Eigen::Dynamic, 1, 0, MaxN, 1> solve_small(
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, MaxN, MaxN> a,
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, MaxN, 1> b, double& pivot_ratio) {
  const int n = static_cast<int>(a.rows());
  const double scale = a.cwiseAbs().maxCoeff();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        piv = i;
      }
    }
    min_pivot = std::min(min_pivot, best);
    if (best == 0.0) break;
    if (piv != k) {
      a.row(k).swap(a.row(piv));
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  pivot_ratio = scale > 0.0 ? min_pivot / scale : 0.0;
  if (!(pivot_ratio > kSingularThreshold)) return b;
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= a(i, j) * b[j];
    b[i] = acc / a(i, i);
  }
  return b;
}

}  // namespace

Vec reeb_field(const ContactFormValue& form) {
  const int d = form.dalpha.size();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim + 1, kMaxDim + 1> bordered(
      d + 1, d + 1);
  bordered.topLeftCorner(d, d) = form.dalpha.matrix();
  bordered.topRightCorner(d, 1) = form.alpha.coeffs;
  bordered.bottomLeftCorner(1, d) = form.alpha.coeffs.transpose();
  bordered(d, d) = 0.0;
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1> rhs =
      Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1>::Zero(d + 1);
  rhs[d] = 1.0;

  double ratio = 0.0;
  const auto sol = solve_small<kMaxDim + 1>(bordered, rhs, ratio);
  if (!(ratio > kSingularThreshold)) {
    throw SingularSystem("Reeb system is singular (contact condition fails), pivot ratio " +
                         std::to_string(ratio));
  }
  return sol.head(d);
}

ReebResiduals reeb_residuals(const ContactFormValue& form, const Vec& reeb) {
  return {std::abs(form.alpha(reeb) - 1.0),
          form.dalpha.contract(reeb).coeffs.cwiseAbs().maxCoeff()};
}

Vec hamiltonian_field(const BilinearForm& omega, const Covector& dk) {
  // omega(X, .) = M^T X = -M X, so the system is M X = dK.
  double ratio = 0.0;
  Vec sol = solve_small<kMaxDim>(omega.matrix(), dk.coeffs, ratio);
  if (!(ratio > kSingularThreshold)) {
    throw SingularSystem("symplectic form is degenerate, pivot ratio " + std::to_string(ratio));
  }
  return sol;
}

double hamiltonian_residual(const BilinearForm& omega, const Covector& dk, const Vec& field) {
  return (omega.contract(field).coeffs + dk.coeffs).cwiseAbs().maxCoeff();
}

BilinearForm omega_st(const Dimension& dim) {
  BilinearForm m(dim.even());
  m.add_wedge(0, 1, 1.0);
  for (int j = 0; j < dim.planes(); ++j) m.add_wedge(2 + 2 * j, 3 + 2 * j, 1.0);
  return m;
}

Vec liouville_field(const Dimension& dim, const Vec& ambient) {
  check_ambient(dim, ambient);
  return 0.5 * ambient;
}

Vec ambient_to_state(const Dimension& dim, const Vec& ambient) {
  check_ambient(dim, ambient);
  Vec s(dim.odd());
  for (int j = 0; j < dim.planes(); ++j) {
    s[dim.x(j)] = ambient[2 + 2 * j];
    s[dim.y(j)] = ambient[3 + 2 * j];
  }
  s[dim.z()] = ambient[1];
  return s;
}

Vec state_to_ambient(const Dimension& dim, double w, const Vec& state) {
  check_state(dim, state);
  Vec a(dim.even());
  a[0] = w;
  a[1] = state[dim.z()];
  for (int j = 0; j < dim.planes(); ++j) {
    a[2 + 2 * j] = state[dim.x(j)];
    a[3 + 2 * j] = state[dim.y(j)];
  }
  return a;
}

Covector contact_type_restriction(const Dimension& dim, const Vec& ambient) {
  check_ambient(dim, ambient);
  if (std::abs(ambient[0] - 2.0) > 1e-12) {
    throw PreconditionError("contact-type restriction requires a point on {w = 2}, got w=" +
                            std::to_string(ambient[0]));
  }
  const Covector full = omega_st(dim).contract(liouville_field(dim, ambient));
  // Tangent directions of {w = 2} are every ambient coordinate except w.
  return Covector{ambient_to_state(dim, full.coeffs)};
}

Vec mirror_map(const Dimension& dim, const Vec& p) {
  check_state(dim, p);
  Vec q = p;
  q[dim.z()] = -q[dim.z()];
  return q;
}

Mat mirror_jacobian(const Dimension& dim) {
  Mat j = Mat::Identity(dim.odd(), dim.odd());
  j(dim.z(), dim.z()) = -1.0;
  return j;
}

Vec rescale_map(const Dimension& dim, double lambda, const Vec& p) {
  if (!(lambda > 0.0)) {
    throw PreconditionError("rescale factor must be positive, got " + std::to_string(lambda));
  }
  check_state(dim, p);
  Vec q = lambda * p;
  q[dim.z()] = lambda * lambda * p[dim.z()];
  return q;
}

Mat rescale_jacobian(const Dimension& dim, double lambda) {
  if (!(lambda > 0.0)) {
    throw PreconditionError("rescale factor must be positive, got " + std::to_string(lambda));
  }
  Mat j = lambda * Mat::Identity(dim.odd(), dim.odd());
  j(dim.z(), dim.z()) = lambda * lambda;
  return j;
}

Covector pullback(const Covector& at_image, const Mat& jacobian) {
  return Covector{jacobian.transpose() * at_image.coeffs};
}

CollarChart::CollarChart(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("collar half-width must be positive");
}

double CollarChart::s_from_t(double t) const { return std::expm1(t); }

double CollarChart::t_from_s(double s) const {
  if (!contains_s(s) || s <= -1.0) throw PreconditionError("s outside the collar");
  return std::log1p(s);
}

ScalarField::ScalarField(Evaluator f, Gradient grad, double fd_step)
    : f_(std::move(f)), grad_(std::move(grad)), h_(fd_step) {}

Vec ScalarField::gradient(const Vec& p) const { return grad_ ? grad_(p) : fd_gradient(p); }

Vec ScalarField::fd_gradient(const Vec& p) const {
  Vec g(p.size());
  Vec q = p;
  for (int i = 0; i < p.size(); ++i) {
    q[i] = p[i] + h_;
    const double fp = f_(q);
    q[i] = p[i] - h_;
    const double fm = f_(q);
    q[i] = p[i];
    g[i] = (fp - fm) / (2.0 * h_);
  }
  return g;
}

BilinearForm symplectization_form(const Dimension& dim, double t, const Vec& p) {
  const int d = dim.odd();
  BilinearForm m(d + 1);
  Vec dt = Vec::Zero(d + 1);
  dt[0] = 1.0;
  Vec a = Vec::Zero(d + 1);
  a.tail(d) = eval_alpha_st(dim, p).coeffs;
  // d(e^t alpha) = e^t (dt ^ alpha + d alpha)
  m.add_wedge(dt, a, 1.0);
  for (int j = 0; j < dim.planes(); ++j) m.add_wedge(1 + dim.x(j), 1 + dim.y(j), 1.0);
  m.scale(std::exp(t));
  return m;
}

std::pair<double, Vec> graph_embed(const ScalarField& f, const Vec& p) {
  const double t = f(p);
  if (!std::isfinite(t)) throw PreconditionError("graph function is not finite at the point");
  return {t, p};
}

}  // namespace hamplug
