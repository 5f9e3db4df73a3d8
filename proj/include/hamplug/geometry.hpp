#pragma once

// Pointwise evaluation of the standard contact and symplectic structures.
//
// Coordinate conventions (fixed across the library):
//   state point   R^{2n-1}: (x_1, y_1, ..., x_{n-1}, y_{n-1}, z)
//   ambient point R^{2n}  : (w, z, x_1, y_1, ..., x_{n-1}, y_{n-1})
//   symplectization R x R^{2n-1}: (t, x_1, y_1, ..., x_{n-1}, y_{n-1}, z)
// A 2-form is stored as the antisymmetric matrix M with
// omega(u, v) = u^T M v, so i_X omega = omega(X, .) has coefficients M^T X.

#include <Eigen/Dense>

#include <functional>
#include <utility>

#include "hamplug/errors.hpp"

namespace hamplug {

inline constexpr int kMaxN = 6;
inline constexpr int kMaxDim = 2 * kMaxN;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Half the dimension of the ambient symplectic space. The hypersurface
/// has dimension 2n-1, which must be at least 5.
class Dimension {
 public:
  explicit Dimension(int n);

  int n() const { return n_; }
  int odd() const { return 2 * n_ - 1; }
  int even() const { return 2 * n_; }
  int planes() const { return n_ - 1; }

  // Indices into a state point.
  int x(int j) const { return 2 * j; }
  int y(int j) const { return 2 * j + 1; }
  int z() const { return 2 * n_ - 2; }

  bool operator==(const Dimension&) const = default;

 private:
  int n_;
};

void check_state(const Dimension& dim, const Vec& p);
void check_ambient(const Dimension& dim, const Vec& p);

/// Unit vector along the last state coordinate.
Vec unit_z(const Dimension& dim);

struct Covector {
  Vec coeffs;

  double operator()(const Vec& v) const { return coeffs.dot(v); }
};

class BilinearForm {
 public:
  explicit BilinearForm(int size) : m_(Mat::Zero(size, size)) {}

  int size() const { return static_cast<int>(m_.rows()); }

  /// Adds c * (e^i wedge e^j). Writes both entries so the matrix stays
  /// antisymmetric to the bit.
  void add_wedge(int i, int j, double c) {
    m_(i, j) += c;
    m_(j, i) -= c;
  }

  /// Adds a wedge b for covectors a, b.
  void add_wedge(const Vec& a, const Vec& b, double scale = 1.0);

  void scale(double c) { m_ *= c; }

  const Mat& matrix() const { return m_; }

  double operator()(const Vec& u, const Vec& v) const { return u.dot(m_ * v); }

  /// Coefficients of omega(X, .).
  Covector contract(const Vec& v) const { return Covector{m_.transpose() * v}; }

  /// Pullback under a linear map with matrix J (columns are images of the
  /// basis vectors).
  BilinearForm pullback(const Mat& jacobian) const;

 private:
  Mat m_;
};

/// Value of a 1-form and its exterior derivative at one point.
struct ContactFormValue {
  Covector alpha;
  BilinearForm dalpha;
};

Covector eval_alpha_st(const Dimension& dim, const Vec& p);
BilinearForm eval_dalpha_st(const Dimension& dim);
ContactFormValue standard_contact_form(const Dimension& dim, const Vec& p);

/// alpha_st / h at p, given h(p) and its gradient.
ContactFormValue divided_contact_form(const Dimension& dim, const Vec& p, double h,
                                      const Vec& grad_h);

/// Solves d(alpha)(R, .) = 0, alpha(R) = 1 through the bordered system
///   [ M    a ] [R]   [0]
///   [ a^T  0 ] [mu] = [1]
/// whose solution has mu = 0 by antisymmetry of M.
Vec reeb_field(const ContactFormValue& form);

struct ReebResiduals {
  double normalization;  // |alpha(R) - 1|
  double kernel;         // max-norm of d(alpha)(R, .)
};
ReebResiduals reeb_residuals(const ContactFormValue& form, const Vec& reeb);

/// Solves omega(X, .) = -dK.
Vec hamiltonian_field(const BilinearForm& omega, const Covector& dk);
double hamiltonian_residual(const BilinearForm& omega, const Covector& dk, const Vec& field);

/// dw ^ dz + sum dx_j ^ dy_j in ambient ordering.
BilinearForm omega_st(const Dimension& dim);
Vec liouville_field(const Dimension& dim, const Vec& ambient);

/// i_Y omega_st at a point of {w = 2}, restricted to the tangent directions
/// and returned in state ordering.
Covector contact_type_restriction(const Dimension& dim, const Vec& ambient);

Vec ambient_to_state(const Dimension& dim, const Vec& ambient);
Vec state_to_ambient(const Dimension& dim, double w, const Vec& state);

Vec mirror_map(const Dimension& dim, const Vec& p);
Mat mirror_jacobian(const Dimension& dim);

Vec rescale_map(const Dimension& dim, double lambda, const Vec& p);
Mat rescale_jacobian(const Dimension& dim, double lambda);

/// Covector pullback: (F^* a)(v) = a(DF v).
Covector pullback(const Covector& at_image, const Mat& jacobian);

/// Collar (-sigma, sigma) x Sigma with transverse coordinate s, and the
/// substitution s = e^t - 1 that turns it into a piece of a symplectization.
class CollarChart {
 public:
  explicit CollarChart(double sigma);

  double sigma() const { return sigma_; }
  double s_from_t(double t) const;
  double t_from_s(double s) const;
  bool contains_s(double s) const { return s > -sigma_ && s < sigma_; }

 private:
  double sigma_;
};

/// Scalar function with an optional analytic gradient. Without one, the
/// gradient is taken by central differences with step h.
class ScalarField {
 public:
  using Evaluator = std::function<double(const Vec&)>;
  using Gradient = std::function<Vec(const Vec&)>;

  explicit ScalarField(Evaluator f, Gradient grad = {}, double fd_step = 1e-5);

  double operator()(const Vec& p) const { return f_(p); }
  Vec gradient(const Vec& p) const;
  Vec fd_gradient(const Vec& p) const;
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }

 private:
  Evaluator f_;
  Gradient grad_;
  double h_;
};

/// d(e^t alpha_st) at (t, p), in symplectization ordering.
BilinearForm symplectization_form(const Dimension& dim, double t, const Vec& p);

/// x -> (f(x), x).
std::pair<double, Vec> graph_embed(const ScalarField& f, const Vec& p);

}  // namespace hamplug
