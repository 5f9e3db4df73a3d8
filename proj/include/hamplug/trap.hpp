#pragma once

// Trap profile H for the contact form alpha_st / H.
//
// The profile is rotationally symmetric, H = h(u_1, ..., u_{n-1}, z) with
// u_j = x_j^2 + y_j^2:
//
//   h = 1 + amplitude * A(z) * W(v) * R(s)
//   s = sum_j beta_j u_j,  s0 = c^2 sum_j beta_j,  v_j = beta_j u_j / s
//   R(s) = (s - s0) phi(s) / s0,  W(v) = 1 - k_w |v - v0|^2,  v0_j = beta_j / sum beta
//   A(z) = flat(z / width_z),  phi(s) = flat((s - s0) / width_s)
//   flat(t) = exp(1 - 1 / (1 - t^4)) for |t| < 1, else 0
//
// With amplitude 1, dz(R) = G = 1 + A W (R - s R') vanishes exactly on the
// Clifford torus {u_j = c^2, z = 0} and is positive elsewhere, and dh/dz = 0
// on the line u = c^2 (1, ..., 1), which keeps the torus invariant. Both
// bumps are flat to fourth order, which keeps the numerical drift away from
// the torus slow enough for long trapped runs.

#include <array>
#include <vector>

#include "hamplug/geometry.hpp"

namespace hamplug {

struct TrapParams {
  double c = 0.5;
  double amplitude = 1.0;  // 0 gives H == 1
  double width_s = 0.3;
  double width_z = 0.3;
  double k_w = 0.4;
  std::vector<double> beta;  // empty: default_beta(n - 1)
};

/// 1, sqrt 2, sqrt 3, sqrt 5, ... (square roots of 1 and the primes).
std::vector<double> default_beta(int count);

/// Smooth compactly supported plateau bump exp(1 - 1/(1 - t^4)) and its
/// derivative.
double flat_bump(double t);
double flat_bump_derivative(double t);

struct ProfileValue {
  double h = 1.0;
  Vec grad;
};

class ContactProfile {
 public:
  ContactProfile(Dimension dim, TrapParams params);

  const Dimension& dim() const { return dim_; }
  const TrapParams& params() const { return params_; }
  const std::vector<double>& beta() const { return beta_; }
  double torus_radius() const { return params_.c; }
  double s0() const { return s0_; }
  bool is_identity() const { return params_.amplitude == 0.0; }

  /// H - 1 vanishes outside this ball.
  double support_radius() const { return r0_; }
  /// Bounds of the support: sum_j u_j <= transverse_radius^2, |z| < z_half_width.
  double transverse_radius() const { return r_perp_; }
  double z_half_width() const { return params_.width_z; }

  /// True where the evaluator returns exactly (1, 0).
  bool short_circuits(const Vec& p) const;

  ProfileValue eval(const Vec& p) const;
  double value(const Vec& p) const { return eval(p).h; }
  Vec gradient(const Vec& p) const { return eval(p).grad; }

  /// dz of the Reeb field of alpha_st / H: H - 1/2 sum (x H_x + y H_y).
  double eval_G(const Vec& p) const;

  /// Angular speeds of the Reeb flow on the torus, 2 amplitude beta_j / s0.
  std::vector<double> design_frequencies() const;

  /// Reeb field of alpha_st / H from the rotational closed form. Used as a
  /// cross-check of the generic solver.
  Vec closed_form_reeb(const Vec& p) const;

 private:
  struct Partials {
    double h;
    std::array<double, kMaxN> h_u{};  // dh/du_j
    double h_z;
  };
  bool outside(const Vec& p, double& s) const;
  Partials partials(const Vec& p, double s) const;

  Dimension dim_;
  TrapParams params_;
  std::vector<double> beta_;
  double beta_sum_ = 0.0;
  double s0_ = 0.0;
  double r_perp_ = 0.0;
  double r0_ = 0.0;
};

class CliffordTorus {
 public:
  CliffordTorus(Dimension dim, double radius) : dim_(dim), c_(radius) {}

  double radius() const { return c_; }
  /// Euclidean distance to {r_j = c, z = 0}.
  double distance(const Vec& p) const;
  Vec point(const std::vector<double>& angles) const;

 private:
  Dimension dim_;
  double c_;
};

/// Conjugation q = (lambda x, lambda y, lambda^2 z + z_center) that places
/// the profile inside a box. z-translation preserves alpha_st and the
/// rescaling pulls it back to lambda^2 alpha_st.
struct Placement {
  double lambda = 1.0;
  double z_center = 0.0;

  Vec to_profile(const Dimension& dim, const Vec& q) const;
  Vec from_profile(const Dimension& dim, const Vec& p) const;
  /// Gradient of H(to_profile(q)) from the profile gradient.
  Vec placed_gradient(const Dimension& dim, const Vec& grad) const;
};

/// How the trap Reeb field is evaluated: the generic bordered linear solve,
/// or the rotational closed form (about six times cheaper, used for
/// long-horizon runs and checked against the solve by the test suite).
enum class ReebPath { Solve, ClosedForm };

/// Reeb field of alpha_st / H_placed.
class TrapField {
 public:
  TrapField(const ContactProfile& profile, Placement placement, ReebPath path = ReebPath::Solve);

  ReebPath path() const { return path_; }

  const ContactProfile& profile() const { return *profile_; }
  const Placement& placement() const { return placement_; }
  const Dimension& dim() const { return profile_->dim(); }

  bool short_circuits(const Vec& q) const;
  /// alpha_st / H_placed and its differential at q.
  ContactFormValue form(const Vec& q) const;
  Vec operator()(const Vec& q) const;
  /// G at the profile preimage of q.
  double G(const Vec& q) const;
  /// Torus distance measured in placed coordinates.
  double placed_torus_distance(const Vec& q) const;

 private:
  const ContactProfile* profile_;
  Placement placement_;
  ReebPath path_;
};

struct FrequencyMeasurement {
  std::vector<double> measured;
  std::vector<double> design;
  double max_relative_error = 0.0;
  double max_torus_distance = 0.0;  // along the measuring orbit
};

/// Measures the angular speeds on the torus by integrating the unplaced
/// Reeb field from the torus point with the given angles and fitting a
/// linear phase. Throws MeasurementMismatch beyond rel_tol.
FrequencyMeasurement torus_frequencies(const ContactProfile& profile,
                                       const std::vector<double>& angles, double t_end = 100.0,
                                       double tol = 1e-12, double rel_tol = 1e-4);

}  // namespace hamplug
