#include "hamplug/trap.hpp"

#include <cmath>
#include <array>
#include <numbers>
#include <string>

#include "hamplug/integrator.hpp"

namespace hamplug {

namespace {

int nth_prime(int k) {
  int count = 0;
  for (int p = 2;; ++p) {
    bool prime = true;
    for (int d = 2; d * d <= p; ++d) {
      if (p % d == 0) {
        prime = false;
        break;
      }
    }
    if (prime && ++count == k) return p;
  }
}

}  // namespace

std::vector<double> default_beta(int count) {
  std::vector<double> b;
  for (int j = 0; j < count; ++j) b.push_back(j == 0 ? 1.0 : std::sqrt(double(nth_prime(j))));
  return b;
}

double flat_bump(double t) {
  const double t4 = t * t * t * t;
  if (!(t4 < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t4));
}

double flat_bump_derivative(double t) {
  const double t4 = t * t * t * t;
  if (!(t4 < 1.0)) return 0.0;
  const double d = 1.0 - t4;
  return flat_bump(t) * (-4.0 * t * t * t / (d * d));
}

ContactProfile::ContactProfile(Dimension dim, TrapParams params)
    : dim_(dim), params_(std::move(params)) {
  beta_ = params_.beta.empty() ? default_beta(dim_.planes()) : params_.beta;
  if (static_cast<int>(beta_.size()) != dim_.planes()) {
    throw ConfigError("trap.beta: expected " + std::to_string(dim_.planes()) + " values, got " +
                      std::to_string(beta_.size()));
  }
  double beta_min = beta_[0];
  for (double b : beta_) {
    if (!(b > 0.0)) throw ConfigError("trap.beta: values must be positive");
    beta_sum_ += b;
    beta_min = std::min(beta_min, b);
  }
  if (!(params_.c > 0.0)) throw ConfigError("trap.c must be positive");
  if (!(params_.amplitude >= 0.0 && params_.amplitude <= 1.0)) {
    throw ConfigError("trap.amplitude must lie in [0, 1]");
  }
  s0_ = params_.c * params_.c * beta_sum_;
  if (!(params_.width_s > 0.0 && params_.width_s < s0_)) {
    throw ConfigError("trap.width_s must lie in (0, c^2 sum beta) = (0, " + std::to_string(s0_) +
                      ")");
  }
  if (!(params_.width_z > 0.0)) throw ConfigError("trap.width_z must be positive");
  if (!(params_.k_w >= 0.0 && params_.k_w < 0.5)) {
    throw ConfigError("trap.k_w must lie in [0, 0.5)");
  }
  r_perp_ = std::sqrt((s0_ + params_.width_s) / beta_min);
  r0_ = std::sqrt(r_perp_ * r_perp_ + params_.width_z * params_.width_z);
}

bool ContactProfile::outside(const Vec& p, double& s) const {
  check_state(dim_, p);
  if (params_.amplitude == 0.0) return true;
  if (!(std::abs(p[dim_.z()]) < params_.width_z)) return true;
  s = 0.0;
  for (int j = 0; j < dim_.planes(); ++j) {
    const double x = p[dim_.x(j)], y = p[dim_.y(j)];
    s += beta_[j] * (x * x + y * y);
  }
  return !(std::abs(s - s0_) < params_.width_s);
}

bool ContactProfile::short_circuits(const Vec& p) const {
  double s = 0.0;
  return outside(p, s);
}

ContactProfile::Partials ContactProfile::partials(const Vec& p, double s) const {
  const int m = dim_.planes();
  const double z = p[dim_.z()];
  const double wz = params_.width_z, ws = params_.width_s;
  const double amp = params_.amplitude;

  const double a = flat_bump(z / wz);
  const double a_z = flat_bump_derivative(z / wz) / wz;
  const double phi = flat_bump((s - s0_) / ws);
  const double phi_s = flat_bump_derivative((s - s0_) / ws) / ws;
  const double r = (s - s0_) * phi / s0_;
  const double r_s = (phi + (s - s0_) * phi_s) / s0_;

  std::array<double, kMaxN> e{};
  std::array<double, kMaxN> v{};
  double ev = 0.0, e2 = 0.0;
  for (int j = 0; j < m; ++j) {
    const double x = p[dim_.x(j)], y = p[dim_.y(j)];
    v[j] = beta_[j] * (x * x + y * y) / s;
    e[j] = v[j] - beta_[j] / beta_sum_;
    ev += e[j] * v[j];
    e2 += e[j] * e[j];
  }
  const double w = 1.0 - params_.k_w * e2;

  Partials out;
  out.h = 1.0 + amp * a * w * r;
  for (int j = 0; j < m; ++j) {
    const double w_u = -2.0 * params_.k_w * beta_[j] / s * (e[j] - ev);
    out.h_u[j] = amp * a * (w_u * r + w * r_s * beta_[j]);
  }
  out.h_z = amp * a_z * w * r;
  return out;
}

ProfileValue ContactProfile::eval(const Vec& p) const {
  ProfileValue val;
  val.grad = Vec::Zero(dim_.odd());
  double s = 0.0;
  if (outside(p, s)) return val;
  const Partials d = partials(p, s);
  val.h = d.h;
  for (int j = 0; j < dim_.planes(); ++j) {
    val.grad[dim_.x(j)] = 2.0 * p[dim_.x(j)] * d.h_u[j];
    val.grad[dim_.y(j)] = 2.0 * p[dim_.y(j)] * d.h_u[j];
  }
  val.grad[dim_.z()] = d.h_z;
  return val;
}

double ContactProfile::eval_G(const Vec& p) const {
  const ProfileValue v = eval(p);
  double g = v.h;
  for (int j = 0; j < dim_.planes(); ++j) {
    g -= 0.5 * (p[dim_.x(j)] * v.grad[dim_.x(j)] + p[dim_.y(j)] * v.grad[dim_.y(j)]);
  }
  return g;
}

std::vector<double> ContactProfile::design_frequencies() const {
  std::vector<double> nu;
  for (double b : beta_) nu.push_back(2.0 * params_.amplitude * b / s0_);
  return nu;
}

Vec ContactProfile::closed_form_reeb(const Vec& p) const {
  double s = 0.0;
  if (outside(p, s)) return unit_z(dim_);
  const Partials d = partials(p, s);
  // For alpha = alpha_st / h with h = h(u, z):
  //   x' = -2 y h_j + x h_z / 2,  y' = 2 x h_j + y h_z / 2,  z' = h - sum u_j h_j
  Vec r(dim_.odd());
  double g = d.h;
  for (int j = 0; j < dim_.planes(); ++j) {
    const double x = p[dim_.x(j)], y = p[dim_.y(j)];
    r[dim_.x(j)] = -2.0 * y * d.h_u[j] + 0.5 * x * d.h_z;
    r[dim_.y(j)] = 2.0 * x * d.h_u[j] + 0.5 * y * d.h_z;
    g -= (x * x + y * y) * d.h_u[j];
  }
  r[dim_.z()] = g;
  return r;
}

double CliffordTorus::distance(const Vec& p) const {
  check_state(dim_, p);
  double d2 = p[dim_.z()] * p[dim_.z()];
  for (int j = 0; j < dim_.planes(); ++j) {
    const double r = std::hypot(p[dim_.x(j)], p[dim_.y(j)]);
    d2 += (r - c_) * (r - c_);
  }
  return std::sqrt(d2);
}

Vec CliffordTorus::point(const std::vector<double>& angles) const {
  if (static_cast<int>(angles.size()) != dim_.planes()) {
    throw DimensionMismatch("torus point needs one angle per plane");
  }
  Vec p = Vec::Zero(dim_.odd());
  for (int j = 0; j < dim_.planes(); ++j) {
    p[dim_.x(j)] = c_ * std::cos(angles[j]);
    p[dim_.y(j)] = c_ * std::sin(angles[j]);
  }
  return p;
}

Vec Placement::to_profile(const Dimension& dim, const Vec& q) const {
  check_state(dim, q);
  Vec p = q / lambda;
  p[dim.z()] = (q[dim.z()] - z_center) / (lambda * lambda);
  return p;
}

Vec Placement::from_profile(const Dimension& dim, const Vec& p) const {
  Vec q = rescale_map(dim, lambda, p);
  q[dim.z()] += z_center;
  return q;
}

Vec Placement::placed_gradient(const Dimension& dim, const Vec& grad) const {
  Vec g = grad / lambda;
  g[dim.z()] = grad[dim.z()] / (lambda * lambda);
  return g;
}

TrapField::TrapField(const ContactProfile& profile, Placement placement, ReebPath path)
    : profile_(&profile), placement_(placement), path_(path) {
  if (!(placement.lambda > 0.0)) throw PreconditionError("placement lambda must be positive");
}

bool TrapField::short_circuits(const Vec& q) const {
  return profile_->short_circuits(placement_.to_profile(dim(), q));
}

ContactFormValue TrapField::form(const Vec& q) const {
  const ProfileValue v = profile_->eval(placement_.to_profile(dim(), q));
  return divided_contact_form(dim(), q, v.h, placement_.placed_gradient(dim(), v.grad));
}

Vec TrapField::operator()(const Vec& q) const {
  if (short_circuits(q)) return unit_z(dim());
  if (path_ == ReebPath::Solve) return reeb_field(form(q));
  // Pushforward of R / lambda^2 under the placement: (R_xy / lambda, R_z).
  Vec r = profile_->closed_form_reeb(placement_.to_profile(dim(), q));
  r.head(dim().odd() - 1) /= placement_.lambda;
  return r;
}

double TrapField::G(const Vec& q) const {
  return profile_->eval_G(placement_.to_profile(dim(), q));
}

double TrapField::placed_torus_distance(const Vec& q) const {
  check_state(dim(), q);
  double d2 = (q[dim().z()] - placement_.z_center) * (q[dim().z()] - placement_.z_center);
  const double c = placement_.lambda * profile_->torus_radius();
  for (int j = 0; j < dim().planes(); ++j) {
    const double r = std::hypot(q[dim().x(j)], q[dim().y(j)]);
    d2 += (r - c) * (r - c);
  }
  return std::sqrt(d2);
}

FrequencyMeasurement torus_frequencies(const ContactProfile& profile,
                                       const std::vector<double>& angles, double t_end,
                                       double tol, double rel_tol) {
  const Dimension& dim = profile.dim();
  const CliffordTorus torus(dim, profile.torus_radius());
  const TrapField field(profile, Placement{});
  IntegratorOptions opts;
  opts.rtol = opts.atol = tol;
  // Cap the step so the phase can be unwrapped between samples.
  opts.h_max = 0.5;
  const Trajectory traj = integrate(field, torus.point(angles), t_end, opts);
  if (traj.status != TerminalStatus::Completed) throw StepFailure(traj.message);

  FrequencyMeasurement out;
  out.design = profile.design_frequencies();
  const std::size_t k = traj.times.size();
  for (int j = 0; j < dim.planes(); ++j) {
    // Unwrapped phase, then least-squares slope.
    std::vector<double> theta(k);
    double prev = 0.0, offset = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const Vec& p = traj.states[i];
      double a = std::atan2(p[dim.y(j)], p[dim.x(j)]);
      if (i > 0) {
        while (a + offset - prev > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
        while (a + offset - prev < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
      }
      theta[i] = a + offset;
      prev = theta[i];
    }
    double mt = 0.0, mth = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      mt += traj.times[i];
      mth += theta[i];
    }
    mt /= double(k);
    mth /= double(k);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      num += (traj.times[i] - mt) * (theta[i] - mth);
      den += (traj.times[i] - mt) * (traj.times[i] - mt);
    }
    out.measured.push_back(num / den);
    const double rel = std::abs(out.measured.back() - out.design[j]) / std::abs(out.design[j]);
    out.max_relative_error = std::max(out.max_relative_error, rel);
  }
  for (const Vec& p : traj.states) {
    out.max_torus_distance = std::max(out.max_torus_distance, torus.distance(p));
  }
  if (out.max_relative_error > rel_tol) {
    throw MeasurementMismatch("torus frequencies differ from design by " +
                              std::to_string(out.max_relative_error) + " (relative)");
  }
  return out;
}

}  // namespace hamplug
