#include "hamplug/volume.hpp"

#include <chrono>
#include <cmath>

#include "hamplug/exterior.hpp"
#include "hamplug/random.hpp"

namespace hamplug {

namespace {

double smooth_f(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double smooth_f_prime(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

}  // namespace

PsiProfile::PsiProfile(double eps) : eps_(eps), plateau_(eps / 8.0), support_(eps / 2.0) {
  if (!(eps > 0.0)) throw ConfigError("psi: eps must be positive");
}

double PsiProfile::operator()(double u) const {
  const double t = (support_ - std::abs(u)) / (support_ - plateau_);
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = smooth_f(t), b = smooth_f(1.0 - t);
  return a / (a + b);
}

double PsiProfile::derivative(double u) const {
  const double t = (support_ - std::abs(u)) / (support_ - plateau_);
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = smooth_f(t), b = smooth_f(1.0 - t);
  const double da = smooth_f_prime(t), db = -smooth_f_prime(1.0 - t);
  const double ds_dt = (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
  const double dt_du = (u > 0.0 ? -1.0 : 1.0) / (support_ - plateau_);
  return ds_dt * dt_du;
}

FormFamily::FormFamily(const ContactProfile& profile, PsiProfile psi, Placement placement)
    : profile_(&profile), psi_(psi), placement_(placement) {}

bool FormFamily::short_circuits(const Vec& q, double u) const {
  return psi_(u) == 0.0 || profile_->short_circuits(placement_.to_profile(dim(), q));
}

ProfileValue FormFamily::h_u(const Vec& q, double u) const {
  const ProfileValue v = profile_->eval(placement_.to_profile(dim(), q));
  const double s = psi_(u);
  ProfileValue out;
  out.h = s * v.h + 1.0 - s;
  out.grad = s * placement_.placed_gradient(dim(), v.grad);
  return out;
}

ContactFormValue FormFamily::form(const Vec& q, double u) const {
  const ProfileValue v = h_u(q, u);
  return divided_contact_form(dim(), q, v.h, v.grad);
}

Vec FormFamily::reeb_Ru(const Vec& q, double u) const {
  if (short_circuits(q, u)) return unit_z(dim());
  return reeb_field(form(q, u));
}

double FormFamily::closed_form_dz(const Vec& q, double u) const {
  const Vec p = placement_.to_profile(dim(), q);
  const ProfileValue v = profile_->eval(p);
  const double s = psi_(u);
  double euler = 0.0;
  for (int j = 0; j < dim().planes(); ++j) {
    euler += p[dim().x(j)] * v.grad[dim().x(j)] + p[dim().y(j)] * v.grad[dim().y(j)];
  }
  return s * v.h - 0.5 * s * euler + 1.0 - s;
}

double FormFamily::omega_density(const Vec& q, double u) const {
  const ContactFormValue f = form(q, u);
  const Form vol = Form::one_form(f.alpha).wedge(Form::two_form(f.dalpha).power(dim().n() - 1));
  // du is the last basis direction, so appending it keeps the sign.
  const double rho = vol.top_coefficient();
  if (!(rho > 0.0)) {
    throw NonPositiveDensity("Omega density " + std::to_string(rho) +
                             " is not positive: alpha_u fails the contact condition");
  }
  return rho;
}

double standard_omega_density(const Dimension& dim) {
  double f = 1.0;
  for (int k = 2; k < dim.n(); ++k) f *= k;
  return f;
}

EvenPlugField::EvenPlugField(const PlugField& plug, PsiProfile psi)
    : plug_(&plug), family_(plug.profile(), psi, plug.trap().placement()) {}

Vec EvenPlugField::operator()(const Vec& s) const {
  const int d = dim().odd();
  if (s.size() != d + 1) throw DimensionMismatch("even plug state has wrong dimension");
  const Vec q = s.head(d);
  const double u = s[d];
  const double z = q[dim().z()];
  Vec out = Vec::Zero(d + 1);
  if (z < 0.0) {
    out.head(d) = family_.reeb_Ru(q, u);
  } else if (z > 0.0) {
    Vec r = family_.reeb_Ru(plug_->mirror(q), u);
    r.head(d - 1) *= -1.0;
    out.head(d) = r;
  } else {
    out[dim().z()] = 1.0;
  }
  return out;
}

Vec EvenPlugField::at(const Vec& s) const {
  const int d = dim().odd();
  if (s.size() != d + 1) throw DimensionMismatch("even plug state has wrong dimension");
  const auto& g = plug_->geometry();
  if (s.head(d - 1).norm() > g.delta() || std::abs(s[d - 1]) > g.eps() ||
      std::abs(s[d]) > g.eps()) {
    throw PreconditionError("point outside B x [-eps, eps]");
  }
  return (*this)(s);
}

double EvenPlugField::density(const Vec& s) const {
  const int d = dim().odd();
  const Vec q = s.head(d);
  return q[dim().z()] > 0.0 ? family_.omega_density(plug_->mirror(q), s[d])
                            : family_.omega_density(q, s[d]);
}

std::vector<Vec> deformation_samples(const EvenPlugField& field, int count, std::uint64_t seed) {
  const Dimension& dim = field.dim();
  const ContactProfile& prof = field.plug().profile();
  const Placement place = field.family().placement();
  const double half_u = field.family().psi().support();
  Rng rng(seed);
  std::vector<Vec> out;
  while (static_cast<int>(out.size()) < count) {
    Vec p(dim.odd());
    for (int k = 0; k < dim.odd() - 1; ++k) {
      p[k] = rng.uniform(-prof.transverse_radius(), prof.transverse_radius());
    }
    p[dim.z()] = rng.uniform(-prof.z_half_width(), prof.z_half_width());
    const double u = rng.uniform(-half_u, half_u);
    if (prof.short_circuits(p) && !prof.is_identity()) continue;
    Vec q = place.from_profile(dim, p);
    // Every other sample goes to the mirrored half.
    if (out.size() % 2 == 1) q = field.plug().mirror(q);
    Vec s(dim.odd() + 1);
    s.head(dim.odd()) = q;
    s[dim.odd()] = u;
    out.push_back(s);
  }
  return out;
}

VerificationReport verify_volume_preservation(const EvenPlugField& field,
                                              const std::vector<Vec>& samples, double T,
                                              const IntegratorOptions& opts, double threshold,
                                              double fd_step) {
  if (!(T > 0.0)) throw PreconditionError("volume check needs T > 0");
  const auto start = std::chrono::steady_clock::now();
  IntegratorOptions io = opts;
  io.h_max = std::min(io.h_max, field.plug().max_step());
  VerificationReport rep;
  rep.suite = "volume.preservation";
  double worst = 0.0, sum = 0.0;
  nlohmann::json ratios = nlohmann::json::array();
  for (const Vec& s : samples) {
    Vec end;
    const Mat jac = flow_jacobian(field, s, T, io, fd_step, &end);
    const double ratio = field.density(end) * jac.determinant() / field.density(s);
    const double err = std::abs(ratio - 1.0);
    worst = std::max(worst, err);
    sum += err;
    ratios.push_back(ratio);
  }
  rep.metrics = {{"samples", samples.size()},
                 {"max_ratio_error", worst},
                 {"mean_ratio_error", samples.empty() ? 0.0 : sum / samples.size()},
                 {"ratios", ratios}};
  rep.params = {{"T", T}, {"rtol", opts.rtol}, {"atol", opts.atol}, {"threshold", threshold},
                {"fd_step", fd_step}};
  rep.passed = !samples.empty() && worst <= threshold;
  rep.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace hamplug
