#include "hamplug/host.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "hamplug/parallel.hpp"
#include "hamplug/random.hpp"

namespace hamplug {

std::vector<double> prime_root_coefficients(int n) {
  std::vector<double> a;
  for (int p = 2; static_cast<int>(a.size()) < n; ++p) {
    bool prime = true;
    for (int d = 2; d * d <= p; ++d) prime = prime && p % d != 0;
    if (prime) a.push_back(std::sqrt(double(p)));
  }
  return a;
}

EllipsoidHost::EllipsoidHost(std::vector<double> a) : a_(std::move(a)) {
  if (a_.empty() || 2 * a_.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError("host: unsupported number of coefficients");
  }
  for (double v : a_) {
    if (!(v > 0.0)) throw ConfigError("host: coefficients must be positive");
  }
}

double EllipsoidHost::K(const Vec& p) const {
  double k = 0.0;
  for (int j = 0; j < n(); ++j) k += a_[j] * (p[2 * j] * p[2 * j] + p[2 * j + 1] * p[2 * j + 1]);
  return k;
}

Covector EllipsoidHost::dK(const Vec& p) const {
  Vec g(dim());
  for (int j = 0; j < n(); ++j) {
    g[2 * j] = 2.0 * a_[j] * p[2 * j];
    g[2 * j + 1] = 2.0 * a_[j] * p[2 * j + 1];
  }
  return Covector{g};
}

BilinearForm EllipsoidHost::omega() const {
  BilinearForm m(dim());
  for (int j = 0; j < n(); ++j) m.add_wedge(2 * j, 2 * j + 1, 1.0);
  return m;
}

Vec EllipsoidHost::field(const Vec& p) const {
  if (p.size() != dim()) throw DimensionMismatch("host point has wrong dimension");
  Vec v(dim());
  for (int j = 0; j < n(); ++j) {
    v[2 * j] = -2.0 * a_[j] * p[2 * j + 1];
    v[2 * j + 1] = 2.0 * a_[j] * p[2 * j];
  }
  return v;
}

Vec EllipsoidHost::field_by_solve(const Vec& p) const {
  return hamiltonian_field(omega(), dK(p));
}

Vec EllipsoidHost::flow(const Vec& p, double t) const {
  Vec q(dim());
  for (int j = 0; j < n(); ++j) {
    const double c = std::cos(2.0 * a_[j] * t), s = std::sin(2.0 * a_[j] * t);
    q[2 * j] = c * p[2 * j] - s * p[2 * j + 1];
    q[2 * j + 1] = s * p[2 * j] + c * p[2 * j + 1];
  }
  return q;
}

PeriodicOrbit periodic_orbit(const EllipsoidHost& host, int j) {
  if (j < 1 || j > host.n()) {
    throw PreconditionError("orbit index " + std::to_string(j) + " outside 1.." +
                            std::to_string(host.n()));
  }
  PeriodicOrbit o;
  o.index = j;
  o.radius = 1.0 / std::sqrt(host.coefficients()[j - 1]);
  o.period = std::numbers::pi / host.coefficients()[j - 1];
  o.base_point = Vec::Zero(host.dim());
  o.base_point[2 * (j - 1)] = o.radius;
  return o;
}

double measure_return_time(const EllipsoidHost& host, int j, double tol) {
  const PeriodicOrbit orb = periodic_orbit(host, j);
  const int ix = 2 * (j - 1), iy = ix + 1;
  IntegratorOptions opts;
  opts.rtol = opts.atol = tol;
  opts.h_max = orb.period / 16.0;
  auto f = [&host](const Vec& y) -> Vec { return host.field(y); };
  Dopri5<Vec, decltype(f)> stepper(f, orb.base_point, 0.0, 1.0, opts);
  const double t_limit = 4.0 * orb.period;
  while (stepper.t() < t_limit) {
    const double y0 = stepper.y()[iy];
    stepper.step(t_limit);
    const auto& ds = stepper.dense();
    const double y1 = stepper.y()[iy];
    if (y0 < 0.0 && y1 >= 0.0 && stepper.y()[ix] > 0.0) {
      auto g = [&](double t) { return ds(t)[iy]; };
      return detail::bracket_root(g, ds.t0, ds.t1, y0, y1, 1e-15);
    }
  }
  throw MeasurementMismatch("no return to the section within four periods");
}

FlowBoxChart::FlowBoxChart(const EllipsoidHost& host, int j, double delta, double eps, Vec offset)
    : host_(&host), j_(j - 1), delta_(delta), eps_(eps), offset_(std::move(offset)) {
  if (j < 1 || j > host.n()) throw PreconditionError("chart orbit index out of range");
  if (offset_.size() != chart_dim() - 1) throw DimensionMismatch("chart offset has wrong dimension");
  if (!(delta > 0.0) || !(eps > 0.0)) throw PreconditionError("chart widths must be positive");
  const double aj = host.coefficients()[j_];
  if (!(2.0 * aj * eps < std::numbers::pi)) {
    throw EmbeddingFailure("chart height exceeds half the orbit period; flow-out not injective");
  }
  double a_max = 0.0;
  for (int k = 0; k < host.n(); ++k) {
    if (k != j_) a_max = std::max(a_max, host.coefficients()[k]);
  }
  const double reach = delta + offset_.norm();
  if (!(a_max * reach * reach < 1.0)) {
    throw EmbeddingFailure("chart disc leaves the level set slice; reduce chart_delta");
  }
}

Vec FlowBoxChart::lift(const Vec& w) const {
  const auto& a = host_->coefficients();
  Vec p(host_->dim());
  double rest = 1.0;
  int idx = 0;
  for (int k = 0; k < host_->n(); ++k) {
    if (k == j_) continue;
    p[2 * k] = w[idx];
    p[2 * k + 1] = w[idx + 1];
    rest -= a[k] * (w[idx] * w[idx] + w[idx + 1] * w[idx + 1]);
    idx += 2;
  }
  if (!(rest > 0.0)) throw EmbeddingFailure("transverse point does not lift to the level set");
  p[2 * j_] = std::sqrt(rest / a[j_]);
  p[2 * j_ + 1] = 0.0;
  return p;
}

Vec FlowBoxChart::map(const Vec& chart) const {
  const int m = chart_dim() - 1;
  return host_->flow(lift(chart.head(m) - offset_), chart[m]);
}

Mat FlowBoxChart::jacobian(const Vec& chart) const {
  const int m = chart_dim() - 1;
  const auto& a = host_->coefficients();
  const Vec w = chart.head(m) - offset_;
  const double z = chart[m];
  const Vec p = lift(w);
  Mat dlift = Mat::Zero(host_->dim(), m);
  int idx = 0;
  for (int k = 0; k < host_->n(); ++k) {
    if (k == j_) continue;
    dlift(2 * k, idx) = 1.0;
    dlift(2 * k + 1, idx + 1) = 1.0;
    // x_j = sqrt((1 - sum a_k |w_k|^2) / a_j)
    dlift(2 * j_, idx) = -a[k] * w[idx] / (a[j_] * p[2 * j_]);
    dlift(2 * j_, idx + 1) = -a[k] * w[idx + 1] / (a[j_] * p[2 * j_]);
    idx += 2;
  }
  Mat jac(host_->dim(), chart_dim());
  for (int c = 0; c < m; ++c) jac.col(c) = host_->flow(dlift.col(c), z);
  jac.col(m) = host_->field(host_->flow(p, z));
  return jac;
}

Vec FlowBoxChart::raw_inverse(const Vec& p) const {
  const int m = chart_dim() - 1;
  const double aj = host_->coefficients()[j_];
  const double z = std::atan2(p[2 * j_ + 1], p[2 * j_]) / (2.0 * aj);
  const Vec back = host_->flow(p, -z);
  Vec c(chart_dim());
  int idx = 0;
  for (int k = 0; k < host_->n(); ++k) {
    if (k == j_) continue;
    c[idx] = back[2 * k] + offset_[idx];
    c[idx + 1] = back[2 * k + 1] + offset_[idx + 1];
    idx += 2;
  }
  c[m] = z;
  return c;
}

std::optional<Vec> FlowBoxChart::inverse(const Vec& p) const {
  const int m = chart_dim() - 1;
  const Vec c = raw_inverse(p);
  if (!(std::abs(c[m]) <= eps_) || !(c.head(m).norm() <= delta_)) return std::nullopt;
  // The slice coordinate x_j must match the lift, i.e. p lies near the
  // level set on the x_j > 0 side.
  const double aj = host_->coefficients()[j_];
  double rest = 1.0;
  for (int k = 0, i = 0; k < host_->n(); ++k) {
    if (k == j_) continue;
    const double wx = c[i] - offset_[i], wy = c[i + 1] - offset_[i + 1];
    rest -= host_->coefficients()[k] * (wx * wx + wy * wy);
    i += 2;
  }
  const double xj = std::hypot(p[2 * j_], p[2 * j_ + 1]);
  if (!(rest > 0.0) || std::abs(xj - std::sqrt(rest / aj)) > 1e-9) return std::nullopt;
  return c;
}

bool FlowBoxChart::in_domain(const Vec& chart) const {
  const int m = chart_dim() - 1;
  return std::abs(chart[m]) <= eps_ && chart.head(m).norm() <= delta_;
}

Vec FlowBoxChart::pushforward(const Vec& chart, const Vec& v) const {
  // The host flow is linear and commutes with the host field, so
  // dPsi v = flow_z(dlift v_q + v_z X(lift)).
  const int m = chart_dim() - 1;
  const auto& a = host_->coefficients();
  const Vec w = chart.head(m) - offset_;
  const Vec p = lift(w);
  Vec d = v[m] * host_->field(p);
  double dxj = 0.0;
  int idx = 0;
  for (int k = 0; k < host_->n(); ++k) {
    if (k == j_) continue;
    d[2 * k] += v[idx];
    d[2 * k + 1] += v[idx + 1];
    dxj -= a[k] * (w[idx] * v[idx] + w[idx + 1] * v[idx + 1]);
    idx += 2;
  }
  d[2 * j_] += dxj / (a[j_] * p[2 * j_]);
  return host_->flow(d, chart[m]);
}

Vec FlowBoxChart::base_point() const {
  Vec c = Vec::Zero(chart_dim());
  c.head(chart_dim() - 1) = offset_;
  return map(c);
}

Mat FlowBoxChart::pulled_back_omega(const Vec& chart) const {
  const int m = chart_dim() - 1;
  const Mat j = jacobian(chart).leftCols(m);
  return j.transpose() * host_->omega().matrix() * j;
}

void FlowBoxChart::check_injective(int samples, std::uint64_t seed) const {
  Rng rng(seed);
  const int m = chart_dim() - 1;
  for (int s = 0; s < samples; ++s) {
    Vec c(chart_dim());
    do {
      for (int k = 0; k < m; ++k) c[k] = rng.uniform(-delta_, delta_);
    } while (c.head(m).norm() > delta_);
    c[m] = rng.uniform(-eps_, eps_);
    const auto back = inverse(map(c));
    if (!back || (*back - c).cwiseAbs().maxCoeff() > 1e-9) {
      throw EmbeddingFailure("flow-box chart is not injective on its domain; shrink the chart");
    }
  }
}

CompositeField::CompositeField(const EllipsoidHost& host, const FlowBoxChart& chart,
                               const PlugField& plug)
    : host_(&host), chart_(&chart), plug_(&plug) {
  if (plug.dim().odd() != chart.chart_dim()) {
    throw DimensionMismatch("plug dimension does not match the chart");
  }
  if (std::abs(plug.geometry().delta() - chart.delta()) > 1e-15 ||
      std::abs(plug.geometry().eps() - chart.eps()) > 1e-15) {
    throw PreconditionError("plug geometry must coincide with the chart widths");
  }
}

Vec CompositeField::operator()(const Vec& p) const {
  // No level-set check here: integration drift off K = 1 must not switch
  // the field back to the host inside the chart.
  const Vec c = chart_->raw_inverse(p);
  if (!chart_->in_domain(c) || plug_->is_vertical(c)) return host_->field(p);
  return chart_->pushforward(c, (*plug_)(c));
}

double ChartRegion::face_distance(const Vec& p) const {
  const Vec c = chart_->raw_inverse(p);
  const int m = chart_->chart_dim() - 1;
  return std::max({c.head(m).norm() - chart_->delta(), c[m] - chart_->eps(),
                   -chart_->eps() - c[m]});
}

ExitRegion::Face ChartRegion::classify(const Vec& p) const {
  const Vec c = chart_->raw_inverse(p);
  const int m = chart_->chart_dim() - 1;
  const double side = c.head(m).norm() - chart_->delta();
  const double top = c[m] - chart_->eps();
  const double bottom = -chart_->eps() - c[m];
  if (top >= side && top >= bottom) return Face::Top;
  if (bottom >= side) return Face::Bottom;
  return Face::Side;
}

double ChartRegion::face_residual(const Vec& p, Face face) const {
  const Vec c = chart_->raw_inverse(p);
  const int m = chart_->chart_dim() - 1;
  switch (face) {
    case Face::Top: return c[m] - chart_->eps();
    case Face::Bottom: return -chart_->eps() - c[m];
    case Face::Side: return c.head(m).norm() - chart_->delta();
    case Face::None: break;
  }
  return face_distance(p);
}

namespace {

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vec random_chart_point(const FlowBoxChart& chart, Rng& rng, double z) {
  const int m = chart.chart_dim() - 1;
  Vec c(chart.chart_dim());
  do {
    for (int k = 0; k < m; ++k) c[k] = rng.uniform(-chart.delta(), chart.delta());
  } while (c.head(m).norm() > chart.delta());
  c[m] = z;
  return c;
}

/// Standard block matrix sum dx_k ^ dy_k on the transverse coordinates.
Mat standard_block(int m) {
  Mat s = Mat::Zero(m, m);
  for (int k = 0; k + 1 < m; k += 2) {
    s(k, k + 1) = 1.0;
    s(k + 1, k) = -1.0;
  }
  return s;
}

/// Integrates the host field for time t and returns the distance to the start.
double host_return_distance(const EllipsoidHost& host, const Vec& p0, double t, double tol) {
  IntegratorOptions io;
  io.rtol = io.atol = tol;
  auto f = [&host](const Vec& y) -> Vec { return host.field(y); };
  const Trajectory tr = integrate(f, p0, t, io, Record::Endpoints);
  return (tr.states.back() - p0).norm();
}

}  // namespace

VerificationReport verify_flow_box(const FlowBoxChart& chart, int samples, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const int m = chart.chart_dim() - 1;
  Rng rng(seed);
  const Mat standard = standard_block(m);
  double omega0 = 0.0, omega_shift = 0.0, transverse = 0.0, level = 0.0;
  double min_speed = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Vec c = random_chart_point(chart, rng, 0.0);
    const Mat w0 = chart.pulled_back_omega(c);
    omega0 = std::max(omega0, (w0 - standard).cwiseAbs().maxCoeff());
    for (double z : {0.5 * chart.eps(), -0.5 * chart.eps()}) {
      c[m] = z;
      omega_shift = std::max(omega_shift, (chart.pulled_back_omega(c) - w0).cwiseAbs().maxCoeff());
    }
    c[m] = rng.uniform(-chart.eps(), chart.eps());
    // Chart components of the host field: solve J v = X in least squares.
    const Mat jac = chart.jacobian(c);
    const Vec x = jac.col(m);
    const Vec v = jac.colPivHouseholderQr().solve(x);
    transverse = std::max(transverse, v.head(m).cwiseAbs().maxCoeff());
    min_speed = std::min(min_speed, v[m]);
    const Vec p = chart.map(c);
    const auto back = chart.inverse(p);
    level = std::max(level, back ? (*back - c).cwiseAbs().maxCoeff() : 1.0);
  }
  bool injective = true;
  std::string message;
  try {
    chart.check_injective(samples, seed + 1);
  } catch (const EmbeddingFailure& e) {
    injective = false;
    message = e.what();
  }
  VerificationReport rep;
  rep.suite = "host.flow_box";
  rep.seed = seed;
  rep.metrics = {{"samples", samples},
                 {"omega_z0_max_error", omega0},
                 {"omega_z_shift_max_error", omega_shift},
                 {"field_transverse_max", transverse},
                 {"field_min_z_component", min_speed},
                 {"round_trip_max_error", level},
                 {"injective", injective}};
  if (!message.empty()) rep.metrics["message"] = message;
  rep.params = {{"orbit", chart.orbit() + 1}, {"delta", chart.delta()}, {"eps", chart.eps()}};
  rep.passed = omega0 <= 1e-8 && omega_shift <= 1e-6 && transverse <= 1e-8 && min_speed > 0.0 &&
               level <= 1e-9 && injective;
  rep.wall_clock_s = elapsed_since(start);
  return rep;
}

namespace {

struct PostRun {
  bool confined = true;
  double time = 0.0;
  double min_return = std::numeric_limits<double>::infinity();
  double max_face_distance = -std::numeric_limits<double>::infinity();
  double k_drift = 0.0;
  long steps = 0;
  std::string message;
  Trajectory samples;
};

/// Integrates the composite field from p0 for t_post and tracks chart
/// containment and the closest return to p0 once the orbit has left it.
PostRun run_post(const CompositeField& field, const EllipsoidHost& host, const ChartRegion& region,
                 const Vec& p0, double t_post, const IntegratorOptions& io, double leave_radius,
                 double export_dt) {
  PostRun run;
  auto f = [&field](const Vec& y) -> Vec { return field(y); };
  const double k0 = host.K(p0);
  bool left = false;
  double next_sample = 0.0;
  auto dist = [&](const Vec& y) { return (y - p0).norm(); };
  try {
    Dopri5<Vec, decltype(f)> stepper(f, p0, 0.0, 1.0, io);
    while (stepper.t() < t_post) {
      stepper.step(t_post);
      ++run.steps;
      const auto& ds = stepper.dense();
      const Vec& y = stepper.y();
      run.max_face_distance = std::max(run.max_face_distance, region.face_distance(y));
      run.k_drift = std::max(run.k_drift, std::abs(host.K(y) - k0));
      constexpr int kProbe = 8;
      double best = std::numeric_limits<double>::infinity(), best_t = ds.t0;
      for (int k = 0; k <= kProbe; ++k) {
        const double t = ds.t0 + (ds.t1 - ds.t0) * k / kProbe;
        const double d = dist(k == kProbe ? y : ds(t));
        if (!left) {
          if (d > leave_radius) left = true;
          continue;
        }
        if (d < best) best = d, best_t = t;
      }
      if (left && best < 10.0 * leave_radius) {
        // Golden-section refinement around the closest probe.
        const double h = (ds.t1 - ds.t0) / kProbe;
        double a = std::max(ds.t0, best_t - h), b = std::min(ds.t1, best_t + h);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 60; ++it) {
          const double c1 = b - g * (b - a), c2 = a + g * (b - a);
          if (dist(ds(c1)) < dist(ds(c2))) {
            b = c2;
          } else {
            a = c1;
          }
        }
        best = std::min(best, dist(ds(0.5 * (a + b))));
      }
      if (left) run.min_return = std::min(run.min_return, best);
      while (next_sample <= stepper.t() && export_dt > 0.0) {
        run.samples.times.push_back(next_sample);
        run.samples.states.push_back(ds(std::max(next_sample, ds.t0)));
        next_sample += export_dt;
      }
    }
    run.time = stepper.t();
  } catch (const StepFailure& e) {
    run.message = e.what();
  }
  run.confined = run.max_face_distance <= 0.0;
  return run;
}

}  // namespace

VerificationReport demo_open_orbit(const EllipsoidHost& host, const ContactProfile& profile,
                                   const DemoOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const Dimension& dim = profile.dim();
  if (host.n() != dim.n()) throw DimensionMismatch("host and plug dimensions differ");
  const double lambda = opts.lambda > 0.0
                            ? opts.lambda
                            : PlugGeometry::max_lambda(profile, opts.chart_delta, opts.chart_eps);
  const PlugGeometry geom(opts.chart_delta, opts.chart_eps, lambda);
  geom.validate(profile);
  const PlugField plug(profile, geom, ReebPath::Solve);
  const PlugField fast = plug.with_path(ReebPath::ClosedForm);

  VerificationReport rep;
  rep.suite = "host.demo";
  rep.seed = opts.seed;
  rep.expected_fail = profile.is_identity();
  rep.params = {{"orbit", opts.orbit},         {"chart_delta", opts.chart_delta},
                {"chart_eps", opts.chart_eps}, {"lambda", lambda},
                {"t_post", opts.t_post},       {"nearby", opts.nearby},
                {"reject_radius", opts.reject_radius}, {"tol", opts.tol},
                {"trap_tol", opts.trap_tol},   {"return_radius", opts.return_radius},
                {"match_tol", opts.match_tol}, {"orbit_tol", opts.orbit_tol}};

  // Transverse entry of the plug whose orbit is trapped; Gamma_j is routed
  // through it by the chart offset.
  ScanOptions scan;
  scan.exit.integrator.rtol = scan.exit.integrator.atol = opts.trap_tol;
  scan.t_max = opts.t_post;
  scan.workers = opts.workers;
  Vec entry;
  std::string entry_source;
  if (opts.trapped_entry) {
    entry = *opts.trapped_entry;
    entry_source = "given";
  } else if (profile.is_identity()) {
    entry = default_trap_region(plug, 1).center;
    entry_source = "predicted";
  } else {
    TrapScanResult found = trap_scan(fast, default_trap_region(fast, 1), scan, 0);
    if (found.trapped.empty()) found = trap_scan(fast, default_trap_region(fast, 5), scan, 2);
    if (found.trapped.empty()) {
      entry = default_trap_region(plug, 1).center;
      entry_source = "predicted (trap-scan found nothing)";
    } else {
      entry = found.trapped.front().record.entry.head(dim.odd() - 1);
      entry_source = "trap-scan";
    }
  }
  if (entry.size() != dim.odd() - 1) throw DimensionMismatch("trapped entry has wrong dimension");

  const FlowBoxChart chart(host, opts.orbit, opts.chart_delta, opts.chart_eps, entry);
  const ChartRegion region(chart);
  const int m = chart.chart_dim() - 1;
  const PeriodicOrbit orbit = periodic_orbit(host, opts.orbit);

  // (a) Gamma_j before insertion.
  const double pre = host_return_distance(host, orbit.base_point, orbit.period, 1e-12);
  const double period_error = std::abs(measure_return_time(host, opts.orbit) - orbit.period);
  const bool pass_a = pre <= opts.orbit_tol && period_error <= opts.orbit_tol;

  // (b) The same orbit after insertion, started on the bottom face.
  Vec c0 = Vec::Zero(chart.chart_dim());
  c0.head(m) = entry;
  c0[m] = -opts.chart_eps;
  const Vec p0 = chart.map(c0);
  const CompositeField composite_fast(host, chart, fast);
  IntegratorOptions trap_io;
  trap_io.rtol = trap_io.atol = opts.trap_tol;
  trap_io.h_max = plug.max_step();
  const PostRun post = run_post(composite_fast, host, region, p0, opts.t_post, trap_io,
                                10.0 * opts.return_radius,
                                opts.export_dir.empty() ? 0.0 : opts.export_dt);
  const bool pass_b = post.message.empty() && post.time >= opts.t_post &&
                      post.min_return > opts.return_radius && post.confined;

  // (c) Nearby entries in the placed support disc, away from the trapped set.
  Rng rng(opts.seed);
  const double disc = lambda * profile.transverse_radius();
  std::vector<Vec> nearby;
  long drawn = 0;
  while (static_cast<int>(nearby.size()) < opts.nearby && drawn < 1000L * opts.nearby) {
    ++drawn;
    Vec q(m);
    for (int k = 0; k < m; ++k) q[k] = rng.uniform(-disc, disc);
    if (q.norm() > disc) continue;
    double radial = 0.0;
    for (int k = 0; k < m; k += 2) {
      const double r = std::hypot(q[k], q[k + 1]) / lambda - profile.torus_radius();
      radial += r * r;
    }
    if (std::sqrt(radial) < opts.reject_radius) continue;
    nearby.push_back(q);
  }
  const CompositeField composite(host, chart, plug);
  ExitOptions near_opts;
  near_opts.integrator.rtol = near_opts.integrator.atol = opts.tol;
  near_opts = plug.capped(near_opts);
  struct NearResult {
    TraverseStatus status = TraverseStatus::Failed;
    double mismatch = std::numeric_limits<double>::infinity();
    double time = 0.0;
  };
  const auto results = parallel_map<NearResult>(nearby.size(), opts.workers, [&](std::size_t i) {
    Vec c = Vec::Zero(chart.chart_dim());
    c.head(m) = nearby[i];
    c[m] = -opts.chart_eps;
    NearResult r;
    const TraverseRecord rec =
        integrate_until_exit(composite, region, chart.map(c), opts.t_post, near_opts);
    r.status = rec.status;
    r.time = rec.transit_time;
    if (rec.status == TraverseStatus::Traversed) {
      c[m] = opts.chart_eps;
      r.mismatch = (rec.exit - chart.map(c)).norm();
    }
    return r;
  });
  int traversed = 0;
  double max_mismatch = 0.0, max_transit = 0.0;
  for (const auto& r : results) {
    if (r.status == TraverseStatus::Traversed) ++traversed;
    max_mismatch = std::max(max_mismatch, r.mismatch);
    max_transit = std::max(max_transit, r.time);
  }
  const bool pass_c = static_cast<int>(nearby.size()) == opts.nearby &&
                      traversed == opts.nearby && max_mismatch <= opts.match_tol;

  // (d) Another periodic orbit, through the composite field.
  double other = 0.0;
  int other_index = 0;
  if (host.n() > 1) {
    other_index = opts.orbit == 1 ? 2 : 1;
    const PeriodicOrbit o2 = periodic_orbit(host, other_index);
    IntegratorOptions io;
    io.rtol = io.atol = 1e-12;
    io.h_max = o2.period / 16.0;
    auto f = [&composite](const Vec& y) -> Vec { return composite(y); };
    const Trajectory tr = integrate(f, o2.base_point, o2.period, io, Record::Endpoints);
    other = (tr.states.back() - o2.base_point).norm();
  }
  const bool pass_d = other <= opts.orbit_tol;

  if (!opts.export_dir.empty()) {
    std::filesystem::create_directories(opts.export_dir);
    Trajectory pre_traj;
    for (double t = 0.0; t <= orbit.period; t += opts.export_dt) {
      pre_traj.times.push_back(t);
      pre_traj.states.push_back(host.flow(p0, t));
    }
    export_trajectory(pre_traj, opts.export_dir / "pre_orbit.csv");
    if (!post.samples.states.empty()) export_trajectory(post.samples, opts.export_dir / "post_orbit.csv");
  }

  rep.metrics = {
      {"entry_source", entry_source},
      {"trapped_entry", std::vector<double>(entry.data(), entry.data() + entry.size())},
      {"a_pre_return_distance", pre},
      {"a_return_time_error", period_error},
      {"a_passed", pass_a},
      {"b_time", post.time},
      {"b_min_return_distance", post.min_return},
      {"b_confined", post.confined},
      {"b_max_face_distance", post.max_face_distance},
      {"b_energy_drift", post.k_drift},
      {"b_steps", post.steps},
      {"b_passed", pass_b},
      {"c_sampled", nearby.size()},
      {"c_traversed", traversed},
      {"c_max_mismatch", max_mismatch},
      {"c_max_transit_time", max_transit},
      {"c_passed", pass_c},
      {"d_orbit", other_index},
      {"d_return_distance", other},
      {"d_passed", pass_d}};
  if (!post.message.empty()) rep.metrics["b_message"] = post.message;
  rep.passed = pass_a && pass_b && pass_c && pass_d;
  rep.wall_clock_s = elapsed_since(start);
  return rep;
}

}  // namespace hamplug
