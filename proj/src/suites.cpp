#include "hamplug/suites.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "hamplug/host.hpp"
#include "hamplug/parallel.hpp"
#include "hamplug/plug.hpp"
#include "hamplug/random.hpp"
#include "hamplug/volume.hpp"

namespace hamplug {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int workers_of(const Config& cfg) { return cfg.run.workers > 0 ? cfg.run.workers : default_workers(); }

// Distinct streams per suite, all derived from the configured seed.
std::uint64_t stream(const Config& cfg, std::uint64_t suite) {
  return cfg.run.seed * 1000003ULL + suite;
}

/// Uniform point in the box [-r, r]^{2n-2} x [-wz, wz] around the
/// unplaced trap support.
Vec support_point(const ContactProfile& prof, Rng& rng) {
  const Dimension& dim = prof.dim();
  Vec p(dim.odd());
  const double r = prof.transverse_radius(), wz = prof.z_half_width();
  for (int k = 0; k < dim.odd(); ++k) p[k] = k == dim.z() ? rng.uniform(-wz, wz) : rng.uniform(-r, r);
  return p;
}

bool exactly(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }

PlugField make_plug(const Config& cfg, const ContactProfile& prof, ReebPath path = ReebPath::Solve) {
  return PlugField(prof, PlugGeometry(cfg.delta, cfg.eps, cfg.lambda), path);
}

VerificationReport start_report(const char* suite, const Config& cfg, std::uint64_t seed) {
  VerificationReport rep;
  rep.suite = suite;
  rep.seed = seed;
  rep.params = {{"n", cfg.n}};
  return rep;
}

}  // namespace

VerificationReport residual_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const FormFamily family(prof, PsiProfile(cfg.eps));
  const EllipsoidHost host(prime_root_coefficients(cfg.n));
  const BilinearForm omega = omega_st(dim);
  const std::uint64_t seed = stream(cfg, 1);
  Rng rng(seed);

  double st = 0.0, divided = 0.0, fam = 0.0, ham = 0.0, ell = 0.0, ell_closed = 0.0;
  auto worst = [](const ReebResiduals& r) { return std::max(r.normalization, r.kernel); };
  for (int i = 0; i < cfg.run.residual_points; ++i) {
    const Vec p = support_point(prof, rng);
    const ContactFormValue a = standard_contact_form(dim, p);
    st = std::max(st, worst(reeb_residuals(a, reeb_field(a))));

    const ProfileValue h = prof.eval(p);
    const ContactFormValue d = divided_contact_form(dim, p, h.h, h.grad);
    divided = std::max(divided, worst(reeb_residuals(d, reeb_field(d))));

    const double u = rng.uniform(-cfg.eps, cfg.eps);
    const ContactFormValue f = family.form(p, u);
    fam = std::max(fam, worst(reeb_residuals(f, reeb_field(f))));

    Vec dk(dim.even());
    for (int k = 0; k < dim.even(); ++k) dk[k] = rng.uniform(-1.0, 1.0);
    const Covector c{dk};
    ham = std::max(ham, hamiltonian_residual(omega, c, hamiltonian_field(omega, c)));

    Vec q(host.dim());
    for (int k = 0; k < host.dim(); ++k) q[k] = rng.uniform(-1.0, 1.0);
    const Vec x = host.field_by_solve(q);
    ell = std::max(ell, hamiltonian_residual(host.omega(), host.dK(q), x));
    ell_closed = std::max(ell_closed, (x - host.field(q)).cwiseAbs().maxCoeff());
  }
  VerificationReport rep = start_report("geometry.residuals", cfg, seed);
  rep.metrics = {{"points", cfg.run.residual_points},
                 {"alpha_st", st},
                 {"alpha_st_over_H", divided},
                 {"alpha_u", fam},
                 {"omega_st", ham},
                 {"ellipsoid", ell},
                 {"ellipsoid_closed_form_gap", ell_closed}};
  rep.params["tolerance"] = cfg.tol.solver;
  rep.passed = std::max({st, divided, fam, ham, ell, ell_closed}) <= cfg.tol.solver;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport reeb_identity_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const PlugField plug = make_plug(cfg, prof);
  const std::uint64_t seed = stream(cfg, 2);
  Rng rng(seed);
  const Vec ez = unit_z(dim);
  const Mat jm = mirror_jacobian(dim);

  int st_exact = 0, mirror_exact = 0, transport_exact = 0, transport_points = 0;
  const int points = cfg.run.residual_points;
  for (int i = 0; i < points; ++i) {
    Vec p(dim.odd());
    for (int k = 0; k < dim.odd(); ++k) p[k] = rng.uniform(-2.0, 2.0);
    if (exactly(reeb_field(standard_contact_form(dim, p)), ez)) ++st_exact;

    // Phi^* alpha_st at p: the form at Phi(p) pulled back through dPhi.
    const ContactFormValue at_image = standard_contact_form(dim, mirror_map(dim, p));
    const ContactFormValue pulled{pullback(at_image.alpha, jm), at_image.dalpha.pullback(jm)};
    const Vec r = -reeb_field(pulled);
    if (exactly(r, ez)) ++mirror_exact;

    // The B- half transports the trap field through the mirror; away from
    // the support it reduces to the same identity.
    Vec q(dim.odd());
    for (int k = 0; k < dim.odd() - 1; ++k) q[k] = rng.uniform(-cfg.delta, cfg.delta);
    q[dim.z()] = rng.uniform(0.0, cfg.eps);
    if (q.head(dim.odd() - 1).norm() <= cfg.delta && plug.is_vertical(q)) {
      ++transport_points;
      if (exactly(plug.minus(q), ez)) ++transport_exact;
    }
  }
  VerificationReport rep = start_report("geometry.reeb_identities", cfg, seed);
  rep.metrics = {{"points", points},
                 {"alpha_st_exact", st_exact},
                 {"mirror_exact", mirror_exact},
                 {"transport_points", transport_points},
                 {"transport_exact", transport_exact}};
  rep.passed = st_exact == points && mirror_exact == points && transport_exact == transport_points &&
               transport_points > 0;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport h_iv_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const PsiProfile psi(cfg.eps);
  const FormFamily family(prof, psi);
  const std::uint64_t seed = stream(cfg, 3);
  Rng rng(seed);
  // u classes: psi = 1, psi = 1/2, psi = 0, and anywhere in [-eps, eps].
  const double classes[] = {0.0, psi.half_level(), 0.5 * (psi.support() + cfg.eps)};
  double worst = 0.0;
  int counts[4] = {};
  for (int i = 0; i < cfg.run.residual_points; ++i) {
    const Vec p = support_point(prof, rng);
    const int cls = i % 4;
    double u = cls < 3 ? classes[cls] : rng.uniform(-cfg.eps, cfg.eps);
    if (cls < 3 && rng.uniform() < 0.5) u = -u;
    ++counts[cls];
    const double solved = family.reeb_Ru(p, u)[dim.z()];
    worst = std::max(worst, std::abs(solved - family.closed_form_dz(p, u)));
  }
  VerificationReport rep = start_report("volume.h_iv_identity", cfg, seed);
  rep.metrics = {{"points", cfg.run.residual_points},
                 {"psi_one", counts[0]},
                 {"psi_half", counts[1]},
                 {"psi_zero", counts[2]},
                 {"psi_random", counts[3]},
                 {"max_error", worst}};
  rep.params["tolerance"] = cfg.tol.identity;
  rep.passed = worst <= cfg.tol.identity;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport embedding_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const ScalarField f([&prof](const Vec& p) { return -std::log(prof.value(p)); },
                      [&prof](const Vec& p) {
                        const ProfileValue v = prof.eval(p);
                        return Vec(-v.grad / v.h);
                      });
  const std::uint64_t seed = stream(cfg, 4);
  Rng rng(seed);
  double worst = 0.0, level = 0.0;
  for (int i = 0; i < cfg.run.embedding_points; ++i) {
    const Vec p = support_point(prof, rng);
    const auto [t, q] = graph_embed(f, p);
    const ProfileValue h = prof.eval(p);
    const Vec df = f.gradient(p);
    // K = e^(t - f): dK = K (dt - df), with K = 1 on the graph.
    const double k = std::exp(t - f(p));
    level = std::max(level, std::abs(k - 1.0));
    Vec dk(dim.even());
    dk[0] = k;
    dk.tail(dim.odd()) = -k * df;
    const Vec x = hamiltonian_field(symplectization_form(dim, t, q), Covector{dk});
    const Vec r = reeb_field(divided_contact_form(dim, p, h.h, h.grad));
    Vec pushed(dim.even());
    pushed[0] = df.dot(r);
    pushed.tail(dim.odd()) = r;
    worst = std::max(worst, (x - pushed).cwiseAbs().maxCoeff());
  }
  VerificationReport rep = start_report("geometry.graph_embedding", cfg, seed);
  rep.metrics = {{"points", cfg.run.embedding_points}, {"max_error", worst}, {"level_error", level}};
  rep.params["tolerance"] = cfg.tol.identity;
  rep.passed = worst <= cfg.tol.identity;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport trap_profile_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const CliffordTorus torus(dim, prof.torus_radius());
  const int free = dim.planes() + 1;  // r_1, ..., r_{n-1}, z
  const int per_axis =
      static_cast<int>(std::ceil(std::pow(double(cfg.run.g_grid_points), 1.0 / free) - 1e-9));

  double g_min = std::numeric_limits<double>::infinity();
  double g_min_outside = std::numeric_limits<double>::infinity();
  double sublevel_max_distance = 0.0;
  long points = 0, sublevel = 0;
  auto visit = [&](const std::vector<double>& r, double z, long counter) {
    Vec p(dim.odd());
    for (int j = 0; j < dim.planes(); ++j) {
      // G is rotation invariant; the angles only exercise the evaluator.
      const double th = 2.0 * std::numbers::pi * std::fmod(counter * std::sqrt(double(j + 2)), 1.0);
      p[dim.x(j)] = r[j] * std::cos(th);
      p[dim.y(j)] = r[j] * std::sin(th);
    }
    p[dim.z()] = z;
    const double g = prof.eval_G(p);
    const double d = torus.distance(p);
    g_min = std::min(g_min, g);
    if (d > 0.1) g_min_outside = std::min(g_min_outside, g);
    if (g <= 1e-6) {
      ++sublevel;
      sublevel_max_distance = std::max(sublevel_max_distance, d);
    }
    ++points;
  };
  auto lattice = [&](int m, const std::vector<double>& lo, const std::vector<double>& hi) {
    std::vector<int> idx(free, 0);
    for (;;) {
      std::vector<double> c(free);
      for (int k = 0; k < free; ++k) c[k] = m == 1 ? 0.5 * (lo[k] + hi[k]) : lo[k] + (hi[k] - lo[k]) * idx[k] / (m - 1);
      visit(std::vector<double>(c.begin(), c.end() - 1), c.back(), points);
      int k = 0;
      while (k < free && ++idx[k] == m) idx[k++] = 0;
      if (k == free) break;
    }
  };
  // Whole support, then a finer lattice around the torus with odd
  // resolution so the torus itself is sampled.
  std::vector<double> lo(free, 0.0), hi(free, prof.transverse_radius());
  lo.back() = -prof.z_half_width();
  hi.back() = prof.z_half_width();
  lattice(per_axis, lo, hi);
  std::vector<double> tlo(free, prof.torus_radius() - 0.05), thi(free, prof.torus_radius() + 0.05);
  tlo.back() = -0.05;
  thi.back() = 0.05;
  lattice(21, tlo, thi);

  VerificationReport rep = start_report("trap.profile", cfg, cfg.run.seed);
  rep.metrics = {{"grid_points", points},
                 {"g_min", g_min},
                 {"g_min_outside_0.1", g_min_outside},
                 {"sublevel_points", sublevel},
                 {"sublevel_max_torus_distance", sublevel_max_distance}};
  bool freq_ok = true;
  if (prof.is_identity()) {
    rep.metrics["frequencies"] = "skipped: H == 1 has no torus";
  } else {
    std::vector<double> angles(dim.planes(), 0.3);
    const FrequencyMeasurement fm = torus_frequencies(prof, angles, 100.0, cfg.tol.trap, 1e-4);
    nlohmann::json witnesses = nlohmann::json::array();
    for (std::size_t j = 1; j < fm.design.size(); ++j) {
      witnesses.push_back(diophantine_witness(fm.design[j] / fm.design[0], 1000));
      freq_ok = freq_ok && witnesses.back().get<double>() > 0.0;
    }
    rep.metrics["frequencies_measured"] = fm.measured;
    rep.metrics["frequencies_design"] = fm.design;
    rep.metrics["frequency_relative_error"] = fm.max_relative_error;
    rep.metrics["diophantine_witnesses"] = witnesses;
    freq_ok = freq_ok && fm.max_relative_error <= 1e-4;
  }
  rep.params["tube_radius"] = 1e-2;
  rep.passed = g_min >= -1e-10 && sublevel_max_distance <= 1e-2 && g_min_outside > 0.0 && freq_ok &&
               points >= cfg.run.g_grid_points;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport boundary_shell_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const PlugField plug = make_plug(cfg, prof);
  const std::uint64_t seed = stream(cfg, 6);
  Rng rng(seed);
  const Vec ez = unit_z(dim);
  const int m = dim.odd() - 1;
  const double shell = 0.125;  // relative thickness
  int exact = 0;
  for (int i = 0; i < cfg.run.shell_points; ++i) {
    Vec q(dim.odd());
    if (i % 2 == 0) {
      // Side shell: (1 - shell) delta <= |x| <= delta.
      Vec dir(m);
      for (int k = 0; k < m; ++k) dir[k] = rng.uniform(-1.0, 1.0);
      if (dir.norm() == 0.0) dir[0] = 1.0;
      q.head(m) = dir.normalized() * cfg.delta * rng.uniform(1.0 - shell, 1.0);
      q[dim.z()] = rng.uniform(-cfg.eps, cfg.eps);
    } else {
      // Top and bottom shells.
      Vec x(m);
      do {
        for (int k = 0; k < m; ++k) x[k] = rng.uniform(-cfg.delta, cfg.delta);
      } while (x.norm() > cfg.delta);
      q.head(m) = x;
      const double z = cfg.eps * rng.uniform(1.0 - shell, 1.0);
      q[dim.z()] = rng.uniform() < 0.5 ? -z : z;
    }
    if (exactly(plug.at(q), ez)) ++exact;
  }
  VerificationReport rep = start_report("plug.boundary", cfg, seed);
  rep.metrics = {{"points", cfg.run.shell_points}, {"exact", exact}};
  rep.params["shell_thickness"] = shell;
  rep.passed = exact == cfg.run.shell_points;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport matching_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const PlugField plug = make_plug(cfg, prof);
  const double radius = std::min(cfg.delta, 1.1 * cfg.lambda * prof.transverse_radius());
  const auto entries = entry_grid(plug, radius, cfg.run.matching_per_axis);
  ScanOptions so;
  so.exit.integrator.rtol = so.exit.integrator.atol = cfg.tol.integrator;
  so.t_max = cfg.run.t_max;
  so.workers = workers_of(cfg);
  const auto records = traverse_scan(plug, entries, so);
  VerificationReport rep = verify_matching(records, cfg.tol.matching, 100);
  rep.seed = cfg.run.seed;
  rep.params["n"] = cfg.n;
  rep.params["grid_radius"] = radius;
  rep.params["per_axis"] = cfg.run.matching_per_axis;
  rep.params["integrator_tol"] = cfg.tol.integrator;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport trap_existence_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const PlugField plug = make_plug(cfg, prof, ReebPath::ClosedForm);
  ScanOptions so;
  so.exit.integrator.rtol = so.exit.integrator.atol = cfg.tol.trap;
  so.t_max = cfg.run.t_max;
  so.workers = workers_of(cfg);
  const TrapScanResult res = trap_scan(plug, default_trap_region(plug, cfg.run.trap_per_axis), so);

  VerificationReport rep = start_report("plug.trap_existence", cfg, cfg.run.seed);
  rep.expected_fail = prof.is_identity();
  int counts[6] = {};
  for (const auto& r : res.records) ++counts[static_cast<int>(r.status)];
  rep.metrics = {{"entries", res.records.size()},
                 {"rounds", res.rounds},
                 {"trapped", res.trapped.size()},
                 {"traversed", counts[static_cast<int>(TraverseStatus::Traversed)]},
                 {"grazing", counts[static_cast<int>(TraverseStatus::Grazing)]},
                 {"failed", counts[static_cast<int>(TraverseStatus::Failed)]}};
  bool closer = false;
  if (!res.trapped.empty()) {
    const TrappedDiagnostics& d = res.trapped.front();
    const Vec& e = d.record.entry;
    rep.metrics["trapped_entry"] = std::vector<double>(e.data(), e.data() + e.size());
    rep.metrics["first_entry_time"] = d.first_entry_time;
    rep.metrics["torus_distance_at_entry"] = d.torus_distance_at_entry;
    rep.metrics["torus_distance_final"] = d.torus_distance_final;
    rep.metrics["max_z_after_entry"] = d.max_z_after_entry;
    rep.metrics["final_time"] = d.record.transit_time;
    nlohmann::json history = nlohmann::json::array();
    for (const auto& [t, z] : d.z_history) history.push_back({t, z});
    rep.metrics["z_history"] = history;
    closer = d.torus_distance_final <= d.torus_distance_at_entry;
  }
  rep.params["t_max"] = cfg.run.t_max;
  rep.params["trap_tol"] = cfg.tol.trap;
  rep.params["per_axis"] = cfg.run.trap_per_axis;
  rep.passed = !res.trapped.empty() && closer;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport certificate_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const PlugField plug = make_plug(cfg, prof);
  CertificateOptions co;
  co.cartesian_per_axis = cfg.run.certificate_per_axis;
  VerificationReport rep = aperiodicity_certificate(plug, co);
  rep.seed = cfg.run.seed;
  rep.params["n"] = cfg.n;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport volume_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const PlugField plug = make_plug(cfg, prof);
  const EvenPlugField field(plug, PsiProfile(cfg.eps));
  const std::uint64_t seed = stream(cfg, 10);
  const auto samples = deformation_samples(field, cfg.run.volume_samples, seed);
  IntegratorOptions io;
  io.rtol = io.atol = cfg.tol.integrator;
  VerificationReport rep = verify_volume_preservation(field, samples, cfg.run.volume_time, io,
                                                      cfg.tol.volume, cfg.tol.fd_step);
  rep.seed = seed;
  rep.params["n"] = cfg.n;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport slice_positivity_suite(const Config& cfg) {
  const auto start = Clock::now();
  const Dimension dim = cfg.dimension();
  const ContactProfile prof(dim, cfg.trap);
  const PlugField plug = make_plug(cfg, prof);
  const PsiProfile psi(cfg.eps);
  const FormFamily family(prof, psi, plug.trap().placement());
  const std::uint64_t seed = stream(cfg, 11);
  Rng rng(seed);
  const Placement place = plug.trap().placement();
  double min_dz = std::numeric_limits<double>::infinity();
  double min_density = std::numeric_limits<double>::infinity();
  double max_gap = 0.0;
  for (int i = 0; i < cfg.run.density_samples; ++i) {
    const Vec q = place.from_profile(dim, support_point(prof, rng));
    double u = rng.uniform(psi.plateau(), cfg.eps);
    if (u == psi.plateau()) u = cfg.eps;
    if (rng.uniform() < 0.5) u = -u;
    const double dz = family.reeb_Ru(q, u)[dim.z()];
    min_dz = std::min(min_dz, dz);
    max_gap = std::max(max_gap, std::abs(dz - family.closed_form_dz(q, u)));
    min_density = std::min(min_density, family.omega_density(q, u));
  }
  VerificationReport rep = start_report("volume.slice_positivity", cfg, seed);
  rep.metrics = {{"samples", cfg.run.density_samples},
                 {"min_dz", min_dz},
                 {"min_omega_density", min_density},
                 {"max_closed_form_gap", max_gap}};
  rep.passed = min_dz > 0.0 && min_density > 0.0;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

VerificationReport flow_box_suite(const Config& cfg) {
  const auto start = Clock::now();
  const EllipsoidHost host(prime_root_coefficients(cfg.n));
  const FlowBoxChart chart(host, cfg.host.orbit, cfg.host.chart_delta, cfg.host.chart_eps,
                           Vec::Zero(host.dim() - 2));
  VerificationReport rep = verify_flow_box(chart, cfg.run.embedding_points, stream(cfg, 12));
  rep.params["n"] = cfg.n;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

DemoOptions demo_options(const Config& cfg) {
  DemoOptions o;
  o.orbit = cfg.host.orbit;
  o.chart_delta = cfg.host.chart_delta;
  o.chart_eps = cfg.host.chart_eps;
  o.lambda = cfg.host.lambda;
  o.t_post = cfg.host.t_post;
  o.nearby = cfg.host.nearby;
  o.reject_radius = cfg.host.reject_radius;
  o.tol = cfg.tol.integrator;
  o.trap_tol = cfg.tol.trap;
  o.return_radius = cfg.host.return_radius;
  o.match_tol = cfg.host.match_tol;
  o.orbit_tol = cfg.host.orbit_tol;
  o.seed = stream(cfg, 13);
  o.workers = workers_of(cfg);
  return o;
}

VerificationReport host_demo_suite(const Config& cfg) {
  const auto start = Clock::now();
  const ContactProfile prof(cfg.dimension(), cfg.trap);
  const EllipsoidHost host(prime_root_coefficients(cfg.n));
  VerificationReport rep = demo_open_orbit(host, prof, demo_options(cfg));
  rep.params["n"] = cfg.n;
  rep.wall_clock_s = seconds_since(start);
  return rep;
}

const std::vector<SuiteEntry>& suite_registry() {
  static const std::vector<SuiteEntry> registry = {
      {"geometry.residuals", "geometry", residual_suite},
      {"geometry.reeb_identities", "geometry", reeb_identity_suite},
      {"geometry.graph_embedding", "geometry", embedding_suite},
      {"trap.profile", "trap", trap_profile_suite},
      {"plug.boundary", "plug", boundary_shell_suite},
      {"plug.matching", "plug", matching_suite},
      {"plug.trap_existence", "plug", trap_existence_suite},
      {"plug.aperiodicity", "plug", certificate_suite},
      {"volume.h_iv_identity", "volume", h_iv_suite},
      {"volume.preservation", "volume", volume_suite},
      {"volume.slice_positivity", "volume", slice_positivity_suite},
      {"host.flow_box", "host", flow_box_suite},
      {"host.demo", "host", host_demo_suite},
  };
  return registry;
}

std::vector<VerificationReport> run_verify(
    const Config& cfg, const SuiteSelection& sel,
    const std::function<void(const VerificationReport&)>& progress) {
  std::vector<VerificationReport> out;
  for (const auto& s : suite_registry()) {
    const bool on = (s.group == "geometry" && sel.geometry) || (s.group == "trap" && sel.trap) ||
                    (s.group == "plug" && sel.plug) || (s.group == "volume" && sel.volume) ||
                    (s.group == "host" && sel.host && cfg.host.enabled);
    if (!on) continue;
    const auto start = Clock::now();
    VerificationReport rep;
    try {
      rep = s.run(cfg);
    } catch (const std::exception& e) {
      rep = VerificationReport{};
      rep.suite = s.name;
      rep.seed = cfg.run.seed;
      rep.passed = false;
      rep.metrics = {{"error", e.what()}};
      rep.wall_clock_s = seconds_since(start);
    }
    if (rep.suite == "plug.trap_existence" || rep.suite == "host.demo") {
      rep.expected_fail = cfg.trap.amplitude == 0.0;
    }
    out.push_back(rep);
    if (progress) progress(out.back());
  }
  return out;
}

bool all_ok(const std::vector<VerificationReport>& reports) {
  for (const auto& r : reports) {
    if (!r.ok()) return false;
  }
  return true;
}

}  // namespace hamplug
