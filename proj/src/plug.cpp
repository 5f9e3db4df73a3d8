#include "hamplug/plug.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "hamplug/parallel.hpp"

namespace hamplug {

PlugGeometry::PlugGeometry(double delta, double eps, double lambda)
    : delta_(delta), eps_(eps), lambda_(lambda) {
  if (!(delta > 0.0)) throw ConfigError("plug.delta must be positive");
  if (!(eps > 0.0)) throw ConfigError("plug.eps must be positive");
  if (!(lambda > 0.0)) throw ConfigError("plug.lambda must be positive");
}

BoxRegion PlugGeometry::box(const Dimension& dim) const {
  return BoxRegion(dim.odd(), delta_, -eps_, eps_);
}

BoxRegion PlugGeometry::box_plus(const Dimension& dim) const {
  return BoxRegion(dim.odd(), 0.5 * delta_, -0.75 * eps_, -0.25 * eps_);
}

BoxRegion PlugGeometry::box_minus(const Dimension& dim) const {
  return BoxRegion(dim.odd(), 0.5 * delta_, 0.25 * eps_, 0.75 * eps_);
}

double PlugGeometry::max_lambda(const ContactProfile& profile, double delta, double eps) {
  return std::min(0.25 * delta / profile.transverse_radius(),
                  std::sqrt(0.125 * eps / profile.z_half_width()));
}

void PlugGeometry::validate(const ContactProfile& profile) const {
  const double slack = 1e-12;
  const double r_placed = lambda_ * profile.transverse_radius();
  const double z_placed = lambda_ * lambda_ * profile.z_half_width();
  if (r_placed > 0.25 * delta_ + slack) {
    throw ConfigError("plug.lambda=" + std::to_string(lambda_) +
                      " places the transverse support radius " + std::to_string(r_placed) +
                      " beyond delta/4=" + std::to_string(0.25 * delta_));
  }
  if (z_placed > 0.125 * eps_ + slack) {
    throw ConfigError("plug.lambda=" + std::to_string(lambda_) +
                      " places the vertical support half-height " + std::to_string(z_placed) +
                      " beyond eps/8=" + std::to_string(0.125 * eps_));
  }
}

PlugField::PlugField(const ContactProfile& profile, PlugGeometry geometry, ReebPath path)
    : profile_(&profile), geometry_(geometry), trap_(profile, geometry.plus_placement(), path) {
  geometry_.validate(profile);
}

Vec PlugField::minus(const Vec& q) const {
  Vec v = trap_(mirror(q));
  // -dPhi' = diag(-1, ..., -1, 1)
  v.head(dim().odd() - 1) *= -1.0;
  return v;
}

Vec PlugField::operator()(const Vec& q) const {
  const double z = q[dim().z()];
  if (z < 0.0) return plus(q);
  if (z > 0.0) return minus(q);
  return unit_z(dim());
}

Vec PlugField::at(const Vec& q) const {
  check_state(dim(), q);
  if (q.head(dim().odd() - 1).norm() > geometry_.delta() ||
      std::abs(q[dim().z()]) > geometry_.eps()) {
    throw PreconditionError("point outside the plug box");
  }
  return (*this)(q);
}

bool PlugField::is_vertical(const Vec& q) const {
  const double z = q[dim().z()];
  if (z < 0.0) return trap_.short_circuits(q);
  if (z > 0.0) return trap_.short_circuits(mirror(q));
  return true;
}

double PlugField::max_step() const {
  const double lam = geometry_.lambda();
  return 0.5 * lam * lam * profile_->z_half_width();
}

ExitOptions PlugField::capped(ExitOptions opts) const {
  opts.integrator.h_max = std::min(opts.integrator.h_max, max_step());
  return opts;
}

Vec bottom_entry(const PlugField& plug, const Vec& transverse) {
  if (transverse.size() != plug.dim().odd() - 1) {
    throw DimensionMismatch("transverse entry point has wrong dimension");
  }
  Vec p(plug.dim().odd());
  p.head(transverse.size()) = transverse;
  p[plug.dim().z()] = -plug.geometry().eps();
  return p;
}

std::vector<Vec> entry_grid(const PlugField& plug, double radius, int per_axis) {
  if (per_axis < 1) throw PreconditionError("grid needs at least one point per axis");
  const int m = plug.dim().odd() - 1;
  std::vector<Vec> out;
  std::vector<int> idx(m, 0);
  for (;;) {
    Vec x(m);
    for (int k = 0; k < m; ++k) {
      x[k] = per_axis == 1 ? 0.0 : -radius + 2.0 * radius * idx[k] / (per_axis - 1);
    }
    if (x.norm() <= radius && x.norm() < plug.geometry().delta()) {
      out.push_back(bottom_entry(plug, x));
    }
    int k = 0;
    while (k < m && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == m) break;
  }
  return out;
}

std::vector<TraverseRecord> traverse_scan(const PlugField& plug, const std::vector<Vec>& entries,
                                          const ScanOptions& opts) {
  const BoxRegion box = plug.geometry().box(plug.dim());
  const ExitOptions exit = plug.capped(opts.exit);
  return parallel_map<TraverseRecord>(entries.size(), opts.workers, [&](std::size_t i) {
    try {
      return integrate_until_exit(plug, box, entries[i], opts.t_max, exit);
    } catch (const Error& e) {
      TraverseRecord r;
      r.entry = entries[i];
      r.status = TraverseStatus::Failed;
      r.message = e.what();
      return r;
    }
  });
}

MatchingSummary matching_summary(const std::vector<TraverseRecord>& records) {
  MatchingSummary s;
  for (const auto& r : records) {
    if (r.status != TraverseStatus::Traversed) continue;
    const auto m = r.entry.size() - 1;
    s.max_mismatch = std::max(s.max_mismatch, (r.exit.head(m) - r.entry.head(m)).norm());
    ++s.traversed;
  }
  return s;
}

VerificationReport verify_matching(const std::vector<TraverseRecord>& records, double tol,
                                   int min_traversed) {
  VerificationReport rep;
  rep.suite = "plug.matching";
  const MatchingSummary s = matching_summary(records);
  int counts[6] = {};
  double max_residual = 0.0;
  for (const auto& r : records) {
    ++counts[static_cast<int>(r.status)];
    if (r.status == TraverseStatus::Traversed) {
      max_residual = std::max(max_residual, std::abs(r.face_residual));
    }
  }
  rep.metrics = {{"entries", records.size()},
                 {"traversed", s.traversed},
                 {"trapped", counts[static_cast<int>(TraverseStatus::Trapped)]},
                 {"side_exit", counts[static_cast<int>(TraverseStatus::SideExit)]},
                 {"grazing", counts[static_cast<int>(TraverseStatus::Grazing)]},
                 {"failed", counts[static_cast<int>(TraverseStatus::Failed)]},
                 {"max_transverse_mismatch", s.max_mismatch},
                 {"max_face_residual", max_residual}};
  rep.params = {{"tolerance", tol}, {"min_traversed", min_traversed}};
  rep.passed = s.traversed >= min_traversed && s.max_mismatch <= tol;
  return rep;
}

TrapScanRegion default_trap_region(const PlugField& plug, int per_axis) {
  const Dimension& dim = plug.dim();
  const double lc = plug.geometry().lambda() * plug.profile().torus_radius();
  TrapScanRegion region;
  region.center = Vec::Zero(dim.odd() - 1);
  for (int j = 0; j < dim.planes(); ++j) {
    region.center[dim.x(j)] = lc;
    region.axes.push_back(dim.x(j));
  }
  region.half_width = 0.5 * lc;
  region.per_axis = per_axis;
  return region;
}

TrappedDiagnostics trace_entry(const PlugField& plug, const Vec& entry, const ScanOptions& opts) {
  const Dimension& dim = plug.dim();
  const BoxRegion box = plug.geometry().box(dim);
  const double z_enter = -0.75 * plug.geometry().eps();
  const int iz = dim.z();

  TrappedDiagnostics diag;
  bool entered = entry[iz] >= z_enter;
  if (entered) diag.torus_distance_at_entry = plug.trap().placed_torus_distance(entry);
  diag.max_z_after_entry = entered ? entry[iz] : -std::numeric_limits<double>::infinity();
  double next_sample = 1.0;

  auto observer = [&](double t, const Vec& y, const DenseStep<Vec>& ds) {
    if (!entered && y[iz] >= z_enter) {
      double a = ds.t0, b = ds.t1;
      for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, b); ++it) {
        const double m = 0.5 * (a + b);
        (ds(m)[iz] < z_enter ? a : b) = m;
      }
      entered = true;
      diag.first_entry_time = b;
      diag.torus_distance_at_entry = plug.trap().placed_torus_distance(ds(b));
    }
    if (entered) diag.max_z_after_entry = std::max(diag.max_z_after_entry, y[iz]);
    while (next_sample <= t) {
      diag.z_history.emplace_back(next_sample, ds(next_sample)[iz]);
      next_sample *= 2.0;
    }
  };
  try {
    diag.record =
        integrate_until_exit(plug, box, entry, opts.t_max, plug.capped(opts.exit), observer);
  } catch (const Error& e) {
    diag.record.entry = entry;
    diag.record.status = TraverseStatus::Failed;
    diag.record.message = e.what();
  }
  if (diag.record.exit.size() > 0) {
    diag.torus_distance_final = plug.trap().placed_torus_distance(diag.record.exit);
  }
  return diag;
}

namespace {

std::vector<Vec> region_entries(const PlugField& plug, const TrapScanRegion& region) {
  std::vector<int> axes = region.axes;
  if (axes.empty()) {
    for (int j = 0; j < plug.dim().planes(); ++j) axes.push_back(plug.dim().x(j));
  }
  const int m = static_cast<int>(axes.size());
  const int k = region.per_axis;
  std::vector<Vec> out;
  std::vector<int> idx(m, 0);
  for (;;) {
    Vec x = region.center;
    for (int a = 0; a < m; ++a) {
      x[axes[a]] += k == 1 ? 0.0 : region.half_width * (2.0 * idx[a] / (k - 1) - 1.0);
    }
    if (x.norm() < plug.geometry().delta()) out.push_back(bottom_entry(plug, x));
    int a = 0;
    while (a < m && ++idx[a] == k) idx[a++] = 0;
    if (a == m) break;
  }
  return out;
}

}  // namespace

TrapScanResult trap_scan(const PlugField& plug, const TrapScanRegion& region,
                         const ScanOptions& opts, int refine) {
  if (region.per_axis < 1) throw PreconditionError("trap-scan grid needs points");
  TrapScanResult result;
  TrapScanRegion current = region;
  for (int round = 0; round <= refine; ++round) {
    const std::vector<Vec> entries = region_entries(plug, current);
    auto diags = parallel_map<TrappedDiagnostics>(
        entries.size(), opts.workers, [&](std::size_t i) { return trace_entry(plug, entries[i], opts); });
    result.rounds = round + 1;
    const TrappedDiagnostics* focus = nullptr;
    for (auto& d : diags) {
      result.records.push_back(d.record);
      if (d.record.status == TraverseStatus::Trapped) result.trapped.push_back(d);
    }
    if (!result.trapped.empty()) break;
    for (const auto& d : diags) {
      if (d.record.status == TraverseStatus::Grazing) {
        focus = &d;
        break;
      }
      if (!focus || d.record.transit_time > focus->record.transit_time) focus = &d;
    }
    if (!focus) break;
    current.center = focus->record.entry.head(plug.dim().odd() - 1);
    if (current.per_axis > 1) current.half_width *= 2.0 / (current.per_axis - 1);
  }
  return result;
}

double diophantine_witness(double r, int q_max) {
  double best = std::numeric_limits<double>::infinity();
  for (int q = 1; q <= q_max; ++q) {
    const double x = q * r;
    best = std::min(best, q * std::abs(x - std::round(x)));
  }
  return best;
}

VerificationReport aperiodicity_certificate(const PlugField& plug, const CertificateOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const Dimension& dim = plug.dim();
  const ContactProfile& prof = plug.profile();
  const Placement place = plug.trap().placement();
  const CliffordTorus torus(dim, prof.torus_radius());
  const int iz = dim.z();

  std::vector<double> radii = opts.tube_radii;
  std::vector<double> min_dz(radii.size(), std::numeric_limits<double>::infinity());
  double min_all = std::numeric_limits<double>::infinity();
  long points = 0;

  // dz at the placed image of profile point p, in both halves.
  auto visit = [&](const Vec& p) {
    const Vec q = place.from_profile(dim, p);
    const double d = torus.distance(p);
    for (const Vec& pt : {q, plug.mirror(q)}) {
      const double dz = plug(pt)[iz];
      min_all = std::min(min_all, dz);
      for (std::size_t k = 0; k < radii.size(); ++k) {
        if (d > radii[k]) min_dz[k] = std::min(min_dz[k], dz);
      }
      ++points;
    }
  };

  // Cartesian grid over the support box in profile coordinates.
  {
    const int m = opts.cartesian_per_axis;
    const double rp = prof.transverse_radius(), wz = prof.z_half_width();
    std::vector<int> idx(dim.odd(), 0);
    for (;;) {
      Vec p(dim.odd());
      for (int k = 0; k < dim.odd(); ++k) {
        const double half = k == iz ? wz : rp;
        p[k] = m == 1 ? 0.0 : -half + 2.0 * half * idx[k] / (m - 1);
      }
      visit(p);
      int k = 0;
      while (k < dim.odd() && ++idx[k] == m) idx[k++] = 0;
      if (k == dim.odd()) break;
    }
  }
  // Polar grid around the torus: radial offsets and z on a lattice that
  // contains the torus itself, angles from a fixed low-discrepancy sequence.
  {
    const int m = opts.radial_per_axis;
    const double spread = 0.2;
    const int free = dim.planes() + 1;
    std::vector<int> idx(free, 0);
    long counter = 0;
    for (;;) {
      for (int a = 0; a < opts.angles; ++a) {
        Vec p(dim.odd());
        ++counter;
        for (int j = 0; j < dim.planes(); ++j) {
          const double off = m == 1 ? 0.0 : spread * (2.0 * idx[j] / (m - 1) - 1.0);
          const double r = std::max(0.0, prof.torus_radius() + off);
          const double frac = std::fmod(counter * std::sqrt(double(j + 2)), 1.0);
          const double th = 2.0 * std::numbers::pi * frac;
          p[dim.x(j)] = r * std::cos(th);
          p[dim.y(j)] = r * std::sin(th);
        }
        p[iz] = m == 1 ? 0.0 : spread * (2.0 * idx[dim.planes()] / (m - 1) - 1.0);
        visit(p);
      }
      int k = 0;
      while (k < free && ++idx[k] == m) idx[k++] = 0;
      if (k == free) break;
    }
  }
  // Coarse grid over all of B.
  {
    const int m = opts.box_per_axis;
    const double delta = plug.geometry().delta(), eps = plug.geometry().eps();
    std::vector<int> idx(dim.odd(), 0);
    for (;;) {
      Vec q(dim.odd());
      for (int k = 0; k < dim.odd(); ++k) {
        const double half = k == iz ? eps : delta;
        q[k] = m == 1 ? 0.0 : -half + 2.0 * half * idx[k] / (m - 1);
      }
      if (q.head(dim.odd() - 1).norm() <= delta) {
        // Tube distance of a B- point is measured at its mirror image.
        const Vec qp = q[iz] > 0.0 ? plug.mirror(q) : q;
        const double d = torus.distance(place.to_profile(dim, qp));
        const double dz = plug(q)[iz];
        min_all = std::min(min_all, dz);
        for (std::size_t k = 0; k < radii.size(); ++k) {
          if (d > radii[k]) min_dz[k] = std::min(min_dz[k], dz);
        }
        ++points;
      }
      int k = 0;
      while (k < dim.odd() && ++idx[k] == m) idx[k++] = 0;
      if (k == dim.odd()) break;
    }
  }

  VerificationReport rep;
  rep.suite = "plug.aperiodicity";
  nlohmann::json per_radius = nlohmann::json::array();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    per_radius.push_back({{"tube_radius", radii[k]}, {"min_dz", min_dz[k]}});
  }
  const auto nu = prof.design_frequencies();
  nlohmann::json ratios = nlohmann::json::array();
  nlohmann::json witnesses = nlohmann::json::array();
  if (!prof.is_identity()) {
    for (std::size_t j = 1; j < nu.size(); ++j) {
      ratios.push_back(nu[j] / nu[0]);
      witnesses.push_back(diophantine_witness(nu[j] / nu[0], 1000));
    }
  }
  rep.metrics = {{"points", points},
                 {"min_dz_outside_tubes", per_radius},
                 {"min_dz_all", min_all},
                 {"frequency_ratios_plus", ratios},
                 {"frequency_ratios_minus", ratios},
                 {"diophantine_witness_q1000", witnesses},
                 {"kind", "grid certificate, not a proof"}};
  rep.params = {{"cartesian_per_axis", opts.cartesian_per_axis},
                {"box_per_axis", opts.box_per_axis},
                {"radial_per_axis", opts.radial_per_axis},
                {"angles", opts.angles},
                {"tube_radii", radii}};
  rep.passed = !min_dz.empty() && min_dz.front() > 0.0 && min_all >= -1e-10;
  rep.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace hamplug
