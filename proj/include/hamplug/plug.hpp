#pragma once

// The plug on B = D_delta x [-eps, eps], assembled from the trap half-plug
// in B+ and its reversed mirror image in B-.

#include <vector>

#include "hamplug/integrator.hpp"
#include "hamplug/report.hpp"
#include "hamplug/trap.hpp"

namespace hamplug {

class PlugGeometry {
 public:
  PlugGeometry(double delta, double eps, double lambda);

  double delta() const { return delta_; }
  double eps() const { return eps_; }
  double lambda() const { return lambda_; }

  /// B+ is centered at z = -eps/2, B- at z = +eps/2.
  Placement plus_placement() const { return {lambda_, -0.5 * eps_}; }

  BoxRegion box(const Dimension& dim) const;
  BoxRegion box_plus(const Dimension& dim) const;
  BoxRegion box_minus(const Dimension& dim) const;

  /// Largest lambda whose placed support satisfies
  /// lambda * r_perp <= delta/4 and lambda^2 * width_z <= eps/8.
  static double max_lambda(const ContactProfile& profile, double delta, double eps);
  /// Throws ConfigError if the placed support does not fit inside B+ with
  /// the required margins.
  void validate(const ContactProfile& profile) const;

 private:
  double delta_;
  double eps_;
  double lambda_;
};

class PlugField {
 public:
  PlugField(const ContactProfile& profile, PlugGeometry geometry,
            ReebPath path = ReebPath::Solve);

  /// Same plug with a different evaluation path.
  PlugField with_path(ReebPath path) const { return PlugField(*profile_, geometry_, path); }

  const Dimension& dim() const { return profile_->dim(); }
  const PlugGeometry& geometry() const { return geometry_; }
  const ContactProfile& profile() const { return *profile_; }
  const TrapField& trap() const { return trap_; }

  /// (x, y, z) -> (x, y, -z), exchanging B+ and B-.
  Vec mirror(const Vec& q) const { return mirror_map(dim(), q); }

  /// Field of the B+ half (trap Reeb field, identity elsewhere).
  Vec plus(const Vec& q) const { return trap_(q); }
  /// Field of the B- half, -dPhi'(plus(Phi'(q))).
  Vec minus(const Vec& q) const;

  /// Evaluator used by the integrator; extends by d/dz outside B.
  Vec operator()(const Vec& q) const;
  /// Same, but rejects points outside B.
  Vec at(const Vec& q) const;

  /// True where the field is exactly d/dz.
  bool is_vertical(const Vec& q) const;

  /// Step cap that keeps the integrator from stepping over the placed
  /// support, where the field is constant and the error estimate vanishes.
  double max_step() const;
  /// Options with the step cap applied.
  ExitOptions capped(ExitOptions opts) const;

 private:
  const ContactProfile* profile_;
  PlugGeometry geometry_;
  TrapField trap_;
};

/// Entry point on the bottom face D x {-eps} above transverse point x.
Vec bottom_entry(const PlugField& plug, const Vec& transverse);

/// Uniform grid with `per_axis` points on [-radius, radius] in every
/// transverse coordinate, restricted to the closed disc, on the bottom face.
std::vector<Vec> entry_grid(const PlugField& plug, double radius, int per_axis);

struct ScanOptions {
  ExitOptions exit;
  double t_max = 1e4;
  int workers = 1;
};

/// Integrates each entry through the plug. Errors are recorded per entry.
std::vector<TraverseRecord> traverse_scan(const PlugField& plug, const std::vector<Vec>& entries,
                                          const ScanOptions& opts);

struct MatchingSummary {
  int traversed = 0;
  double max_mismatch = 0.0;
};
MatchingSummary matching_summary(const std::vector<TraverseRecord>& records);

/// Pass iff at least min_traversed records traversed and the maximal
/// transverse mismatch is at most tol.
VerificationReport verify_matching(const std::vector<TraverseRecord>& records, double tol,
                                   int min_traversed = 1);

struct TrapScanRegion {
  Vec center;               // transverse point
  double half_width = 0.0;  // box half-width along each scanned axis
  int per_axis = 5;         // odd, so the center is a grid point
  std::vector<int> axes;    // transverse coordinates varied; empty: every x_j
};

/// Region centered at the placed image of the torus entry (lambda c, 0, ...).
TrapScanRegion default_trap_region(const PlugField& plug, int per_axis = 5);

struct TrappedDiagnostics {
  TraverseRecord record;
  double first_entry_time = 0.0;        // first time z reaches the bottom of B+
  double torus_distance_at_entry = 0.0;  // placed coordinates
  double torus_distance_final = 0.0;
  double max_z_after_entry = 0.0;
  std::vector<std::pair<double, double>> z_history;  // (t, z) at t = 1, 2, 4, ...
};

struct TrapScanResult {
  std::vector<TraverseRecord> records;
  std::vector<TrappedDiagnostics> trapped;
  int rounds = 0;
};

/// Scans the region; while nothing is trapped, refines around Grazing
/// results or the longest transit, up to `refine` extra rounds.
TrapScanResult trap_scan(const PlugField& plug, const TrapScanRegion& region,
                         const ScanOptions& opts, int refine = 2);

/// Runs one entry with full trapped diagnostics.
TrappedDiagnostics trace_entry(const PlugField& plug, const Vec& entry, const ScanOptions& opts);

struct CertificateOptions {
  int cartesian_per_axis = 10;  // per half, over the support box
  int box_per_axis = 8;         // coarse grid over all of B
  int radial_per_axis = 21;     // polar grid around the torus
  int angles = 11;
  std::vector<double> tube_radii = {0.1, 0.03, 0.01};
};

/// Grid certificate for the absence of closed orbits: min of dz over the
/// sampled points of B outside the torus tubes (radius measured in profile
/// coordinates), plus irrationality witnesses for the torus frequencies.
VerificationReport aperiodicity_certificate(const PlugField& plug, const CertificateOptions& opts);

/// min over 1 <= q <= q_max of q |q r - round(q r)|.
double diophantine_witness(double r, int q_max);

}  // namespace hamplug
