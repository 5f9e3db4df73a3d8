#pragma once

// Ellipsoid host K = sum a_j (x_j^2 + y_j^2) on R^{2n} with
// omega = sum dx_j ^ dy_j (ordering x_1, y_1, ..., x_n, y_n), a flow-box
// chart around one of its periodic orbits, and plug insertion.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hamplug/plug.hpp"
#include "hamplug/report.hpp"

namespace hamplug {

/// sqrt(2), sqrt(3), sqrt(5), ...
std::vector<double> prime_root_coefficients(int n);

class EllipsoidHost {
 public:
  explicit EllipsoidHost(std::vector<double> a);

  int n() const { return static_cast<int>(a_.size()); }
  int dim() const { return 2 * n(); }
  const std::vector<double>& coefficients() const { return a_; }

  double K(const Vec& p) const;
  Covector dK(const Vec& p) const;
  BilinearForm omega() const;

  /// Closed form: (x_j', y_j') = (-2 a_j y_j, 2 a_j x_j).
  Vec field(const Vec& p) const;
  Vec operator()(const Vec& p) const { return field(p); }
  /// Same field from the generic solve of omega(X, .) = -dK.
  Vec field_by_solve(const Vec& p) const;

  /// Exact time-t flow (rotation of plane j by angle 2 a_j t).
  Vec flow(const Vec& p, double t) const;

 private:
  std::vector<double> a_;
};

struct PeriodicOrbit {
  int index = 1;  // 1-based plane index
  double radius = 0.0;
  double period = 0.0;
  Vec base_point;  // (.., x_j = radius, y_j = 0, ..)

  Vec point(const EllipsoidHost& host, double t) const { return host.flow(base_point, t); }
};

/// Gamma_j, the circle of radius 1/sqrt(a_j) in plane j; 1 <= j <= n.
PeriodicOrbit periodic_orbit(const EllipsoidHost& host, int j);

/// First return time to the half-plane {y_j = 0, x_j > 0}, by event
/// localization on the dense output.
double measure_return_time(const EllipsoidHost& host, int j, double tol = 1e-12);

/// Chart Psi(q, z) = host flow for time z of lift(q - offset), where lift
/// places q in the planes k != j and solves K = 1 for x_j > 0 with y_j = 0.
class FlowBoxChart {
 public:
  FlowBoxChart(const EllipsoidHost& host, int j, double delta, double eps, Vec offset);

  int orbit() const { return j_; }
  double delta() const { return delta_; }
  double eps() const { return eps_; }
  const Vec& offset() const { return offset_; }
  int chart_dim() const { return host_->dim() - 1; }

  /// Transverse point in the planes k != j, lifted to the level set.
  Vec lift(const Vec& w) const;
  Vec map(const Vec& chart) const;
  /// Columns: d/dq_k, then d/dz (which is the host field).
  Mat jacobian(const Vec& chart) const;
  /// Closed-form inverse. Empty if the point is not in the chart image
  /// (angle out of range, transverse point outside the disc, or round-trip
  /// residual above 1e-9).
  std::optional<Vec> inverse(const Vec& p) const;
  /// Angle-based chart coordinates with no domain checks.
  Vec raw_inverse(const Vec& p) const;
  bool contains(const Vec& p) const { return inverse(p).has_value(); }
  /// True if chart coordinates lie in D_delta x [-eps, eps].
  bool in_domain(const Vec& chart) const;
  /// dPsi(chart) v, with one flow evaluation.
  Vec pushforward(const Vec& chart, const Vec& v) const;

  Vec base_point() const;
  /// Pullback of omega to the slice {z = const} through chart point c.
  Mat pulled_back_omega(const Vec& chart) const;

  /// Samples chart pairs and throws EmbeddingFailure if two distinct chart
  /// points land on the same ambient point or the round trip fails.
  void check_injective(int samples, std::uint64_t seed) const;

 private:
  const EllipsoidHost* host_;
  int j_;  // 0-based plane
  double delta_;
  double eps_;
  Vec offset_;
};

/// Host field outside the chart image; pushforward of the plug field inside.
class CompositeField {
 public:
  CompositeField(const EllipsoidHost& host, const FlowBoxChart& chart, const PlugField& plug);

  Vec operator()(const Vec& p) const;
  const FlowBoxChart& chart() const { return *chart_; }

 private:
  const EllipsoidHost* host_;
  const FlowBoxChart* chart_;
  const PlugField* plug_;
};

/// The chart domain D_delta x [-eps, eps] as an exit region on the level set.
class ChartRegion : public ExitRegion {
 public:
  explicit ChartRegion(const FlowBoxChart& chart) : chart_(&chart) {}

  double face_distance(const Vec& p) const override;
  Face classify(const Vec& p) const override;
  double face_residual(const Vec& p, Face face) const override;

 private:
  const FlowBoxChart* chart_;
};

struct DemoOptions {
  int orbit = 1;
  double chart_delta = 0.4;
  double chart_eps = 0.5;
  double lambda = 0.0;      // 0: largest admissible
  double t_post = 1e3;      // horizon of the trapped run
  int nearby = 50;
  double reject_radius = 0.05;  // profile-coordinate torus distance of rejected entries
  double tol = 1e-10;
  double trap_tol = 1e-12;
  double return_radius = 1e-3;
  double match_tol = 1e-5;
  double orbit_tol = 1e-8;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Transverse trapped entry of the demo plug; found by trap-scan if empty.
  std::optional<Vec> trapped_entry;
  /// Writes pre_orbit.csv and post_orbit.csv here when set.
  std::filesystem::path export_dir;
  double export_dt = 0.05;
};

/// Builds the chart, inserts the plug and reports (a)-(d) of the orbit
/// opening demonstration.
VerificationReport demo_open_orbit(const EllipsoidHost& host, const ContactProfile& profile,
                                   const DemoOptions& opts);

/// Chart normal-form checks: pulled-back omega at z = 0 and z = +-eps/2,
/// pushforward of the host field, injectivity.
VerificationReport verify_flow_box(const FlowBoxChart& chart, int samples, std::uint64_t seed);

}  // namespace hamplug
