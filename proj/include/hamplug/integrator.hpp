#pragma once

// Dormand-Prince 5(4) with PI step control, dense output and event
// localization on the continuous extension.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hamplug/geometry.hpp"

namespace hamplug {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 0.0;  // 0: automatic
  double h_max = std::numeric_limits<double>::infinity();
  double h_min = 1e-14;
  long max_steps = 2'000'000'000L;
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace dopri

/// Continuous extension of one accepted step (fourth order).
template <class State>
struct DenseStep {
  double t0 = 0.0;
  double t1 = 0.0;
  State r1, r2, r3, r4, r5;

  State operator()(double t) const {
    const double h = t1 - t0;
    const double s = h == 0.0 ? 0.0 : (t - t0) / h;
    const double s1 = 1.0 - s;
    return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
  }

  const State& start() const { return r1; }
};

/// Adaptive stepper. `Field` maps a state to its time derivative.
template <class State, class Field>
class Dopri5 {
 public:
  Dopri5(const Field& field, State y0, double t0, double direction, IntegratorOptions opts)
      : field_(field), opts_(opts), t_(t0), dir_(direction >= 0 ? 1.0 : -1.0), y_(std::move(y0)) {
    k1_ = field_(y_);
    h_ = opts_.h_init > 0 ? opts_.h_init : initial_step();
  }

  double t() const { return t_; }
  const State& y() const { return y_; }
  double last_step() const { return last_h_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }
  const DenseStep<State>& dense() const { return dense_; }

  void set_tolerance(double rtol, double atol) {
    opts_.rtol = rtol;
    opts_.atol = atol;
  }

  /// Advances by one accepted step, not beyond t_limit. Throws StepFailure
  /// on step size underflow.
  void step(double t_limit) {
    using namespace dopri;
    const double remaining = std::abs(t_limit - t_);
    for (;;) {
      double h = std::min({std::abs(h_), opts_.h_max, remaining});
      if (h < opts_.h_min && h < remaining) {
        throw StepFailure("step size underflow at t=" + std::to_string(t_));
      }
      const double hs = dir_ * h;
      State yt = y_ + hs * a21 * k1_;
      const State k2 = field_(yt);
      yt = y_ + hs * (a31 * k1_ + a32 * k2);
      const State k3 = field_(yt);
      yt = y_ + hs * (a41 * k1_ + a42 * k2 + a43 * k3);
      const State k4 = field_(yt);
      yt = y_ + hs * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4);
      const State k5 = field_(yt);
      yt = y_ + hs * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      const State k6 = field_(yt);
      State y1 = y_ + hs * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      const State k7 = field_(y1);

      const State err =
          hs * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc =
            opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        sum += r * r;
      }
      const double en = std::sqrt(sum / static_cast<double>(err.size()));
      if (!std::isfinite(en)) {
        h_ = 0.1 * h;
        ++rejected_;
        continue;
      }

      // PI controller (Hairer-Wanner, beta = 0.04)
      constexpr double beta = 0.04, safe = 0.9, facl = 0.2, facr = 10.0;
      const double fac11 = std::pow(std::max(en, 1e-300), 0.2 - beta * 0.75);
      if (en <= 1.0) {
        double fac = fac11 / std::pow(facold_, beta);
        fac = std::clamp(fac / safe, 1.0 / facr, 1.0 / facl);
        facold_ = std::max(en, 1e-4);

        dense_.t0 = t_;
        dense_.t1 = t_ + hs;
        const State ydiff = y1 - y_;
        const State bspl = hs * k1_ - ydiff;
        dense_.r1 = y_;
        dense_.r2 = ydiff;
        dense_.r3 = bspl;
        dense_.r4 = ydiff - hs * k7 - bspl;
        dense_.r5 = hs * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

        t_ = (h == remaining) ? t_limit : t_ + hs;
        y_ = std::move(y1);
        k1_ = k7;
        last_h_ = h;
        h_ = h / fac;
        ++accepted_;
        if (accepted_ + rejected_ > opts_.max_steps) {
          throw StepFailure("maximum number of steps exceeded");
        }
        return;
      }
      h_ = h / std::min(1.0 / facl, fac11 / safe);
      ++rejected_;
    }
  }

 private:
  double initial_step() {
    // Hairer's starting step heuristic.
    double dnf = 0.0, dny = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      const double sk = opts_.atol + opts_.rtol * std::abs(y_[i]);
      dnf += (k1_[i] / sk) * (k1_[i] / sk);
      dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, opts_.h_max);
    const State y1 = y_ + dir_ * h * k1_;
    const State k2 = field_(y1);
    double der2 = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      const double sk = opts_.atol + opts_.rtol * std::abs(y_[i]);
      der2 += ((k2[i] - k1_[i]) / sk) * ((k2[i] - k1_[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, opts_.h_max});
  }

  const Field& field_;
  IntegratorOptions opts_;
  double t_;
  double dir_;
  State y_;
  State k1_;
  double h_ = 0.0;
  double last_h_ = 0.0;
  double facold_ = 1e-4;
  long accepted_ = 0;
  long rejected_ = 0;
  DenseStep<State> dense_;
};

enum class TerminalStatus { Completed, StepFailure };

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  long accepted_steps = 0;
  long rejected_steps = 0;
  double max_step = 0.0;
  TerminalStatus status = TerminalStatus::Completed;
  std::string message;
};

enum class Record { AllSteps, Endpoints };

/// Integrates an autonomous field from p0 over [0, t_end] (t_end may be
/// negative). StepFailure is recorded in the trajectory, not thrown.
template <class Field>
Trajectory integrate(const Field& field, const Vec& p0, double t_end, const IntegratorOptions& opts,
                     Record record = Record::AllSteps) {
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) {
    throw PreconditionError("integrator tolerances must be positive");
  }
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(p0);
  if (t_end == 0.0) return traj;
  auto f = [&field](const Vec& y) -> Vec { return field(y); };
  Dopri5<Vec, decltype(f)> stepper(f, p0, 0.0, t_end, opts);
  try {
    while (stepper.t() != t_end) {
      stepper.step(t_end);
      traj.max_step = std::max(traj.max_step, stepper.last_step());
      if (record == Record::AllSteps || stepper.t() == t_end) {
        traj.times.push_back(stepper.t());
        traj.states.push_back(stepper.y());
      }
    }
  } catch (const StepFailure& e) {
    traj.status = TerminalStatus::StepFailure;
    traj.message = e.what();
    if (record == Record::Endpoints) {
      traj.times.push_back(stepper.t());
      traj.states.push_back(stepper.y());
    }
  }
  traj.accepted_steps = stepper.accepted();
  traj.rejected_steps = stepper.rejected();
  return traj;
}

/// Region with a signed face-distance function: negative inside, zero on
/// the boundary, positive outside.
class ExitRegion {
 public:
  enum class Face { None, Bottom, Top, Side };

  virtual ~ExitRegion() = default;
  virtual double face_distance(const Vec& p) const = 0;
  virtual Face classify(const Vec& p) const = 0;
  /// Residual of an exit point against the face it lies on.
  virtual double face_residual(const Vec& p, Face face) const = 0;
};

/// D x [z_lo, z_hi] with D a disc of the given radius in the transverse
/// coordinates (all but the last).
class BoxRegion : public ExitRegion {
 public:
  BoxRegion(int dim, double radius, double z_lo, double z_hi);

  int dim() const { return dim_; }
  double radius() const { return radius_; }
  double z_lo() const { return z_lo_; }
  double z_hi() const { return z_hi_; }

  double transverse_norm(const Vec& p) const { return p.head(dim_ - 1).norm(); }
  bool contains(const Vec& p) const { return face_distance(p) <= 0.0; }

  double face_distance(const Vec& p) const override;
  Face classify(const Vec& p) const override;
  double face_residual(const Vec& p, Face face) const override;

 private:
  int dim_;
  double radius_;
  double z_lo_;
  double z_hi_;
};

enum class TraverseStatus { Traversed, Trapped, SideExit, BottomExit, Grazing, Failed };

std::string to_string(TraverseStatus s);
TraverseStatus traverse_status_from_string(const std::string& s);

struct TraverseRecord {
  Vec entry;
  TraverseStatus status = TraverseStatus::Failed;
  Vec exit;
  double transit_time = 0.0;
  double face_residual = 0.0;
  long steps = 0;
  std::string message;
};

struct ExitOptions {
  IntegratorOptions integrator;
  double event_tol = 1e-12;       // |face distance| at the localized root
  double grazing_slope = 1e-8;    // |d/dt face distance| below this is a graze
  int interior_samples = 4;       // dense-output probes per step
};

/// Per-step hook for long runs: (t, state, dense step).
using StepObserver = std::function<void(double, const Vec&, const DenseStep<Vec>&)>;

namespace detail {

/// Bracketed Illinois false position with bisection safeguard on g along
/// a dense step. Requires g(a) < 0 <= g(b).
template <class G>
double bracket_root(const G& g, double a, double b, double ga, double gb, double tol) {
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double m = (a * gb - b * ga) / (gb - ga);
    if (!(m > std::min(a, b) && m < std::max(a, b)) || it % 4 == 3) m = 0.5 * (a + b);
    const double gm = g(m);
    if (std::abs(gm) <= tol && gm >= 0.0) return m;
    if (gm < 0.0) {
      a = m;
      ga = gm;
      if (side == -1) gb *= 0.5;
      side = -1;
    } else {
      b = m;
      gb = gm;
      if (side == 1) ga *= 0.5;
      side = 1;
    }
    if (std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(b))) return b;
  }
  return b;
}

}  // namespace detail

/// Integrates until the trajectory leaves the region or t_max elapses.
/// The exit is localized on the dense output.
template <class Field>
TraverseRecord integrate_until_exit(const Field& field, const ExitRegion& region, const Vec& p0,
                                    double t_max, const ExitOptions& opts,
                                    const StepObserver& observer = {}) {
  if (region.face_distance(p0) > opts.event_tol) {
    throw PreconditionError("initial point lies outside the closed region");
  }
  TraverseRecord rec;
  rec.entry = p0;
  auto f = [&field](const Vec& y) -> Vec { return field(y); };
  auto run = [&](double tol_scale, double t_start, const Vec& y_start, double t_stop,
                 bool& crossed, double& t_cross, Vec& y_cross, double& slope, long& steps) {
    IntegratorOptions io = opts.integrator;
    io.rtol *= tol_scale;
    io.atol *= tol_scale;
    Dopri5<Vec, decltype(f)> stepper(f, y_start, t_start, 1.0, io);
    crossed = false;
    while (stepper.t() < t_stop) {
      const double g_prev = region.face_distance(stepper.y());
      stepper.step(t_stop);
      ++steps;
      const auto& ds = stepper.dense();
      if (observer) observer(stepper.t(), stepper.y(), ds);
      // Probe the step for the first sign change.
      const int m = std::max(1, opts.interior_samples);
      double ta = ds.t0, ga = g_prev;
      for (int k = 1; k <= m + 1; ++k) {
        const double tb = k == m + 1 ? ds.t1 : ds.t0 + (ds.t1 - ds.t0) * k / (m + 1);
        const double gb = k == m + 1 ? region.face_distance(stepper.y()) : region.face_distance(ds(tb));
        if (gb >= 0.0 && ga < 0.0) {
          auto g = [&](double t) { return region.face_distance(ds(t)); };
          t_cross = detail::bracket_root(g, ta, tb, ga, gb, opts.event_tol);
          y_cross = ds(t_cross);
          const double eta = 1e-6 * (ds.t1 - ds.t0);
          slope = (g(std::min(t_cross + eta, ds.t1)) - g(std::max(t_cross - eta, ds.t0))) /
                  (std::min(t_cross + eta, ds.t1) - std::max(t_cross - eta, ds.t0));
          crossed = true;
          return std::pair<double, Vec>{ds.t0, ds.r1};
        }
        if (gb >= 0.0 && ga >= 0.0 && k == 1 && ds.t0 == t_start) {
          // Left the closed region immediately from a boundary point.
          t_cross = ds.t0;
          y_cross = ds.r1;
          slope = 1.0;
          crossed = true;
          return std::pair<double, Vec>{ds.t0, ds.r1};
        }
        ta = tb;
        ga = gb;
      }
    }
    return std::pair<double, Vec>{stepper.t(), stepper.y()};
  };

  try {
    bool crossed = false;
    double t_cross = 0.0, slope = 0.0;
    Vec y_cross;
    long steps = 0;
    auto [t_step0, y_step0] = run(1.0, 0.0, p0, t_max, crossed, t_cross, y_cross, slope, steps);
    if (crossed && std::abs(slope) < opts.grazing_slope) {
      // Redo the offending step at tighter tolerance.
      bool crossed2 = false;
      double t2 = 0.0, slope2 = 0.0;
      Vec y2;
      run(0.1, t_step0, y_step0, t_max, crossed2, t2, y2, slope2, steps);
      if (crossed2 && std::abs(slope2) >= opts.grazing_slope) {
        t_cross = t2;
        y_cross = y2;
        slope = slope2;
      } else {
        rec.status = TraverseStatus::Grazing;
        rec.exit = crossed2 ? y2 : y_cross;
        rec.transit_time = crossed2 ? t2 : t_cross;
        rec.steps = steps;
        return rec;
      }
    }
    rec.steps = steps;
    if (!crossed) {
      rec.status = TraverseStatus::Trapped;
      rec.exit = y_step0;
      rec.transit_time = t_step0;
      return rec;
    }
    const auto face = region.classify(y_cross);
    rec.exit = y_cross;
    rec.transit_time = t_cross;
    rec.face_residual = region.face_residual(y_cross, face);
    switch (face) {
      case ExitRegion::Face::Top: rec.status = TraverseStatus::Traversed; break;
      case ExitRegion::Face::Side: rec.status = TraverseStatus::SideExit; break;
      case ExitRegion::Face::Bottom: rec.status = TraverseStatus::BottomExit; break;
      case ExitRegion::Face::None: rec.status = TraverseStatus::Failed; break;
    }
  } catch (const StepFailure& e) {
    rec.status = TraverseStatus::Failed;
    rec.message = e.what();
  }
  return rec;
}

/// Central-difference Jacobian of a field.
template <class Field>
Mat field_jacobian(const Field& field, const Vec& p, double h = 1e-6) {
  const auto d = p.size();
  Mat jac(d, d);
  Vec q = p;
  for (Eigen::Index i = 0; i < d; ++i) {
    q[i] = p[i] + h;
    const Vec fp = field(q);
    q[i] = p[i] - h;
    const Vec fm = field(q);
    q[i] = p[i];
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

/// Derivative of the time-T flow map at p0 from the variational equations
/// integrated jointly with the trajectory.
template <class Field>
Mat flow_jacobian(const Field& field, const Vec& p0, double T, const IntegratorOptions& opts,
                  double fd_step = 1e-6, Vec* endpoint = nullptr) {
  const auto d = p0.size();
  auto rhs = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
    Vec y = s.head(d);
    Eigen::VectorXd out(s.size());
    out.head(d) = field(y);
    const Mat jac = field_jacobian(field, y, fd_step);
    Eigen::Map<const Eigen::MatrixXd> phi(s.data() + d, d, d);
    Eigen::Map<Eigen::MatrixXd> dphi(out.data() + d, d, d);
    dphi.noalias() = jac * phi;
    return out;
  };
  Eigen::VectorXd s0(d + d * d);
  s0.head(d) = p0;
  Eigen::Map<Eigen::MatrixXd>(s0.data() + d, d, d).setIdentity();
  if (T == 0.0) {
    if (endpoint) *endpoint = p0;
    return Mat::Identity(d, d);
  }
  Dopri5<Eigen::VectorXd, decltype(rhs)> stepper(rhs, s0, 0.0, T, opts);
  while (stepper.t() != T) stepper.step(T);
  if (endpoint) *endpoint = stepper.y().head(d);
  return Eigen::Map<const Eigen::MatrixXd>(stepper.y().data() + d, d, d);
}

}  // namespace hamplug
