#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hamplug/errors.hpp"
#include "hamplug/integrator.hpp"
#include "support.hpp"

using namespace hamplug;
using testing_support::Gen;

namespace {

// Planar rotation with angular speed w in (x, y); z' = 1.
struct Rotation {
  double w = 1.0;
  Vec operator()(const Vec& p) const {
    Vec v(3);
    v << -w * p[1], w * p[0], 1.0;
    return v;
  }
};

Vec rotation_exact(double w, const Vec& p, double t) {
  Vec q(3);
  q << std::cos(w * t) * p[0] - std::sin(w * t) * p[1], std::sin(w * t) * p[0] + std::cos(w * t) * p[1],
      p[2] + t;
  return q;
}

}  // namespace

TEST(Dopri5, RotationMatchesClosedForm) {
  Gen gen(31);
  for (int i = 0; i < 20; ++i) {
    const Rotation f{gen.real(0.5, 3.0)};
    const Vec p = gen.vec(3, -1.0, 1.0);
    const double T = gen.real(1.0, 20.0);
    IntegratorOptions io;
    io.rtol = io.atol = 1e-12;
    const Trajectory tr = integrate(f, p, T, io);
    ASSERT_EQ(tr.status, TerminalStatus::Completed);
    EXPECT_DOUBLE_EQ(tr.times.back(), T);
    EXPECT_LE((tr.states.back() - rotation_exact(f.w, p, T)).norm(), 1e-9);
  }
}

TEST(Dopri5, DenseOutputIsAccurateInsideSteps) {
  const Rotation f{2.0};
  Vec p(3);
  p << 1.0, 0.0, 0.0;
  IntegratorOptions io;
  io.rtol = io.atol = 1e-11;
  auto g = [&f](const Vec& y) -> Vec { return f(y); };
  Dopri5<Vec, decltype(g)> st(g, p, 0.0, 1.0, io);
  for (int k = 0; k < 20; ++k) {
    st.step(10.0);
    const auto& ds = st.dense();
    for (double s : {0.25, 0.5, 0.75}) {
      const double t = ds.t0 + s * (ds.t1 - ds.t0);
      EXPECT_LE((ds(t) - rotation_exact(2.0, p, t)).norm(), 1e-9);
    }
    EXPECT_LE((ds(ds.t1) - st.y()).norm(), 1e-14);
  }
}

TEST(Dopri5, StepCapIsHonoured) {
  const Rotation f{1.0};
  IntegratorOptions io;
  io.h_max = 0.01;
  const Trajectory tr = integrate(f, Vec::Zero(3), 1.0, io);
  EXPECT_LE(tr.max_step, 0.01 + 1e-15);
  EXPECT_GE(tr.accepted_steps, 100);
}

TEST(Dopri5, EndpointsRecordKeepsFirstAndLast) {
  const Rotation f{1.0};
  const Trajectory tr = integrate(f, Vec::Zero(3), 2.0, IntegratorOptions{}, Record::Endpoints);
  ASSERT_EQ(tr.states.size(), 2u);
  EXPECT_EQ(tr.times.front(), 0.0);
  EXPECT_EQ(tr.times.back(), 2.0);
}

TEST(Dopri5, RejectsNonPositiveTolerance) {
  IntegratorOptions io;
  io.rtol = 0.0;
  EXPECT_THROW(integrate(Rotation{}, Vec::Zero(3), 1.0, io), PreconditionError);
}

TEST(Dopri5, BlowUpReportsStepFailure) {
  // y' = y^2 from y = 1 blows up at t = 1.
  auto f = [](const Vec& y) -> Vec { return y.cwiseProduct(y); };
  Vec p(1);
  p << 1.0;
  const Trajectory tr = integrate(f, p, 2.0, IntegratorOptions{});
  EXPECT_EQ(tr.status, TerminalStatus::StepFailure);
  EXPECT_LT(tr.times.back(), 1.0 + 1e-6);
}

TEST(BracketRoot, FindsCosineRoot) {
  // Needs g(a) < 0 <= g(b).
  auto g = [](double t) { return -std::cos(t); };
  const double r = detail::bracket_root(g, 1.0, 2.0, g(1.0), g(2.0), 1e-15);
  EXPECT_NEAR(r, 0.5 * std::numbers::pi, 1e-14);
}

TEST(ExitEvents, VerticalFieldCrossesBoxInExactTime) {
  auto up = [](const Vec&) -> Vec {
    Vec v = Vec::Zero(5);
    v[4] = 1.0;
    return v;
  };
  const BoxRegion box(5, 1.0, -1.0, 1.0);
  Gen gen(32);
  for (int i = 0; i < 20; ++i) {
    Vec p = gen.vec(5, -0.4, 0.4);
    p[4] = -1.0;
    ExitOptions eo;
    eo.integrator.h_max = 0.1;
    const TraverseRecord r = integrate_until_exit(up, box, p, 10.0, eo);
    EXPECT_EQ(r.status, TraverseStatus::Traversed);
    EXPECT_NEAR(r.transit_time, 2.0, 1e-12);
    EXPECT_LE((r.exit.head(4) - p.head(4)).norm(), 1e-13);
    EXPECT_LE(std::abs(r.face_residual), 1e-12);
  }
}

TEST(ExitEvents, TiltedFieldLeavesThroughTheSide) {
  // p(t) = p0 + t v with |x(t)| = 1 at t = (1 - 0.2) / 0.8 = 1.
  auto f = [](const Vec&) -> Vec {
    Vec v = Vec::Zero(3);
    v[0] = 0.8;
    v[2] = 0.1;
    return v;
  };
  const BoxRegion box(3, 1.0, -1.0, 1.0);
  Vec p = Vec::Zero(3);
  p[0] = 0.2;
  p[2] = -0.5;
  const TraverseRecord r = integrate_until_exit(f, box, p, 10.0, ExitOptions{});
  EXPECT_EQ(r.status, TraverseStatus::SideExit);
  EXPECT_NEAR(r.transit_time, 1.0, 1e-12);
}

TEST(ExitEvents, NoCrossingBeforeHorizonIsTrapped) {
  const Rotation f{1.0};
  auto planar = [&f](const Vec& p) -> Vec {
    Vec v = f(p);
    v[2] = 0.0;
    return v;
  };
  const BoxRegion box(3, 1.0, -1.0, 1.0);
  Vec p = Vec::Zero(3);
  p[0] = 0.5;
  const TraverseRecord r = integrate_until_exit(planar, box, p, 50.0, ExitOptions{});
  EXPECT_EQ(r.status, TraverseStatus::Trapped);
  EXPECT_DOUBLE_EQ(r.transit_time, 50.0);
}

TEST(ExitEvents, StartOutsideIsRejected) {
  const BoxRegion box(3, 1.0, -1.0, 1.0);
  Vec p = Vec::Zero(3);
  p[2] = 2.0;
  EXPECT_THROW(integrate_until_exit(Rotation{}, box, p, 1.0, ExitOptions{}), PreconditionError);
}

TEST(StatusNames, RoundTrip) {
  for (auto s : {TraverseStatus::Traversed, TraverseStatus::Trapped, TraverseStatus::SideExit,
                 TraverseStatus::BottomExit, TraverseStatus::Grazing, TraverseStatus::Failed}) {
    EXPECT_EQ(traverse_status_from_string(to_string(s)), s);
  }
}

TEST(Variational, RotationJacobianIsRotationMatrix) {
  const Rotation f{1.5};
  IntegratorOptions io;
  io.rtol = io.atol = 1e-12;
  Gen gen(33);
  for (int i = 0; i < 5; ++i) {
    const Vec p = gen.vec(3, -1.0, 1.0);
    const double T = gen.real(0.5, 3.0);
    Vec end;
    const Mat j = flow_jacobian(f, p, T, io, 1e-6, &end);
    Mat expect = Mat::Identity(3, 3);
    expect(0, 0) = expect(1, 1) = std::cos(1.5 * T);
    expect(1, 0) = std::sin(1.5 * T);
    expect(0, 1) = -std::sin(1.5 * T);
    EXPECT_LE((j - expect).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((end - rotation_exact(1.5, p, T)).norm(), 1e-10);
    EXPECT_NEAR(j.determinant(), 1.0, 1e-10);
  }
}

TEST(Variational, LinearFieldMatchesSeriesExponential) {
  Mat a(2, 2);
  a << 0.1, 0.7, -0.3, -0.2;
  auto f = [&a](const Vec& p) -> Vec { return a * p; };
  // exp(A T) by its Taylor series.
  const double T = 1.3;
  Mat e = Mat::Identity(2, 2), term = Mat::Identity(2, 2);
  for (int k = 1; k < 40; ++k) {
    term = term * a * T / double(k);
    e += term;
  }
  IntegratorOptions io;
  io.rtol = io.atol = 1e-12;
  const Mat j = flow_jacobian(f, Vec::Ones(2), T, io);
  EXPECT_LE((j - e).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(j.determinant(), std::exp(a.trace() * T), 1e-9);
}
