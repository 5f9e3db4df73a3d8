#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hamplug/errors.hpp"
#include "hamplug/host.hpp"
#include "support.hpp"

using namespace hamplug;
using testing_support::Gen;

namespace {

EllipsoidHost make_host() { return EllipsoidHost(prime_root_coefficients(3)); }

Vec random_chart(Gen& gen, const FlowBoxChart& chart) {
  const int m = chart.chart_dim() - 1;
  Vec c(chart.chart_dim());
  do {
    c.head(m) = gen.vec(m, -chart.delta(), chart.delta());
  } while (c.head(m).norm() > chart.delta());
  c[m] = gen.real(-chart.eps(), chart.eps());
  return c;
}

TrapParams identity_params() {
  TrapParams tp;
  tp.amplitude = 0.0;
  return tp;
}

}  // namespace

TEST(Host, PrimeRootCoefficients) {
  const auto a = prime_root_coefficients(3);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_DOUBLE_EQ(a[0], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(a[1], std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(a[2], std::sqrt(5.0));
  EXPECT_THROW(EllipsoidHost({1.0, -1.0}), ConfigError);
}

TEST(Host, FieldIsHamiltonianAndGeneratesTheClosedFormFlow) {
  const EllipsoidHost host = make_host();
  Gen gen(91);
  for (int i = 0; i < 100; ++i) {
    const Vec p = gen.vec(6, -1.0, 1.0);
    const Vec x = host.field(p);
    EXPECT_LE((x - host.field_by_solve(p)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(host.dK(p)(x), 0.0, 1e-13);
    const Vec fd = (host.flow(p, 1e-6) - host.flow(p, -1e-6)) / 2e-6;
    EXPECT_LE((x - fd).cwiseAbs().maxCoeff(), 1e-8);
  }
  IntegratorOptions io;
  io.rtol = io.atol = 1e-12;
  const Vec p = gen.vec(6, -0.5, 0.5);
  const Trajectory tr = integrate(host, p, 7.0, io);
  EXPECT_LE((tr.states.back() - host.flow(p, 7.0)).norm(), 1e-9);
}

TEST(Host, PeriodicOrbitsLieOnTheLevelSetAndClose) {
  const EllipsoidHost host = make_host();
  for (int j = 1; j <= 2; ++j) {
    const PeriodicOrbit o = periodic_orbit(host, j);
    EXPECT_NEAR(host.K(o.base_point), 1.0, 1e-15);
    EXPECT_NEAR(o.period, std::numbers::pi / host.coefficients()[j - 1], 1e-15);
    EXPECT_LE((o.point(host, o.period) - o.base_point).norm(), 1e-14);
    EXPECT_GT((o.point(host, 0.5 * o.period) - o.base_point).norm(), 1.0);
    EXPECT_NEAR(measure_return_time(host, j), o.period, 1e-9);
  }
  // The two orbits live in different planes.
  const PeriodicOrbit a = periodic_orbit(host, 1), b = periodic_orbit(host, 2);
  for (int k = 0; k < 20; ++k) {
    const double d = (a.point(host, 0.05 * k) - b.point(host, 0.07 * k)).norm();
    EXPECT_NEAR(d, std::hypot(a.radius, b.radius), 1e-12);
  }
  EXPECT_THROW(periodic_orbit(host, 4), PreconditionError);
}

TEST(Chart, MapsIntoTheLevelSetAndRoundTrips) {
  const EllipsoidHost host = make_host();
  Vec off = Vec::Zero(4);
  off[0] = 0.05;
  const FlowBoxChart chart(host, 1, 0.4, 0.5, off);
  EXPECT_LE((chart.base_point() - periodic_orbit(host, 1).base_point).norm(), 1e-15);
  Gen gen(92);
  for (int i = 0; i < 200; ++i) {
    const Vec c = random_chart(gen, chart);
    const Vec p = chart.map(c);
    EXPECT_NEAR(host.K(p), 1.0, 1e-14);
    EXPECT_LE((chart.raw_inverse(p) - c).cwiseAbs().maxCoeff(), 1e-12);
    const auto back = chart.inverse(p);
    ASSERT_TRUE(back.has_value());
    EXPECT_LE((*back - c).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_FALSE(chart.inverse(periodic_orbit(host, 2).base_point).has_value());
  EXPECT_NO_THROW(chart.check_injective(200, 93));
}

TEST(Chart, JacobianPushforwardAndSymplecticPullback) {
  const EllipsoidHost host = make_host();
  const FlowBoxChart chart(host, 1, 0.4, 0.5, Vec::Zero(4));
  Gen gen(94);
  for (int i = 0; i < 50; ++i) {
    const Vec c = random_chart(gen, chart) * 0.9;
    Mat fd(6, 5);
    for (int k = 0; k < 5; ++k) {
      Vec a = c, b = c;
      a[k] += 1e-6;
      b[k] -= 1e-6;
      fd.col(k) = (chart.map(a) - chart.map(b)) / 2e-6;
    }
    const Mat j = chart.jacobian(c);
    EXPECT_LE((j - fd).cwiseAbs().maxCoeff(), 1e-8);
    const Vec v = gen.vec(5, -1.0, 1.0);
    EXPECT_LE((chart.pushforward(c, v) - j * v).cwiseAbs().maxCoeff(), 1e-13);
    // The chart z-direction is the host field.
    EXPECT_LE((j.col(4) - host.field(chart.map(c))).cwiseAbs().maxCoeff(), 1e-13);
    // The host flow is symplectic, so the pulled-back form does not depend on z.
    Vec c0 = c;
    c0[4] = 0.0;
    EXPECT_LE((chart.pulled_back_omega(c) - chart.pulled_back_omega(c0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Chart, RejectsTallBoxes) {
  const EllipsoidHost host = make_host();
  EXPECT_THROW(FlowBoxChart(host, 1, 0.4, 1.2, Vec::Zero(4)), EmbeddingFailure);
  EXPECT_THROW(FlowBoxChart(host, 1, 0.4, 0.5, Vec::Zero(5)), DimensionMismatch);
}

TEST(FlowBox, ReportPasses) {
  const EllipsoidHost host = make_host();
  const FlowBoxChart chart(host, 1, 0.4, 0.5, Vec::Zero(4));
  const VerificationReport rep = verify_flow_box(chart, 100, 95);
  EXPECT_TRUE(rep.passed) << rep.metrics.dump();
}

TEST(Composite, TrivialPlugReproducesTheHostFlow) {
  const EllipsoidHost host = make_host();
  const FlowBoxChart chart(host, 1, 0.4, 0.5, Vec::Zero(4));
  const ContactProfile id(Dimension(3), identity_params());
  const PlugField plug(id, PlugGeometry(0.4, 0.5, 0.1));
  const CompositeField comp(host, chart, plug);
  Gen gen(96);
  for (int i = 0; i < 100; ++i) {
    const Vec p = chart.map(random_chart(gen, chart));
    EXPECT_LE((comp(p) - host.field(p)).cwiseAbs().maxCoeff(), 1e-12);
  }
  IntegratorOptions io;
  io.rtol = io.atol = 1e-12;
  io.h_max = 0.05;
  const Vec p0 = host.flow(periodic_orbit(host, 1).base_point, -1.0);
  const Trajectory tr = integrate(comp, p0, 5.0, io);
  EXPECT_LE((tr.states.back() - host.flow(p0, 5.0)).norm(), 1e-8);
}

TEST(Composite, HostFieldOutsideTheChartAndContinuousAcrossItsBoundary) {
  const EllipsoidHost host = make_host();
  const FlowBoxChart chart(host, 1, 0.4, 0.5, Vec::Zero(4));
  const ContactProfile prof(Dimension(3), TrapParams{});
  const PlugField plug(prof, PlugGeometry(0.4, 0.5, PlugGeometry::max_lambda(prof, 0.4, 0.5)));
  const CompositeField comp(host, chart, plug);
  Gen gen(97);
  for (int i = 0; i < 100; ++i) {
    Vec p = gen.vec(6, -1.0, 1.0);
    p /= std::sqrt(host.K(p));
    const Vec c = chart.raw_inverse(p);
    if (chart.in_domain(c)) continue;
    EXPECT_TRUE((comp(p).array() == host.field(p).array()).all());
  }
  // Just inside and just outside the top and side faces.
  for (int i = 0; i < 50; ++i) {
    Vec c = random_chart(gen, chart);
    c[4] = i % 2 ? 0.5 : -0.5;
    const Vec in = comp(chart.map(c * (1.0 - 1e-9))), out = comp(chart.map(c * (1.0 + 1e-9)));
    EXPECT_LE((in - out).cwiseAbs().maxCoeff(), 1e-7);
    Vec s = random_chart(gen, chart);
    s.head(4) *= 0.4 / s.head(4).norm();
    const Vec sin = comp(chart.map(Vec(s * (1.0 - 1e-9)))), sout = comp(chart.map(Vec(s * (1.0 + 1e-9))));
    EXPECT_LE((sin - sout).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Demo, IdentityProfileReturnsToTheOrbit) {
  const EllipsoidHost host = make_host();
  const ContactProfile id(Dimension(3), identity_params());
  DemoOptions o;
  o.t_post = 20.0;
  o.nearby = 5;
  const VerificationReport rep = demo_open_orbit(host, id, o);
  EXPECT_FALSE(rep.passed);
  EXPECT_TRUE(rep.expected_fail);
  EXPECT_TRUE(rep.ok());
  EXPECT_TRUE(rep.metrics["a_passed"].get<bool>());
  EXPECT_FALSE(rep.metrics["b_passed"].get<bool>());
  EXPECT_LE(rep.metrics["b_min_return_distance"].get<double>(), 1e-6);
  EXPECT_TRUE(rep.metrics["c_passed"].get<bool>());
  EXPECT_TRUE(rep.metrics["d_passed"].get<bool>());
}
