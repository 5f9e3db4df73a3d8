#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hamplug/errors.hpp"
#include "hamplug/geometry.hpp"
#include "hamplug/trap.hpp"
#include "support.hpp"

using namespace hamplug;
using testing_support::Gen;

namespace {

double bump_oracle(double t) {
  const double t4 = t * t * t * t;
  return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t4)) : 0.0;
}

// h written directly from its definition, coordinate by coordinate.
double h_oracle(const TrapParams& tp, const std::vector<double>& beta, const Vec& p) {
  const int planes = static_cast<int>(beta.size());
  double bsum = 0.0, s = 0.0;
  std::vector<double> u(planes);
  for (int j = 0; j < planes; ++j) {
    u[j] = p[2 * j] * p[2 * j] + p[2 * j + 1] * p[2 * j + 1];
    bsum += beta[j];
    s += beta[j] * u[j];
  }
  const double s0 = tp.c * tp.c * bsum;
  const double phi = bump_oracle((s - s0) / tp.width_s);
  if (phi == 0.0 || s <= 0.0) return 1.0;
  double dv = 0.0;
  for (int j = 0; j < planes; ++j) {
    const double d = beta[j] * u[j] / s - beta[j] / bsum;
    dv += d * d;
  }
  const double a = bump_oracle(p[2 * planes] / tp.width_z);
  return 1.0 + tp.amplitude * a * (1.0 - tp.k_w * dv) * (s - s0) * phi / s0;
}

Vec fd_grad(const ContactProfile& prof, const Vec& p, double h = 1e-6) {
  Vec g(p.size());
  for (int i = 0; i < p.size(); ++i) {
    Vec a = p, b = p;
    a[i] += h;
    b[i] -= h;
    g[i] = (prof.value(a) - prof.value(b)) / (2.0 * h);
  }
  return g;
}

// G = H - 1/2 sum_j (x_j dH/dx_j + y_j dH/dy_j) from finite differences.
double G_oracle(const ContactProfile& prof, const Vec& p) {
  const Vec g = fd_grad(prof, p);
  double r = prof.value(p);
  for (int i = 0; i + 1 < p.size(); ++i) r -= 0.5 * p[i] * g[i];
  return r;
}

Vec near_support(Gen& gen, const ContactProfile& prof) {
  const int d = prof.dim().odd();
  Vec p = gen.vec(d, -prof.transverse_radius(), prof.transverse_radius());
  p[d - 1] = gen.real(-prof.z_half_width(), prof.z_half_width());
  return p;
}

}  // namespace

TEST(FlatBump, ValuesAndDerivative) {
  EXPECT_EQ(flat_bump(0.0), 1.0);
  EXPECT_EQ(flat_bump(1.0), 0.0);
  EXPECT_EQ(flat_bump(-1.5), 0.0);
  Gen gen(51);
  for (int i = 0; i < 200; ++i) {
    const double t = gen.real(-0.99, 0.99);
    EXPECT_NEAR(flat_bump(t), bump_oracle(t), 1e-15);
    const double fd = (flat_bump(t + 1e-7) - flat_bump(t - 1e-7)) / 2e-7;
    EXPECT_NEAR(flat_bump_derivative(t), fd, 1e-6);
  }
}

TEST(DefaultBeta, SquareRootsOfOneAndPrimes) {
  const auto b = default_beta(4);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(b[0], 1.0);
  EXPECT_DOUBLE_EQ(b[1], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(b[2], std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(b[3], std::sqrt(5.0));
}

TEST(Profile, ValueMatchesDefinitionAndGradientMatchesDifferences) {
  for (int n = 3; n <= 4; ++n) {
    const ContactProfile prof(Dimension(n), TrapParams{});
    Gen gen(52 + n);
    for (int i = 0; i < 300; ++i) {
      const Vec p = near_support(gen, prof);
      EXPECT_NEAR(prof.value(p), h_oracle(prof.params(), prof.beta(), p), 1e-14);
      EXPECT_LE((prof.gradient(p) - fd_grad(prof, p)).cwiseAbs().maxCoeff(), 1e-7);
      EXPECT_NEAR(prof.eval_G(p), G_oracle(prof, p), 1e-7);
    }
  }
}

TEST(Profile, GIsNonNegativeAndVanishesOnTheTorus) {
  const ContactProfile prof(Dimension(3), TrapParams{});
  const CliffordTorus torus(Dimension(3), prof.torus_radius());
  Gen gen(55);
  for (int i = 0; i < 2000; ++i) {
    const Vec p = near_support(gen, prof);
    EXPECT_GE(prof.eval_G(p), -1e-14);
  }
  for (int i = 0; i < 50; ++i) {
    const Vec p = torus.point({gen.real(0.0, 6.3), gen.real(0.0, 6.3)});
    EXPECT_NEAR(torus.distance(p), 0.0, 1e-15);
    EXPECT_NEAR(prof.eval_G(p), 0.0, 1e-14);
    EXPECT_NEAR(prof.gradient(p)[4], 0.0, 1e-14);
    // The Reeb field is tangent to the torus: it has no z part and
    // rotates each plane.
    const Vec r = prof.closed_form_reeb(p);
    EXPECT_NEAR(r[4], 0.0, 1e-14);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(p[2 * j] * r[2 * j] + p[2 * j + 1] * r[2 * j + 1], 0.0, 1e-14);
  }
}

TEST(Profile, ClosedFormAgreesWithGenericSolve) {
  for (int n = 3; n <= 5; ++n) {
    const ContactProfile prof(Dimension(n), TrapParams{});
    Gen gen(56 + n);
    for (int i = 0; i < 300; ++i) {
      const Vec p = near_support(gen, prof);
      const Vec solve = reeb_field(divided_contact_form(prof.dim(), p, prof.value(p), prof.gradient(p)));
      EXPECT_LE((prof.closed_form_reeb(p) - solve).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Profile, DesignFrequencies) {
  TrapParams tp;
  tp.amplitude = 0.7;
  const ContactProfile prof(Dimension(4), tp);
  const double s0 = tp.c * tp.c * (1.0 + std::sqrt(2.0) + std::sqrt(3.0));
  EXPECT_NEAR(prof.s0(), s0, 1e-15);
  const auto f = prof.design_frequencies();
  ASSERT_EQ(f.size(), 3u);
  EXPECT_NEAR(f[0], 2.0 * 0.7 / s0, 1e-14);
  EXPECT_NEAR(f[2], 2.0 * 0.7 * std::sqrt(3.0) / s0, 1e-14);
}

TEST(Profile, MeasuredTorusFrequenciesMatchDesign) {
  const ContactProfile prof(Dimension(3), TrapParams{});
  const FrequencyMeasurement m = torus_frequencies(prof, {0.3, 1.1}, 50.0);
  EXPECT_LE(m.max_relative_error, 1e-8);
  EXPECT_LE(m.max_torus_distance, 1e-8);
}

TEST(Profile, IdentityAndOutsideSupportAreExact) {
  TrapParams tp;
  tp.amplitude = 0.0;
  const ContactProfile id(Dimension(3), tp);
  EXPECT_TRUE(id.is_identity());
  const ContactProfile prof(Dimension(3), TrapParams{});
  Gen gen(60);
  for (int i = 0; i < 100; ++i) {
    const Vec p = near_support(gen, prof);
    EXPECT_EQ(id.value(p), 1.0);
    Vec far = p;
    far[4] = prof.z_half_width() * 1.01;
    EXPECT_EQ(prof.value(far), 1.0);
    EXPECT_TRUE((prof.closed_form_reeb(far).array() == unit_z(prof.dim()).array()).all());
  }
}

TEST(Profile, InvalidParametersNameTheKey) {
  const auto expect_key = [](TrapParams tp, const std::string& key) {
    try {
      ContactProfile(Dimension(3), tp);
      ADD_FAILURE() << key;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
    }
  };
  TrapParams tp;
  tp.c = -1.0;
  expect_key(tp, "trap.c");
  tp = {};
  tp.amplitude = 1.5;
  expect_key(tp, "trap.amplitude");
  tp = {};
  tp.k_w = 0.6;
  expect_key(tp, "trap.k_w");
  tp = {};
  tp.beta = {1.0};
  expect_key(tp, "trap.beta");
}

TEST(PlacementTest, RoundTripAndGradient) {
  const Dimension dim(3);
  const ContactProfile prof(dim, TrapParams{});
  const Placement pl{0.3, -0.2};
  Gen gen(61);
  for (int i = 0; i < 100; ++i) {
    const Vec q = gen.vec(5, -0.2, 0.2);
    EXPECT_LE((pl.from_profile(dim, pl.to_profile(dim, q)) - q).cwiseAbs().maxCoeff(), 1e-15);
    auto placed = [&](const Vec& x) { return prof.value(pl.to_profile(dim, x)); };
    Vec fd(5);
    for (int k = 0; k < 5; ++k) {
      Vec a = q, b = q;
      a[k] += 1e-7;
      b[k] -= 1e-7;
      fd[k] = (placed(a) - placed(b)) / 2e-7;
    }
    const Vec g = pl.placed_gradient(dim, prof.gradient(pl.to_profile(dim, q)));
    EXPECT_LE((g - fd).cwiseAbs().maxCoeff(), 1e-5 * (1.0 + fd.cwiseAbs().maxCoeff()));
  }
}

TEST(TrapFieldTest, SolveAndClosedFormPathsAgree) {
  const Dimension dim(3);
  const ContactProfile prof(dim, TrapParams{});
  const Placement pl{0.25, 0.1};
  const TrapField solve(prof, pl, ReebPath::Solve), closed(prof, pl, ReebPath::ClosedForm);
  Gen gen(62);
  for (int i = 0; i < 200; ++i) {
    Vec q = gen.vec(5, -0.25 * prof.transverse_radius(), 0.25 * prof.transverse_radius());
    q[4] = 0.1 + gen.real(-1.0, 1.0) * 0.0625 * prof.z_half_width();
    const Vec a = solve(q), b = closed(q);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(solve.form(q).alpha(a), 1.0, 1e-12);
  }
}
