#include <gtest/gtest.h>

#include <cmath>

#include "hamplug/errors.hpp"
#include "hamplug/volume.hpp"
#include "support.hpp"

using namespace hamplug;
using testing_support::Gen;

namespace {

struct Fixture {
  Dimension dim{3};
  ContactProfile profile{dim, TrapParams{}};
  PlugField plug{profile, PlugGeometry(1.0, 1.0, 0.25)};
  EvenPlugField even{plug, PsiProfile(1.0)};
};

Vec support_point(Gen& gen, const Fixture& f) {
  const double lam = f.plug.geometry().lambda();
  const double r = lam * f.profile.transverse_radius();
  Vec q = gen.vec(5, -r, r);
  q[4] = -0.5 + gen.real(-1.0, 1.0) * lam * lam * f.profile.z_half_width();
  return q;
}

}  // namespace

TEST(Psi, PlateauSupportAndMidpoint) {
  const PsiProfile psi(1.0);
  EXPECT_EQ(psi(0.0), 1.0);
  EXPECT_EQ(psi(0.125), 1.0);
  EXPECT_EQ(psi(-0.125), 1.0);
  EXPECT_EQ(psi(0.5), 0.0);
  EXPECT_EQ(psi(-0.7), 0.0);
  EXPECT_NEAR(psi(psi.half_level()), 0.5, 1e-15);
  Gen gen(81);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double u = 0.125 + 0.375 * i / 100.0;
    EXPECT_LE(psi(u), prev);
    prev = psi(u);
    const double v = gen.real(-0.49, 0.49);
    EXPECT_NEAR(psi(v), psi(-v), 0.0);
    EXPECT_NEAR(psi.derivative(v), (psi(v + 1e-7) - psi(v - 1e-7)) / 2e-7, 1e-6);
  }
  EXPECT_THROW(PsiProfile(0.0), ConfigError);
}

TEST(Density, StandardValueIsFactorial) {
  EXPECT_EQ(standard_omega_density(Dimension(3)), 2.0);
  EXPECT_EQ(standard_omega_density(Dimension(4)), 6.0);
  EXPECT_EQ(standard_omega_density(Dimension(6)), 120.0);
}

TEST(Density, EqualsFactorialOverHToTheN) {
  // alpha/h ^ (d(alpha/h))^{n-1} = h^{-n} alpha ^ (d alpha)^{n-1}.
  const Fixture f;
  Gen gen(82);
  for (int i = 0; i < 200; ++i) {
    const Vec q = support_point(gen, f);
    const double u = gen.real(-0.5, 0.5);
    const double h = f.even.family().h_u(q, u).h;
    Vec s(6);
    s.head(5) = q;
    s[5] = u;
    EXPECT_NEAR(f.even.density(s), 2.0 / (h * h * h), 1e-12);
    // Outside the psi support the form is alpha_st.
    s[5] = 0.5;
    EXPECT_EQ(f.even.density(s), 2.0);
  }
}

TEST(Family, ReebVerticalComponentMatchesEulerFormula) {
  // dz(R_u) = h_u - 1/2 sum (x d_x h_u + y d_y h_u), with the gradient
  // taken by finite differences of h_u.
  const Fixture f;
  Gen gen(83);
  for (int i = 0; i < 200; ++i) {
    const Vec q = support_point(gen, f);
    const double u = gen.real(-0.5, 0.5);
    auto h = [&](const Vec& x) { return f.even.family().h_u(x, u).h; };
    double expect = h(q);
    for (int k = 0; k < 4; ++k) {
      Vec a = q, b = q;
      a[k] += 1e-7;
      b[k] -= 1e-7;
      expect -= 0.5 * q[k] * (h(a) - h(b)) / 2e-7;
    }
    EXPECT_NEAR(f.even.family().reeb_Ru(q, u)[4], expect, 1e-6);
    EXPECT_NEAR(f.even.family().closed_form_dz(q, u), expect, 1e-6);
  }
}

TEST(EvenField, ReducesToPlugAtPlateauAndToVerticalOutside) {
  const Fixture f;
  Gen gen(84);
  for (int i = 0; i < 100; ++i) {
    Vec q = support_point(gen, f);
    if (i % 2) q = f.plug.mirror(q);
    Vec s(6);
    s.head(5) = q;
    s[5] = gen.real(-0.125, 0.125);
    const Vec v = f.even(s);
    EXPECT_LE((v.head(5) - f.plug(q)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(v[5], 0.0);
    s[5] = 0.6;
    const Vec w = f.even(s);
    EXPECT_TRUE((w.head(5).array() == unit_z(f.dim).array()).all());
  }
}

TEST(Volume, SmallSampleIsPreserved) {
  const Fixture f;
  IntegratorOptions io;
  io.rtol = io.atol = 1e-12;
  const auto samples = deformation_samples(f.even, 6, 85);
  ASSERT_EQ(samples.size(), 6u);
  const VerificationReport rep = verify_volume_preservation(f.even, samples, 1.0, io);
  EXPECT_TRUE(rep.passed) << rep.metrics.dump();
  EXPECT_EQ(deformation_samples(f.even, 6, 85), samples);
}
