#include <gtest/gtest.h>

#include <cmath>

#include "hamplug/exterior.hpp"
#include "support.hpp"

using namespace hamplug;
using testing_support::Gen;

namespace {

// Parity of the permutation that sorts the concatenation of the index
// lists, counted by pairwise inversions.
int oracle_sign(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> all = a;
  all.insert(all.end(), b.begin(), b.end());
  int inv = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) inv += all[i] > all[j];
  }
  return inv % 2 ? -1 : 1;
}

Form::Mask mask_of(const std::vector<int>& idx) {
  Form::Mask m = 0;
  for (int i : idx) m |= Form::Mask(1) << i;
  return m;
}

}  // namespace

TEST(Exterior, WedgeSignMatchesInversionCount) {
  const std::vector<std::vector<int>> sets = {{0}, {1}, {2, 4}, {0, 3}, {1, 5, 6}, {3}};
  for (const auto& a : sets) {
    for (const auto& b : sets) {
      if (mask_of(a) & mask_of(b)) continue;
      EXPECT_EQ(wedge_sign(mask_of(a), mask_of(b)), oracle_sign(a, b));
    }
  }
}

TEST(Exterior, OneFormsAnticommute) {
  Gen gen(41);
  for (int i = 0; i < 20; ++i) {
    const Form a = Form::one_form(Covector{gen.vec(5, -1.0, 1.0)});
    const Form b = Form::one_form(Covector{gen.vec(5, -1.0, 1.0)});
    const Form ab = a.wedge(b), ba = b.wedge(a);
    for (const auto& [m, c] : ab.terms()) {
      const auto it = ba.terms().find(m);
      const double other = it == ba.terms().end() ? 0.0 : it->second;
      EXPECT_NEAR(c, -other, 1e-14);
    }
    const Form aa = a.wedge(a);
    for (const auto& [m, c] : aa.terms()) EXPECT_NEAR(c, 0.0, 1e-15);
  }
}

TEST(Exterior, TwoFormMatchesBilinearForm) {
  // (a ^ b)(u, v) = a(u) b(v) - a(v) b(u); compare against add_wedge.
  Gen gen(42);
  const Vec a = gen.vec(4, -1.0, 1.0), b = gen.vec(4, -1.0, 1.0);
  BilinearForm m(4);
  m.add_wedge(a, b);
  const Form f = Form::two_form(m);
  const Form g = Form::one_form(Covector{a}).wedge(Form::one_form(Covector{b}));
  for (const auto& [mask, c] : g.terms()) {
    EXPECT_NEAR(f.terms().at(mask), c, 1e-14);
  }
}

TEST(Exterior, StandardVolumeIsFactorial) {
  // alpha_st ^ (d alpha_st)^{n-1} on (x_1, y_1, ..., z) equals (n-1)!.
  for (int n = 3; n <= 5; ++n) {
    const Dimension dim(n);
    Gen gen(43 + n);
    const Vec p = gen.vec(dim.odd(), -1.0, 1.0);
    const ContactFormValue f = standard_contact_form(dim, p);
    const Form vol = Form::one_form(f.alpha).wedge(Form::two_form(f.dalpha).power(n - 1));
    EXPECT_NEAR(vol.top_coefficient(), std::tgamma(double(n)), 1e-12);
  }
}

TEST(Exterior, DeterminantOfOneForms) {
  // e^0 ^ ... ^ e^{d-1} coefficient of a_1 ^ ... ^ a_d is det[a_i(e_j)].
  Gen gen(47);
  for (int d = 2; d <= 6; ++d) {
    Mat m(d, d);
    std::vector<Vec> rows;
    for (int i = 0; i < d; ++i) rows.push_back(gen.vec(d, -1.0, 1.0));
    Form acc = Form::one_form(Covector{rows[0]});
    for (int i = 1; i < d; ++i) acc = acc.wedge(Form::one_form(Covector{rows[i]}));
    for (int i = 0; i < d; ++i) m.row(i) = rows[i].transpose();
    EXPECT_NEAR(acc.top_coefficient(), m.determinant(), 1e-12);
  }
}

TEST(Exterior, CoordinateFormsWedgeToVolume) {
  Form v = Form::coordinate(3, 0);
  v = v.wedge(Form::coordinate(3, 1)).wedge(Form::coordinate(3, 2));
  EXPECT_EQ(v.top_coefficient(), 1.0);
  Form r = Form::coordinate(3, 2).wedge(Form::coordinate(3, 1)).wedge(Form::coordinate(3, 0));
  EXPECT_EQ(r.top_coefficient(), -1.0);
}
