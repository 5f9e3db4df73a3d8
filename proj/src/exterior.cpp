#include "hamplug/exterior.hpp"

#include <bit>

namespace hamplug {

Form Form::one_form(const Covector& a) {
  Form f(static_cast<int>(a.coeffs.size()));
  for (int i = 0; i < f.dim_; ++i) f.add(Mask{1} << i, a.coeffs[i]);
  return f;
}

Form Form::two_form(const BilinearForm& m) {
  Form f(m.size());
  for (int i = 0; i < f.dim_; ++i) {
    for (int j = i + 1; j < f.dim_; ++j) f.add((Mask{1} << i) | (Mask{1} << j), m.matrix()(i, j));
  }
  return f;
}

Form Form::coordinate(int dim, int i) {
  Form f(dim);
  f.add(Mask{1} << i, 1.0);
  return f;
}

void Form::add(Mask mask, double c) {
  if (c == 0.0) return;
  terms_[mask] += c;
}

int wedge_sign(Form::Mask a, Form::Mask b) {
  // Count pairs (i in a, j in b) with i > j.
  int inversions = 0;
  while (b) {
    const int j = std::countr_zero(b);
    b &= b - 1;
    inversions += std::popcount(a >> (j + 1));
  }
  return inversions % 2 ? -1 : 1;
}

Form Form::wedge(const Form& other) const {
  if (other.dim_ != dim_) throw DimensionMismatch("wedge of forms on different spaces");
  Form out(dim_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) {
      if (ma & mb) continue;
      out.add(ma | mb, wedge_sign(ma, mb) * ca * cb);
    }
  }
  return out;
}

Form Form::power(int k) const {
  Form out(dim_);
  out.add(0, 1.0);
  for (int i = 0; i < k; ++i) out = out.wedge(*this);
  return out;
}

double Form::top_coefficient() const {
  const Mask full = dim_ >= 32 ? ~Mask{0} : (Mask{1} << dim_) - 1;
  const auto it = terms_.find(full);
  return it == terms_.end() ? 0.0 : it->second;
}

}  // namespace hamplug
