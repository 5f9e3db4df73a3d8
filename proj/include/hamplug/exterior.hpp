#pragma once

// Exterior algebra on R^d for small d. A k-form is a sparse map from
// increasing index sets (bitmasks) to coefficients of e^{i_1} ^ ... ^ e^{i_k}.

#include <cstdint>
#include <map>

#include "hamplug/geometry.hpp"

namespace hamplug {

class Form {
 public:
  using Mask = std::uint32_t;

  explicit Form(int dim) : dim_(dim) {}

  static Form one_form(const Covector& a);
  static Form two_form(const BilinearForm& m);
  /// du for the coordinate with index i.
  static Form coordinate(int dim, int i);

  int dim() const { return dim_; }
  const std::map<Mask, double>& terms() const { return terms_; }
  void add(Mask mask, double c);

  Form wedge(const Form& other) const;
  Form power(int k) const;

  /// Coefficient of e^0 ^ ... ^ e^{d-1}, i.e. the value on the ordered
  /// standard basis.
  double top_coefficient() const;

 private:
  int dim_;
  std::map<Mask, double> terms_;
};

/// Sign of e^I ^ e^J relative to e^{I u J} for disjoint I, J.
int wedge_sign(Form::Mask a, Form::Mask b);

}  // namespace hamplug
