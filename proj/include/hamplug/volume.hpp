#pragma once

// The even-dimensional extension: the family alpha_u = alpha_st / H_u with
// H_u = psi(u) H + 1 - psi(u) on the slices of B x [-eps, eps], and the
// volume form Omega = alpha_u ^ (d alpha_u)^{n-1} ^ du.

#include <vector>

#include "hamplug/plug.hpp"
#include "hamplug/report.hpp"

namespace hamplug {

/// Smooth plateau: psi = 1 for |u| <= eps/8, psi = 0 for |u| >= eps/2,
/// monotone in between (smooth step f(t) / (f(t) + f(1 - t)), f = exp(-1/t)).
class PsiProfile {
 public:
  explicit PsiProfile(double eps);

  double eps() const { return eps_; }
  double plateau() const { return plateau_; }
  double support() const { return support_; }

  double operator()(double u) const;
  double derivative(double u) const;
  /// The u >= 0 with psi(u) = 1/2.
  double half_level() const { return 0.5 * (plateau_ + support_); }

 private:
  double eps_;
  double plateau_;
  double support_;
};

/// alpha_u on the B+ side in placed coordinates (identity placement gives
/// the unplaced profile coordinates).
class FormFamily {
 public:
  FormFamily(const ContactProfile& profile, PsiProfile psi, Placement placement = {});

  const Dimension& dim() const { return profile_->dim(); }
  const PsiProfile& psi() const { return psi_; }
  const Placement& placement() const { return placement_; }

  /// H_u at q and its q-gradient.
  ProfileValue h_u(const Vec& q, double u) const;
  ContactFormValue form(const Vec& q, double u) const;
  bool short_circuits(const Vec& q, double u) const;

  /// Reeb field of alpha_u on the slice through u (generic solver).
  Vec reeb_Ru(const Vec& q, double u) const;
  /// psi H - (psi/2) sum (x H_x + y H_y) + 1 - psi.
  double closed_form_dz(const Vec& q, double u) const;

  /// Omega on the ordered standard basis (x_1, y_1, ..., z, u).
  double omega_density(const Vec& q, double u) const;

 private:
  const ContactProfile* profile_;
  PsiProfile psi_;
  Placement placement_;
};

/// Omega density of alpha_st: (n-1)! in the fixed coordinate order.
double standard_omega_density(const Dimension& dim);

/// Product of the plug with the u-interval: slice-wise Reeb fields of
/// alpha_u in B+, mirrored and reversed in B-, with u' = 0.
class EvenPlugField {
 public:
  EvenPlugField(const PlugField& plug, PsiProfile psi);

  const Dimension& dim() const { return plug_->dim(); }
  const PlugField& plug() const { return *plug_; }
  const FormFamily& family() const { return family_; }

  /// State (x_1, y_1, ..., z, u) of length 2n.
  Vec operator()(const Vec& s) const;
  Vec at(const Vec& s) const;
  /// Omega density at s, transported through the mirror on the B- side.
  double density(const Vec& s) const;

 private:
  const PlugField* plug_;
  FormFamily family_;
};

struct VolumeSample {
  Vec start;
  double ratio_error = 0.0;
};

/// |rho(phi_T(p)) det(D phi_T(p)) / rho(p) - 1| for every sample; passes
/// iff the maximum is at most threshold.
VerificationReport verify_volume_preservation(const EvenPlugField& field,
                                              const std::vector<Vec>& samples, double T,
                                              const IntegratorOptions& opts,
                                              double threshold = 1e-6, double fd_step = 1e-7);

/// Seeded samples (q, u) with q in the placed B+ support and |u| < eps/2.
std::vector<Vec> deformation_samples(const EvenPlugField& field, int count, std::uint64_t seed);

}  // namespace hamplug
