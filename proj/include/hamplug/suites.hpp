#pragma once

// Verification suites. Each returns one report; run_verify runs a
// selection of them and records per-suite errors as failed reports.

#include <functional>
#include <string>
#include <vector>

#include "hamplug/config.hpp"
#include "hamplug/host.hpp"
#include "hamplug/report.hpp"

namespace hamplug {

/// Reeb and Hamiltonian defining residuals for alpha_st, alpha_st / H,
/// alpha_u, omega_st and the ellipsoid K.
VerificationReport residual_suite(const Config& cfg);
/// Reeb(alpha_st) = d/dz and -Reeb(Phi^* alpha_st) = d/dz, compared exactly.
VerificationReport reeb_identity_suite(const Config& cfg);
/// dz of the solved R_u against its closed form.
VerificationReport h_iv_suite(const Config& cfg);
/// Graph of -log H in the symplectization: pushed-forward Reeb field of
/// alpha_st / H against the Hamiltonian field of e^(t - f) at level 1.
VerificationReport embedding_suite(const Config& cfg);

/// G on a grid, the G sublevel set near the torus, torus frequencies.
VerificationReport trap_profile_suite(const Config& cfg);

/// Plug field equals d/dz exactly on a shell along the boundary of B.
VerificationReport boundary_shell_suite(const Config& cfg);
/// Entry-exit matching over a grid of bottom-face entries.
VerificationReport matching_suite(const Config& cfg);
/// Trap-scan for an entry that stays in the plug up to t_max.
VerificationReport trap_existence_suite(const Config& cfg);
/// Grid certificate for dz > 0 away from the torus.
VerificationReport certificate_suite(const Config& cfg);

/// Density-Jacobian transport of Omega over time T.
VerificationReport volume_suite(const Config& cfg);
/// dz(R_u) > 0 and Omega > 0 on slices with psi(u) < 1.
VerificationReport slice_positivity_suite(const Config& cfg);

/// Flow-box chart normal form on the configured host orbit.
VerificationReport flow_box_suite(const Config& cfg);
/// Demo options from the host section of the configuration.
DemoOptions demo_options(const Config& cfg);
/// Opening of the configured host orbit by the plug.
VerificationReport host_demo_suite(const Config& cfg);

struct SuiteSelection {
  bool geometry = true;
  bool trap = true;
  bool plug = true;
  bool volume = true;
  bool host = true;
};

struct SuiteEntry {
  std::string name;
  std::string group;
  std::function<VerificationReport(const Config&)> run;
};

/// All suites in run order.
const std::vector<SuiteEntry>& suite_registry();

/// Runs the selected suites in registry order. Exceptions become failed
/// reports carrying the error message. `progress` is called after each.
std::vector<VerificationReport> run_verify(
    const Config& cfg, const SuiteSelection& selection = {},
    const std::function<void(const VerificationReport&)>& progress = {});

bool all_ok(const std::vector<VerificationReport>& reports);

}  // namespace hamplug
