#pragma once

#include <vector>

#include "ilro/config.hpp"
#include "ilro/lock.hpp"

namespace ilro {

/// Output phase response of the locked ring to an input injection phase
/// error theta applied at one injection phase.
struct ErrorPerturbation {
    double theta = 0.0;             // input error (radians)
    int n_stages = 0;
    double alpha = 0.0;             // per-node output phase shift (radians)
    double quadrature_error = 0.0;  // 2 * alpha (radians)
};

/// d(2*alpha)/d(theta) from the available estimators. `oracle` is NaN unless
/// a time-domain measurement was attached.
struct SensitivityResult {
    double implicit = 0.0;               // finite difference of the implicit solve
    double closed_form = 0.0;            // (1/N) k cos(phi0+psi)/cos(psi)
    double closed_form_rederived = 0.0;  // implicit differentiation variant
    double approx = 0.0;                 // (1/N) k cos(phi0), small-psi limit
    double oracle = 0.0;                 // time-domain slope when available
};

/// Root of the perturbed phase-balance equation
///   k * sin(phi0 - psi - theta/N + alpha) = sin(psi - 2*alpha)
/// with phi0, psi held at their unperturbed values. Always bracketed within
/// |alpha - psi/2| <= pi/4 and solved to machine residual.
double solve_alpha(double k_inj, double phi0, double psi, double theta,
                   int n_stages);

/// Wrapper over solve_alpha for a solved LockState. Requires lock.locked and
/// |theta| <= 0.5 rad.
ErrorPerturbation solve_output_error(const LockState& lock, double theta,
                                     int n_stages);

/// Closed-form sensitivity as printed: (1/N) * k * cos(phi0+psi) / cos(psi).
double sensitivity_closed_form(const LockState& lock, int n_stages);
double sensitivity_closed_form_at(double k_inj, double phi0, double psi,
                                  int n_stages);

/// Variant obtained by implicit differentiation of the phase-balance
/// equation: (2/N) * k * cos(phi0-psi) / (k * cos(phi0-psi) + 2 * cos(psi)).
/// This is the estimator the finite-difference oracle matches; downstream
/// consumers default to it.
double sensitivity_closed_form_rederived(const LockState& lock, int n_stages);
double sensitivity_closed_form_rederived_at(double k_inj, double phi0,
                                            double psi, int n_stages);

/// Small-psi approximation: (1/N) * k * cos(phi0).
double sensitivity_approx(double k_inj, double phi0, int n_stages);

/// Central finite difference of the implicit solve; the test oracle for the
/// closed forms. Requires 0 < step <= 1e-3 (default 1e-6 rad).
double sensitivity_finite_difference(const LockState& lock, int n_stages,
                                     double step = 1e-6);
double sensitivity_finite_difference_at(double k_inj, double phi0, double psi,
                                        int n_stages, double step = 1e-6);

/// All analytic estimators at one operating point; oracle is NaN.
SensitivityResult estimate_sensitivity(double k_inj, double phi0, double psi,
                                       int n_stages);

struct ZeroSensitivityResult {
    bool found = false;
    double f_opt = 0.0;      // free-running frequency of the zero crossing
    bool above_f_inj = false;
};

/// Locates the free-running frequency above f_inj at which the closed-form
/// sensitivity crosses zero, by bisection over the locked interval to 1 kHz
/// absolute tolerance. Reports found = false when no crossing exists.
ZeroSensitivityResult find_zero_sensitivity_frequency(
    const OscillatorConfig& config);

enum class SweepAxis { Phi0, FreeRunning, Theta };

struct SweepRow {
    double axis_value = 0.0;
    double phi0 = 0.0;
    double psi = 0.0;
    bool locked = false;
    SensitivityResult sens;    // phi0 / f_fr axes
    double two_alpha = 0.0;    // theta axis
    double tangent = 0.0;      // theta axis: rederived slope * theta
};

struct SweepTable {
    SweepAxis axis = SweepAxis::Phi0;
    std::vector<SweepRow> rows;
};

/// One row per grid point; rows where lock fails are flagged, not dropped.
/// Grid values are radians for Phi0/Theta and hertz for FreeRunning.
SweepTable sweep_sensitivity(const OscillatorConfig& config, SweepAxis axis,
                             const std::vector<double>& grid);

}  // namespace ilro
