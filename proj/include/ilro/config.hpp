#pragma once

#include <cmath>
#include <vector>

#include "ilro/errors.hpp"
#include "ilro/phasor.hpp"

namespace ilro {

/// One differential delay stage: a saturating transconductance driving a
/// parallel RC load. Cross-coupled pair and feed-forward currents are lumped
/// into the oscillator current via gm_peak and theta_vi0.
struct StageModel {
    double r_load = 0.0;       // ohms
    double c_load = 0.0;       // farads
    double gm_peak = 0.0;      // amperes, saturated oscillator-current magnitude
    double theta_vi0 = 0.0;    // radians, voltage-to-current lag offset
    double am_pm_coeff = 0.0;  // radians per unit relative amplitude

    double f_3db() const { return 1.0 / (2.0 * kPi * r_load * c_load); }

    /// theta_VI at the given amplitude ratio A/A_ref.
    double theta_vi(double amplitude_ratio) const {
        return theta_vi0 + am_pm_coeff * (amplitude_ratio - 1.0);
    }

    void validate() const;
};

/// N-stage differential ring with symmetric multi-phase injection.
struct OscillatorConfig {
    int n_stages = 0;                      // N >= 2
    std::vector<StageModel> stages;        // exactly N entries
    double injection_ratio = 0.0;          // k_inj in [0, 1)
    double f_inj = 0.0;                    // hertz
    std::vector<double> injection_phases;  // radians, nominal i*pi/N
    double a_ref = 0.5;                    // volts, reference amplitude
    double v_sat = 0.5 / 6.0;              // volts, soft-limiter knee

    void validate() const;

    bool identical_stages(double tol = 1e-12) const;
};

/// Builds the reference N-stage configuration: 500 ohm loads, free-running
/// frequency equal to f_inj (zero detuning), gm_peak consistent with the
/// steady-state amplitude a_ref.
OscillatorConfig reference_config(int n_stages = 2, double k_inj = 0.1,
                                  double f_inj = 7e9);

/// Returns a copy of `config` rescaled (via c_load) so its free-running
/// frequency equals f_fr_target. Works for mismatched stages: all c_load
/// values share one scale factor.
OscillatorConfig config_with_free_running(const OscillatorConfig& config,
                                          double f_fr_target);

}  // namespace ilro
