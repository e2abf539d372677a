#pragma once

#include <vector>

#include "ilro/config.hpp"
#include "ilro/phasor.hpp"

namespace ilro {

/// Solved injection-locked steady state. When locked = false, phi0 and psi
/// are NaN and node_phasors is empty.
struct LockState {
    double phi0 = 0.0;  // angle of I_inj relative to I_osc (radians)
    double psi = 0.0;   // angle of I_t relative to I_osc (radians)
    double f_fr = 0.0;  // free-running frequency (hertz)
    double f_inj = 0.0;
    double k_inj = 0.0;
    bool locked = false;
    std::vector<Phasor> node_phasors;  // per-stage output voltage phasors
};

struct FrequencyInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Total phase contribution of one stage at frequency f:
/// pi - theta_VI(amplitude_ratio) - arctan(f / f_3dB).
double stage_phase_response(double f, const StageModel& stage,
                            double amplitude_ratio);

/// Angle of I_t = I_osc + I_inj relative to I_osc for injection angle phi0:
/// atan2(k sin(phi0), 1 + k cos(phi0)). Total over 0 <= k < 1.
double psi_from_geometry(double k_inj, double phi0);

/// d psi / d phi0 for the same geometry.
double psi_slope(double k_inj, double phi0);

/// Phase deficit of the loop at frequency f relative to closure; zero at the
/// free-running frequency. Positive above f_fr.
double loop_phase_residual(const OscillatorConfig& config, double f,
                           double amplitude_ratio = 1.0);

/// Free-running frequency: root of the loop phase residual, bracketed in
/// (0, 100 * f_3dB), |residual| < 1e-12 rad.
double free_running_frequency(const OscillatorConfig& config);

/// Per-stage total-current angle required to sustain lock at f_inj; the
/// stable lock satisfies psi(phi0) = required value.
double required_psi(const OscillatorConfig& config, double amplitude_ratio = 1.0);

/// Solves the injection-locked steady state on the stable branch
/// (d psi / d phi0 > 0). Unlocked detuning yields locked = false.
LockState solve_lock_state(const OscillatorConfig& config);

/// Injection-frequency interval (at fixed stages) over which the oscillator
/// locks; endpoints by bisection to relative tolerance 1e-9. k_inj = 0 yields
/// the degenerate interval {f at which psi_req = 0}.
FrequencyInterval locking_range_f_inj(const OscillatorConfig& config);

/// Free-running-frequency interval (at fixed f_inj) over which the oscillator
/// locks; same tolerances as locking_range_f_inj.
FrequencyInterval locking_range_f_fr(const OscillatorConfig& config);

/// Per-stage locked output phases for a possibly mismatched ring, in the
/// injection reference frame. Returns locked = false when the per-stage
/// phase balance has no stable solution.
struct MismatchedLockResult {
    bool locked = false;
    std::vector<double> node_phases;  // N stage output phases (radians)
};
MismatchedLockResult solve_lock_phases(const OscillatorConfig& config);

}  // namespace ilro
