#pragma once

#include <vector>

#include "ilro/config.hpp"

namespace ilro {

/// Fixed-step integration settings. The step is tied to the injection period
/// (dt = 1 / (f_inj * samples_per_period)) so measurement windows always span
/// integer periods and single-bin projections are leakage-free.
struct SimSettings {
    int samples_per_period = 200;  // >= 200
    int settle_periods = 200;      // discarded injection periods
    int measure_periods = 512;     // >= 64, even
    std::vector<double> v_init;    // optional, size 2N, not identically zero

    double dt(double f_inj) const {
        return 1.0 / (f_inj * static_cast<double>(samples_per_period));
    }
    void validate(int n_stages) const;
};

/// Post-settle node voltages on the uniform time grid. Node ordering is
/// unrolled: nodes 0..N-1 are the per-stage "+" outputs, nodes N..2N-1 their
/// complements (node k+N is the complement of node k).
struct Waveforms {
    double t0 = 0.0;  // absolute time of the first stored sample
    double dt = 0.0;
    double f_inj = 0.0;
    double a_ref = 0.0;
    double phase_ref = 0.0;  // nominal phase of injection source 0
    std::vector<std::vector<double>> nodes;
    // Oscillator current into node 0 (stage + cross-couple), recorded when
    // requested; used for injection-strength calibration.
    std::vector<double> osc_current_node0;
};

enum class PhaseReportMode { DifferentialPairs, AllNodes };

/// Fundamental phases/amplitudes at f_inj, relative to the nominal phase of
/// injection source 0. drift_rate is the residual phase slope between the
/// two window halves.
struct PhaseReading {
    std::vector<double> node_phases;  // radians
    std::vector<double> amplitudes;   // volts
    double drift_rate = 0.0;          // radians / second
};

/// Free-running measurement used to scale the injected current:
/// |I_inj| = k_inj * i_osc_fund.
struct SimCalibration {
    double i_osc_fund = 0.0;    // amperes
    double f_fr_measured = 0.0;  // hertz
};

/// Integrates the ring with sinusoidal injection currents (one per stage,
/// nominal phase + per-stage error) and returns the post-settle window.
/// injection_errors must have exactly N entries. Passing a precomputed
/// calibration skips the internal free-running calibration pass.
Waveforms simulate(const OscillatorConfig& config, const SimSettings& settings,
                   const std::vector<double>& injection_errors,
                   const SimCalibration* calibration = nullptr,
                   bool record_osc_current = false);

/// Free-running pass measuring the oscillation frequency and the fundamental
/// magnitude of the lumped oscillator current.
SimCalibration calibrate_oscillator(const OscillatorConfig& config,
                                    const SimSettings& settings);

PhaseReading extract_phases(const Waveforms& w, const SimSettings& settings,
                            PhaseReportMode mode = PhaseReportMode::DifferentialPairs);

/// true iff |drift_rate| * (measure_periods / f_inj) < 0.01 rad.
bool detect_lock(const PhaseReading& reading, const SimSettings& settings,
                 double f_inj);

/// Mean period over >= 256 interpolated zero crossings, inverted. k_inj is
/// forced to zero internally.
double measure_free_running(const OscillatorConfig& config,
                            const SimSettings& settings);

/// Zero crossings (both edges) per node over the stored window.
std::vector<int> zero_crossing_counts(const Waveforms& w);

/// Locked stage output phases in the injection frame (differential pairs).
struct SimLockReading {
    bool locked = false;
    std::vector<double> stage_phases;  // N entries, radians
    std::vector<double> amplitudes;    // N entries, volts
};
SimLockReading measure_lock_phases(const OscillatorConfig& config,
                                   const SimSettings& settings,
                                   const std::vector<double>& injection_errors,
                                   const SimCalibration* calibration = nullptr);

/// Injects an error theta on injection phase 0, measures the output error
/// 2*alpha (alternating-mode projection of the stage phase deviations; the
/// output quadrature error for N = 2), and fits the slope over the grid.
struct SimSensitivity {
    double slope = 0.0;
    double intercept = 0.0;
    int n_points = 0;
};
SimSensitivity measure_sensitivity_sim(const OscillatorConfig& config,
                                       const SimSettings& settings,
                                       const std::vector<double>& theta_grid,
                                       const SimCalibration* calibration = nullptr);

}  // namespace ilro
