#include "ilro/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ilro/lock.hpp"
#include "ilro/parallel.hpp"
#include "ilro/rng.hpp"
#include "ilro/timedomain.hpp"

namespace ilro {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Keeps perturbed parameters physical even in extreme tails.
double clamp_factor(double f) { return std::max(f, 0.05); }

double worst_node_error_deg(const std::vector<double>& phases,
                            const std::vector<double>& nominal) {
    double worst = 0.0;
    for (size_t i = 0; i < phases.size(); ++i) {
        const double err = std::remainder(phases[i] - nominal[i], 2.0 * kPi);
        worst = std::max(worst, std::abs(err));
    }
    return rad_to_deg(worst);
}

}  // namespace

void MismatchSpec::validate() const {
    auto check_sigma = [](double s, const char* name) {
        if (!(s >= 0.0 && s <= 0.2)) {
            throw validation_error(std::string("MismatchSpec: ") + name +
                                   " must lie in [0, 0.2]");
        }
    };
    check_sigma(sigma_r, "sigma_r");
    check_sigma(sigma_c, "sigma_c");
    check_sigma(sigma_gm, "sigma_gm");
    if (n_samples < 2) {
        throw validation_error("MismatchSpec: n_samples must be >= 2");
    }
}

std::vector<StageDelta> sample_mismatch(const MismatchSpec& spec, int n_stages,
                                        uint64_t index) {
    spec.validate();
    if (index >= static_cast<uint64_t>(spec.n_samples)) {
        throw validation_error("sample_mismatch: index out of range");
    }
    std::vector<StageDelta> deltas(n_stages);
    for (int s = 0; s < n_stages; ++s) {
        const uint32_t stage = static_cast<uint32_t>(s);
        deltas[s].d_r = spec.sigma_r == 0.0
                            ? 0.0
                            : spec.sigma_r * gaussian_draw(spec.seed, index, stage, 0);
        deltas[s].d_c = spec.sigma_c == 0.0
                            ? 0.0
                            : spec.sigma_c * gaussian_draw(spec.seed, index, stage, 1);
        deltas[s].d_gm = spec.sigma_gm == 0.0
                             ? 0.0
                             : spec.sigma_gm * gaussian_draw(spec.seed, index, stage, 2);
    }
    return deltas;
}

OscillatorConfig apply_mismatch(const OscillatorConfig& config,
                                const std::vector<StageDelta>& deltas) {
    if (deltas.size() != config.stages.size()) {
        throw validation_error("apply_mismatch: delta count mismatch");
    }
    OscillatorConfig out = config;
    for (size_t s = 0; s < deltas.size(); ++s) {
        out.stages[s].r_load *= clamp_factor(1.0 + deltas[s].d_r);
        out.stages[s].c_load *= clamp_factor(1.0 + deltas[s].d_c);
        out.stages[s].gm_peak *= clamp_factor(1.0 + deltas[s].d_gm);
    }
    return out;
}

MismatchStudy run_mismatch_study(const OscillatorConfig& config,
                                 const MismatchSpec& spec,
                                 const std::vector<double>& k_grid,
                                 MismatchSolver solver, int jobs) {
    config.validate();
    spec.validate();
    if (k_grid.empty()) {
        throw validation_error("run_mismatch_study: empty k grid");
    }
    for (double k : k_grid) {
        if (!(k > 0.0 && k < 1.0)) {
            throw validation_error("run_mismatch_study: k values must lie in (0, 1)");
        }
    }

    MismatchStudy study;
    study.k_grid = k_grid;
    study.solver = solver;
    study.per_k_sigma.resize(k_grid.size());
    study.per_k_unlocked.assign(k_grid.size(), 0);
    study.per_k_samples.assign(k_grid.size(),
                               std::vector<double>(spec.n_samples, kNaN));

    // MC settings: short leakage-free window; lock transients die well inside
    // the settle window at the k values of interest.
    SimSettings sim;
    sim.settle_periods = 200;
    sim.measure_periods = 64;

    SimCalibration cal;
    if (solver == MismatchSolver::TimeDomain) {
        cal = calibrate_oscillator(config, sim);
    }

    for (size_t ki = 0; ki < k_grid.size(); ++ki) {
        OscillatorConfig cfg_k = config;
        cfg_k.injection_ratio = k_grid[ki];

        // Nominal (zero-mismatch) locked phases anchor the error metric.
        std::vector<double> nominal;
        if (solver == MismatchSolver::Phasor) {
            const MismatchedLockResult nom = solve_lock_phases(cfg_k);
            if (!nom.locked) {
                throw numerical_error(
                    "run_mismatch_study: nominal config does not lock at k = " +
                    std::to_string(k_grid[ki]));
            }
            nominal = nom.node_phases;
        } else {
            const std::vector<double> no_err(config.n_stages, 0.0);
            const SimLockReading nom =
                measure_lock_phases(cfg_k, sim, no_err, &cal);
            if (!nom.locked) {
                throw numerical_error(
                    "run_mismatch_study: nominal config does not lock at k = " +
                    std::to_string(k_grid[ki]));
            }
            nominal = nom.stage_phases;
        }

        auto& samples = study.per_k_samples[ki];
        parallel_for(spec.n_samples, jobs, [&](int idx) {
            const auto deltas = sample_mismatch(spec, config.n_stages,
                                                static_cast<uint64_t>(idx));
            const OscillatorConfig perturbed = apply_mismatch(cfg_k, deltas);
            if (solver == MismatchSolver::Phasor) {
                const MismatchedLockResult res = solve_lock_phases(perturbed);
                if (res.locked) {
                    samples[idx] = worst_node_error_deg(res.node_phases, nominal);
                }
            } else {
                try {
                    const std::vector<double> no_err(config.n_stages, 0.0);
                    const SimLockReading res =
                        measure_lock_phases(perturbed, sim, no_err, &cal);
                    if (res.locked) {
                        samples[idx] =
                            worst_node_error_deg(res.stage_phases, nominal);
                    }
                } catch (const numerical_error&) {
                    // divergent / dead sample counts as unlocked
                }
            }
        });

        int unlocked = 0;
        double sum = 0.0;
        int locked = 0;
        for (double v : samples) {
            if (std::isnan(v)) {
                ++unlocked;
            } else {
                sum += v;
                ++locked;
            }
        }
        study.per_k_unlocked[ki] = unlocked;
        if (unlocked > spec.n_samples / 20) {
            throw numerical_error(
                "run_mismatch_study: more than 5% unlocked samples at k = " +
                std::to_string(k_grid[ki]) + " (" + std::to_string(unlocked) +
                " of " + std::to_string(spec.n_samples) + ")");
        }
        if (locked < 2) {
            throw numerical_error("run_mismatch_study: too few locked samples");
        }
        const double mean = sum / locked;
        double ss = 0.0;
        for (double v : samples) {
            if (!std::isnan(v)) ss += (v - mean) * (v - mean);
        }
        study.per_k_sigma[ki] = std::sqrt(ss / (locked - 1));
    }
    return study;
}

}  // namespace ilro
