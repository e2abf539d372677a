#pragma once

#include <cstdint>
#include <vector>

#include "ilro/config.hpp"

namespace ilro {

/// Independent Gaussian relative mismatch on R, C and gm per stage.
struct MismatchSpec {
    double sigma_r = 0.01;
    double sigma_c = 0.01;
    double sigma_gm = 0.01;
    int n_samples = 200;
    uint64_t seed = 1;

    void validate() const;
};

struct StageDelta {
    double d_r = 0.0;   // relative delta on r_load
    double d_c = 0.0;   // relative delta on c_load
    double d_gm = 0.0;  // relative delta on gm_peak
};

/// Per-stage deltas for one sample, from counter-based streams keyed by
/// (seed, index, stage, parameter). Identical inputs give identical deltas.
std::vector<StageDelta> sample_mismatch(const MismatchSpec& spec, int n_stages,
                                        uint64_t index);

/// Applies relative deltas to a copy of the config.
OscillatorConfig apply_mismatch(const OscillatorConfig& config,
                                const std::vector<StageDelta>& deltas);

enum class MismatchSolver { TimeDomain, Phasor };

/// Per-k mismatch statistics. per_k_samples keeps one entry per sample index
/// (NaN marks unlocked samples, which are excluded from sigma).
struct MismatchStudy {
    std::vector<double> k_grid;
    std::vector<double> per_k_sigma;  // degrees, unbiased estimator
    std::vector<std::vector<double>> per_k_samples;  // degrees
    std::vector<int> per_k_unlocked;
    MismatchSolver solver = MismatchSolver::TimeDomain;
};

/// Runs the mismatch study: for each k and sample, perturbs the stages,
/// solves the locked output phases, and records the worst node's deviation
/// from the nominal locked phases (degrees, injection-anchored frame).
/// Throws when more than 5% of samples fail to lock at any k.
MismatchStudy run_mismatch_study(const OscillatorConfig& config,
                                 const MismatchSpec& spec,
                                 const std::vector<double>& k_grid,
                                 MismatchSolver solver = MismatchSolver::TimeDomain,
                                 int jobs = 1);

}  // namespace ilro
