#include "ilro/config.hpp"

#include <cmath>
#include <string>

#include "ilro/lock.hpp"
#include "ilro/ring_topology.hpp"

namespace ilro {

void StageModel::validate() const {
    if (!(std::isfinite(r_load) && r_load > 0.0)) {
        throw validation_error("StageModel: r_load must be > 0");
    }
    if (!(std::isfinite(c_load) && c_load > 0.0)) {
        throw validation_error("StageModel: c_load must be > 0");
    }
    if (!(std::isfinite(gm_peak) && gm_peak > 0.0)) {
        throw validation_error("StageModel: gm_peak must be > 0");
    }
    if (!std::isfinite(theta_vi0) || !std::isfinite(am_pm_coeff)) {
        throw validation_error("StageModel: non-finite phase parameter");
    }
    if (!(std::isfinite(f_3db()) && f_3db() > 0.0)) {
        throw validation_error("StageModel: f_3dB must be finite and positive");
    }
}

void OscillatorConfig::validate() const {
    if (n_stages < 2) {
        throw validation_error("OscillatorConfig: n_stages must be >= 2");
    }
    if (stages.size() != static_cast<size_t>(n_stages)) {
        throw validation_error("OscillatorConfig: stages must have exactly n_stages entries");
    }
    for (const auto& s : stages) {
        s.validate();
    }
    if (!(injection_ratio >= 0.0 && injection_ratio < 1.0)) {
        throw validation_error(
            "OscillatorConfig: injection_ratio must satisfy 0 <= k_inj < 1");
    }
    if (!(std::isfinite(f_inj) && f_inj > 0.0)) {
        throw validation_error("OscillatorConfig: f_inj must be > 0");
    }
    if (injection_phases.size() != static_cast<size_t>(n_stages)) {
        throw validation_error(
            "OscillatorConfig: injection_phases must have exactly n_stages entries");
    }
    const double spacing = kPi / static_cast<double>(n_stages);
    for (int i = 1; i < n_stages; ++i) {
        const double step = injection_phases[i] - injection_phases[i - 1];
        if (std::abs(step - spacing) > 1e-9) {
            throw validation_error(
                "OscillatorConfig: nominal injection phases must be spaced by pi/N "
                "(stage " + std::to_string(i) + ")");
        }
    }
    if (!(std::isfinite(a_ref) && a_ref > 0.0)) {
        throw validation_error("OscillatorConfig: a_ref must be > 0");
    }
    if (!(std::isfinite(v_sat) && v_sat > 0.0)) {
        throw validation_error("OscillatorConfig: v_sat must be > 0");
    }
}

bool OscillatorConfig::identical_stages(double tol) const {
    for (size_t i = 1; i < stages.size(); ++i) {
        const auto& a = stages[0];
        const auto& b = stages[i];
        if (std::abs(a.r_load - b.r_load) > tol * a.r_load ||
            std::abs(a.c_load - b.c_load) > tol * a.c_load ||
            std::abs(a.gm_peak - b.gm_peak) > tol * a.gm_peak ||
            std::abs(a.theta_vi0 - b.theta_vi0) > tol ||
            std::abs(a.am_pm_coeff - b.am_pm_coeff) > tol) {
            return false;
        }
    }
    return true;
}

OscillatorConfig reference_config(int n_stages, double k_inj, double f_inj) {
    OscillatorConfig cfg;
    cfg.n_stages = n_stages;
    cfg.injection_ratio = k_inj;
    cfg.f_inj = f_inj;
    cfg.a_ref = 0.5;
    // Knee of the saturated transconductors: linear below, constant
    // oscillator-current magnitude above.
    cfg.v_sat = cfg.a_ref / 3.0;

    const double n = static_cast<double>(n_stages);

    StageModel stage;
    stage.r_load = 500.0;
    // Free-running at f_inj: each stage contributes pi/(2N) of RC phase.
    const double f3db = f_inj / std::tan(kPi / (2.0 * n));
    stage.c_load = 1.0 / (2.0 * kPi * stage.r_load * f3db);
    // |I_osc| at the steady amplitude: a_ref * |1/R + j*2*pi*f*C|.
    stage.gm_peak = cfg.a_ref / (stage.r_load * std::cos(kPi / (2.0 * n)));
    stage.theta_vi0 = 0.0;
    stage.am_pm_coeff = 0.0;

    cfg.stages.assign(n_stages, stage);
    cfg.injection_phases.resize(n_stages);
    for (int i = 0; i < n_stages; ++i) {
        cfg.injection_phases[i] = static_cast<double>(i) * kPi / n;
    }
    cfg.validate();
    return cfg;
}

OscillatorConfig config_with_free_running(const OscillatorConfig& config,
                                          double f_fr_target) {
    if (!(std::isfinite(f_fr_target) && f_fr_target > 0.0)) {
        throw validation_error("config_with_free_running: target must be > 0");
    }
    const double f_fr_now = free_running_frequency(config);
    OscillatorConfig out = config;
    const double scale = f_fr_now / f_fr_target;  // f_fr ~ 1/c_load
    for (auto& s : out.stages) {
        s.c_load *= scale;
    }
    return out;
}

}  // namespace ilro
