#include "ilro/lock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ilro/rootfind.hpp"

namespace ilro {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double amplitude_ratio_at(double k, double phi0) {
    // |I_t| / |I_osc| for the solved geometry; drives the AM-PM term.
    return std::sqrt(1.0 + 2.0 * k * std::cos(phi0) + k * k);
}

// Effective stage angle offset contributed by the ring topology itself; the
// per-stage step bookkeeping in solve_lock_phases runs in these coordinates
// so the loop closes onto the complement node without branch juggling.
double topology_theta(int n_stages) {
    const double n = static_cast<double>(n_stages);
    return kPi * (2.0 * n - 3.0) / (2.0 * n);
}

}  // namespace

double stage_phase_response(double f, const StageModel& stage,
                            double amplitude_ratio) {
    if (!std::isfinite(f) || f <= 0.0) {
        throw validation_error("stage_phase_response: f must be finite and > 0");
    }
    if (!std::isfinite(amplitude_ratio) || amplitude_ratio <= 0.0) {
        throw validation_error(
            "stage_phase_response: amplitude_ratio must be finite and > 0");
    }
    return kPi - stage.theta_vi(amplitude_ratio) - std::atan(f / stage.f_3db());
}

double psi_from_geometry(double k_inj, double phi0) {
    if (!(k_inj >= 0.0 && k_inj < 1.0)) {
        throw validation_error("psi_from_geometry: require 0 <= k_inj < 1");
    }
    return std::atan2(k_inj * std::sin(phi0), 1.0 + k_inj * std::cos(phi0));
}

double psi_slope(double k_inj, double phi0) {
    const double c = std::cos(phi0);
    const double denom = 1.0 + 2.0 * k_inj * c + k_inj * k_inj;
    return k_inj * (c + k_inj) / denom;
}

double loop_phase_residual(const OscillatorConfig& config, double f,
                           double amplitude_ratio) {
    double lag = 0.0;
    for (const auto& s : config.stages) {
        lag += s.theta_vi(amplitude_ratio) + std::atan(f / s.f_3db());
    }
    return lag - 0.5 * kPi;
}

double free_running_frequency(const OscillatorConfig& config) {
    config.validate();
    double f3db_max = 0.0;
    for (const auto& s : config.stages) {
        f3db_max = std::max(f3db_max, s.f_3db());
    }
    const double lo = f3db_max * 1e-9;
    const double hi = f3db_max * 100.0;
    auto residual = [&](double f) { return loop_phase_residual(config, f, 1.0); };
    auto slope = [&](double f) {
        double d = 0.0;
        for (const auto& s : config.stages) {
            const double f3 = s.f_3db();
            d += (1.0 / f3) / (1.0 + (f / f3) * (f / f3));
        }
        return d;
    };
    if (residual(lo) * residual(hi) > 0.0) {
        throw numerical_error(
            "free_running_frequency: no oscillation (loop phase has no root in "
            "(0, 100*f_3dB))");
    }
    RootOptions opt;
    opt.residual_tol = 0.0;  // run to machine precision
    opt.max_iterations = 200;
    return newton_bisect(residual, slope, lo, hi, opt);
}

double required_psi(const OscillatorConfig& config, double amplitude_ratio) {
    return loop_phase_residual(config, config.f_inj, amplitude_ratio) /
           static_cast<double>(config.n_stages);
}

LockState solve_lock_state(const OscillatorConfig& config) {
    config.validate();

    LockState state;
    state.f_inj = config.f_inj;
    state.k_inj = config.injection_ratio;
    state.f_fr = free_running_frequency(config);

    const double k = config.injection_ratio;
    const int n = config.n_stages;

    auto psi_req = [&](double phi0) {
        return required_psi(config, amplitude_ratio_at(k, phi0));
    };

    if (k == 0.0) {
        // No pulling: lock only at exactly zero phase deficit.
        if (std::abs(psi_req(0.0)) < 1e-12) {
            state.locked = true;
            state.phi0 = 0.0;
            state.psi = 0.0;
        } else {
            state.locked = false;
            state.phi0 = kNaN;
            state.psi = kNaN;
            return state;
        }
    } else {
        // Stable branch: d psi / d phi0 > 0, i.e. |phi0| < acos(-k).
        const double phi_max = std::acos(-k);
        const double eps = 1e-12;
        auto f_res = [&](double phi0) {
            return psi_from_geometry(k, phi0) - psi_req(phi0);
        };
        auto f_slope = [&](double phi0) { return psi_slope(k, phi0); };

        // Scan for sign changes, refine each, keep stable roots.
        const int scan_points = 721;
        double best = kNaN;
        double prev_x = -phi_max + eps;
        double prev_f = f_res(prev_x);
        for (int i = 1; i < scan_points; ++i) {
            const double x = -phi_max + eps +
                             (2.0 * (phi_max - eps)) * i / (scan_points - 1);
            const double fx = f_res(x);
            if (prev_f == 0.0 || prev_f * fx < 0.0) {
                RootOptions opt;
                opt.residual_tol = 0.0;
                double root;
                try {
                    root = newton_bisect(f_res, f_slope, prev_x, x, opt);
                } catch (const numerical_error&) {
                    prev_x = x;
                    prev_f = fx;
                    continue;
                }
                if (psi_slope(k, root) > 0.0 &&
                    (std::isnan(best) || std::abs(root) < std::abs(best))) {
                    best = root;
                }
            }
            prev_x = x;
            prev_f = fx;
        }
        if (std::isnan(best)) {
            state.locked = false;
            state.phi0 = kNaN;
            state.psi = kNaN;
            return state;
        }
        state.locked = true;
        state.phi0 = best;
        state.psi = psi_from_geometry(k, best);
    }

    // Node output phasors in the injection frame.
    const double ratio = amplitude_ratio_at(k, state.phi0);
    state.node_phasors.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double theta_iv =
            std::atan(config.f_inj / config.stages[i].f_3db());
        const double angle = wrap_angle(config.injection_phases[i] - state.phi0 +
                                        state.psi - theta_iv);
        state.node_phasors.emplace_back(config.a_ref * ratio, angle);
    }
    return state;
}

namespace {

bool locks_at(const OscillatorConfig& config) {
    return solve_lock_state(config).locked;
}

// Bisects the lock/unlock boundary between a locked and an unlocked
// frequency; `map` produces the probed config from a candidate frequency.
template <typename MapFn>
double lock_edge(const OscillatorConfig& config, MapFn map, double f_locked,
                 double f_unlocked) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (f_locked + f_unlocked);
        if (locks_at(map(config, mid))) {
            f_locked = mid;
        } else {
            f_unlocked = mid;
        }
        if (std::abs(f_locked - f_unlocked) <= 1e-9 * std::abs(f_locked)) {
            break;
        }
    }
    return f_locked;
}

OscillatorConfig with_f_inj(const OscillatorConfig& config, double f) {
    OscillatorConfig out = config;
    out.f_inj = f;
    return out;
}

OscillatorConfig with_f_fr(const OscillatorConfig& config, double f) {
    return config_with_free_running(config, f);
}

// Finds an unlocked frequency beyond `f_locked` in the given direction.
template <typename MapFn>
double unlocked_probe(const OscillatorConfig& config, MapFn map,
                      double f_locked, bool upward) {
    double factor = upward ? 1.001 : 1.0 / 1.001;
    double f = f_locked;
    for (int it = 0; it < 64; ++it) {
        f *= factor;
        if (!locks_at(map(config, f))) return f;
        factor *= factor;  // widen geometrically
    }
    throw numerical_error("locking_range: could not bracket the lock edge");
}

}  // namespace

FrequencyInterval locking_range_f_inj(const OscillatorConfig& config) {
    config.validate();
    const double f_fr = free_running_frequency(config);
    if (config.injection_ratio == 0.0) {
        return {f_fr, f_fr};
    }
    if (!locks_at(with_f_inj(config, f_fr))) {
        throw numerical_error("locking_range_f_inj: no lock at zero detuning");
    }
    const double f_hi_out = unlocked_probe(config, with_f_inj, f_fr, true);
    const double f_lo_out = unlocked_probe(config, with_f_inj, f_fr, false);
    FrequencyInterval range;
    range.hi = lock_edge(config, with_f_inj, f_fr, f_hi_out);
    range.lo = lock_edge(config, with_f_inj, f_fr, f_lo_out);
    return range;
}

FrequencyInterval locking_range_f_fr(const OscillatorConfig& config) {
    config.validate();
    if (config.injection_ratio == 0.0) {
        return {config.f_inj, config.f_inj};
    }
    const double f_center = config.f_inj;  // zero detuning locks
    if (!locks_at(with_f_fr(config, f_center))) {
        throw numerical_error("locking_range_f_fr: no lock at zero detuning");
    }
    const double f_hi_out = unlocked_probe(config, with_f_fr, f_center, true);
    const double f_lo_out = unlocked_probe(config, with_f_fr, f_center, false);
    FrequencyInterval range;
    range.hi = lock_edge(config, with_f_fr, f_center, f_hi_out);
    range.lo = lock_edge(config, with_f_fr, f_center, f_lo_out);
    return range;
}

MismatchedLockResult solve_lock_phases(const OscillatorConfig& config) {
    config.validate();
    if (config.injection_ratio <= 0.0) {
        throw validation_error("solve_lock_phases: requires injection_ratio > 0");
    }
    const int n = config.n_stages;

    // Mean-field seed: symmetric lock of the stage-averaged ring.
    OscillatorConfig mean_cfg = config;
    StageModel mean_stage = config.stages[0];
    double gm_sum = 0.0, r_sum = 0.0, c_sum = 0.0, tvi_sum = 0.0, am_sum = 0.0;
    for (const auto& s : config.stages) {
        gm_sum += s.gm_peak;
        r_sum += s.r_load;
        c_sum += s.c_load;
        tvi_sum += s.theta_vi0;
        am_sum += s.am_pm_coeff;
    }
    const double gm_mean = gm_sum / n;
    mean_stage.gm_peak = gm_mean;
    mean_stage.r_load = r_sum / n;
    mean_stage.c_load = c_sum / n;
    mean_stage.theta_vi0 = tvi_sum / n;
    mean_stage.am_pm_coeff = am_sum / n;
    mean_cfg.stages.assign(n, mean_stage);

    const LockState seed = solve_lock_state(mean_cfg);
    if (!seed.locked) {
        return {};
    }

    const double theta_topo = topology_theta(n);
    const double theta_iv_mean =
        std::atan(config.f_inj / mean_stage.f_3db());
    const double chi = -seed.phi0 + seed.psi - theta_iv_mean;

    std::vector<double> p_ref(n);
    for (int i = 0; i < n; ++i) {
        p_ref[i] = config.injection_phases[i] + chi;
    }

    // Per-stage injection ratio: nominal k is defined against the mean gm.
    std::vector<double> k_eff(n), theta_iv(n);
    for (int i = 0; i < n; ++i) {
        k_eff[i] = config.injection_ratio * gm_mean / config.stages[i].gm_peak;
        theta_iv[i] = std::atan(config.f_inj / config.stages[i].f_3db());
        if (k_eff[i] >= 1.0) return {};
    }

    // Newton on the per-stage phase balance in deviation coordinates.
    // Stage i input is stage i-1 output; stage 0 input is the complement
    // (+pi) of stage N-1 output, a branch constant of 2*pi in the residual.
    std::vector<double> delta(n, 0.0), resid(n), beta(n), step(n);
    const int max_iter = 80;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        double resid_max = 0.0;
        for (int i = 0; i < n; ++i) {
            const int prev = (i + n - 1) % n;
            const double in_i =
                p_ref[prev] + delta[prev] + (i == 0 ? kPi : 0.0);
            const StageModel& s = config.stages[i];
            double phi0_i = config.injection_phases[i] - in_i - kPi +
                            theta_topo + s.theta_vi0;
            phi0_i = wrap_near(phi0_i, seed.phi0);
            const double ratio = amplitude_ratio_at(k_eff[i], phi0_i);
            const double theta_vi_b = theta_topo + s.theta_vi(ratio);
            const double psi_i = psi_from_geometry(k_eff[i], phi0_i);
            const double s_step = kPi - theta_vi_b - theta_iv[i] + psi_i;
            const double r = (p_ref[i] + delta[i]) - in_i - s_step +
                             (i == 0 ? 2.0 * kPi : 0.0);
            resid[i] = r;
            beta[i] = 1.0 - psi_slope(k_eff[i], phi0_i);
            step[i] = psi_slope(k_eff[i], phi0_i);
            resid_max = std::max(resid_max, std::abs(r));
        }
        if (resid_max < 1e-13) {
            converged = true;
            break;
        }

        // Solve (I - beta * shift) s = -resid for the cyclic system.
        // Forward substitution with s_0 unknown: s_i = A_i + B_i * s_0.
        std::vector<double> A(n), B(n);
        A[0] = 0.0;
        B[0] = 1.0;
        for (int i = 1; i < n; ++i) {
            A[i] = beta[i] * A[i - 1] - resid[i];
            B[i] = beta[i] * B[i - 1];
        }
        // Row 0: s_0 - beta_0 * s_{N-1} = -resid_0.
        const double denom = 1.0 - beta[0] * B[n - 1];
        if (std::abs(denom) < 1e-15) return {};
        const double s0 = (beta[0] * A[n - 1] - resid[0]) / denom;
        for (int i = 0; i < n; ++i) {
            delta[i] += (i == 0) ? s0 : (A[i] + B[i] * s0);
            if (!std::isfinite(delta[i]) || std::abs(delta[i]) > kPi) {
                return {};  // left the small-deviation basin: treat as unlocked
            }
        }
    }
    if (!converged) return {};

    // Stability: every stage must sit on the rising-psi side.
    for (int i = 0; i < n; ++i) {
        if (step[i] <= 0.0) return {};
    }

    MismatchedLockResult result;
    result.locked = true;
    result.node_phases.resize(n);
    for (int i = 0; i < n; ++i) {
        result.node_phases[i] = wrap_angle(p_ref[i] + delta[i]);
    }
    return result;
}

}  // namespace ilro
