#include "ilro/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ilro/rootfind.hpp"

namespace ilro {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_locked(const LockState& lock, const char* who) {
    if (!lock.locked) {
        throw validation_error(std::string(who) + ": lock state is not locked");
    }
}

}  // namespace

double solve_alpha(double k_inj, double phi0, double psi, double theta,
                   int n_stages) {
    if (!(k_inj >= 0.0 && k_inj < 1.0)) {
        throw validation_error("solve_alpha: require 0 <= k_inj < 1");
    }
    if (n_stages < 2) {
        throw validation_error("solve_alpha: n_stages must be >= 2");
    }
    const double c = phi0 - psi - theta / static_cast<double>(n_stages);
    auto g = [&](double a) { return k_inj * std::sin(c + a) - std::sin(psi - 2.0 * a); };
    auto dg = [&](double a) {
        return k_inj * std::cos(c + a) + 2.0 * std::cos(psi - 2.0 * a);
    };
    // sin(psi - 2a) sweeps +1 .. -1 over this bracket, so g changes sign.
    const double lo = 0.5 * psi - 0.25 * kPi;
    const double hi = 0.5 * psi + 0.25 * kPi;
    RootOptions opt;
    opt.residual_tol = 0.0;  // machine precision
    opt.max_iterations = 200;
    return newton_bisect(g, dg, lo, hi, opt);
}

ErrorPerturbation solve_output_error(const LockState& lock, double theta,
                                     int n_stages) {
    require_locked(lock, "solve_output_error");
    if (!(std::abs(theta) <= 0.5)) {
        throw validation_error(
            "solve_output_error: |theta| must be <= 0.5 rad (small-disturbance "
            "regime)");
    }
    ErrorPerturbation out;
    out.theta = theta;
    out.n_stages = n_stages;
    out.alpha = solve_alpha(lock.k_inj, lock.phi0, lock.psi, theta, n_stages);
    out.quadrature_error = 2.0 * out.alpha;
    return out;
}

double sensitivity_closed_form_at(double k_inj, double phi0, double psi,
                                  int n_stages) {
    const double cpsi = std::cos(psi);
    if (cpsi == 0.0) {
        throw numerical_error("sensitivity_closed_form: cos(psi) singularity");
    }
    return k_inj * std::cos(phi0 + psi) / (static_cast<double>(n_stages) * cpsi);
}

double sensitivity_closed_form(const LockState& lock, int n_stages) {
    require_locked(lock, "sensitivity_closed_form");
    return sensitivity_closed_form_at(lock.k_inj, lock.phi0, lock.psi, n_stages);
}

double sensitivity_closed_form_rederived_at(double k_inj, double phi0,
                                            double psi, int n_stages) {
    const double x = k_inj * std::cos(phi0 - psi);
    return 2.0 * x / (static_cast<double>(n_stages) * (x + 2.0 * std::cos(psi)));
}

double sensitivity_closed_form_rederived(const LockState& lock, int n_stages) {
    require_locked(lock, "sensitivity_closed_form_rederived");
    return sensitivity_closed_form_rederived_at(lock.k_inj, lock.phi0, lock.psi,
                                                n_stages);
}

double sensitivity_approx(double k_inj, double phi0, int n_stages) {
    if (!(k_inj >= 0.0 && k_inj < 1.0)) {
        throw validation_error("sensitivity_approx: require 0 <= k_inj < 1");
    }
    return k_inj * std::cos(phi0) / static_cast<double>(n_stages);
}

double sensitivity_finite_difference_at(double k_inj, double phi0, double psi,
                                        int n_stages, double step) {
    if (!(step > 0.0 && step <= 1e-3)) {
        throw validation_error(
            "sensitivity_finite_difference: require 0 < step <= 1e-3");
    }
    const double a_plus = solve_alpha(k_inj, phi0, psi, step, n_stages);
    const double a_minus = solve_alpha(k_inj, phi0, psi, -step, n_stages);
    return (2.0 * a_plus - 2.0 * a_minus) / (2.0 * step);
}

double sensitivity_finite_difference(const LockState& lock, int n_stages,
                                     double step) {
    require_locked(lock, "sensitivity_finite_difference");
    return sensitivity_finite_difference_at(lock.k_inj, lock.phi0, lock.psi,
                                            n_stages, step);
}

SensitivityResult estimate_sensitivity(double k_inj, double phi0, double psi,
                                       int n_stages) {
    SensitivityResult r;
    r.implicit = sensitivity_finite_difference_at(k_inj, phi0, psi, n_stages);
    r.closed_form = sensitivity_closed_form_at(k_inj, phi0, psi, n_stages);
    r.closed_form_rederived =
        sensitivity_closed_form_rederived_at(k_inj, phi0, psi, n_stages);
    r.approx = sensitivity_approx(k_inj, phi0, n_stages);
    r.oracle = kNaN;
    return r;
}

ZeroSensitivityResult find_zero_sensitivity_frequency(
    const OscillatorConfig& config) {
    config.validate();
    ZeroSensitivityResult result;
    if (config.injection_ratio == 0.0) {
        return result;  // sensitivity is identically zero; no crossing
    }

    const FrequencyInterval range = locking_range_f_fr(config);
    auto sens_at = [&](double f_fr) {
        const OscillatorConfig cfg = config_with_free_running(config, f_fr);
        const LockState lock = solve_lock_state(cfg);
        if (!lock.locked) return kNaN;
        return sensitivity_closed_form(lock, config.n_stages);
    };

    // Scan upward from zero detuning; the crossing the design guidance cares
    // about sits above f_inj.
    const double f_start = config.f_inj;
    const double f_end = range.hi * (1.0 - 1e-9);
    if (f_end <= f_start) return result;
    const int scan = 256;
    double prev_f = f_start;
    double prev_s = sens_at(prev_f);
    double lo = 0.0, hi = 0.0;
    bool bracketed = false;
    for (int i = 1; i <= scan; ++i) {
        const double f = f_start + (f_end - f_start) * i / scan;
        const double s = sens_at(f);
        if (std::isnan(s)) break;
        if (!std::isnan(prev_s) && prev_s * s <= 0.0 && prev_s != s) {
            lo = prev_f;
            hi = f;
            bracketed = true;
            break;
        }
        prev_f = f;
        prev_s = s;
    }
    if (!bracketed) return result;

    double s_lo = sens_at(lo);
    while (hi - lo > 1e3) {  // 1 kHz absolute tolerance
        const double mid = 0.5 * (lo + hi);
        const double s_mid = sens_at(mid);
        if (std::isnan(s_mid)) {
            hi = mid;
            continue;
        }
        if (s_lo * s_mid <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            s_lo = s_mid;
        }
    }
    result.found = true;
    result.f_opt = 0.5 * (lo + hi);
    result.above_f_inj = result.f_opt > config.f_inj;
    return result;
}

SweepTable sweep_sensitivity(const OscillatorConfig& config, SweepAxis axis,
                             const std::vector<double>& grid) {
    config.validate();
    if (grid.empty()) {
        throw validation_error("sweep_sensitivity: grid must be nonempty");
    }
    for (size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw validation_error("sweep_sensitivity: grid must be strictly increasing");
        }
    }

    SweepTable table;
    table.axis = axis;
    table.rows.reserve(grid.size());
    const double k = config.injection_ratio;
    const int n = config.n_stages;

    switch (axis) {
        case SweepAxis::Phi0: {
            const double phi_max = (k > 0.0) ? std::acos(-k) : 0.0;
            for (double phi0 : grid) {
                SweepRow row;
                row.axis_value = phi0;
                row.phi0 = phi0;
                row.psi = psi_from_geometry(k, phi0);
                row.locked = (k > 0.0) && std::abs(phi0) < phi_max;
                if (row.locked) {
                    row.sens = estimate_sensitivity(k, phi0, row.psi, n);
                } else {
                    row.sens = {kNaN, kNaN, kNaN, kNaN, kNaN};
                }
                row.two_alpha = kNaN;
                row.tangent = kNaN;
                table.rows.push_back(row);
            }
            break;
        }
        case SweepAxis::FreeRunning: {
            for (double f_fr : grid) {
                SweepRow row;
                row.axis_value = f_fr;
                const OscillatorConfig cfg = config_with_free_running(config, f_fr);
                const LockState lock = solve_lock_state(cfg);
                row.locked = lock.locked;
                if (lock.locked) {
                    row.phi0 = lock.phi0;
                    row.psi = lock.psi;
                    row.sens = estimate_sensitivity(k, lock.phi0, lock.psi, n);
                } else {
                    row.phi0 = kNaN;
                    row.psi = kNaN;
                    row.sens = {kNaN, kNaN, kNaN, kNaN, kNaN};
                }
                row.two_alpha = kNaN;
                row.tangent = kNaN;
                table.rows.push_back(row);
            }
            break;
        }
        case SweepAxis::Theta: {
            const LockState lock = solve_lock_state(config);
            double slope = kNaN;
            if (lock.locked) {
                slope = sensitivity_closed_form_rederived(lock, n);
            }
            for (double theta : grid) {
                SweepRow row;
                row.axis_value = theta;
                row.locked = lock.locked;
                if (lock.locked) {
                    row.phi0 = lock.phi0;
                    row.psi = lock.psi;
                    row.two_alpha = 2.0 * solve_alpha(k, lock.phi0, lock.psi,
                                                      theta, n);
                    row.tangent = slope * theta;
                    row.sens = estimate_sensitivity(k, lock.phi0, lock.psi, n);
                } else {
                    row.phi0 = kNaN;
                    row.psi = kNaN;
                    row.two_alpha = kNaN;
                    row.tangent = kNaN;
                    row.sens = {kNaN, kNaN, kNaN, kNaN, kNaN};
                }
                table.rows.push_back(row);
            }
            break;
        }
    }
    return table;
}

}  // namespace ilro
