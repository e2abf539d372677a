#include "ilro/timedomain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ilro/lock.hpp"
#include "ilro/ring_topology.hpp"

namespace ilro {

namespace {

constexpr double kKickPeriods = 30.0;
constexpr double kKickLevel = 0.3;
constexpr double kEnvPeriods = 25.0;   // envelope-tracker time constant
constexpr double kLeakPeriods = 64.0;  // quadrature-integrator leak

// Behavioral ring: 2N nodes with linear RC loads. Each stage drives its
// differential output pair with a constant-magnitude oscillator current that
// rigidly tracks the previous pair's phase, rotated by the topology angle:
//
//   I_osc = I_sat * (w_c * D + w_q * Q)
//
// where D is the envelope-normalized previous-pair signal and Q its
// quadrature (time derivative for N = 2, leaky integral for N >= 3). This
// realizes the saturated-transconductance phasor abstraction directly: the
// oscillator current magnitude is amplitude-independent, waveforms stay
// fundamental-dominated, and the loop closes at the analytic free-running
// frequency.
//
// State layout: [v_0..v_{2N-1}, e_0..e_{N-1}, q_0..q_{N-1}] where e_p tracks
// the squared amplitude of pair p and q_p is the quadrature-integrator state
// (unused for N = 2).
struct RingArrays {
    int n = 0;
    int n2 = 0;
    double a_ref = 0.0;
    double v_floor = 0.0;  // below this envelope the cell behaves linearly
    double inv_tau_env = 0.0;
    double w_nom = 0.0;  // quadrature scaling frequency (rad/s)

    bool quad_deriv = false;  // N = 2: derivative quadrature
    double w_c = 0.0, w_q = 0.0;
    double wa = 0.0, wb = 0.0, lambda_q = 0.0;  // integral-path calibration

    std::vector<double> inv_c;
    std::vector<double> g_load;
    std::vector<double> i_sat;  // per-node oscillator-current scale
    std::vector<double> tau;    // transport delay realizing theta_vi0
    bool has_delay = false;

    double w_inj = 0.0;
    double i_inj_amp = 0.0;
    std::vector<double> inj_phase;

    double w_kick = 0.0;
    double kick_amp = 0.0;
    double t_kick_end = 0.0;
};

RingArrays build_ring(const OscillatorConfig& config, double f_fr_analytic,
                      double i_inj_amp,
                      const std::vector<double>& injection_errors) {
    RingArrays ring;
    const int n = config.n_stages;
    ring.n = n;
    ring.n2 = 2 * n;
    ring.a_ref = config.a_ref;
    ring.v_floor = config.v_sat;
    ring.inv_tau_env = f_fr_analytic / kEnvPeriods;

    // All lock physics happens at f_inj; free-running runs at the analytic
    // frequency. Scaling the quadrature to the operating frequency keeps the
    // tap rotation exact in both regimes.
    const double f_nom =
        (config.injection_ratio > 0.0) ? config.f_inj : f_fr_analytic;
    ring.w_nom = 2.0 * kPi * f_nom;

    const RingTopology topo = RingTopology::make(n);
    ring.quad_deriv = topo.quadrature_by_derivative;
    ring.w_c = topo.w_c;
    ring.w_q = topo.w_q;
    if (!ring.quad_deriv) {
        ring.lambda_q = ring.w_nom / kLeakPeriods;
        // Leaky integrator q' = w_nom * D - lambda * q has transfer
        // G = w_nom / (lambda + j*w) at the operating frequency; solve
        // wa + wb * G = w_c + j * w_q.
        const double den = ring.lambda_q * ring.lambda_q +
                           ring.w_nom * ring.w_nom;
        const double re_g = ring.w_nom * ring.lambda_q / den;
        const double im_g = -ring.w_nom * ring.w_nom / den;
        ring.wb = topo.w_q / im_g;
        ring.wa = topo.w_c - ring.wb * re_g;
    }

    ring.inv_c.resize(ring.n2);
    ring.g_load.resize(ring.n2);
    ring.i_sat.resize(ring.n2);
    ring.tau.resize(ring.n2, 0.0);
    ring.inj_phase.resize(ring.n2);

    double r_mean = 0.0;
    for (const auto& s : config.stages) r_mean += s.r_load;
    r_mean /= n;

    for (int j = 0; j < ring.n2; ++j) {
        const StageModel& s = config.stages[j % n];
        ring.inv_c[j] = 1.0 / s.c_load;
        ring.g_load[j] = 1.0 / s.r_load;
        // |I_osc| equals the stage's declared gm_peak.
        ring.i_sat[j] = s.gm_peak / topo.gain_norm;
        if (s.theta_vi0 != 0.0) {
            ring.tau[j] = s.theta_vi0 / (2.0 * kPi * f_fr_analytic);
            ring.has_delay = true;
        }
        ring.inj_phase[j] = config.injection_phases[j % n] +
                            injection_errors[j % n] +
                            ((j >= n) ? kPi : 0.0);
    }

    ring.w_inj = 2.0 * kPi * config.f_inj;
    ring.i_inj_amp = i_inj_amp;

    // Rotating startup kick: seeds the forward multi-phase mode
    // deterministically, then turns off well inside the settle window.
    ring.w_kick = 2.0 * kPi * f_fr_analytic;
    ring.kick_amp = kKickLevel * config.a_ref / r_mean;
    ring.t_kick_end = kKickPeriods / f_fr_analytic;
    return ring;
}

std::vector<double> default_init(const OscillatorConfig& config) {
    const int n2 = 2 * config.n_stages;
    std::vector<double> v(n2);
    for (int j = 0; j < n2; ++j) {
        v[j] = 0.5 * config.a_ref *
               std::cos(static_cast<double>(j) * kPi / config.n_stages);
    }
    return v;
}

// Ring buffer of per-step tap-basis values (D and Q per pair) for the
// theta_vi0 transport delay; cubic Lagrange interpolation on the step grid.
struct History {
    int width = 0;
    int capacity = 0;
    long completed = -1;
    double dt = 0.0;
    std::vector<double> data;
    std::vector<double> first;

    void init(int w, int cap, double step, const std::vector<double>& row0) {
        width = w;
        capacity = cap;
        dt = step;
        data.assign(static_cast<size_t>(cap) * w, 0.0);
        first = row0;
        completed = -1;
    }
    void push(long step, const double* vals) {
        std::copy(vals, vals + width,
                  data.begin() + static_cast<size_t>(step % capacity) * width);
        completed = step;
    }
    double at(long step, int col) const {
        return data[static_cast<size_t>(step % capacity) * width + col];
    }
    double value(int col, double t) const {
        if (t <= 0.0 || completed < 3) {
            return (completed >= 0 && t > 0.0) ? at(completed, col)
                                               : first[col];
        }
        double idx = t / dt;
        long i1 = static_cast<long>(std::floor(idx));
        const long oldest = std::max<long>(0, completed - capacity + 1);
        if (i1 < oldest + 1) i1 = oldest + 1;
        if (i1 > completed - 2) i1 = completed - 2;
        const double s = idx - static_cast<double>(i1);
        const double ym1 = at(i1 - 1, col), y0 = at(i1, col),
                     y1 = at(i1 + 1, col), y2 = at(i1 + 2, col);
        const double a = s + 1.0, b = s, c = s - 1.0, d = s - 2.0;
        return ym1 * (-b * c * d / 6.0) + y0 * (a * c * d / 2.0) +
               y1 * (-a * b * d / 2.0) + y2 * (a * b * c / 6.0);
    }
};

struct Integrator {
    const RingArrays& ring;
    History* history = nullptr;  // tap-basis rows: [D_0..D_{N-1}, Q_0..Q_{N-1}]

    std::vector<double> d_pair, denom, dhat, qhat, ddenom_dt, drive;

    explicit Integrator(const RingArrays& r)
        : ring(r),
          d_pair(r.n),
          denom(r.n),
          dhat(r.n),
          qhat(r.n),
          ddenom_dt(r.n),
          drive(r.n2) {}

    int src_pair(int j) const {
        // Pair feeding node j (its stage reads node j-1) and the sign of
        // that node's normalized value.
        const int src = (j + ring.n2 - 1) % ring.n2;
        return src % ring.n;
    }
    double src_sign(int j) const {
        const int src = (j + ring.n2 - 1) % ring.n2;
        return src < ring.n ? 1.0 : -1.0;
    }

    // Fills d_pair, denom, dhat and (for N >= 3) qhat from the state.
    void normalize(const std::vector<double>& state) {
        const int n = ring.n;
        for (int p = 0; p < n; ++p) {
            d_pair[p] = 0.5 * (state[p] - state[p + n]);
            const double env = std::sqrt(std::max(state[ring.n2 + p], 0.0));
            denom[p] = std::max(env, ring.v_floor);
            dhat[p] = d_pair[p] / denom[p];
            if (!ring.quad_deriv) {
                qhat[p] = state[ring.n2 + n + p];
            }
        }
    }

    void fill_drive(double t) {
        const int n = ring.n;
        const bool kicking = t < ring.t_kick_end;
        for (int j = 0; j < ring.n2; ++j) {
            double dr = 0.0;
            if (ring.i_inj_amp != 0.0) {
                dr += ring.i_inj_amp *
                      std::cos(ring.w_inj * t + ring.inj_phase[j]);
            }
            if (kicking) {
                dr += ring.kick_amp *
                      std::cos(ring.w_kick * t + static_cast<double>(j) * kPi / n);
            }
            drive[j] = dr;
        }
    }

    // Tap output (per unit i_sat) for the stage feeding node j.
    double tap_for(int j, double t) const {
        const int p = src_pair(j);
        const double sg = src_sign(j);
        double dv, qv;
        if (history != nullptr && ring.tau[j] > 0.0) {
            const double tq = t - ring.tau[j];
            dv = history->value(p, tq);
            qv = history->value(ring.n + p, tq);
        } else {
            dv = dhat[p];
            qv = qhat[p];
        }
        if (ring.quad_deriv) {
            return sg * (ring.w_c * dv + ring.w_q * qv);
        }
        return sg * (ring.wa * dv + ring.wb * qv);
    }

    void deriv(double t, const std::vector<double>& state,
               std::vector<double>& dstate) {
        const int n = ring.n;
        const int n2 = ring.n2;
        normalize(state);
        fill_drive(t);

        for (int p = 0; p < n; ++p) {
            const double e = state[n2 + p];
            dstate[n2 + p] =
                (2.0 * d_pair[p] * d_pair[p] - e) * ring.inv_tau_env;
            const double env = std::sqrt(std::max(e, 0.0));
            ddenom_dt[p] = (env > ring.v_floor && env > 0.0)
                               ? dstate[n2 + p] / (2.0 * env)
                               : 0.0;
            if (!ring.quad_deriv) {
                dstate[n2 + n + p] =
                    ring.w_nom * dhat[p] - ring.lambda_q * qhat[p];
            } else {
                dstate[n2 + n + p] = 0.0;
            }
        }

        if (ring.quad_deriv && history != nullptr) {
            // Taps read delayed history, so node derivatives are explicit;
            // the current instant's quadrature (for the next history row)
            // follows from them.
            for (int j = 0; j < n2; ++j) {
                dstate[j] = (-state[j] * ring.g_load[j] +
                             ring.i_sat[j] * tap_for(j, t) + drive[j]) *
                            ring.inv_c[j];
            }
            for (int p = 0; p < n; ++p) {
                const double ddot = 0.5 * (dstate[p] - dstate[p + n]);
                qhat[p] = (ddot - dhat[p] * ddenom_dt[p]) /
                          (ring.w_nom * denom[p]);
            }
            return;
        }
        if (ring.quad_deriv) {
            solve_quadrature(state);
        }

        for (int j = 0; j < n2; ++j) {
            dstate[j] = (-state[j] * ring.g_load[j] +
                         ring.i_sat[j] * tap_for(j, t) + drive[j]) *
                        ring.inv_c[j];
        }
    }

    // N = 2 path: Q_p = (d'_p - D_p * denom'_p) / (w_nom * denom_p) where
    // d'_p depends on the taps themselves; the dependency forms a single
    // cycle over pairs and is solved exactly by forward substitution.
    void solve_quadrature(const std::vector<double>& state) {
        const int n = ring.n;
        const int n2 = ring.n2;
        // Explicit part of d'_p (everything except the quadrature taps).
        std::vector<double> alpha(n), beta(n);
        for (int p = 0; p < n; ++p) {
            const int ja = p;
            const int jb = p + n;
            const int sp = src_pair(ja);  // pair feeding this pair
            const double sg = src_sign(ja);
            // In-phase part of the tap (shared by both nodes with opposite
            // signs through i_sat).
            const double tap_c = sg * ring.w_c * dhat[sp];
            const double ex_a = -state[ja] * ring.g_load[ja] +
                                ring.i_sat[ja] * tap_c + drive[ja];
            const double ex_b = -state[jb] * ring.g_load[jb] -
                                ring.i_sat[jb] * tap_c + drive[jb];
            const double ddot_explicit =
                0.5 * (ex_a * ring.inv_c[ja] - ex_b * ring.inv_c[jb]);
            const double kq =
                0.5 * sg * ring.w_q *
                (ring.i_sat[ja] * ring.inv_c[ja] +
                 ring.i_sat[jb] * ring.inv_c[jb]);
            const double scale = 1.0 / (ring.w_nom * denom[p]);
            alpha[p] = (ddot_explicit -
                        dhat[p] * ddenom_dt[p]) * scale;
            beta[p] = kq * scale;
        }
        // qhat_p = alpha_p + beta_p * qhat_{p-1}, cyclic.
        std::vector<double> acc_a(n), acc_b(n);
        acc_a[0] = alpha[0];
        acc_b[0] = beta[0];
        for (int p = 1; p < n; ++p) {
            acc_a[p] = alpha[p] + beta[p] * acc_a[p - 1];
            acc_b[p] = beta[p] * acc_b[p - 1];
        }
        const double det = 1.0 - acc_b[n - 1];
        if (std::abs(det) < 1e-12) {
            throw numerical_error("simulate: singular quadrature coupling");
        }
        const double q_last = acc_a[n - 1] / det;
        qhat[n - 1] = q_last;
        for (int p = 0; p < n - 1; ++p) {
            qhat[p] = acc_a[p] + acc_b[p] * q_last;
        }
        (void)n2;
    }

    double osc_current_node0(double t) const {
        return ring.i_sat[0] * tap_for(0, t);
    }
};

}  // namespace

void SimSettings::validate(int n_stages) const {
    if (samples_per_period < 200) {
        throw validation_error(
            "SimSettings: samples_per_period must be >= 200 (dt <= 1/(200*f_inj))");
    }
    if (settle_periods < 0) {
        throw validation_error("SimSettings: settle_periods must be >= 0");
    }
    if (measure_periods < 64) {
        throw validation_error("SimSettings: measure_periods must be >= 64");
    }
    if (measure_periods % 2 != 0) {
        throw validation_error("SimSettings: measure_periods must be even");
    }
    if (!v_init.empty()) {
        if (v_init.size() != static_cast<size_t>(2 * n_stages)) {
            throw validation_error("SimSettings: v_init must have 2*N entries");
        }
        double norm = 0.0;
        for (double x : v_init) norm += x * x;
        if (norm == 0.0) {
            throw validation_error(
                "SimSettings: v_init must not be identically zero (fixed point)");
        }
    }
}

Waveforms simulate(const OscillatorConfig& config, const SimSettings& settings,
                   const std::vector<double>& injection_errors,
                   const SimCalibration* calibration, bool record_osc_current) {
    config.validate();
    settings.validate(config.n_stages);
    if (injection_errors.size() != static_cast<size_t>(config.n_stages)) {
        throw validation_error("simulate: injection_errors must have N entries");
    }

    const double f_fr_analytic = free_running_frequency(config);

    double i_inj_amp = 0.0;
    SimCalibration local_cal;
    if (config.injection_ratio > 0.0) {
        if (calibration == nullptr) {
            local_cal = calibrate_oscillator(config, settings);
            calibration = &local_cal;
        }
        i_inj_amp = config.injection_ratio * calibration->i_osc_fund;
    }

    const RingArrays ring =
        build_ring(config, f_fr_analytic, i_inj_amp, injection_errors);
    const int n = ring.n;
    const int n2 = ring.n2;
    const int dim = n2 + 2 * n;

    const double dt = settings.dt(config.f_inj);
    const long settle_steps =
        static_cast<long>(settings.settle_periods) * settings.samples_per_period;
    const long window_steps =
        static_cast<long>(settings.measure_periods) * settings.samples_per_period;
    const long total_steps = settle_steps + window_steps;

    std::vector<double> state(dim, 0.0);
    {
        const std::vector<double> v0 =
            settings.v_init.empty() ? default_init(config) : settings.v_init;
        std::copy(v0.begin(), v0.end(), state.begin());
        const double a0 = 0.5 * config.a_ref;
        for (int p = 0; p < n; ++p) {
            state[n2 + p] = a0 * a0;
            // Quadrature integrator pre-seeded with the mode pattern.
            state[n2 + n + p] =
                std::sin(static_cast<double>(p) * kPi / n);
        }
    }

    Integrator integ(ring);
    History history;
    if (ring.has_delay) {
        double tau_max = 0.0;
        for (double t : ring.tau) tau_max = std::max(tau_max, t);
        const int cap = static_cast<int>(std::ceil(tau_max / dt)) + 8;
        integ.normalize(state);
        if (ring.quad_deriv) {
            integ.fill_drive(0.0);
            integ.solve_quadrature(state);
        }
        std::vector<double> row(2 * n);
        for (int p = 0; p < n; ++p) {
            row[p] = integ.dhat[p];
            row[n + p] = integ.qhat[p];
        }
        history.init(2 * n, cap, dt, row);
        integ.history = &history;
    }

    Waveforms w;
    w.t0 = static_cast<double>(settle_steps) * dt;
    w.dt = dt;
    w.f_inj = config.f_inj;
    w.a_ref = config.a_ref;
    w.phase_ref = config.injection_phases[0];
    w.nodes.assign(n2, std::vector<double>());
    for (auto& series : w.nodes) series.reserve(window_steps);
    if (record_osc_current) w.osc_current_node0.reserve(window_steps);

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const double vmax_allowed = 100.0 * config.a_ref;

    for (long step = 0; step < total_steps; ++step) {
        const double t = static_cast<double>(step) * dt;

        integ.deriv(t, state, k1);
        if (integ.history != nullptr) {
            std::vector<double> row(2 * n);
            for (int p = 0; p < n; ++p) {
                row[p] = integ.dhat[p];
                row[n + p] = integ.qhat[p];
            }
            integ.history->push(step, row.data());
        }
        if (step >= settle_steps) {
            for (int j = 0; j < n2; ++j) w.nodes[j].push_back(state[j]);
            if (record_osc_current) {
                w.osc_current_node0.push_back(integ.osc_current_node0(t));
            }
        }

        for (int j = 0; j < dim; ++j) tmp[j] = state[j] + 0.5 * dt * k1[j];
        integ.deriv(t + 0.5 * dt, tmp, k2);
        for (int j = 0; j < dim; ++j) tmp[j] = state[j] + 0.5 * dt * k2[j];
        integ.deriv(t + 0.5 * dt, tmp, k3);
        for (int j = 0; j < dim; ++j) tmp[j] = state[j] + dt * k3[j];
        integ.deriv(t + dt, tmp, k4);
        for (int j = 0; j < dim; ++j) {
            state[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }

        if (step % settings.samples_per_period == 0) {
            for (int j = 0; j < n2; ++j) {
                if (!std::isfinite(state[j]) ||
                    std::abs(state[j]) > vmax_allowed) {
                    throw numerical_error(
                        "simulate: instability, node " + std::to_string(j) +
                        " diverged at t = " + std::to_string(t) + " s");
                }
            }
        }
    }
    return w;
}

namespace {

struct CrossingStats {
    int rising = 0;
    double t_first = 0.0;
    double t_last = 0.0;
};

CrossingStats rising_crossings(const std::vector<double>& v, double t0,
                               double dt) {
    CrossingStats st;
    for (size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i] <= 0.0 && v[i + 1] > 0.0) {
            const double frac = -v[i] / (v[i + 1] - v[i]);
            const double t = t0 + (static_cast<double>(i) + frac) * dt;
            if (st.rising == 0) st.t_first = t;
            st.t_last = t;
            ++st.rising;
        }
    }
    return st;
}

int even_at_least(double x) {
    int v = static_cast<int>(std::ceil(x));
    if (v % 2 != 0) ++v;
    return v;
}

SimCalibration free_running_pass(const OscillatorConfig& config,
                                 const SimSettings& settings,
                                 bool want_current) {
    OscillatorConfig cfg0 = config;
    cfg0.injection_ratio = 0.0;

    const double f_fr_analytic = free_running_frequency(cfg0);
    const double cycles_ratio = config.f_inj / f_fr_analytic;

    SimSettings cal = settings;
    cal.settle_periods = std::max(settings.settle_periods, 150);
    cal.measure_periods = std::max(
        settings.measure_periods, even_at_least(270.0 * cycles_ratio));

    const std::vector<double> no_errors(config.n_stages, 0.0);
    const Waveforms w = simulate(cfg0, cal, no_errors, nullptr, want_current);

    double v_max = 0.0;
    for (double x : w.nodes[0]) v_max = std::max(v_max, std::abs(x));
    if (v_max < 1e-3 * config.a_ref) {
        throw numerical_error(
            "free-running measurement: oscillation failed to start (amplitude "
            "collapse)");
    }

    const CrossingStats st = rising_crossings(w.nodes[0], w.t0, w.dt);
    if (st.rising < 257) {
        throw numerical_error(
            "free-running measurement: fewer than 256 cycles in the window");
    }
    SimCalibration out;
    out.f_fr_measured =
        static_cast<double>(st.rising - 1) / (st.t_last - st.t_first);

    if (want_current) {
        const double f = out.f_fr_measured;
        const size_t m_all = w.osc_current_node0.size();
        const double cycles = static_cast<double>(m_all) * w.dt * f;
        const size_t m_used = std::min(
            m_all, static_cast<size_t>(std::floor(cycles) / (f * w.dt)));
        double cs = 0.0, sn = 0.0;
        const double wf = 2.0 * kPi * f;
        for (size_t i = 0; i < m_used; ++i) {
            const double t = w.t0 + static_cast<double>(i) * w.dt;
            cs += w.osc_current_node0[i] * std::cos(wf * t);
            sn += w.osc_current_node0[i] * std::sin(wf * t);
        }
        out.i_osc_fund = 2.0 * std::hypot(cs, sn) / static_cast<double>(m_used);
    }
    return out;
}

}  // namespace

SimCalibration calibrate_oscillator(const OscillatorConfig& config,
                                    const SimSettings& settings) {
    return free_running_pass(config, settings, true);
}

double measure_free_running(const OscillatorConfig& config,
                            const SimSettings& settings) {
    return free_running_pass(config, settings, false).f_fr_measured;
}

PhaseReading extract_phases(const Waveforms& w, const SimSettings& settings,
                            PhaseReportMode mode) {
    const int n2 = static_cast<int>(w.nodes.size());
    const int n = n2 / 2;
    const size_t m = w.nodes[0].size();
    if (m == 0) throw validation_error("extract_phases: empty window");

    std::vector<std::vector<double>> series;
    if (mode == PhaseReportMode::AllNodes) {
        series = w.nodes;
    } else {
        series.resize(n);
        for (int k = 0; k < n; ++k) {
            series[k].resize(m);
            const auto& p = w.nodes[k];
            const auto& q = w.nodes[k + n];
            for (size_t i = 0; i < m; ++i) series[k][i] = 0.5 * (p[i] - q[i]);
        }
    }

    const double wf = 2.0 * kPi * w.f_inj;
    const size_t half = m / 2;

    PhaseReading reading;
    reading.node_phases.reserve(series.size());
    reading.amplitudes.reserve(series.size());

    double drift_accum = 0.0;
    for (size_t s = 0; s < series.size(); ++s) {
        double cs = 0.0, sn = 0.0;
        double cs1 = 0.0, sn1 = 0.0, cs2 = 0.0, sn2 = 0.0;
        for (size_t i = 0; i < m; ++i) {
            const double t = w.t0 + static_cast<double>(i) * w.dt;
            const double c = std::cos(wf * t);
            const double sI = std::sin(wf * t);
            const double x = series[s][i];
            cs += x * c;
            sn += x * sI;
            if (i < half) {
                cs1 += x * c;
                sn1 += x * sI;
            } else {
                cs2 += x * c;
                sn2 += x * sI;
            }
        }
        const double amp = 2.0 * std::hypot(cs, sn) / static_cast<double>(m);
        if (amp < 1e-6 * w.a_ref) {
            throw numerical_error("extract_phases: node " + std::to_string(s) +
                                  " dead (amplitude below 1e-6 * A_ref)");
        }
        reading.amplitudes.push_back(amp);
        reading.node_phases.push_back(
            wrap_angle(std::atan2(-sn, cs) - w.phase_ref));

        const double ph1 = std::atan2(-sn1, cs1);
        const double ph2 = std::atan2(-sn2, cs2);
        const double dt_halves = static_cast<double>(half) * w.dt;
        drift_accum += std::remainder(ph2 - ph1, 2.0 * kPi) / dt_halves;
    }
    reading.drift_rate = drift_accum / static_cast<double>(series.size());
    (void)settings;
    return reading;
}

bool detect_lock(const PhaseReading& reading, const SimSettings& settings,
                 double f_inj) {
    const double window = static_cast<double>(settings.measure_periods) / f_inj;
    return std::abs(reading.drift_rate) * window < 0.01;
}

std::vector<int> zero_crossing_counts(const Waveforms& w) {
    std::vector<int> counts;
    counts.reserve(w.nodes.size());
    for (const auto& v : w.nodes) {
        int c = 0;
        for (size_t i = 0; i + 1 < v.size(); ++i) {
            if ((v[i] <= 0.0) != (v[i + 1] <= 0.0)) ++c;
        }
        counts.push_back(c);
    }
    return counts;
}

SimLockReading measure_lock_phases(const OscillatorConfig& config,
                                   const SimSettings& settings,
                                   const std::vector<double>& injection_errors,
                                   const SimCalibration* calibration) {
    const Waveforms w = simulate(config, settings, injection_errors, calibration);
    const PhaseReading reading =
        extract_phases(w, settings, PhaseReportMode::DifferentialPairs);
    SimLockReading out;
    out.locked = detect_lock(reading, settings, config.f_inj);
    out.stage_phases = reading.node_phases;
    out.amplitudes = reading.amplitudes;
    return out;
}

SimSensitivity measure_sensitivity_sim(const OscillatorConfig& config,
                                       const SimSettings& settings,
                                       const std::vector<double>& theta_grid,
                                       const SimCalibration* calibration) {
    config.validate();
    if (theta_grid.empty()) {
        throw validation_error("measure_sensitivity_sim: empty theta grid");
    }
    for (double th : theta_grid) {
        if (std::abs(th) > 0.5) {
            throw validation_error(
                "measure_sensitivity_sim: |theta| must be <= 0.5 rad");
        }
    }
    const int n = config.n_stages;

    SimCalibration local_cal;
    if (calibration == nullptr) {
        local_cal = calibrate_oscillator(config, settings);
        calibration = &local_cal;
    }

    std::vector<double> zero_errors(n, 0.0);
    const SimLockReading base =
        measure_lock_phases(config, settings, zero_errors, calibration);
    if (!base.locked) {
        throw numerical_error("measure_sensitivity_sim: baseline is unlocked");
    }

    std::vector<double> w_values(theta_grid.size(), 0.0);
    std::string failures;
    for (size_t g = 0; g < theta_grid.size(); ++g) {
        std::vector<double> errors(n, 0.0);
        errors[0] = theta_grid[g];
        const SimLockReading run =
            measure_lock_phases(config, settings, errors, calibration);
        if (!run.locked) {
            failures += (failures.empty() ? "" : ", ") +
                        std::to_string(theta_grid[g]);
            continue;
        }
        double proj = 0.0;
        if (n % 2 == 0) {
            // Alternating-mode projection: equals the output quadrature error
            // for N = 2 and stays common-mode free for even N.
            for (int k = 0; k < n; ++k) {
                const double dk = std::remainder(
                    run.stage_phases[k] - base.stage_phases[k], 2.0 * kPi);
                proj += ((k % 2 == 0) ? 1.0 : -1.0) * dk;
            }
            proj *= 2.0 / static_cast<double>(n);
        } else {
            const double d0 = std::remainder(
                run.stage_phases[0] - base.stage_phases[0], 2.0 * kPi);
            const double d1 = std::remainder(
                run.stage_phases[1] - base.stage_phases[1], 2.0 * kPi);
            proj = d0 - d1;
        }
        w_values[g] = proj;
    }
    if (!failures.empty()) {
        throw numerical_error(
            "measure_sensitivity_sim: unlocked grid points at theta = { " +
            failures + " }");
    }

    // Least-squares line through (theta, W).
    const size_t m = theta_grid.size();
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        sx += theta_grid[i];
        sy += w_values[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        sxx += (theta_grid[i] - mx) * (theta_grid[i] - mx);
        sxy += (theta_grid[i] - mx) * (w_values[i] - my);
    }
    if (sxx == 0.0) {
        throw validation_error("measure_sensitivity_sim: degenerate theta grid");
    }
    SimSensitivity out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.n_points = static_cast<int>(m);
    return out;
}

}  // namespace ilro
