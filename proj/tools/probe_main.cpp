// Scratch probe for numerical validation during development.
#include <cstdio>
#include <cmath>

#include "ilro/config.hpp"
#include "ilro/lock.hpp"
#include "ilro/sensitivity.hpp"
#include "ilro/timedomain.hpp"

using namespace ilro;

int main() {
    for (int n : {2, 3, 4}) {
        auto cfg = reference_config(n, 0.1, 7e9);
        const double f_fr = free_running_frequency(cfg);
        std::printf("N=%d v_sat=%.4f analytic f_fr=%.6e\n", n, cfg.v_sat, f_fr);

        SimSettings sim;
        sim.settle_periods = 150;
        sim.measure_periods = 128;
        try {
            const auto cal = calibrate_oscillator(cfg, sim);
            std::printf("  measured f_fr=%.6e rel_err=%+.4f%%  i_osc=%.4e (gm_peak=%.4e)\n",
                        cal.f_fr_measured,
                        100.0 * (cal.f_fr_measured - f_fr) / f_fr,
                        cal.i_osc_fund, cfg.stages[0].gm_peak);

            std::vector<double> no_err(n, 0.0);
            const auto lockread = measure_lock_phases(cfg, sim, no_err, &cal);
            std::printf("  locked=%d phases(deg):", lockread.locked ? 1 : 0);
            for (double p : lockread.stage_phases)
                std::printf(" %.3f", rad_to_deg(p));
            std::printf("  amps:");
            for (double a : lockread.amplitudes) std::printf(" %.3f", a);
            std::printf("\n");

            const auto lock = solve_lock_state(cfg);
            std::printf("  phasor: phi0=%.5f psi=%.5f node0 angle=%.3f deg\n",
                        lock.phi0, lock.psi,
                        rad_to_deg(lock.node_phasors[0].angle));

            std::vector<double> grid = {-0.05, -0.025, 0.025, 0.05};
            const auto sens = measure_sensitivity_sim(cfg, sim, grid, &cal);
            const double cf = sensitivity_closed_form(lock, n);
            const double rd = sensitivity_closed_form_rederived(lock, n);
            std::printf("  sim slope=%.6f icept=%.2e | printed=%.6f rederived=%.6f  sim/rd=%.4f\n",
                        sens.slope, sens.intercept, cf, rd, sens.slope / rd);
        } catch (const std::exception& e) {
            std::printf("  FAILED: %s\n", e.what());
        }
    }
    return 0;
}
