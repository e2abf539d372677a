#include "ilro/ring_topology.hpp"

#include <cmath>
#include <complex>

#include "ilro/errors.hpp"

namespace ilro {

RingTopology RingTopology::make(int n_stages) {
    if (n_stages < 2) {
        throw validation_error("RingTopology: n_stages must be >= 2");
    }
    if (n_stages > 4) {
        // The leaky-integrator quadrature keeps competing spatial modes
        // starved up to N = 4 (verified mode-by-mode); larger rings would
        // need a further-shaped coupling filter.
        throw validation_error(
            "time-domain ring realization supports 2 <= N <= 4");
    }
    const int n = n_stages;
    const double mu = kPi / n;
    const double target = std::tan(kPi / (2.0 * n));

    RingTopology t;
    // (w_c + j*w_q) = (1 + j*tan(pi/2N)) * e^{j*pi/N}: the tap phasor that
    // makes the per-stage transfer pi - arctan(f/f_3dB) close the loop at
    // the analytic free-running frequency.
    t.w_c = std::cos(mu) - target * std::sin(mu);
    t.w_q = std::sin(mu) + target * std::cos(mu);
    t.gain_norm = std::hypot(t.w_c, t.w_q);
    t.quadrature_by_derivative = (n == 2);

    const double check = std::sqrt(1.0 + target * target);
    if (std::abs(t.gain_norm - check) > 1e-12) {
        throw numerical_error("RingTopology: tap synthesis failed");
    }
    return t;
}

}  // namespace ilro
