#pragma once

#include "ilro/config.hpp"

namespace ilro {

/// Tap synthesis for the behavioral ring realization.
///
/// Each stage drives its differential output pair with a constant-magnitude
/// current derived from the previous pair's envelope-normalized signal,
/// rotated by a fixed angle: I_osc = I_sat * (w_c * D + w_q * Q) where D is
/// the normalized previous-pair signal and Q its quadrature. The rotation is
/// chosen so the traveling multi-phase mode oscillates exactly where each
/// stage's RC phase equals pi/(2N) (the analytic loop condition with
/// theta_vi0 = 0), and the oscillator current rigidly tracks the previous
/// stage's phase with saturated magnitude, which is the phasor abstraction
/// the analytic model is built on.
///
/// The quadrature realization differs by N:
///   - N = 2 uses the time derivative of the normalized signal (the ring has
///     no spatial quadrature between adjacent stages); the phase condition
///     then closes at exactly one frequency.
///   - N >= 3 uses a leaky integrator, whose gain falls with frequency; all
///     competing spatial modes either cannot close their phase condition or
///     are heavily attenuated.
struct RingTopology {
    double w_c = 0.0;        // in-phase tap weight
    double w_q = 0.0;        // quadrature tap weight
    double gain_norm = 0.0;  // |w_c + j*w_q| = sqrt(1 + tan^2(pi/2N))
    bool quadrature_by_derivative = false;  // true for N = 2

    static RingTopology make(int n_stages);
};

}  // namespace ilro
