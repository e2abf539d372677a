#pragma once

#include <functional>

namespace ilro {

struct RootOptions {
    double residual_tol = 1e-12;  // stop when |f(x)| <= residual_tol
    double x_rel_tol = 0.0;       // optional extra stop on bracket width
    int max_iterations = 200;
};

/// Safeguarded Newton iteration on a bracketing interval [lo, hi] with
/// f(lo)*f(hi) <= 0. Falls back to bisection whenever a Newton step leaves
/// the bracket or stalls. With residual_tol = 0 the iteration runs until the
/// bracket collapses to machine precision.
double newton_bisect(const std::function<double(double)>& f,
                     const std::function<double(double)>& df,
                     double lo, double hi, const RootOptions& opt = {});

/// Bisection to a relative width tolerance; requires a sign change.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_rel_tol, int max_iter = 200);

}  // namespace ilro
