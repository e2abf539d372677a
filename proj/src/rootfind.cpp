#include "ilro/rootfind.hpp"

#include <cmath>
#include <limits>

#include "ilro/errors.hpp"

namespace ilro {

double newton_bisect(const std::function<double(double)>& f,
                     const std::function<double(double)>& df,
                     double lo, double hi, const RootOptions& opt) {
    double flo = f(lo);
    double fhi = f(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi)) {
        throw numerical_error("newton_bisect: non-finite residual at bracket endpoint");
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) {
        throw numerical_error("newton_bisect: no sign change in bracket");
    }

    double x = 0.5 * (lo + hi);
    double fx = f(x);
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (std::abs(fx) <= opt.residual_tol) return x;

        // Maintain the bracket.
        if (flo * fx <= 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        const double width = hi - lo;
        if (width <= std::abs(x) * std::numeric_limits<double>::epsilon() * 2.0 ||
            width <= opt.x_rel_tol * std::abs(x)) {
            return x;
        }

        double x_next;
        const double d = df(x);
        if (d != 0.0 && std::isfinite(d)) {
            x_next = x - fx / d;
            if (!(x_next > lo && x_next < hi)) {
                x_next = 0.5 * (lo + hi);
            }
        } else {
            x_next = 0.5 * (lo + hi);
        }
        if (x_next == x) {
            x_next = 0.5 * (lo + hi);
            if (x_next == x) return x;
        }
        x = x_next;
        fx = f(x);
        if (!std::isfinite(fx)) {
            throw numerical_error("newton_bisect: non-finite residual during iteration");
        }
    }
    if (std::abs(fx) <= opt.residual_tol * 10.0 || opt.residual_tol == 0.0) return x;
    throw numerical_error("newton_bisect: no convergence after max iterations");
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double x_rel_tol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) {
        throw numerical_error("bisect: no sign change in bracket");
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm <= 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
        if ((hi - lo) <= x_rel_tol * std::max(std::abs(lo), std::abs(hi))) {
            break;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace ilro
