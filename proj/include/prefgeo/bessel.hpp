#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace prefgeo {

namespace detail {

// Integrand of the representation K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
inline double bessel_k_integrand(double t, double nu, double x) {
    // log-scale guard: cosh(nu t) can reach ~1e140 for nu=5, t~65 while the
    // exponential term is still O(1); combine in log space when large.
    double log_cosh_term;
    double nt = nu * t;
    if (nt > 30.0)
        log_cosh_term = nt - M_LN2;  // cosh(nt) ~ exp(nt)/2
    else
        log_cosh_term = std::log(std::cosh(nt));
    double le = -x * std::cosh(t) + log_cosh_term;
    if (le < -745.0) return 0.0;
    return std::exp(le);
}

inline double simpson(double fa, double fm, double fb, double h6) {
    return h6 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(double (*f)(double, double, double), double nu, double x,
                                   double a, double b, double fa, double fm, double fb,
                                   double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm, nu, x), frm = f(rm, nu, x);
    double h12 = (b - a) / 12.0;
    double left = simpson(fa, flm, fm, h12);
    double right = simpson(fm, frm, fb, h12);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, nu, x, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, nu, x, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// K_nu(x) by adaptive Simpson quadrature of the cosh integral. Valid for
// nu >= 0; used for non-half-integer orders.
inline double bessel_k_quadrature(double nu, double x) {
    // Truncation point: the log-integrand peaks at t* solving
    // x sinh t = nu tanh(nu t) (t* > 0 once x is small relative to nu); cut
    // where it has fallen ~46 log-units (1e-20) below the peak.
    auto log_f = [&](double t) {
        double nt = nu * t;
        double lc = nt > 30.0 ? nt - M_LN2 : std::log(std::cosh(nt));
        return -x * std::cosh(t) + lc;
    };
    double peak = log_f(0.0), t_peak = 0.0;
    for (double t = 0.0625; t <= 80.0; t += 0.0625) {
        double v = log_f(t);
        if (v > peak) {
            peak = v;
            t_peak = t;
        }
    }
    double t_hi = std::max(1.0, t_peak + 0.5);
    while (log_f(t_hi) > peak - 46.0 && t_hi < 85.0) t_hi += 0.5;

    // Coarse pass to scale the absolute tolerance.
    int n0 = 64;
    double h = t_hi / n0, coarse = 0.0;
    for (int i = 0; i < n0; ++i) {
        double a = i * h;
        coarse += simpson(bessel_k_integrand(a, nu, x), bessel_k_integrand(a + 0.5 * h, nu, x),
                          bessel_k_integrand(a + h, nu, x), h / 6.0);
    }
    double tol = std::max(coarse * 1e-13, std::numeric_limits<double>::min() * 1e4);

    double total = 0.0;
    int panels = 16;
    double ph = t_hi / panels;
    for (int i = 0; i < panels; ++i) {
        double a = i * ph, b = a + ph, m = 0.5 * (a + b);
        double fa = bessel_k_integrand(a, nu, x);
        double fm = bessel_k_integrand(m, nu, x);
        double fb = bessel_k_integrand(b, nu, x);
        double whole = simpson(fa, fm, fb, (b - a) / 6.0);
        total += adaptive_simpson_rec(bessel_k_integrand, nu, x, a, b, fa, fm, fb, whole,
                                      tol / panels, 48);
    }
    return total;
}

// K_{k+1/2}(x) in closed form: K_{1/2} = sqrt(pi/(2x)) e^{-x}, then the
// upward recurrence K_{v+1} = K_{v-1} + (2v/x) K_v (stable for K).
inline double bessel_k_half_integer(int k, double x) {
    double k_half = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x);
    if (k == 0) return k_half;
    double km = k_half;  // K_{-1/2} = K_{1/2}
    double kc = k_half;
    double nu = 0.5;
    for (int i = 0; i < k; ++i) {
        double kp = km + (2.0 * nu / x) * kc;
        km = kc;
        kc = kp;
        nu += 1.0;
    }
    return kc;
}

}  // namespace detail

// Modified Bessel function of the second kind, real order nu > 0, x > 0.
// Half-integer orders use closed forms; other orders are evaluated by
// adaptive quadrature of the integral representation.
inline double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw std::domain_error("bessel_k: x > 0 required");
    if (!(nu > 0.0)) throw std::domain_error("bessel_k: nu > 0 required");
    double half_index = nu - 0.5;
    double nearest = std::round(half_index);
    if (nearest >= 0.0 && std::abs(half_index - nearest) < 1e-12)
        return detail::bessel_k_half_integer(static_cast<int>(nearest), x);
    return detail::bessel_k_quadrature(nu, x);
}

}  // namespace prefgeo
