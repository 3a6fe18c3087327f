#pragma once

// Test-only reference implementations, kept independent of the library's
// computation paths: a double-exponential (tanh-sinh style) trapezoid rule in
// long double for K_nu, brute-force O(n^2) pair loops for every estimator,
// and a hand-rolled Gaussian elimination for reference least squares.

#include <cmath>
#include <cstddef>
#include <vector>

#include "prefgeo/covariance.hpp"
#include "prefgeo/point_pattern.hpp"

namespace oracle {

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt via the substitution
// t = exp((pi/2) sinh u) and a fixed-step trapezoid over u.
inline long double besselk_de(long double nu, long double x) {
    const long double h = 1.0L / 256.0L;
    long double sum = 0.0L;
    for (int k = -1536; k <= 1024; ++k) {
        long double u = k * h;
        long double su = std::sinh(u);
        long double t = std::exp(1.57079632679489661923L * su);
        long double w = 1.57079632679489661923L * std::cosh(u) * t;
        long double nt = nu * t;
        long double lc = nt > 30.0L ? nt - 0.69314718055994530942L : std::log(std::cosh(nt));
        long double le = -x * std::cosh(t) + lc;
        if (le > -11300.0L) sum += std::exp(le) * w;
    }
    return sum * h;
}

// {nu, x, K_nu(x)} computed with 30-digit arithmetic ahead of the build.
struct BesselRef {
    double nu, x, value;
};
inline const std::vector<BesselRef>& besselk_reference() {
    static const std::vector<BesselRef> table = {
        {0.5, 1e-06, 1253.31288400198962092},
        {0.5, 0.001, 39.5936595131166432006},
        {0.5, 0.3, 1.6951610563392831358},
        {0.5, 1.0, 0.46106850444789455844},
        {0.5, 2.0, 0.119937771968061447368},
        {0.5, 5.0, 0.00377661337464288255953},
        {0.5, 10.0, 1.79934780937051796081e-05},
        {0.5, 30.0, 2.1412375659560113993e-14},
        {0.5, 50.0, 3.41862009545707463557e-23},
        {0.75, 1e-06, 32585.6430584263815667},
        {0.75, 0.001, 183.234638521758216418},
        {0.75, 0.3, 2.18280385396597653578},
        {0.75, 1.0, 0.515775300695918628578},
        {0.75, 2.0, 0.12790297862917902633},
        {0.75, 5.0, 0.00388615925497427649361},
        {0.75, 10.0, 1.82637514367053127942e-05},
        {0.75, 30.0, 2.15223774471150517902e-14},
        {0.75, 50.0, 3.42921480469355744242e-23},
        {1.0, 1e-06, 999999.999992784324215},
        {1.0, 0.001, 999.996238156085553461},
        {1.0, 0.3, 3.05599203345732510718},
        {1.0, 1.0, 0.601907230197234574738},
        {1.0, 2.0, 0.139865881816522427285},
        {1.0, 5.0, 0.00404461344545216420837},
        {1.0, 10.0, 1.86487734538255845968e-05},
        {1.0, 30.0, 2.16773200189154942487e-14},
        {1.0, 50.0, 3.44410222671755561259e-23},
        {1.5, 1e-06, 1253314137.31487367963},
        {1.5, 0.001, 39633.2531726297590196},
        {1.5, 0.3, 7.34569791080356046423},
        {1.5, 1.0, 0.922137008895789116879},
        {1.5, 2.0, 0.179906657952092171052},
        {1.5, 5.0, 0.00453193604957145907143},
        {1.5, 10.0, 1.97928259030756975689e-05},
        {1.5, 30.0, 2.21261215148787844594e-14},
        {1.5, 50.0, 3.48699249736621612828e-23},
        {2.2, 1e-06, 40118043474003.2389507},
        {2.2, 0.001, 10077194.8066933347662},
        {2.2, 0.3, 35.1327655681500376568},
        {2.2, 1.0, 2.10981175407567901005},
        {2.2, 2.0, 0.29834579472300063224},
        {2.2, 5.0, 0.00572553420810797496065},
        {2.2, 10.0, 2.238459053532703267e-05},
        {2.2, 30.0, 2.3085508102546491292e-14},
        {2.2, 50.0, 3.57755742379702980459e-23},
        {3.7, 1e-06, 4.2952151176517300881e+23},
        {3.7, 0.001, 3411810326257.28716832},
        {3.7, 0.3, 2312.20268239752282401},
        {3.7, 1.0, 24.7596236706122233537},
        {3.7, 2.0, 1.48197244975660314356},
        {3.7, 5.0, 0.0124989519662744879038},
        {3.7, 10.0, 3.39793859017358983778e-05},
        {3.7, 30.0, 2.66850128163345431802e-14},
        {3.7, 50.0, 3.90501798522660039801e-23},
        {5.0, 1e-06, 3.83999999999976086884e+32},
        {5.0, 0.001, 3.83999976000000960032e+17},
        {5.0, 0.3, 157139.123371216713502},
        {5.0, 1.0, 360.960589601240700656},
        {5.0, 2.0, 9.43104910059646744282},
        {5.0, 5.0, 0.0327062737120318578834},
        {5.0, 10.0, 5.75418499853122792764e-05},
        {5.0, 30.0, 3.21033351058902624791e-14},
        {5.0, 50.0, 4.3671822541009863293e-23},
    };
    return table;
}

// Reference normal-equation solve by Gaussian elimination with partial
// pivoting (no Eigen anywhere in this path).
inline std::vector<double> solve_normal_equations(const prefgeo::PointPattern& pat) {
    const std::size_t p = pat.covariate_dim();
    const std::size_t n = pat.size();
    std::vector<std::vector<double>> A(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) A[a][b] += pat.covariate(i, a) * pat.covariate(i, b);
            A[a][p] += pat.covariate(i, a) * pat.z[i];
        }
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            double f = A[r][col] / A[col][col];
            for (std::size_t cc = col; cc <= p; ++cc) A[r][cc] -= f * A[col][cc];
        }
    }
    std::vector<double> beta(p);
    for (std::size_t a = 0; a < p; ++a) beta[a] = A[a][p] / A[a][a];
    return beta;
}

inline double dist(const prefgeo::PointPattern& pat, std::size_t i, std::size_t j) {
    double dx = pat.x[i] - pat.x[j], dy = pat.y[i] - pat.y[j];
    return std::sqrt(dx * dx + dy * dy);
}

inline std::vector<double> residuals(const prefgeo::PointPattern& pat,
                                     const std::vector<double>& beta) {
    std::vector<double> r(pat.size());
    for (std::size_t i = 0; i < pat.size(); ++i) {
        double m = 0.0;
        for (std::size_t a = 0; a < pat.covariate_dim(); ++a) m += pat.covariate(i, a) * beta[a];
        r[i] = pat.z[i] - m;
    }
    return r;
}

inline double epanechnikov(double u) {
    double a = std::abs(u);
    return a < 1.0 ? 0.75 * (1.0 - a * a) : 0.0;
}

// Eq. (5) as a literal ordered double loop.
inline void variogram_brute(const prefgeo::PointPattern& pat, const std::vector<double>& resid,
                            const std::vector<double>& lags, double h, std::vector<double>& value,
                            std::vector<long>& pairs) {
    value.assign(lags.size(), 0.0);
    pairs.assign(lags.size(), 0);
    std::vector<double> num(lags.size(), 0.0), den(lags.size(), 0.0);
    const std::size_t n = pat.size();
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t) {
            if (s == t) continue;
            double d = dist(pat, s, t);
            for (std::size_t l = 0; l < lags.size(); ++l) {
                double k = epanechnikov((d - lags[l]) / h) / h;
                if (k > 0.0) {
                    double diff = resid[s] - resid[t];
                    num[l] += diff * diff * k;
                    den[l] += k;
                    pairs[l] += 1;
                }
            }
        }
    for (std::size_t l = 0; l < lags.size(); ++l)
        value[l] = den[l] > 0.0 ? num[l] / (2.0 * den[l]) : std::nan("");
}

// Eq. (6) as a literal ordered double loop (residual attached to the first
// index of each ordered pair).
inline void crosscov_brute(const prefgeo::PointPattern& pat, const std::vector<double>& resid,
                           const std::vector<double>& lags, double h, std::vector<double>& value,
                           std::vector<long>& pairs) {
    value.assign(lags.size(), 0.0);
    pairs.assign(lags.size(), 0);
    std::vector<double> num(lags.size(), 0.0), den(lags.size(), 0.0);
    const std::size_t n = pat.size();
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t) {
            if (s == t) continue;
            double d = dist(pat, s, t);
            for (std::size_t l = 0; l < lags.size(); ++l) {
                double k = epanechnikov((d - lags[l]) / h) / h;
                if (k > 0.0) {
                    num[l] += resid[s] * k;
                    den[l] += k;
                    pairs[l] += 1;
                }
            }
        }
    for (std::size_t l = 0; l < lags.size(); ++l)
        value[l] = den[l] > 0.0 ? num[l] / den[l] : std::nan("");
}

}  // namespace oracle
