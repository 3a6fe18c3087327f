#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace prefgeo {

// SplitMix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Purpose tags for hierarchical stream splitting. Each (seed, replicate,
// purpose) triple owns an independent, reproducible stream.
enum class Stream : std::uint64_t {
    Covariate = 0,
    Fields = 1,
    Points = 2,
    Nugget = 3,
    Residual = 4,
    Generic = 9,
};

// Deterministic random source. Normal deviates use Box-Muller written out
// explicitly so the draw sequence does not depend on the standard library's
// distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng stream(std::uint64_t seed, std::uint64_t replicate, Stream purpose) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s ^= 0x632be59bd9b4e019ULL + replicate * 0x9e3779b97f4a7c15ULL;
        std::uint64_t b = splitmix64(s);
        s ^= static_cast<std::uint64_t>(purpose) * 0xd1342543de82ef95ULL;
        std::uint64_t c = splitmix64(s);
        return Rng(a ^ (b << 1) ^ (c << 2));
    }

    // Uniform on (0,1), never exactly 0 or 1.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Poisson deviate. Knuth's product method for small means, Hormann's
    // PTRD transformed rejection for large ones.
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) {
            const double limit = std::exp(-mean);
            double prod = uniform();
            long k = 0;
            while (prod > limit) {
                prod *= uniform();
                ++k;
            }
            return k;
        }
        return poisson_ptrd(mean);
    }

  private:
    long poisson_ptrd(double mu) {
        const double smu = std::sqrt(mu);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u = uniform() - 0.5;
            double v = uniform();
            double us = 0.5 - std::abs(u);
            double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<long>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            double rhs = -mu + k * std::log(mu) - std::lgamma(k + 1.0);
            if (lhs <= rhs) return static_cast<long>(k);
        }
    }

    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Inverse of the standard normal CDF (Acklam's rational approximation,
// relative error below 1.2e-9; ample for confidence-interval quantiles).
inline double normal_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p <= 0.0 || p >= 1.0) throw std::domain_error("normal_quantile: p in (0,1) required");
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace prefgeo
