#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace ionphonon {

inline constexpr double zeta3 = 1.2020569031595942853997381615114499907649862923405;
inline constexpr double zeta5 = 1.0369277551433699263313654864570341680570809195019;

// Hurwitz zeta ζ(s, q) = Σ_{n≥0} (n+q)^{-s} for integer s ≥ 2 and q > 0.
// Direct sum of the first 16 terms followed by an Euler–Maclaurin tail;
// the first neglected correction is below 1e-20 relative.
inline double hurwitz_zeta(int s, double q) {
    if (s < 2) throw std::invalid_argument("hurwitz_zeta: s must be >= 2");
    if (!(q > 0.0)) throw std::invalid_argument("hurwitz_zeta: q must be > 0");
    constexpr int kDirect = 16;
    // B_{2j}/(2j)!
    static constexpr double bern[] = {1.0 / 12.0,       -1.0 / 720.0,    1.0 / 30240.0,
                                      -1.0 / 1209600.0, 1.0 / 47900160.0, -691.0 / 1307674368000.0};
    double sum = 0.0;
    for (int n = kDirect - 1; n >= 0; --n) sum += std::pow(n + q, -s);
    const double x = kDirect + q;
    double tail = std::pow(x, 1 - s) / (s - 1) + 0.5 * std::pow(x, -s);
    double poch = s;             // s(s+1)...(s+2j-2)
    double xp = std::pow(x, -s - 1);
    for (int j = 1; j <= 6; ++j) {
        tail += bern[j - 1] * poch * xp;
        poch *= (s + 2 * j - 1) * static_cast<double>(s + 2 * j);
        xp /= x * x;
    }
    return sum + tail;
}

inline double riemann_zeta(int n);

// ζ(2m) for m ≥ 1, tabulated once.
inline double even_zeta(int m) {
    static const std::array<double, 400> table = [] {
        std::array<double, 400> t{};
        for (int i = 1; i < 400; ++i) t[i] = hurwitz_zeta(2 * i, 1.0);
        t[1] = std::numbers::pi * std::numbers::pi / 6.0;
        return t;
    }();
    return m < 400 ? table[m] : 1.0;
}

inline double riemann_zeta(int n) {
    using std::numbers::pi;
    switch (n) {
        case 2: return pi * pi / 6.0;
        case 3: return zeta3;
        case 4: return pi * pi * pi * pi / 90.0;
        case 5: return zeta5;
        default: return hurwitz_zeta(n, 1.0);
    }
}

// Li_s(e^{iθ}) for integer s ≥ 2 from the expansion in μ = iθ around μ = 0,
//   Li_s(e^μ) = Σ_{k≠s-1} ζ(s-k) μ^k/k! + μ^{s-1}/(s-1)! (H_{s-1} − ln(−μ)),
// convergent for |μ| < 2π. θ is reduced to [−π, π] first, so terms decay at
// least like 4^{-m}.
inline std::complex<double> polylog_unit(int s, double theta) {
    using std::numbers::pi;
    if (s < 2) throw std::invalid_argument("polylog_unit: s must be >= 2");
    theta = std::remainder(theta, 2.0 * pi);
    if (theta == 0.0) return riemann_zeta(s);

    const std::complex<double> I(0.0, 1.0);
    std::complex<double> ipow = 1.0;  // i^k
    double fact = 1.0;                // k!
    double tpow = 1.0;                // θ^k
    std::complex<double> sum = 0.0;
    for (int k = 0; k <= s - 2; ++k) {
        sum += riemann_zeta(s - k) * ipow * tpow / fact;
        ipow *= I;
        tpow *= theta;
        fact *= k + 1;
    }
    // k = s-1: logarithmic term
    double harmonic = 0.0;
    for (int j = 1; j <= s - 1; ++j) harmonic += 1.0 / j;
    const std::complex<double> log_minus_mu(std::log(std::abs(theta)), theta > 0 ? -pi / 2 : pi / 2);
    sum += ipow * tpow / fact * (harmonic - log_minus_mu);
    ipow *= I;
    tpow *= theta;
    fact *= s;
    // k = s: ζ(0) = -1/2
    sum += -0.5 * ipow * tpow / fact;

    // k = s + 2m - 1, m ≥ 1: ζ(1-2m)/k! = -(-1)^{m+1} 2ζ(2m) / ((2π)^{2m} (2m)(2m+1)...(2m-1+s))
    const double r = theta / (2.0 * pi);
    double r2m = 1.0;
    for (int m = 1; m < 400; ++m) {
        r2m *= r * r;
        double denom = 1.0;
        for (int i = 1; i <= s; ++i) denom *= 2 * m - 1 + i;
        const double sign = (m % 2 == 1) ? -1.0 : 1.0;
        const int k = s + 2 * m - 1;
        static const std::complex<double> ipows[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const std::complex<double> ik = ipows[k % 4];
        // μ^k = i^k θ^k = i^k θ^{s-1} (2π)^{2m} r^{2m}
        const double mag = sign * 2.0 * even_zeta(m) * r2m * std::pow(theta, s - 1) / denom;
        const std::complex<double> term = ik * mag;
        sum += term;
        if (std::abs(mag) < 1e-18 * std::abs(sum) && m > 2) break;
    }
    return sum;
}

}  // namespace ionphonon
