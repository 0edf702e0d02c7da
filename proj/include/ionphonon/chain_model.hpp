#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "special.hpp"

// Units: m_I = ω_I = d = 1. Potential energies are measured in m_I ω_I² d², so the trap
// contributes ½(y² + α z²) per ion and a pair at separation r contributes (κ/2)/r.
// Energies per ion reported by classical_potential are in E_d = ½ m_I ω_I² d².

namespace ionphonon {

enum class Boundary { PeriodicRing, ThermodynamicLimit };

enum Axis : int { X = 0, Y = 1, Z = 2 };

inline const char* axis_name(int nu) { return nu == X ? "x" : (nu == Y ? "y" : "z"); }

struct ChainConfig {
    double kappa = 0.0;
    double alpha = 1.0;
    double lambda = 50.0;
    int n_ions = 64;
    Boundary boundary = Boundary::PeriodicRing;

    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
        if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
        if (n_ions < 4 || n_ions % 2 != 0)
            throw std::invalid_argument("n_ions must be even and >= 4");
    }
    double trap_curvature(int nu) const { return nu == X ? 0.0 : (nu == Y ? 1.0 : alpha); }
    double e_d() const { return 0.5 * lambda * lambda; }
};

using Vec3 = std::array<double, 3>;
using Mat3 = Eigen::Matrix3d;

struct Equilibrium {
    double delta0 = 0.0;
    std::vector<Vec3> positions;
};

struct Hessian {
    Eigen::MatrixXd matrix;
    int n_ions = 0;
    // dimension-major layout: all x components first, then y, then z
    int index(int l, int nu) const { return nu * n_ions + l; }
};

namespace detail {

inline constexpr int kJMax = 100000;
inline constexpr double kSumTol = 1e-14;

// Second-derivative tensor of the pair energy (κ/2)/|r| at separation r.
inline Mat3 pair_curvature(double dx, double dy, double dz, double kappa) {
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 < 1e-24) throw SingularGeometry("two ions occupy the same position");
    const double r = std::sqrt(r2);
    const double pre = 0.5 * kappa / (r2 * r2 * r);
    const double d[3] = {dx, dy, dz};
    Mat3 t;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) t(a, b) = pre * (3.0 * d[a] * d[b] - (a == b ? r2 : 0.0));
    return t;
}

inline Eigen::Vector3d pair_gradient(double dx, double dy, double dz, double kappa) {
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 < 1e-24) throw SingularGeometry("two ions occupy the same position");
    const double r = std::sqrt(r2);
    return Eigen::Vector3d(dx, dy, dz) * (-0.5 * kappa / (r2 * r));
}

// Leading large-|dx| behaviour of pair_curvature: the straight-chain 1/|dx|³ part plus the
// first transverse-offset cross term. The difference decays like ρ²/|dx|⁵.
inline Mat3 pair_curvature_asymptote(double dx, double dy, double dz, double kappa) {
    const double ax = std::abs(dx);
    const double c3 = kappa / (ax * ax * ax);
    const double c4 = 1.5 * kappa * (dx > 0 ? 1.0 : -1.0) / (ax * ax * ax * ax);
    Mat3 t = Mat3::Zero();
    t(0, 0) = c3;
    t(1, 1) = -0.5 * c3;
    t(2, 2) = -0.5 * c3;
    t(0, 1) = t(1, 0) = c4 * dy;
    t(0, 2) = t(2, 0) = c4 * dz;
    return t;
}

// Σ_n |a + nN|^{-p} (even) or Σ_n sgn(a+nN)|a + nN|^{-p} (odd), 0 < a < N.
inline double periodic_power_sum(int p, double a, double period, bool odd) {
    const double q = a / period;
    const double lo = hurwitz_zeta(p, q), hi = hurwitz_zeta(p, 1.0 - q);
    return (odd ? lo - hi : lo + hi) / std::pow(period, p);
}

// Images of ion b seen from ion a on a ring: minimal image along x; the antipodal
// pair is split evenly over its two images.
struct Image {
    double dx;
    double weight;
};

inline int ring_offset(int a, int b, int n) { return ((a - b) % n + n) % n; }

inline std::array<Image, 2> ring_images(int a, int b, int n, int& count) {
    const int p = ring_offset(a, b, n);
    if (2 * p == n) {
        count = 2;
        return {Image{0.5 * n, 0.5}, Image{-0.5 * n, 0.5}};
    }
    count = 1;
    return {Image{static_cast<double>(2 * p < n ? p : p - n), 1.0}, Image{0.0, 0.0}};
}

// Number of periodic images needed so the ρ²/|dx|⁵ remainder tail stays below kSumTol.
inline int image_cutoff(double rho2, double kappa, double period) {
    if (rho2 == 0.0) return 0;
    const double reach = std::pow(10.0 * kappa * rho2 / (4.0 * period * kSumTol), 0.25);
    const double x = std::max(reach, 10.0 * std::sqrt(rho2));
    return static_cast<int>(std::ceil(x / period)) + 2;
}

// Σ over images a + nN of the pair curvature, for the infinite periodic repetition of an
// N-ion supercell. The asymptote is summed exactly via Hurwitz zeta.
inline Mat3 periodic_pair_curvature(double dx0, double dy, double dz, double period, double kappa) {
    double a = std::fmod(dx0, period);
    if (a < 0) a += period;
    const double e3 = periodic_power_sum(3, a, period, false);
    const double o4 = periodic_power_sum(4, a, period, true);
    Mat3 t = Mat3::Zero();
    t(0, 0) = kappa * e3;
    t(1, 1) = t(2, 2) = -0.5 * kappa * e3;
    t(0, 1) = t(1, 0) = 1.5 * kappa * dy * o4;
    t(0, 2) = t(2, 0) = 1.5 * kappa * dz * o4;
    const double rho2 = dy * dy + dz * dz;
    const int nmax = image_cutoff(rho2, kappa, period);
    for (int n = -nmax; n <= nmax; ++n) {
        const double dx = a + n * period;
        t += pair_curvature(dx, dy, dz, kappa) - pair_curvature_asymptote(dx, dy, dz, kappa);
    }
    return t;
}

inline Eigen::Vector3d periodic_pair_gradient(double dx0, double dy, double dz, double period,
                                              double kappa) {
    double a = std::fmod(dx0, period);
    if (a < 0) a += period;
    const double o2 = periodic_power_sum(2, a, period, true);
    const double e3 = periodic_power_sum(3, a, period, false);
    Eigen::Vector3d g(-0.5 * kappa * o2, -0.5 * kappa * dy * e3, -0.5 * kappa * dz * e3);
    const double rho2 = dy * dy + dz * dz;
    const int nmax = image_cutoff(rho2, kappa, period);
    for (int n = -nmax; n <= nmax; ++n) {
        const double dx = a + n * period;
        const double ax = std::abs(dx);
        g += pair_gradient(dx, dy, dz, kappa) -
             Eigen::Vector3d((dx > 0 ? -1.0 : 1.0) / (ax * ax), -dy / (ax * ax * ax),
                             -dz / (ax * ax * ax)) *
                 (0.5 * kappa);
    }
    return g;
}

// Odd-distance sums for the infinite straight-line-plus-offset chain, n = 2j-1:
//   S(Δ) = Σ_j (4Δ²+n²)^{-3/2}, evaluated as 7ζ(3)/8 + Σ_j [(4Δ²+n²)^{-3/2} − n^{-3}].
inline double odd_inverse_cube_sum(double delta, double tol) {
    const double s2 = 4.0 * delta * delta;
    double sum = 0.0;
    int j = 1;
    for (; j <= kJMax; ++j) {
        const double n = 2.0 * j - 1.0;
        const double term = std::pow(s2 + n * n, -1.5) - 1.0 / (n * n * n);
        sum += term;
        if (std::abs(term) < 1e-3 * tol && j > 8) break;
    }
    const double n_last = 2.0 * std::min(j, kJMax) - 1.0;
    const double bound = 1.5 * s2 / (8.0 * std::pow(n_last, 4));
    if (bound > tol)
        throw ToleranceError("odd-distance lattice sum tail bound " + std::to_string(bound) +
                                 " exceeds tolerance at j_max",
                             bound);
    return 7.0 * zeta3 / 8.0 + sum;
}

inline Vec3 ion_position(int l, double delta) {
    return {static_cast<double>(l), (l % 2 == 0) ? delta : -delta, 0.0};
}

}  // namespace detail

inline Equilibrium make_equilibrium(const ChainConfig& cfg, double delta) {
    Equilibrium eq;
    eq.delta0 = delta;
    eq.positions.reserve(cfg.n_ions);
    for (int l = 0; l < cfg.n_ions; ++l) eq.positions.push_back(detail::ion_position(l, delta));
    return eq;
}

// V(Δ)/(N E_d). In ThermodynamicLimit mode the Coulomb sum diverges logarithmically with a
// Δ-independent constant; the value returned is relative to the straight chain (Δ = 0).
inline double classical_potential(double delta, const ChainConfig& cfg) {
    if (delta < 0) throw std::invalid_argument("delta must be >= 0");
    const double kappa = cfg.kappa;
    double v = delta * delta;
    if (cfg.boundary == Boundary::PeriodicRing) {
        const int n = cfg.n_ions;
        double coul = 0.0;
        for (int b = 1; b < n; ++b) {
            int cnt;
            const auto imgs = detail::ring_images(0, b, n, cnt);
            const double dy = (b % 2 == 0) ? 0.0 : 2.0 * delta;
            for (int i = 0; i < cnt; ++i)
                coul += imgs[i].weight / std::hypot(imgs[i].dx, dy);
        }
        return v + 0.5 * kappa * coul;
    }
    const double s2 = 4.0 * delta * delta;
    double sum = 0.0;
    int j = 1;
    for (; j <= detail::kJMax; ++j) {
        const double n = 2.0 * j - 1.0;
        const double term = 1.0 / std::sqrt(s2 + n * n) - 1.0 / n + 0.5 * s2 / (n * n * n);
        sum += term;
        if (std::abs(term) < 1e-3 * detail::kSumTol && j > 8) break;
    }
    const double n_last = 2.0 * std::min(j, detail::kJMax) - 1.0;
    const double bound = 3.0 * s2 * s2 / (64.0 * std::pow(n_last, 4));
    if (bound > 1e-12)
        throw ToleranceError("potential tail bound " + std::to_string(bound) + " exceeds tolerance",
                             bound);
    return v + kappa * (sum - 0.5 * s2 * 7.0 * zeta3 / 8.0);
}

// dV/dΔ per ion in E_d is 2Δ·stiffness(Δ); the zigzag root is the zero of stiffness.
inline double zigzag_stiffness(double delta, const ChainConfig& cfg) {
    if (cfg.boundary == Boundary::ThermodynamicLimit)
        return 1.0 - 2.0 * cfg.kappa * detail::odd_inverse_cube_sum(delta, 1e-15);
    const int n = cfg.n_ions;
    double s = 0.0;
    for (int b = 1; b < n; b += 2) {
        int cnt;
        const auto imgs = detail::ring_images(0, b, n, cnt);
        for (int i = 0; i < cnt; ++i)
            s += imgs[i].weight * std::pow(4.0 * delta * delta + imgs[i].dx * imgs[i].dx, -1.5);
    }
    return 1.0 - cfg.kappa * s;
}

inline double potential_derivative(double delta, const ChainConfig& cfg) {
    return 2.0 * delta * zigzag_stiffness(delta, cfg);
}

// Largest root of dV/dΔ on (0, 2], by bisection carried to machine resolution so that the
// force residual is limited by rounding, not by the stopping rule.
inline Equilibrium solve_delta0(const ChainConfig& cfg, double tol = 1e-12) {
    cfg.validate();
    if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
    double lo = 0.0, hi = 2.0;
    const double s_lo = zigzag_stiffness(lo, cfg);
    if (s_lo >= -tol) return make_equilibrium(cfg, 0.0);
    if (zigzag_stiffness(hi, cfg) <= 0.0)
        throw BracketError("no sign change of dV/dDelta on (0, 2]", lo, hi);
    while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (zigzag_stiffness(mid, cfg) < 0.0 ? lo : hi) = mid;
    }
    const double root = std::abs(zigzag_stiffness(lo, cfg)) < std::abs(zigzag_stiffness(hi, cfg)) ? lo : hi;
    if (std::abs(potential_derivative(root, cfg)) > tol)
        throw BracketError("bisection did not reach the requested residual", lo, hi);
    return make_equilibrium(cfg, root);
}

// Per-site curvature of the potential (trap + all other ions) at the equilibrium of
// sublattice 0; identical on every site by symmetry.
inline Mat3 onsite_curvature(const ChainConfig& cfg, const Equilibrium& eq) {
    const double kappa = cfg.kappa, delta = eq.delta0;
    Mat3 t = Mat3::Zero();
    if (cfg.boundary == Boundary::PeriodicRing) {
        const int n = cfg.n_ions;
        for (int b = 1; b < n; ++b) {
            int cnt;
            const auto imgs = detail::ring_images(0, b, n, cnt);
            const double dy = (b % 2 == 0) ? 0.0 : 2.0 * delta;
            for (int i = 0; i < cnt; ++i)
                t += imgs[i].weight * detail::pair_curvature(imgs[i].dx, dy, 0.0, kappa);
        }
    } else {
        // straight-chain asymptote over all m ≠ 0 is diag(2, -1, -1)κζ(3); odd cross terms cancel
        t(0, 0) = 2.0 * kappa * zeta3;
        t(1, 1) = t(2, 2) = -kappa * zeta3;
        const double dy = 2.0 * delta;
        if (dy != 0.0) {
            const int mmax = detail::image_cutoff(dy * dy, kappa, 1.0);
            for (int m = 1; m <= mmax; m += 2) {
                for (double dx : {double(m), -double(m)})
                    t += detail::pair_curvature(dx, dy, 0.0, kappa) -
                         detail::pair_curvature_asymptote(dx, dy, 0.0, kappa);
            }
        }
    }
    for (int nu = 0; nu < 3; ++nu) t(nu, nu) += cfg.trap_curvature(nu);
    return t;
}

// Per-dimension local oscillator frequencies Ω_ν (site independent).
inline std::array<double, 3> bare_frequencies(const ChainConfig& cfg, const Equilibrium& eq) {
    const Mat3 t = onsite_curvature(cfg, eq);
    std::array<double, 3> om{};
    for (int nu = 0; nu < 3; ++nu) {
        if (!(t(nu, nu) > 0.0))
            throw BareInstability(std::string("bare frequency Omega_") + axis_name(nu) +
                                      " is imaginary (Omega^2 = " + std::to_string(t(nu, nu)) + ")",
                                  t(nu, nu));
        om[nu] = std::sqrt(t(nu, nu));
    }
    return om;
}

// Coulomb curvature summed over all copies of ion b as seen from ion a.
inline Mat3 coupled_pair_curvature(const ChainConfig& cfg, const Equilibrium& eq, int a, int b) {
    const int n = cfg.n_ions;
    const auto& ra = eq.positions[a];
    const auto& rb = eq.positions[b];
    const double dy = ra[1] - rb[1], dz = ra[2] - rb[2];
    if (cfg.boundary == Boundary::PeriodicRing) {
        int cnt;
        const auto imgs = detail::ring_images(a, b, n, cnt);
        Mat3 t = Mat3::Zero();
        for (int i = 0; i < cnt; ++i)
            t += imgs[i].weight * detail::pair_curvature(imgs[i].dx, dy, dz, cfg.kappa);
        return t;
    }
    return detail::periodic_pair_curvature(ra[0] - rb[0], dy, dz, n, cfg.kappa);
}

inline Hessian build_hessian(const ChainConfig& cfg, const Equilibrium& eq) {
    cfg.validate();
    const int n = cfg.n_ions;
    if (static_cast<int>(eq.positions.size()) != n)
        throw std::invalid_argument("equilibrium has the wrong number of ions");
    Hessian hs;
    hs.n_ions = n;
    hs.matrix = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    std::vector<Mat3> self(n, Mat3::Zero());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const Mat3 t = coupled_pair_curvature(cfg, eq, a, b);
            self[a] += t;
            self[b] += t;
            for (int mu = 0; mu < 3; ++mu)
                for (int nu = 0; nu < 3; ++nu) {
                    hs.matrix(hs.index(a, mu), hs.index(b, nu)) = -t(mu, nu);
                    hs.matrix(hs.index(b, nu), hs.index(a, mu)) = -t(mu, nu);
                }
        }
    }
    for (int a = 0; a < n; ++a)
        for (int mu = 0; mu < 3; ++mu)
            for (int nu = 0; nu < 3; ++nu)
                hs.matrix(hs.index(a, mu), hs.index(a, nu)) =
                    self[a](mu, nu) + (mu == nu ? cfg.trap_curvature(mu) : 0.0);
    return hs;
}

// Max-norm of the potential gradient over all 3N coordinates.
inline double equilibrium_residual(const ChainConfig& cfg, const Equilibrium& eq) {
    const int n = cfg.n_ions;
    double worst = 0.0;
    for (int a = 0; a < n; ++a) {
        const auto& ra = eq.positions[a];
        Eigen::Vector3d g(0.0, ra[1], cfg.alpha * ra[2]);
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            const auto& rb = eq.positions[b];
            const double dy = ra[1] - rb[1], dz = ra[2] - rb[2];
            if (cfg.boundary == Boundary::PeriodicRing) {
                int cnt;
                const auto imgs = detail::ring_images(a, b, n, cnt);
                for (int i = 0; i < cnt; ++i)
                    g += imgs[i].weight * detail::pair_gradient(imgs[i].dx, dy, dz, cfg.kappa);
            } else {
                g += detail::periodic_pair_gradient(ra[0] - rb[0], dy, dz, n, cfg.kappa);
            }
        }
        worst = std::max(worst, g.cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace ionphonon
