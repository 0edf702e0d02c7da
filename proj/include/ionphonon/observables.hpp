#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "chain_model.hpp"
#include "errors.hpp"
#include "free_particle.hpp"
#include "symplectic.hpp"

// Observables from the per-k normal forms. Internally positions are in units of the
// oscillator length ℓ = d/λ (m_I = ω_I = 1); results are returned in d² (divide by λ²).

namespace ionphonon {

struct ZeroModeFlags {
    bool longitudinal = false;
    bool radial = true;

    bool includes(ZeroModeKind k) const {
        return k == ZeroModeKind::Longitudinal ? longitudinal : (k == ZeroModeKind::Radial ? radial : false);
    }
};

struct SpectrumBlock {
    double k = 0.0;
    double weight = 0.0;  // c/N for a ring, 1/n_k for the infinite chain
    NormalForm nf;
};

// All blocks of one configuration. cell = 1 (straight chain), 2 (zigzag) or N (full space,
// a single block holding every ion). Block index of (sublattice s, dimension ν) is ν·cell + s.
struct Spectrum {
    ChainConfig cfg;
    Equilibrium eq;
    int cell = 1;
    bool bulk = false;
    Eigen::VectorXd omega_bare;
    std::vector<SpectrumBlock> blocks;
    std::vector<FreeParticleSector> sectors;

    int index(int s, int nu) const { return nu * cell + s; }
};

inline int default_k_points(int cell) { return cell == 1 ? 1024 : 512; }

// Allowed momenta 2πm/N of a ring, folded into [−π/c, π/c) and sorted.
inline std::vector<double> ring_momenta(int n_ions, int cell) {
    const double pi = std::numbers::pi;
    std::vector<double> k;
    for (int m = 0; m < n_ions / cell; ++m) {
        double q = 2.0 * pi * m / n_ions;
        if (q >= pi / cell) q -= 2.0 * pi / cell;
        k.push_back(q);
    }
    std::sort(k.begin(), k.end());
    return k;
}

// Midpoint grid over [−π/c, π/c); never contains k = 0.
inline std::vector<double> shifted_grid(int n_k, int cell) {
    const double w = 2.0 * std::numbers::pi / cell;
    std::vector<double> k(n_k);
    for (int i = 0; i < n_k; ++i) k[i] = -0.5 * w + w * (i + 0.5) / n_k;
    return k;
}

namespace detail {

inline void require_stable(const NormalForm& nf, double k) {
    if (nf.stability != Stability::Stable)
        throw DynamicalInstability("spectrum is not stable at k = " + std::to_string(k), {});
}

}  // namespace detail

// Ring: the exact N/c momenta. Infinite chain: n_k midpoints (0 picks the default).
inline Spectrum build_spectrum(const ChainConfig& cfg, const Equilibrium& eq, int n_k = 0) {
    cfg.validate();
    Spectrum sp;
    sp.cfg = cfg;
    sp.eq = eq;
    sp.cell = unit_cell(eq);
    sp.bulk = cfg.boundary == Boundary::ThermodynamicLimit;
    const auto om = bare_frequencies(cfg, eq);
    sp.omega_bare.resize(3 * sp.cell);
    for (int nu = 0; nu < 3; ++nu)
        for (int s = 0; s < sp.cell; ++s) sp.omega_bare[sp.index(s, nu)] = om[nu];
    std::vector<double> ks;
    if (sp.bulk) {
        ks = shifted_grid(n_k > 0 ? n_k : default_k_points(sp.cell), sp.cell);
    } else {
        ks = ring_momenta(cfg.n_ions, sp.cell);
    }
    const DiagonalizeOptions opts = chain_diagonalize_options(sp.cell, cfg.n_ions);
    for (double k : ks) {
        SpectrumBlock b;
        b.k = k;
        b.weight = 1.0 / ks.size();
        b.nf = symplectic_diagonalize(build_bloch_block(k, cfg, eq, sp.cell, om).form, opts);
        detail::require_stable(b.nf, k);
        if (!b.nf.zero_pairs.empty()) sp.sectors = free_particle_sectors(cfg, eq, b.nf);
        sp.blocks.push_back(std::move(b));
    }
    return sp;
}

// Full 3N-dimensional diagonalization of a ring as a single block.
inline Spectrum build_full_space_spectrum(const ChainConfig& cfg, const Equilibrium& eq) {
    cfg.validate();
    if (cfg.boundary != Boundary::PeriodicRing) throw std::invalid_argument("full space needs a ring");
    const int n = cfg.n_ions;
    Spectrum sp;
    sp.cfg = cfg;
    sp.eq = eq;
    sp.cell = n;
    const auto om = bare_frequencies(cfg, eq);
    sp.omega_bare.resize(3 * n);
    for (int nu = 0; nu < 3; ++nu)
        for (int l = 0; l < n; ++l) sp.omega_bare[sp.index(l, nu)] = om[nu];
    SpectrumBlock b;
    b.weight = 1.0;
    b.nf = symplectic_diagonalize(build_quadratic_form(build_hessian(cfg, eq), sp.omega_bare),
                                  chain_diagonalize_options(n, n));
    detail::require_stable(b.nf, 0.0);
    sp.sectors = free_particle_sectors(cfg, eq, b.nf);
    sp.blocks.push_back(std::move(b));
    return sp;
}

inline double bose(double w, double T) {
    if (T < 0) throw std::invalid_argument("temperature must be >= 0");
    if (T == 0) return 0.0;
    return 1.0 / std::expm1(w / T);
}

inline const FreeParticleSector* find_sector(const Spectrum& sp, ZeroModeKind k) {
    for (const auto& s : sp.sectors)
        if (s.kind == k) return &s;
    return nullptr;
}

// ⟨A A†⟩ for A = (a_k; a_{−k}†) of one block.
inline Eigen::MatrixXcd nambu_covariance(const Spectrum& sp, const SpectrumBlock& b, double T,
                                         const ZeroModeFlags& flags = {}) {
    if (T < 0) throw std::invalid_argument("temperature must be >= 0");
    const int dd = 2 * b.nf.dimension;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dd, dd);
    for (const auto& m : b.nf.modes) {
        const Eigen::VectorXcd x = m.x();
        g += (bose(m.omega, T) + 1.0) * x * x.adjoint();
        g += bose(m.partner_omega, T) * m.partner * m.partner.adjoint();
    }
    for (const auto& zp : b.nf.zero_pairs) {
        if (!flags.includes(zp.label)) continue;
        const FreeParticleSector* s = find_sector(sp, zp.label);
        if (!s) throw ConsistencyError("zero pair without a free-particle sector");
        g += q_variance(*s) * zp.p * zp.p.adjoint();
        g += thermal_P_squared(*s, T) * zp.q * zp.q.adjoint();
    }
    return g;
}

// ⟨δR_α δR_β†⟩ contribution of one block, in ℓ² (before the cell phase and weight).
inline Eigen::MatrixXcd position_covariance(const Spectrum& sp, const SpectrumBlock& b, double T,
                                            const ZeroModeFlags& flags = {}) {
    const Eigen::MatrixXcd g = nambu_covariance(sp, b, T, flags);
    const int d = b.nf.dimension;
    const Eigen::MatrixXcd pg = g.topRows(d) + g.bottomRows(d);
    Eigen::MatrixXcd c = pg.leftCols(d) + pg.rightCols(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) c(i, j) /= 2.0 * std::sqrt(sp.omega_bare[i] * sp.omega_bare[j]);
    return c;
}

struct PairCorrelators {
    cd adag_a;      // ⟨a†_{k,α} a_{k',β}⟩
    cd a_adag;      // ⟨a_{k,α} a†_{k',β}⟩
    cd adag_adag;   // ⟨a†_{k,α} a†_{k',β}⟩
    cd a_a;         // ⟨a_{k,α} a_{k',β}⟩
};

// The four two-point functions between blocks bk and bkp. Normal ones need k' = k,
// anomalous ones k' = −k; all others vanish.
inline PairCorrelators pair_correlators_k(const Spectrum& sp, std::size_t bk, std::size_t bkp, int s, int sp_,
                                          int nu, int nup, double T, const ZeroModeFlags& flags = {}) {
    if (T < 0) throw std::invalid_argument("temperature must be >= 0");
    const double period = 2.0 * std::numbers::pi / sp.cell;
    auto same = [&](double a, double b) {
        return std::abs(std::remainder(a - b, period)) < 1e-12;
    };
    const int a = sp.index(s, nu), b = sp.index(sp_, nup);
    PairCorrelators r{};
    const double k = sp.blocks[bk].k, kp = sp.blocks[bkp].k;
    if (same(k, kp)) {
        const Eigen::MatrixXcd g = nambu_covariance(sp, sp.blocks[bk], T, flags);
        r.a_adag = g(a, b);
        r.adag_a = g(b, a) - (a == b ? 1.0 : 0.0);
    }
    if (same(k, -kp)) {
        const int d = sp.blocks[bk].nf.dimension;
        // ⟨a_{k,α} a_{−k,β}⟩ is the upper-right block at k; ⟨a†_{k,α} a†_{−k,β}⟩ the
        // lower-left block at −k.
        r.a_a = nambu_covariance(sp, sp.blocks[bk], T, flags)(a, d + b);
        r.adag_adag = nambu_covariance(sp, sp.blocks[bkp], T, flags)(d + a, b);
    }
    return r;
}

struct CorrelatorRequest {
    int delta_j = 0;
    int s = 0;
    int s_prime = 0;
    int nu = X;
    int nu_prime = X;
    double T = 0.0;
    ZeroModeFlags flags{};
};

namespace detail {

// An infinite chain cannot resolve a correlator that both components share with a
// gapless zero pair: its k → 0 weight diverges.
inline void check_convergent(const Spectrum& sp, int a, int b) {
    if (!sp.bulk) return;
    const NormalForm nf0 = zero_momentum_form(sp.cfg, sp.eq);
    const int d = nf0.dimension;
    for (const auto& zp : nf0.zero_pairs) {
        const Eigen::VectorXcd pos = zp.p.head(d) + zp.p.tail(d);
        const double tol = 1e-8 * zp.p.norm();
        if (std::abs(pos[a]) > tol && std::abs(pos[b]) > tol)
            throw DivergenceError(std::string("correlator diverges in the infinite chain through the gapless ") +
                                      zero_mode_name(zp.label) + " branch; use a finite ring",
                                  zero_mode_name(zp.label));
    }
}

}  // namespace detail

// ⟨δR_{j,s,ν} δR_{j',s',ν'}⟩ with j − j' = delta_j, in d².
inline double spatial_correlator(const CorrelatorRequest& req, const Spectrum& sp) {
    if (req.T < 0) throw std::invalid_argument("temperature must be >= 0");
    if (req.delta_j < 0) throw std::invalid_argument("delta_j must be >= 0");
    const int a = sp.index(req.s, req.nu), b = sp.index(req.s_prime, req.nu_prime);
    detail::check_convergent(sp, a, b);
    double sum = 0.0;
    for (const auto& blk : sp.blocks) {
        const cd ph = std::exp(cd(0, blk.k * sp.cell * req.delta_j));
        sum += blk.weight * std::real(ph * position_covariance(sp, blk, req.T, req.flags)(a, b));
    }
    return sum / (sp.cfg.lambda * sp.cfg.lambda);
}

inline double einstein_heat_capacity(double w, double T) {
    if (!(T > 0)) return 0.0;
    const double x = w / T;
    if (x > 700) return 0.0;
    const double e = std::exp(-x);
    return x * x * e / ((1.0 - e) * (1.0 - e));
}

struct HeatCapacity {
    double c = 0.0;  // C/N
    std::vector<std::string> warnings;
};

inline HeatCapacity heat_capacity(double T, const Spectrum& sp, const ZeroModeFlags& flags = {}) {
    if (!(T > 0)) throw std::invalid_argument("temperature must be > 0");
    HeatCapacity hc;
    double w_min = std::numeric_limits<double>::infinity();
    for (const auto& blk : sp.blocks) {
        double s = 0.0;
        for (const auto& m : blk.nf.modes) {
            s += einstein_heat_capacity(m.omega, T);
            w_min = std::min(w_min, m.omega);
        }
        hc.c += blk.weight * s / sp.cell;
    }
    if (!sp.bulk)
        for (const auto& fp : sp.sectors)
            if (flags.includes(fp.kind)) hc.c += free_particle_heat_capacity(fp, T) / sp.cfg.n_ions;
    if (T < w_min)
        hc.warnings.push_back("T = " + std::to_string(T) + " is below the lowest resolved frequency " +
                              std::to_string(w_min) +
                              (sp.bulk ? "; refine the k grid" : "; the finite ring is gapped here"));
    return hc;
}

struct SusceptibilityResult {
    double omega = 0.0;
    cd chi;  // d²/ω_I
    int component = Y;
    int sublattice = 0;
    double eta = 1e-2;
};

// T = 0 local response of δR_{j,s,ν} to a drive ∝ cos(ωt) δR_{j,s,ν}:
// χ = −Σ_{k,γ} (w/2Ω_ν) |⟨k,γ|δR|0⟩|² [1/(ω+ω_kγ+iη) − 1/(ω−ω_kγ+iη)].
inline std::vector<SusceptibilityResult> susceptibility(const std::vector<double>& omega_grid, int nu, int s,
                                                        double eta, const Spectrum& sp) {
    if (nu < 0 || nu > 2) throw std::invalid_argument("component must be x, y or z");
    if (s < 0 || s >= sp.cell) throw std::invalid_argument("sublattice out of range");
    if (!(eta > 0)) throw std::invalid_argument("eta must be > 0");
    const int a = sp.index(s, nu);
    std::vector<double> wts, freqs;
    for (const auto& blk : sp.blocks)
        for (const auto& m : blk.nf.modes) {
            const cd amp = m.u[a] - m.v[a];
            wts.push_back(blk.weight * std::norm(amp) / (2.0 * sp.omega_bare[a]));
            freqs.push_back(m.omega);
        }
    const double l2 = sp.cfg.lambda * sp.cfg.lambda;
    std::vector<SusceptibilityResult> out;
    for (double w : omega_grid) {
        cd chi = 0.0;
        for (size_t i = 0; i < wts.size(); ++i)
            chi -= wts[i] * (1.0 / cd(w + freqs[i], eta) - 1.0 / cd(w - freqs[i], eta));
        out.push_back({w, chi / l2, nu, s, eta});
    }
    return out;
}

// Phase of the displacement relative to the driving force F = −∂V/∂δR, i.e. arg(−χ):
// 0 below the band, ±π above it, π/2 on an isolated resonance.
inline double phase_shift(const SusceptibilityResult& r) { return std::arg(-r.chi); }

// Re χ(ω0) = (1/π) P∫ Im χ(ω')/(ω' − ω0) dω' on a uniform grid, with the singular
// part subtracted and integrated in closed form.
inline double kramers_kronig_real(const std::vector<double>& grid, const std::vector<double>& im, double w0) {
    const size_t n = grid.size();
    if (n < 3 || im.size() != n) throw std::invalid_argument("grid and values must match, n >= 3");
    if (!(w0 > grid.front() && w0 < grid.back())) throw std::invalid_argument("w0 outside the grid");
    const double h = grid[1] - grid[0];
    const size_t i0 = static_cast<size_t>((w0 - grid.front()) / h);
    const double t = (w0 - grid[i0]) / h;
    const double f0 = (1 - t) * im[i0] + t * im[std::min(i0 + 1, n - 1)];
    const double slope = (im[std::min(i0 + 1, n - 1)] - im[i0]) / h;
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = grid[i] - w0;
        const double val = std::abs(dx) < 1e-14 * h ? slope : (im[i] - f0) / dx;
        sum += (i == 0 || i == n - 1 ? 0.5 : 1.0) * val;
    }
    sum *= h;
    sum += f0 * std::log((grid.back() - w0) / (w0 - grid.front()));
    return sum / std::numbers::pi;
}

// ΔE₀/N = (1/2N)[Σ_m ω_m − Σ_{l,ν} Ω_{l,ν}]; zero pairs enter only through their Ω's.
inline double correlation_energy(const Spectrum& sp) {
    double e = 0.0;
    for (const auto& blk : sp.blocks) {
        double s = -sp.omega_bare.sum();
        for (const auto& m : blk.nf.modes) s += m.omega;
        e += blk.weight * 0.5 * s / sp.cell;
    }
    return e;
}

struct GinzburgPoint {
    int n_ions = 0;
    double delta0 = 0.0;
    double variance = 0.0;  // same-site phonon variance along the gapless helical direction, d²
    double value = 0.0;     // variance / (2πΔ̃₀)²
};

// Helical (out-of-plane, z) variance of one ion on rings of the given sizes. The radial
// free-particle offset is left out: it is N-independent and not part of the phonon sum.
inline std::vector<GinzburgPoint> ginzburg_parameter(ChainConfig cfg, const std::vector<int>& n_list) {
    cfg.boundary = Boundary::PeriodicRing;
    std::vector<GinzburgPoint> out;
    for (int n : n_list) {
        cfg.n_ions = n;
        const Equilibrium eq = solve_delta0(cfg);
        if (!(eq.delta0 > 0))
            throw NoOrderParameter("no zigzag order at kappa = " + std::to_string(cfg.kappa) +
                                   ", N = " + std::to_string(n));
        const Spectrum sp = build_spectrum(cfg, eq);
        CorrelatorRequest req;
        req.nu = req.nu_prime = Z;
        req.flags = {false, false};
        GinzburgPoint g;
        g.n_ions = n;
        g.delta0 = eq.delta0;
        g.variance = spatial_correlator(req, sp);
        g.value = g.variance / std::pow(2.0 * std::numbers::pi * eq.delta0, 2);
        out.push_back(g);
    }
    return out;
}

}  // namespace ionphonon
