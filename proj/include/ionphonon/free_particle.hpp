#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "chain_model.hpp"
#include "errors.hpp"
#include "symplectic.hpp"

// Zero-mode sector. Each zero pair behaves as a free particle on a ring: 𝒬 = c0·φ̂ with
// φ̂ ∈ [−π, π), 𝒫 = Π̂/c0 with integer eigenvalues of Π̂, levels E_m = m²/(2 m̃ c0²).

namespace ionphonon {

struct FreeParticleSector {
    ZeroModeKind kind = ZeroModeKind::Generic;
    double m_tilde = 0.0;
    double c0 = 0.0;
    double circumference = 0.0;  // in d

    double level(long m) const { return static_cast<double>(m) * m / (2.0 * m_tilde * c0 * c0); }
};

// Unit cell used for the k = 0 block: one ion on the straight chain, two on the zigzag.
inline int unit_cell(const Equilibrium& eq) { return eq.delta0 > 0.0 ? 2 : 1; }

inline NormalForm zero_momentum_form(const ChainConfig& cfg, const Equilibrium& eq) {
    const int c = unit_cell(eq);
    const BlochBlock b = build_bloch_block(0.0, cfg, eq, c, bare_frequencies(cfg, eq));
    return symplectic_diagonalize(b.form, chain_diagonalize_options(c, cfg.n_ions));
}

// Sectors from the zero pairs of a k = 0 normal form (p†p = N).
inline std::vector<FreeParticleSector> free_particle_sectors(const ChainConfig& cfg, const Equilibrium& eq,
                                                             const NormalForm& nf0) {
    const auto om = bare_frequencies(cfg, eq);
    std::vector<FreeParticleSector> out;
    for (const auto& zp : nf0.zero_pairs) {
        FreeParticleSector s;
        s.kind = zp.label;
        s.m_tilde = zp.m_tilde;
        if (zp.label == ZeroModeKind::Longitudinal) {
            s.circumference = cfg.n_ions;
            s.c0 = cfg.n_ions * cfg.lambda * std::sqrt(om[X]) / (2.0 * std::numbers::pi);
        } else if (zp.label == ZeroModeKind::Radial) {
            s.circumference = 2.0 * std::numbers::pi * eq.delta0;
            s.c0 = eq.delta0 * cfg.lambda * std::sqrt(om[Z]);
        } else {
            throw ConsistencyError("zero pair without a symmetry label");
        }
        out.push_back(s);
    }
    return out;
}

struct EffectiveMasses {
    double longitudinal = 0.0;
    std::optional<double> radial;
};

inline EffectiveMasses effective_masses(const ChainConfig& cfg, const Equilibrium& eq) {
    const NormalForm nf = zero_momentum_form(cfg, eq);
    const std::size_t expected = (eq.delta0 > 0.0 && cfg.alpha == 1.0) ? 2 : 1;
    if (nf.zero_pairs.size() != expected)
        throw ToleranceError("found " + std::to_string(nf.zero_pairs.size()) + " zero pairs, expected " +
                                 std::to_string(expected) + "; tighten tol_zero",
                             static_cast<double>(nf.zero_pairs.size()));
    EffectiveMasses m;
    for (const auto& zp : nf.zero_pairs) {
        if (zp.label == ZeroModeKind::Longitudinal) m.longitudinal = zp.m_tilde;
        if (zp.label == ZeroModeKind::Radial) m.radial = zp.m_tilde;
    }
    return m;
}

namespace detail {

// Thermal moments ⟨m²⟩ and ⟨m⁴⟩ for weights e^{−a m²}, m ∈ ℤ, summed to |m| ≤ m_cut.
struct LevelMoments {
    double m2 = 0.0;
    double m4 = 0.0;
};

inline LevelMoments level_moments(double a, long m_cut) {
    double z = 1.0, s2 = 0.0, s4 = 0.0;
    for (long m = m_cut; m >= 1; --m) {
        const double md = static_cast<double>(m);
        const double w = 2.0 * std::exp(-a * md * md);
        z += w;
        s2 += w * md * md;
        s4 += w * md * md * md * md;
    }
    return {s2 / z, s4 / z};
}

// Below this a = E_1/T the Poisson-resummed corrections are under e^{−π²/a} < 1e−80.
inline constexpr double kClassicalLevelRatio = 0.05;

inline long auto_cutoff(double a) { return static_cast<long>(std::ceil(std::sqrt(40.0 / a))) + 1; }

}  // namespace detail

// ⟨𝒫²⟩ with levels summed to |m| ≤ m_cut; throws if the first dropped Boltzmann
// weight exceeds 1e−15.
inline double thermal_P_squared(const FreeParticleSector& s, double T, long m_cut) {
    if (T < 0) throw std::invalid_argument("temperature must be >= 0");
    if (T == 0) return 0.0;
    const double a = s.level(1) / T;
    const double tail = std::exp(-a * static_cast<double>(m_cut + 1) * (m_cut + 1));
    if (tail > 1e-15)
        throw ToleranceError("level cutoff " + std::to_string(m_cut) + " leaves Boltzmann tail " +
                                 std::to_string(tail),
                             tail);
    return detail::level_moments(a, m_cut).m2 / (s.c0 * s.c0);
}

// Same with the cutoff chosen from T; in the dense-level regime the exact
// Gaussian result ⟨m²⟩ = 1/(2a) is used.
inline double thermal_P_squared(const FreeParticleSector& s, double T) {
    if (T < 0) throw std::invalid_argument("temperature must be >= 0");
    if (T == 0) return 0.0;
    const double a = s.level(1) / T;
    if (a < detail::kClassicalLevelRatio) return 1.0 / (2.0 * a * s.c0 * s.c0);
    return thermal_P_squared(s, T, detail::auto_cutoff(a));
}

// ⟨𝒬²⟩ = c0²π²/3, independent of the level and of T.
inline double q_variance(const FreeParticleSector& s) {
    return s.c0 * s.c0 * std::numbers::pi * std::numbers::pi / 3.0;
}

inline double free_particle_energy(const FreeParticleSector& s, double T) {
    return thermal_P_squared(s, T) / (2.0 * s.m_tilde);
}

// C = (⟨E²⟩ − ⟨E⟩²)/T².
inline double free_particle_heat_capacity(const FreeParticleSector& s, double T) {
    if (!(T > 0)) return 0.0;
    const double a = s.level(1) / T;
    if (a < detail::kClassicalLevelRatio) return 0.5;
    const auto mo = detail::level_moments(a, detail::auto_cutoff(a));
    return a * a * (mo.m4 - mo.m2 * mo.m2);
}

struct PhaseOperatorBasis {
    int M = 0;
    Eigen::MatrixXcd phi_matrix;    // in the |l⟩ basis, l = −M..M at index l + M
    Eigen::MatrixXcd shift_matrix;  // |l⟩ → |l+1⟩, |M⟩ → |−M⟩
};

// φ̂ = Σ_n φ_n |φ_n⟩⟨φ_n| with |φ_n⟩ = Σ_l e^{−iφ_n l}|l⟩/√(2M+1). In the |l⟩ basis it is
// Toeplitz: ⟨l|φ̂|l'⟩ = (1/(2M+1)) Σ_n φ_n e^{−iφ_n (l−l')}.
inline PhaseOperatorBasis phase_operator(int M) {
    if (M < 1) throw std::invalid_argument("M must be >= 1");
    const int n = 2 * M + 1;
    std::vector<cd> diag(2 * n - 1, 0.0);  // index (l − l') + n − 1
    for (int dl = -(n - 1); dl <= n - 1; ++dl) {
        // ±φ_n pair up: φ(e^{−iφΔ} − e^{iφΔ}) = −2iφ sin(φΔ), so the diagonal is exactly 0
        double acc = 0.0;
        for (int a = 1; a <= M; ++a) {
            const double phi = 2.0 * std::numbers::pi * a / n;
            acc += phi * std::sin(phi * dl);
        }
        diag[dl + n - 1] = cd(0, -2.0 * acc / n);
    }
    PhaseOperatorBasis b;
    b.M = M;
    b.phi_matrix.resize(n, n);
    for (int l = 0; l < n; ++l)
        for (int lp = 0; lp < n; ++lp) b.phi_matrix(l, lp) = diag[l - lp + n - 1];
    b.shift_matrix = Eigen::MatrixXcd::Zero(n, n);
    for (int l = 0; l < n; ++l) b.shift_matrix((l + 1) % n, l) = 1.0;
    return b;
}

// ⟨l|φ̂²|l⟩ = Σ_{l'} |⟨l|φ̂|l'⟩|².
inline double phase_variance(const PhaseOperatorBasis& b, int l) {
    return b.phi_matrix.row(l + b.M).squaredNorm();
}

}  // namespace ionphonon
