#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "chain_model.hpp"
#include "errors.hpp"
#include "special.hpp"
#include "symplectic.hpp"

// Bloch blocks use a c-ion unit cell (c = 1 straight chain, c = 2 zigzag) with
// a_{k,s,ν} = √(c/N) Σ_j e^{−ikcj} b_{(cj+s),ν}. Block indices are dimension-major:
// index = ν·c + s.

namespace ionphonon {

// Li₃(e^{−iθ})
inline cd polylog3(double theta) { return polylog_unit(3, -theta); }

inline double critical_kappa() { return 4.0 / (7.0 * zeta3); }

// Local frequency of the straight infinite chain.
inline double linear_bare_frequency(int nu, double kappa, double alpha) {
    const double w2 = nu == X ? 2.0 * kappa * zeta3 : (nu == Y ? 1.0 : alpha) - kappa * zeta3;
    if (!(w2 > 0))
        throw BareInstability(std::string("bare frequency Omega_") + axis_name(nu) + " is imaginary", w2);
    return std::sqrt(w2);
}

inline double coupling_f(double k, int nu, double kappa, double omega_bare) {
    const double re = polylog3(k).real();
    return nu == X ? -kappa * re / omega_bare : 0.5 * kappa * re / omega_bare;
}

inline double dispersion_linear_squared(double k, int nu, double kappa, double alpha) {
    const double gap = zeta3 - polylog3(k).real();
    if (nu == X) return 2.0 * kappa * gap;
    return (nu == Y ? 1.0 : alpha) - kappa * gap;
}

inline double dispersion_linear(double k, int nu, double kappa, double alpha = 1.0) {
    const double w2 = dispersion_linear_squared(k, nu, kappa, alpha);
    if (w2 < 0) {
        const double w = std::sqrt(-w2);
        throw DynamicalInstability("imaginary frequency on the " + std::string(axis_name(nu)) +
                                       " branch at k = " + std::to_string(k),
                                   {cd(0, w), cd(0, -w)});
    }
    return std::sqrt(w2);
}

struct ModeAmplitudes {
    double u;
    double v;
};

inline ModeAmplitudes mode_vectors_linear(double k, int nu, double kappa, double alpha = 1.0) {
    const double om = linear_bare_frequency(nu, kappa, alpha);
    const double f = coupling_f(k, nu, kappa, om);
    const double w = dispersion_linear(k, nu, kappa, alpha);
    if (!(w > 0)) throw std::domain_error("zero mode: use the zero-subspace construction");
    const double a = (om + f) / (2.0 * w);
    const double v = std::sqrt(std::max(0.0, a - 0.5));
    return {std::sqrt(a + 0.5), f < 0 ? -v : v};
}

// κ at which ω_y(k) vanishes, by bisection on the transverse dispersion.
inline double softening_kappa(double k = std::numbers::pi, double alpha = 1.0, double tol = 1e-14) {
    double lo = 0.0, hi = 1.0 / zeta3;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (dispersion_linear_squared(k, Y, mid, alpha) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct BlochBlock {
    double k = 0.0;
    int cell = 1;
    QuadraticForm form;
};

namespace detail {

// Σ_{m odd ≥ 1} e^{−iθm}/m^p
inline cd odd_polylog(int p, double theta) {
    return polylog_unit(p, -theta) - std::pow(2.0, -p) * polylog_unit(p, -2.0 * theta);
}

// Σ_J e^{−ikcJ} T(R_{J,s} − R_{0,s'}) for the infinite crystal.
inline Eigen::Matrix3cd bulk_cell_sum(double k, int c, int s, int sp, double delta, double kappa) {
    const int off = s - sp;
    const double dy = (s == sp) ? 0.0 : ((s % 2 == 0) ? 2.0 * delta : -2.0 * delta);
    cd e3, o4 = 0.0;
    if (off == 0) {
        e3 = 2.0 * polylog_unit(3, k * c).real() / std::pow(c, 3);
    } else {
        const cd ph = std::exp(cd(0, k * off));
        e3 = ph * (odd_polylog(3, k) + odd_polylog(3, -k));
        o4 = ph * (odd_polylog(4, k) - odd_polylog(4, -k));
    }
    Eigen::Matrix3cd t = Eigen::Matrix3cd::Zero();
    t(0, 0) = kappa * e3;
    t(1, 1) = t(2, 2) = -0.5 * kappa * e3;
    t(0, 1) = t(1, 0) = 1.5 * kappa * dy * o4;
    if (dy != 0.0) {
        const int reach = image_cutoff(dy * dy, kappa, 1.0);
        for (int j = -(reach / c) - 1; j <= reach / c + 1; ++j) {
            const double dx = c * j + off;
            if (dx == 0.0) continue;
            const Mat3 r = pair_curvature(dx, dy, 0.0, kappa) - pair_curvature_asymptote(dx, dy, 0.0, kappa);
            t += std::exp(cd(0, -k * c * j)) * r.cast<cd>();
        }
    }
    return t;
}

inline Eigen::Matrix3cd ring_cell_sum(double k, int c, int s, int sp, const ChainConfig& cfg,
                                      const Equilibrium& eq) {
    const int n = cfg.n_ions;
    Eigen::Matrix3cd t = Eigen::Matrix3cd::Zero();
    for (int j = 0; j < n / c; ++j) {
        const int a = c * j + s;
        if (a == sp) continue;
        const double dy = eq.positions[a][1] - eq.positions[sp][1];
        const double dz = eq.positions[a][2] - eq.positions[sp][2];
        int cnt;
        const auto imgs = ring_images(a, sp, n, cnt);
        for (int i = 0; i < cnt; ++i) {
            const double cell_shift = imgs[i].dx - (s - sp);
            t += imgs[i].weight * std::exp(cd(0, -k * cell_shift)) *
                 pair_curvature(imgs[i].dx, dy, dz, cfg.kappa).cast<cd>();
        }
    }
    return t;
}

}  // namespace detail

// Per-k coupling block for a c-ion cell (c = 1 requires the straight chain).
inline BlochBlock build_bloch_block(double k, const ChainConfig& cfg, const Equilibrium& eq, int cell,
                                    const std::array<double, 3>& omega) {
    if (cell != 1 && cell != 2) throw std::invalid_argument("cell must be 1 or 2");
    if (cell == 1 && eq.delta0 != 0.0) throw std::invalid_argument("a one-ion cell needs the straight chain");
    const int n = 3 * cell;
    const Mat3 onsite = onsite_curvature(cfg, eq);
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);
    for (int s = 0; s < cell; ++s)
        for (int sp = 0; sp < cell; ++sp) {
            const Eigen::Matrix3cd t = cfg.boundary == Boundary::ThermodynamicLimit
                                           ? detail::bulk_cell_sum(k, cell, s, sp, eq.delta0, cfg.kappa)
                                           : detail::ring_cell_sum(k, cell, s, sp, cfg, eq);
            for (int mu = 0; mu < 3; ++mu)
                for (int nu = 0; nu < 3; ++nu) {
                    cd val = -t(mu, nu);
                    if (s == sp) val += onsite(mu, nu);
                    v(mu * cell + s, nu * cell + sp) = val;
                }
        }
    Eigen::VectorXd om(n);
    for (int nu = 0; nu < 3; ++nu)
        for (int s = 0; s < cell; ++s) om[nu * cell + s] = omega[nu];
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = (i == j ? v(i, i) - om[i] * om[i] : v(i, j)) / (2.0 * std::sqrt(om[i] * om[j]));
    g = 0.5 * (g + g.adjoint()).eval();
    Eigen::MatrixXcd h = g;
    h.diagonal().array() += om.array().cast<cd>();
    BlochBlock b;
    b.k = k;
    b.cell = cell;
    b.form.h = h;
    b.form.g = g;
    b.form.h_bar = h;
    b.form.omega_bare = om;
    return b;
}

inline BlochBlock build_bloch_block_zigzag(double k, const ChainConfig& cfg, const Equilibrium& eq) {
    return build_bloch_block(k, cfg, eq, 2, bare_frequencies(cfg, eq));
}

// One-dimensional block (Ω + f, f) of the straight infinite chain.
inline BlochBlock build_bloch_block_linear(double k, int nu, double kappa, double alpha = 1.0) {
    const double om = linear_bare_frequency(nu, kappa, alpha);
    const double f = coupling_f(k, nu, kappa, om);
    Eigen::MatrixXcd h(1, 1), g(1, 1);
    h(0, 0) = om + f;
    g(0, 0) = f;
    BlochBlock b;
    b.k = k;
    b.cell = 1;
    b.form = QuadraticForm::paired(h, g, Eigen::VectorXd::Constant(1, om));
    return b;
}

// Momentum patterns of the translation and rotation zero pairs for n sites per dimension
// (n = c for a k = 0 block, n = N for the full space).
inline std::vector<ZeroModeHint> chain_zero_mode_hints(int n) {
    Eigen::VectorXcd lon = Eigen::VectorXcd::Zero(3 * n), rad = Eigen::VectorXcd::Zero(3 * n);
    for (int l = 0; l < n; ++l) {
        lon[X * n + l] = cd(0, 1);
        rad[Z * n + l] = cd(0, l % 2 == 0 ? 1.0 : -1.0);
    }
    return {{ZeroModeKind::Longitudinal, lon}, {ZeroModeKind::Radial, rad}};
}

inline DiagonalizeOptions chain_diagonalize_options(int n_sites, int n_ions) {
    DiagonalizeOptions o;
    o.zero_norm = n_ions;
    o.hints = chain_zero_mode_hints(n_sites);
    return o;
}

// Angle between in-plane x and y motion of a mode: arctan(y-weight / x-weight).
inline double mixing_angle(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v, int cell) {
    double wx = 0.0, wy = 0.0;
    for (int s = 0; s < cell; ++s) {
        wx += std::norm(u[X * cell + s]) + std::norm(v[X * cell + s]);
        wy += std::norm(u[Y * cell + s]) + std::norm(v[Y * cell + s]);
    }
    const double tot = u.squaredNorm() + v.squaredNorm();
    if (wx + wy <= 1e-12 * tot) return std::numeric_limits<double>::quiet_NaN();
    return std::atan2(wy, wx);
}

inline double mixing_angle(const BogoliubovMode& m, int cell = 2) { return mixing_angle(m.u, m.v, cell); }

inline double collectivity(const BogoliubovMode& m) { return m.v.norm() / m.u.norm(); }

struct DispersionRecord {
    double k = 0.0;
    int branch = 0;
    double omega = 0.0;
    Eigen::VectorXcd u;
    Eigen::VectorXcd v;
    double theta_xy = 0.0;
    double collectivity = 0.0;
    bool zero_mode = false;
};

struct DispersionTable {
    std::vector<DispersionRecord> records;
    int n_k = 0;
    double kappa = 0.0;
    double delta0 = 0.0;
    std::vector<std::string> warnings;
};

// Uniform grid over [−π/c, π/c).
inline std::vector<double> brillouin_grid(int n_k, int cell) {
    std::vector<double> k(n_k);
    const double w = 2.0 * std::numbers::pi / cell;
    for (int i = 0; i < n_k; ++i) k[i] = -0.5 * w + w * i / n_k;
    return k;
}

inline DispersionTable dispersion_zigzag(const std::vector<double>& k_grid, const ChainConfig& cfg) {
    cfg.validate();
    const Equilibrium eq = solve_delta0(cfg);
    const auto omega = bare_frequencies(cfg, eq);
    DispersionTable tab;
    tab.n_k = static_cast<int>(k_grid.size());
    tab.kappa = cfg.kappa;
    tab.delta0 = eq.delta0;
    const int nb = 6;
    std::vector<Eigen::VectorXcd> prev;
    std::vector<bool> prev_zero;
    std::vector<int> prev_label;
    for (size_t ik = 0; ik < k_grid.size(); ++ik) {
        const double k = k_grid[ik];
        const BlochBlock blk = build_bloch_block(k, cfg, eq, 2, omega);
        const NormalForm nf = symplectic_diagonalize(blk.form, chain_diagonalize_options(2, cfg.n_ions));
        if (nf.stability != Stability::Stable)
            throw DynamicalInstability("unstable spectrum at k = " + std::to_string(k), {});
        std::vector<DispersionRecord> recs;
        std::vector<Eigen::VectorXcd> xs;
        std::vector<bool> zs;
        for (const auto& zp : nf.zero_pairs) {
            DispersionRecord r;
            r.k = k;
            r.zero_mode = true;
            r.u = zp.p.head(6);
            r.v = r.u.conjugate();
            xs.push_back(zp.p);
            zs.push_back(true);
            recs.push_back(r);
        }
        for (auto it = nf.modes.rbegin(); it != nf.modes.rend(); ++it) {
            DispersionRecord r;
            r.k = k;
            r.omega = it->omega;
            r.u = it->u;
            r.v = it->v;
            xs.push_back(it->x());
            zs.push_back(false);
            recs.push_back(r);
        }
        for (auto& r : recs) {
            r.theta_xy = mixing_angle(r.u, r.v, 2);
            r.collectivity = r.v.norm() / r.u.norm();
        }
        std::vector<int> label(nb, -1);
        if (prev.empty()) {
            for (int i = 0; i < nb; ++i) label[i] = i;
        } else {
            Eigen::MatrixXd ov(nb, nb);
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j) {
                    if (!prev_zero[i] && !zs[j])
                        ov(i, j) = std::abs(detail::sigma_dot(prev[i], xs[j]));
                    else
                        ov(i, j) = std::abs(prev[i].dot(xs[j])) / (prev[i].norm() * xs[j].norm());
                }
            std::vector<bool> used_i(nb, false), used_j(nb, false);
            for (int step = 0; step < nb; ++step) {
                double best = -1;
                int bi = 0, bj = 0;
                for (int i = 0; i < nb; ++i)
                    for (int j = 0; j < nb; ++j)
                        if (!used_i[i] && !used_j[j] && ov(i, j) > best) {
                            best = ov(i, j);
                            bi = i;
                            bj = j;
                        }
                used_i[bi] = used_j[bj] = true;
                label[bj] = prev_label[bi];
                if (best < 0.5)
                    tab.warnings.push_back("ambiguous branch continuation at k = " + std::to_string(k) +
                                           " (overlap " + std::to_string(best) + ")");
            }
        }
        std::vector<int> order(nb);
        for (int i = 0; i < nb; ++i) order[label[i]] = i;
        for (int b = 0; b < nb; ++b) {
            recs[order[b]].branch = b;
            tab.records.push_back(recs[order[b]]);
        }
        prev = xs;
        prev_zero = zs;
        prev_label = label;
    }
    return tab;
}

// (1/N) Σ_{l,l'} e^{−i(k_m l − k_{m'} l')} f(dist(l − l')) for all m ≠ m'; returns the largest
// magnitude. k_m = −π + 2πm/N, dist is the ring distance and f(0) = 0.
inline double verify_f_diagonality(int n, const std::function<double(int)>& f) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("N must be even");
    std::vector<double> fd(n);
    for (int p = 0; p < n; ++p) fd[p] = p == 0 ? 0.0 : f(std::min(p, n - p));
    Eigen::MatrixXcd ph(n, n);  // e^{−i k_m l}
    for (int m = 0; m < n; ++m)
        for (int l = 0; l < n; ++l) {
            const double km = -std::numbers::pi + 2.0 * std::numbers::pi * m / n;
            ph(m, l) = std::exp(cd(0, -km * l));
        }
    Eigen::MatrixXd kern(n, n);
    for (int l = 0; l < n; ++l)
        for (int lp = 0; lp < n; ++lp) kern(l, lp) = fd[((l - lp) % n + n) % n];
    const Eigen::MatrixXcd fm = ph * kern.cast<cd>() * ph.adjoint() / static_cast<double>(n);
    double worst = 0.0;
    for (int m = 0; m < n; ++m)
        for (int mp = 0; mp < n; ++mp)
            if (m != mp) worst = std::max(worst, std::abs(fm(m, mp)));
    return worst;
}

}  // namespace ionphonon
