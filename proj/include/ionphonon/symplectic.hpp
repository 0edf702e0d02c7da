#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain_model.hpp"
#include "errors.hpp"

// Bosonic quadratic forms H = ½ b⃗† H b⃗ with b⃗ = (b; b†) and metric Σ = diag(1, −1).
// The coupling matrix is stored in blocks [[h, g], [g†, h_bar]]; a real-space form has
// h_bar = conj(h) and g symmetric, a Bloch block at k ≠ 0 in general does not.

namespace ionphonon {

using cd = std::complex<double>;

struct QuadraticForm {
    Eigen::MatrixXcd h;
    Eigen::MatrixXcd g;
    Eigen::MatrixXcd h_bar;
    Eigen::VectorXd omega_bare;
    double e0 = 0.0;

    int dim() const { return static_cast<int>(h.rows()); }

    Eigen::MatrixXcd matrix() const {
        const int d = dim();
        Eigen::MatrixXcd m(2 * d, 2 * d);
        m << h, g, g.adjoint(), h_bar;
        return m;
    }

    // h_bar = conj(h): the form of a real-space Hamiltonian.
    bool is_paired(double tol = 1e-12) const {
        return (h_bar - h.conjugate()).cwiseAbs().maxCoeff() <= tol &&
               (g - g.transpose()).cwiseAbs().maxCoeff() <= tol;
    }

    static QuadraticForm paired(Eigen::MatrixXcd h, Eigen::MatrixXcd g, Eigen::VectorXd omega) {
        QuadraticForm f;
        f.h_bar = h.conjugate();
        f.h = std::move(h);
        f.g = std::move(g);
        f.omega_bare = std::move(omega);
        return f;
    }
};

enum class Stability { Stable, ThermoUnstable, DynUnstable };

inline const char* stability_name(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::ThermoUnstable: return "thermo-unstable";
        default: return "dyn-unstable";
    }
}

enum class ZeroModeKind { Longitudinal, Radial, Generic };

inline const char* zero_mode_name(ZeroModeKind k) {
    switch (k) {
        case ZeroModeKind::Longitudinal: return "longitudinal";
        case ZeroModeKind::Radial: return "radial";
        default: return "generic";
    }
}

struct BogoliubovMode {
    double omega = 0.0;
    Eigen::VectorXcd u;
    Eigen::VectorXcd v;
    Eigen::VectorXcd partner;  // negative-norm eigenvector y paired with this mode
    double partner_omega = 0.0;  // −(eigenvalue of y); equals omega for a paired form
    int label = 0;

    Eigen::VectorXcd x() const {
        Eigen::VectorXcd r(2 * u.size());
        r << u, -v;
        return r;
    }
};

struct ZeroModePair {
    Eigen::VectorXcd p;
    Eigen::VectorXcd q;
    double m_tilde = 0.0;
    ZeroModeKind label = ZeroModeKind::Generic;
};

struct NormalForm {
    std::vector<BogoliubovMode> modes;
    std::vector<ZeroModePair> zero_pairs;
    double zero_point_shift = 0.0;
    int dimension = 0;
    Stability stability = Stability::Stable;
};

// A guess for the momentum pattern u⁰ of a zero pair: p = (u⁰, −u⁰*) projected on the kernel.
struct ZeroModeHint {
    ZeroModeKind kind;
    Eigen::VectorXcd pattern;
};

struct DiagonalizeOptions {
    double tol = 1e-10;
    double tol_zero = 1e-8;  // relative to max Ω
    double zero_norm = 1.0;  // p†p after normalization (the ion number for chains)
    std::vector<ZeroModeHint> hints;
};

namespace detail {

inline Eigen::MatrixXcd sigma_apply(const Eigen::MatrixXcd& m) {
    const int d = static_cast<int>(m.rows() / 2);
    Eigen::MatrixXcd r = m;
    r.bottomRows(d) *= -1.0;
    return r;
}

inline Eigen::VectorXcd sigma_apply(const Eigen::VectorXcd& v) {
    const int d = static_cast<int>(v.size() / 2);
    Eigen::VectorXcd r = v;
    r.tail(d) *= -1.0;
    return r;
}

inline cd sigma_dot(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return a.dot(sigma_apply(b));
}

// y = τ x*: swap halves and conjugate.
inline Eigen::VectorXcd swap_conjugate(const Eigen::VectorXcd& x) {
    const int d = static_cast<int>(x.size() / 2);
    Eigen::VectorXcd y(x.size());
    y << x.tail(d).conjugate(), x.head(d).conjugate();
    return y;
}

// Antilinear involution whose fixed points have the (u, −u*) layout.
inline Eigen::VectorXcd zero_conjugate(const Eigen::VectorXcd& w) { return -swap_conjugate(w); }

inline int dominant_index(const Eigen::VectorXcd& v) {
    const double mx = v.cwiseAbs().maxCoeff();
    for (int i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) >= (1.0 - 1e-9) * mx) return i;
    return 0;
}

inline void fix_phase(Eigen::VectorXcd& x) {
    const int d = static_cast<int>(x.size() / 2);
    const cd c = x[dominant_index(x.head(d))];
    if (std::abs(c) > 0) x *= std::conj(c) / std::abs(c);
}

inline BogoliubovMode make_mode(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y, double omega,
                                double partner_omega) {
    const int d = static_cast<int>(x.size() / 2);
    BogoliubovMode m;
    m.omega = omega;
    m.u = x.head(d);
    m.v = -x.tail(d);
    m.partner = y;
    m.partner_omega = partner_omega;
    return m;
}

struct KernelData {
    Eigen::MatrixXcd basis;   // orthonormal kernel of H
    Eigen::MatrixXcd pinv;    // min-norm pseudo-inverse of H
};

inline std::vector<ZeroModePair> build_zero_pairs(const KernelData& ker, bool paired,
                                                  const DiagonalizeOptions& opts) {
    const int n0 = static_cast<int>(ker.basis.cols());
    std::vector<ZeroModePair> pairs;
    if (n0 == 0) return pairs;
    const int dd = static_cast<int>(ker.basis.rows());
    const int d = dd / 2;
    std::vector<Eigen::VectorXcd> ps;
    std::vector<ZeroModeKind> kinds;

    auto symmetrize = [&](Eigen::VectorXcd w) -> Eigen::VectorXcd {
        if (paired) w = 0.5 * (w + zero_conjugate(w));
        return w;
    };
    // C-fixed vectors have real mutual overlaps, so Gram-Schmidt keeps the layout.
    auto orthogonalize = [&](Eigen::VectorXcd w) -> Eigen::VectorXcd {
        for (const auto& p : ps) w -= (p.dot(w) / p.squaredNorm()) * p;
        return w;
    };

    for (const auto& hint : opts.hints) {
        if (static_cast<int>(ps.size()) == n0) break;
        if (hint.pattern.size() != d) throw std::invalid_argument("zero-mode hint has wrong size");
        Eigen::VectorXcd hv(dd);
        hv << hint.pattern, -hint.pattern.conjugate();
        Eigen::VectorXcd w = ker.basis * (ker.basis.adjoint() * hv);
        w = orthogonalize(symmetrize(w));
        if (w.norm() > 1e-3 * hv.norm()) {
            ps.push_back(w / w.norm());
            kinds.push_back(hint.kind);
        }
    }
    const int n_hinted = static_cast<int>(ps.size());
    for (int c = 0; c < n0 && static_cast<int>(ps.size()) < n0; ++c) {
        const Eigen::VectorXcd w0 = ker.basis.col(c);
        std::vector<Eigen::VectorXcd> cands;
        if (paired) {
            cands.push_back(w0 + zero_conjugate(w0));
            cands.push_back(cd(0, 1) * (w0 - zero_conjugate(w0)));
        } else {
            cands.push_back(w0);
        }
        for (auto& w : cands) {
            if (static_cast<int>(ps.size()) == n0) break;
            w = orthogonalize(symmetrize(w));
            if (w.norm() > 1e-6) {
                ps.push_back(w / w.norm());
                kinds.push_back(ZeroModeKind::Generic);
            }
        }
    }
    if (static_cast<int>(ps.size()) != n0)
        throw ConsistencyError("could not build a basis of the zero subspace; adjust tol_zero");

    // Decouple the unhinted pairs: diagonalize the inverse-mass matrix p_a† Σ H⁺ Σ p_b.
    const int ng = n0 - n_hinted;
    if (ng > 1) {
        Eigen::MatrixXd s(ng, ng);
        for (int a = 0; a < ng; ++a)
            for (int b = 0; b < ng; ++b)
                s(a, b) = std::real(sigma_apply(ps[n_hinted + a]).dot(ker.pinv * sigma_apply(ps[n_hinted + b])));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
        std::vector<Eigen::VectorXcd> rot(ng, Eigen::VectorXcd::Zero(dd));
        for (int a = 0; a < ng; ++a)
            for (int b = 0; b < ng; ++b) rot[a] += es.eigenvectors()(b, a) * ps[n_hinted + b];
        for (int a = 0; a < ng; ++a) ps[n_hinted + a] = rot[a] / rot[a].norm();
    }

    for (int a = 0; a < n0; ++a) {
        Eigen::VectorXcd p = ps[a] * std::sqrt(opts.zero_norm);
        const cd lead = p[dominant_index(p.head(d))];
        const double sgn = std::abs(lead.imag()) > 1e-9 * std::abs(lead) ? lead.imag() : lead.real();
        if (sgn < 0) p = -p;
        const Eigen::VectorXcd qh = cd(0, -1) * (ker.pinv * sigma_apply(p));
        const double s = std::real(cd(0, -1) * sigma_dot(qh, p));
        if (std::abs(s) < 1e-300) throw ConsistencyError("zero pair has vanishing (q|p)");
        ZeroModePair zp;
        zp.p = p;
        zp.q = qh / s;
        zp.m_tilde = s;
        zp.label = kinds[a];
        pairs.push_back(std::move(zp));
    }
    return pairs;
}

}  // namespace detail

// g = V/(2√(Ω_i Ω_j)) off the diagonal, h = diag(Ω) + g. If Ω_i² differs from V_ii the
// difference is kept on the diagonal of g so that the form still represents V exactly.
inline QuadraticForm build_quadratic_form(const Hessian& hs, const Eigen::VectorXd& omega) {
    const int d = static_cast<int>(hs.matrix.rows());
    if (omega.size() != d) throw std::invalid_argument("omega_bare has the wrong size");
    for (int i = 0; i < d; ++i)
        if (!(omega[i] > 0.0))
            throw BareInstability("bare frequency must be positive", omega[i] * std::abs(omega[i]));
    Eigen::MatrixXcd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            g(i, j) = (i == j ? hs.matrix(i, i) - omega[i] * omega[i] : hs.matrix(i, j)) /
                      (2.0 * std::sqrt(omega[i] * omega[j]));
    Eigen::MatrixXcd h = g;
    h.diagonal().array() += omega.array().cast<cd>();
    return QuadraticForm::paired(std::move(h), std::move(g), omega);
}

inline QuadraticForm build_quadratic_form(const Hessian& hs) {
    const Eigen::VectorXd diag = hs.matrix.diagonal();
    for (int i = 0; i < diag.size(); ++i)
        if (!(diag[i] > 0.0))
            throw BareInstability("bare frequency squared is not positive", diag[i]);
    return build_quadratic_form(hs, diag.cwiseSqrt());
}

inline NormalForm symplectic_diagonalize(const QuadraticForm& form, const DiagonalizeOptions& opts = {}) {
    const int d = form.dim();
    const Eigen::MatrixXcd H = form.matrix();
    const double hscale = std::max(1e-300, H.cwiseAbs().maxCoeff());
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * hscale)
        throw std::invalid_argument("quadratic form is not Hermitian");
    double scale = form.omega_bare.size() ? form.omega_bare.cwiseAbs().maxCoeff() : 0.0;
    if (scale <= 0) scale = hscale;
    const double zero_thr = opts.tol_zero * scale;
    const bool paired = form.is_paired();

    NormalForm nf;
    nf.dimension = d;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXd mu = es.eigenvalues();
    const Eigen::MatrixXcd& V = es.eigenvectors();

    detail::KernelData ker;
    std::vector<int> kidx;
    for (int i = 0; i < 2 * d; ++i)
        if (std::abs(mu[i]) <= zero_thr) kidx.push_back(i);
    ker.basis.resize(2 * d, kidx.size());
    for (size_t c = 0; c < kidx.size(); ++c) ker.basis.col(c) = V.col(kidx[c]);
    Eigen::VectorXd inv_mu(2 * d);
    for (int i = 0; i < 2 * d; ++i) inv_mu[i] = std::abs(mu[i]) <= zero_thr ? 0.0 : 1.0 / mu[i];
    ker.pinv = V * inv_mu.asDiagonal() * V.adjoint();
    const int n0 = static_cast<int>(kidx.size());

    if (mu.minCoeff() >= -zero_thr) {
        // Positive semidefinite: R = H^{1/2} on the range, M = R Σ R is Hermitian and its
        // positive eigenpairs (ω, z) give Σ-orthonormal eigenvectors x = Σ R z / √ω.
        Eigen::VectorXd sq(2 * d);
        for (int i = 0; i < 2 * d; ++i) sq[i] = std::abs(mu[i]) <= zero_thr ? 0.0 : std::sqrt(mu[i]);
        const Eigen::MatrixXcd R = V * sq.asDiagonal() * V.adjoint();
        Eigen::MatrixXcd M = R * detail::sigma_apply(R);
        M = 0.5 * (M + M.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> em(M);
        const Eigen::VectorXd w = em.eigenvalues();
        const int nm = d - n0;
        if (nm < 0) throw ConsistencyError("kernel larger than half the space");
        for (int m = 0; m < nm; ++m) {
            const int ip = 2 * d - 1 - m;  // descending positive eigenvalues
            const double om = w[ip];
            if (!(om > 0))
                throw ConsistencyError("expected a positive symplectic eigenvalue, got " + std::to_string(om));
            Eigen::VectorXcd x = detail::sigma_apply(Eigen::VectorXcd(R * em.eigenvectors().col(ip))) / std::sqrt(om);
            detail::fix_phase(x);
            Eigen::VectorXcd y;
            double om_y = om;
            if (paired) {
                y = detail::swap_conjugate(x);
            } else {
                const int in = m;  // ascending negative eigenvalues
                om_y = -w[in];
                y = detail::sigma_apply(Eigen::VectorXcd(R * em.eigenvectors().col(in))) / std::sqrt(om_y);
            }
            nf.modes.push_back(detail::make_mode(x, y, om, om_y));
        }
        nf.stability = Stability::Stable;
    } else {
        // Indefinite H: fall back to the general eigenproblem of ΣH.
        const Eigen::MatrixXcd SH = detail::sigma_apply(H);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ce(SH);
        const Eigen::VectorXcd lam = ce.eigenvalues();
        std::vector<cd> bad;
        for (int i = 0; i < 2 * d; ++i)
            if (std::abs(lam[i]) > 1e-6 * scale && std::abs(lam[i].imag()) > opts.tol_zero * scale)
                bad.push_back(lam[i]);
        if (!bad.empty()) {
            throw DynamicalInstability("complex symplectic eigenvalue " + std::to_string(bad[0].real()) +
                                           (bad[0].imag() < 0 ? " - " : " + ") +
                                           std::to_string(std::abs(bad[0].imag())) + "i",
                                       bad);
        }
        struct Cand { double lam; Eigen::VectorXcd x; double norm; };
        std::vector<Cand> pos, neg;
        for (int i = 0; i < 2 * d; ++i) {
            if (std::abs(lam[i]) <= 1e-6 * scale) continue;
            Eigen::VectorXcd x = ce.eigenvectors().col(i);
            const double nrm = std::real(detail::sigma_dot(x, x));
            (nrm > 0 ? pos : neg).push_back({lam[i].real(), x, nrm});
        }
        auto by_lam = [](const Cand& a, const Cand& b) { return a.lam > b.lam; };
        std::sort(pos.begin(), pos.end(), by_lam);
        std::sort(neg.begin(), neg.end(), by_lam);
        // Σ-Gram–Schmidt inside clusters of (numerically) equal eigenvalues
        auto orthonormalize = [&](std::vector<Cand>& cs, double sign) {
            for (size_t i = 0; i < cs.size(); ++i) {
                for (size_t j = 0; j < i; ++j)
                    if (std::abs(cs[i].lam - cs[j].lam) <= 1e-9 * scale)
                        cs[i].x -= sign * detail::sigma_dot(cs[j].x, cs[i].x) * cs[j].x;
                const double nrm = sign * std::real(detail::sigma_dot(cs[i].x, cs[i].x));
                if (!(nrm > 0)) throw ConsistencyError("Sigma-norm collapsed during orthogonalization");
                cs[i].x /= std::sqrt(nrm);
            }
        };
        orthonormalize(pos, 1.0);
        orthonormalize(neg, -1.0);
        if (static_cast<int>(pos.size()) != d - n0)
            throw ConsistencyError("positive-norm eigenvector count does not match the kernel size");
        for (size_t m = 0; m < pos.size(); ++m) {
            Eigen::VectorXcd x = pos[m].x;
            detail::fix_phase(x);
            const Cand& hole = neg[neg.size() - 1 - m];
            Eigen::VectorXcd y = paired ? detail::swap_conjugate(x) : hole.x;
            nf.modes.push_back(detail::make_mode(x, y, pos[m].lam, paired ? pos[m].lam : -hole.lam));
        }
        nf.stability = Stability::ThermoUnstable;
    }
    for (size_t m = 0; m < nf.modes.size(); ++m) nf.modes[m].label = static_cast<int>(m);
    nf.zero_pairs = detail::build_zero_pairs(ker, paired, opts);
    if (static_cast<int>(nf.modes.size() + nf.zero_pairs.size()) != d)
        throw ConsistencyError("mode count does not match the dimension");
    double sum = 0.0;
    for (const auto& m : nf.modes) sum += m.omega;
    nf.zero_point_shift = 0.5 * sum;
    return nf;
}

inline double zero_point_shift(const NormalForm& nf) {
    double s = 0.0;
    for (const auto& m : nf.modes) s += m.omega;
    return 0.5 * s;
}

inline double completeness_residual(const NormalForm& nf) {
    const int dd = 2 * nf.dimension;
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(dd, dd);
    for (const auto& m : nf.modes) {
        const Eigen::VectorXcd x = m.x();
        s += x * x.adjoint() - m.partner * m.partner.adjoint();
    }
    for (const auto& zp : nf.zero_pairs)
        s += cd(0, 1) * (zp.q * zp.p.adjoint() - zp.p * zp.q.adjoint());
    s = detail::sigma_apply(Eigen::MatrixXcd(s.adjoint())).adjoint();  // right-multiply by Σ
    s -= Eigen::MatrixXcd::Identity(dd, dd);
    return s.cwiseAbs().maxCoeff();
}

struct WMatrices {
    Eigen::MatrixXcd W;
    Eigen::MatrixXcd W_inverse;
    Eigen::MatrixXcd sigma_tilde;
    double residual = 0.0;  // ‖W W⁻¹ − 1‖_max
};

// Columns ordered [x…, i p…, y…, i q…]; W⁻¹ = Σ̃ W† Σ with Σ̃ = W† Σ W.
inline WMatrices assemble_W(const NormalForm& nf) {
    const int d = nf.dimension;
    const int nm = static_cast<int>(nf.modes.size());
    const int n0 = static_cast<int>(nf.zero_pairs.size());
    if (nm + n0 != d) throw ConsistencyError("zero pairs missing: mode count does not match dimension");
    WMatrices w;
    w.W.resize(2 * d, 2 * d);
    int c = 0;
    for (const auto& m : nf.modes) w.W.col(c++) = m.x();
    for (const auto& zp : nf.zero_pairs) w.W.col(c++) = cd(0, 1) * zp.p;
    for (const auto& m : nf.modes) w.W.col(c++) = m.partner;
    for (const auto& zp : nf.zero_pairs) w.W.col(c++) = cd(0, 1) * zp.q;
    w.sigma_tilde = w.W.adjoint() * detail::sigma_apply(w.W);
    w.W_inverse = w.sigma_tilde * detail::sigma_apply(Eigen::MatrixXcd(w.W)).adjoint();
    w.residual = (w.W * w.W_inverse - Eigen::MatrixXcd::Identity(2 * d, 2 * d)).cwiseAbs().maxCoeff();
    return w;
}

struct Certificate {
    double completeness = 0.0;
    double w_inverse = 0.0;
    double sigma_norm = 0.0;     // max |x†Σx − 1|
    double eigen_residual = 0.0; // max ‖ΣH x − ω x‖
    double qp = 0.0;             // max |(q|p) − i|
    double zero_residual = 0.0;  // max of ‖ΣH p‖ and ‖ΣH q + (i/m̃) p‖
};

inline Certificate certify(const QuadraticForm& form, const NormalForm& nf) {
    Certificate c;
    const Eigen::MatrixXcd SH = detail::sigma_apply(form.matrix());
    for (const auto& m : nf.modes) {
        const Eigen::VectorXcd x = m.x();
        c.sigma_norm = std::max(c.sigma_norm, std::abs(detail::sigma_dot(x, x) - 1.0));
        c.eigen_residual = std::max(c.eigen_residual, (SH * x - m.omega * x).norm());
    }
    for (const auto& zp : nf.zero_pairs) {
        c.qp = std::max(c.qp, std::abs(detail::sigma_dot(zp.q, zp.p) - cd(0, 1)));
        c.zero_residual = std::max(c.zero_residual, (SH * zp.p).norm());
        c.zero_residual =
            std::max(c.zero_residual, (SH * zp.q + cd(0, 1) / zp.m_tilde * zp.p).norm());
    }
    c.completeness = completeness_residual(nf);
    c.w_inverse = assemble_W(nf).residual;
    return c;
}

}  // namespace ionphonon
