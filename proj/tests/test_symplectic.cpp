#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "ionphonon/bloch.hpp"
#include "ionphonon/chain_model.hpp"
#include "ionphonon/symplectic.hpp"

using namespace ionphonon;
using Catch::Approx;

namespace {

// Random positive-definite paired form: h Hermitian, g symmetric, H = [[h, g], [g*, h*]].
QuadraticForm random_form(int d, std::mt19937& rng, double shift) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXcd a(d, d), b(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            a(i, j) = cd(n(rng), n(rng));
            b(i, j) = cd(n(rng), n(rng));
        }
    Eigen::MatrixXcd h = 0.2 * (a + a.adjoint());
    Eigen::MatrixXcd g = 0.1 * (b + b.transpose());
    h.diagonal().array() += shift;
    return QuadraticForm::paired(h, g, Eigen::VectorXd::Constant(d, shift));
}

// Positive eigenvalues of ΣH from the general eigensolver, sorted.
std::vector<double> oracle_frequencies(const QuadraticForm& f) {
    Eigen::MatrixXcd sh = f.matrix();
    sh.bottomRows(f.dim()) *= -1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ce(sh);
    std::vector<double> w;
    for (int i = 0; i < sh.rows(); ++i)
        if (ce.eigenvalues()[i].real() > 0) w.push_back(ce.eigenvalues()[i].real());
    std::sort(w.begin(), w.end());
    return w;
}

}  // namespace

TEST_CASE("single mode with anomalous coupling", "[symplectic]") {
    Eigen::MatrixXcd h(1, 1), g(1, 1);
    h(0, 0) = 1.3;
    g(0, 0) = 0.4;
    const NormalForm nf = symplectic_diagonalize(QuadraticForm::paired(h, g, Eigen::VectorXd::Constant(1, 0.9)));
    REQUIRE(nf.modes.size() == 1);
    CHECK(nf.modes[0].omega == Approx(std::sqrt(1.3 * 1.3 - 0.4 * 0.4)).epsilon(1e-14));
    const auto& m = nf.modes[0];
    CHECK(std::norm(m.u[0]) - std::norm(m.v[0]) == Approx(1.0).epsilon(1e-14));
    CHECK(nf.stability == Stability::Stable);
}

TEST_CASE("random stable forms match the general eigensolver", "[symplectic]") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + trial % 5;
        const QuadraticForm f = random_form(d, rng, 3.0);
        const NormalForm nf = symplectic_diagonalize(f);
        REQUIRE(nf.stability == Stability::Stable);
        std::vector<double> w;
        for (const auto& m : nf.modes) w.push_back(m.omega);
        std::sort(w.begin(), w.end());
        const auto ref = oracle_frequencies(f);
        REQUIRE(w.size() == ref.size());
        for (size_t i = 0; i < w.size(); ++i) CHECK(w[i] == Approx(ref[i]).epsilon(1e-11));
        const Certificate c = certify(f, nf);
        CHECK(c.completeness < 1e-11);
        CHECK(c.w_inverse < 1e-11);
        CHECK(c.sigma_norm < 1e-11);
        CHECK(c.eigen_residual < 1e-10);
    }
}

TEST_CASE("modes come out in descending frequency with consistent partners", "[symplectic]") {
    std::mt19937 rng(11);
    const QuadraticForm f = random_form(5, rng, 2.5);
    const NormalForm nf = symplectic_diagonalize(f);
    for (size_t i = 1; i < nf.modes.size(); ++i) CHECK(nf.modes[i - 1].omega >= nf.modes[i].omega);
    for (const auto& m : nf.modes) {
        CHECK(m.partner_omega == Approx(m.omega).epsilon(1e-14));
        CHECK(std::abs(detail::sigma_dot(m.partner, m.partner) + 1.0) < 1e-12);
        CHECK(std::abs(detail::sigma_dot(m.x(), m.partner)) < 1e-12);
    }
    CHECK(nf.zero_point_shift == Approx(zero_point_shift(nf)).epsilon(1e-15));
}

TEST_CASE("dynamical instability is reported with its eigenvalues", "[symplectic]") {
    Eigen::MatrixXcd h(1, 1), g(1, 1);
    h(0, 0) = 1.0;
    g(0, 0) = 2.0;
    try {
        symplectic_diagonalize(QuadraticForm::paired(h, g, Eigen::VectorXd::Constant(1, 1.0)));
        FAIL("expected DynamicalInstability");
    } catch (const DynamicalInstability& e) {
        REQUIRE(!e.eigenvalues().empty());
        CHECK(std::abs(e.eigenvalues()[0].imag()) == Approx(std::sqrt(3.0)).epsilon(1e-12));
    }
}

TEST_CASE("negative-energy mode is thermodynamically unstable", "[symplectic]") {
    Eigen::MatrixXcd h(2, 2), g = Eigen::MatrixXcd::Zero(2, 2);
    h << -1.0, 0.0, 0.0, 2.0;
    const NormalForm nf = symplectic_diagonalize(QuadraticForm::paired(h, g, Eigen::VectorXd::Constant(2, 1.0)));
    CHECK(nf.stability == Stability::ThermoUnstable);
    std::vector<double> w;
    for (const auto& m : nf.modes) w.push_back(m.omega);
    std::sort(w.begin(), w.end());
    CHECK(w[0] == Approx(-1.0));
    CHECK(w[1] == Approx(2.0));
}

TEST_CASE("non-Hermitian input is rejected", "[symplectic]") {
    QuadraticForm f;
    f.h = Eigen::MatrixXcd::Identity(2, 2);
    f.h(0, 1) = 0.5;
    f.g = Eigen::MatrixXcd::Zero(2, 2);
    f.h_bar = Eigen::MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(symplectic_diagonalize(f), std::invalid_argument);
}

TEST_CASE("ring zero pairs: Jordan chain, mass and certificates", "[symplectic]") {
    for (double kappa : {0.3, 0.6}) {
        ChainConfig c;
        c.kappa = kappa;
        c.n_ions = 12;
        const auto eq = solve_delta0(c);
        const QuadraticForm f = build_quadratic_form(build_hessian(c, eq));
        const NormalForm nf = symplectic_diagonalize(f, chain_diagonalize_options(12, 12));
        const size_t expected = eq.delta0 > 0 ? 2 : 1;
        REQUIRE(nf.zero_pairs.size() == expected);
        CHECK(nf.zero_pairs[0].label == ZeroModeKind::Longitudinal);
        if (expected == 2) CHECK(nf.zero_pairs[1].label == ZeroModeKind::Radial);
        const Certificate cert = certify(f, nf);
        CHECK(cert.qp < 1e-12);
        CHECK(cert.zero_residual < 1e-10);
        CHECK(cert.completeness < 1e-10);
        CHECK(cert.w_inverse < 1e-10);
        // translation: the effective mass of the centre of mass is N/Ω_x
        const auto om = bare_frequencies(c, eq);
        CHECK(nf.zero_pairs[0].m_tilde == Approx(12.0 / om[X]).epsilon(1e-9));
        for (const auto& zp : nf.zero_pairs) CHECK(zp.p.squaredNorm() == Approx(12.0).epsilon(1e-12));
    }
}

TEST_CASE("zero-pair mass doubles with the system size", "[symplectic]") {
    auto mass = [](int n) {
        ChainConfig c;
        c.kappa = 0.6;
        c.n_ions = n;
        c.boundary = Boundary::ThermodynamicLimit;
        const auto eq = solve_delta0(c);
        // the supercell Hessian diagonal omits self-image terms; use the infinite-chain Ω
        const auto om = bare_frequencies(c, eq);
        Eigen::VectorXd omega(3 * n);
        for (int nu = 0; nu < 3; ++nu) omega.segment(nu * n, n).setConstant(om[nu]);
        const NormalForm nf = symplectic_diagonalize(build_quadratic_form(build_hessian(c, eq), omega),
                                                     chain_diagonalize_options(n, n));
        return nf.zero_pairs;
    };
    const auto a = mass(8), b = mass(16);
    REQUIRE(a.size() == 2);
    REQUIRE(b.size() == 2);
    for (int i = 0; i < 2; ++i) CHECK(b[i].m_tilde / a[i].m_tilde == Approx(2.0).epsilon(1e-9));
}

TEST_CASE("Bogoliubov mode of a single oscillator with zero Hessian curvature", "[symplectic]") {
    // free particle: V = 0 with Ω = 1 gives h = 1/2, g = −1/2
    Hessian hs;
    hs.n_ions = 1;
    hs.matrix = Eigen::MatrixXd::Zero(1, 1);
    const QuadraticForm f = build_quadratic_form(hs, Eigen::VectorXd::Constant(1, 1.0));
    DiagonalizeOptions o;
    const NormalForm nf = symplectic_diagonalize(f, o);
    CHECK(nf.modes.empty());
    REQUIRE(nf.zero_pairs.size() == 1);
    CHECK(nf.zero_pairs[0].m_tilde == Approx(1.0).epsilon(1e-12));
    CHECK(certify(f, nf).qp < 1e-14);
}
