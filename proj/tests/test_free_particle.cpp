#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ionphonon/free_particle.hpp"

using namespace ionphonon;
using Catch::Approx;

namespace {

FreeParticleSector sector(double m_tilde, double c0) {
    FreeParticleSector s;
    s.kind = ZeroModeKind::Radial;
    s.m_tilde = m_tilde;
    s.c0 = c0;
    return s;
}

// ⟨𝒫²⟩ and ⟨E⟩ by a plain partition sum over |m| ≤ 20000
std::pair<double, double> partition_sum(const FreeParticleSector& s, double T) {
    double z = 0, p2 = 0, e = 0;
    for (long m = 20000; m >= -20000; --m) {
        const double w = std::exp(-s.level(m) / T);
        z += w;
        p2 += w * double(m) * double(m) / (s.c0 * s.c0);
        e += w * s.level(m);
    }
    return {p2 / z, e / z};
}

ChainConfig bulk(double kappa, int n = 64) {
    ChainConfig c;
    c.kappa = kappa;
    c.n_ions = n;
    c.boundary = Boundary::ThermodynamicLimit;
    return c;
}

}  // namespace

TEST_CASE("levels are quadratic in the winding number", "[free]") {
    const auto s = sector(3.0, 0.5);
    CHECK(s.level(0) == 0.0);
    CHECK(s.level(2) == Approx(4.0 / (2 * 3.0 * 0.25)));
    CHECK(s.level(-2) == s.level(2));
}

TEST_CASE("thermal momentum variance against a direct partition sum", "[free]") {
    const auto s = sector(2.0, 0.7);
    // spans both the discrete-level regime and the dense Gaussian one
    for (double T : {0.01, 0.3, 1.0, 5.0, 40.0, 400.0}) {
        const auto [p2, e] = partition_sum(s, T);
        CHECK(thermal_P_squared(s, T) == Approx(p2).epsilon(1e-12));
        CHECK(free_particle_energy(s, T) == Approx(e).epsilon(1e-12));
    }
    CHECK(thermal_P_squared(s, 0.0) == 0.0);
    CHECK_THROWS_AS(thermal_P_squared(s, -1.0), std::invalid_argument);
}

TEST_CASE("short level cutoff is refused", "[free]") {
    const auto s = sector(1.0, 1.0);
    CHECK_THROWS_AS(thermal_P_squared(s, 10.0, 2), ToleranceError);
    CHECK_NOTHROW(thermal_P_squared(s, 10.0, 200));
}

TEST_CASE("free-particle heat capacity is the temperature derivative of the energy", "[free]") {
    const auto s = sector(1.5, 0.8);
    for (double T : {0.05, 0.2, 0.6, 2.0}) {
        const double h = 1e-5 * T;
        const double fd = (partition_sum(s, T + h).second - partition_sum(s, T - h).second) / (2 * h);
        CHECK(free_particle_heat_capacity(s, T) == Approx(fd).epsilon(1e-6));
    }
    CHECK(free_particle_heat_capacity(s, 1e4) == Approx(0.5).epsilon(1e-12));
    CHECK(free_particle_heat_capacity(s, 1e-3) < 1e-100);
    CHECK(free_particle_heat_capacity(s, 0.0) == 0.0);
}

TEST_CASE("phase variance is temperature independent", "[free]") {
    const auto s = sector(1.0, 0.4);
    CHECK(q_variance(s) == Approx(0.16 * std::numbers::pi * std::numbers::pi / 3).epsilon(1e-15));
}

TEST_CASE("effective masses follow the symmetry of the ground state", "[free]") {
    const ChainConfig lin = bulk(0.3);
    const auto eq_lin = solve_delta0(lin);
    const auto m_lin = effective_masses(lin, eq_lin);
    CHECK(m_lin.longitudinal == Approx(64.0 / bare_frequencies(lin, eq_lin)[X]).epsilon(1e-10));
    CHECK_FALSE(m_lin.radial.has_value());

    const ChainConfig zig = bulk(0.6);
    const auto m_zig = effective_masses(zig, solve_delta0(zig));
    REQUIRE(m_zig.radial.has_value());
    CHECK(*m_zig.radial > 0.0);

    // no radial pair without rotational symmetry
    ChainConfig aniso = zig;
    aniso.alpha = 1.4;
    const auto m_an = effective_masses(aniso, solve_delta0(aniso));
    CHECK_FALSE(m_an.radial.has_value());
}

TEST_CASE("effective masses are extensive", "[free]") {
    const auto a = effective_masses(bulk(0.6, 32), solve_delta0(bulk(0.6, 32)));
    const auto b = effective_masses(bulk(0.6, 64), solve_delta0(bulk(0.6, 64)));
    CHECK(b.longitudinal / a.longitudinal == Approx(2.0).epsilon(1e-12));
    CHECK(*b.radial / *a.radial == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sector scales set by the zero-mode geometry", "[free]") {
    ChainConfig c = bulk(0.6, 32);
    c.lambda = 20.0;
    const auto eq = solve_delta0(c);
    const auto secs = free_particle_sectors(c, eq, zero_momentum_form(c, eq));
    REQUIRE(secs.size() == 2);
    const auto om = bare_frequencies(c, eq);
    for (const auto& s : secs) {
        if (s.kind == ZeroModeKind::Longitudinal) {
            CHECK(s.circumference == 32.0);
            CHECK(s.c0 == Approx(32 * 20.0 * std::sqrt(om[X]) / (2 * std::numbers::pi)));
        } else {
            CHECK(s.circumference == Approx(2 * std::numbers::pi * eq.delta0));
            CHECK(s.c0 == Approx(eq.delta0 * 20.0 * std::sqrt(om[Z])));
        }
    }
}

TEST_CASE("discrete phase operator", "[free]") {
    for (int M : {5, 50, 200}) {
        const auto b = phase_operator(M);
        const int n = 2 * M + 1;
        REQUIRE(b.phi_matrix.rows() == n);
        CHECK((b.phi_matrix - b.phi_matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
        for (int l = -M; l <= M; ++l) CHECK(b.phi_matrix(l + M, l + M) == cd(0.0, 0.0));
        CHECK(std::abs(phase_variance(b, 0) - std::numbers::pi * std::numbers::pi / 3) < 10.0 / M);
        const Eigen::MatrixXcd u = b.shift_matrix;
        CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0);
    }
    // eigenvalues are the grid phases 2πa/(2M+1)
    const auto b = phase_operator(6);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.phi_matrix);
    for (int a = -6; a <= 6; ++a)
        CHECK(es.eigenvalues()[a + 6] == Approx(2 * std::numbers::pi * a / 13).margin(1e-12));
    CHECK_THROWS_AS(phase_operator(0), std::invalid_argument);
}
