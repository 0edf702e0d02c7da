#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "ionphonon/chain_model.hpp"
#include "ionphonon/bloch.hpp"

using namespace ionphonon;
using Catch::Approx;

namespace {

ChainConfig make(double kappa, int n, Boundary b) {
    ChainConfig c;
    c.kappa = kappa;
    c.n_ions = n;
    c.boundary = b;
    return c;
}

// Total energy of a ring written out independently: trap plus (κ/2)/r over unordered pairs,
// minimal image along x, the antipodal pair averaged over its two images.
double ring_energy(const ChainConfig& c, const std::vector<double>& r) {
    const int n = c.n_ions;
    double e = 0.0;
    for (int a = 0; a < n; ++a) e += 0.5 * (r[n + a] * r[n + a] + c.alpha * r[2 * n + a] * r[2 * n + a]);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double dy = r[n + a] - r[n + b], dz = r[2 * n + a] - r[2 * n + b];
            const double base = r[a] - r[b];
            const int p = b - a;
            std::vector<std::pair<double, double>> imgs;
            if (2 * p == n) {
                imgs = {{base + 0.0, 0.5}, {base + (base < 0 ? n : -n), 0.5}};
            } else {
                double dx = base;
                if (2 * p > n) dx += n;
                imgs = {{dx, 1.0}};
            }
            for (auto [dx, w] : imgs) e += w * 0.5 * c.kappa / std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    return e;
}

double golden_min(const std::function<double(double)>& f, double a, double b) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    while (b - a > 1e-10) {
        if (f(c) < f(d)) b = d;
        else a = c;
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("config validation rejects bad input", "[chain]") {
    CHECK_THROWS_AS(make(0.0, 8, Boundary::PeriodicRing).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make(0.3, 7, Boundary::PeriodicRing).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make(0.3, 2, Boundary::PeriodicRing).validate(), std::invalid_argument);
    ChainConfig c = make(0.3, 8, Boundary::PeriodicRing);
    c.alpha = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_NOTHROW(make(0.3, 8, Boundary::PeriodicRing).validate());
}

TEST_CASE("straight chain below the transition", "[chain]") {
    for (auto b : {Boundary::PeriodicRing, Boundary::ThermodynamicLimit}) {
        const auto eq = solve_delta0(make(0.3, 16, b));
        CHECK(eq.delta0 == 0.0);
        REQUIRE(eq.positions.size() == 16);
        CHECK(eq.positions[5][0] == 5.0);
    }
}

TEST_CASE("zigzag amplitude minimizes the potential", "[chain]") {
    for (auto b : {Boundary::PeriodicRing, Boundary::ThermodynamicLimit}) {
        const ChainConfig c = make(0.6, 32, b);
        const auto eq = solve_delta0(c);
        const double best = golden_min([&](double d) { return classical_potential(d, c); }, 1e-3, 1.5);
        CHECK(eq.delta0 == Approx(best).epsilon(1e-5));
        CHECK(classical_potential(eq.delta0, c) < classical_potential(0.0, c));
    }
}

TEST_CASE("equilibrium forces vanish", "[chain]") {
    for (auto b : {Boundary::PeriodicRing, Boundary::ThermodynamicLimit})
        for (double k : {0.3, 0.6}) {
            const ChainConfig c = make(k, 16, b);
            CHECK(equilibrium_residual(c, solve_delta0(c)) < 1e-10);
        }
}

TEST_CASE("four-ion ring potential by hand", "[chain]") {
    const ChainConfig c = make(0.7, 4, Boundary::PeriodicRing);
    for (double d : {0.0, 0.1, 0.4}) {
        const double expect = d * d + 0.5 * c.kappa * (2.0 / std::sqrt(1.0 + 4.0 * d * d) + 0.5);
        CHECK(classical_potential(d, c) == Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("odd-distance sum against a reverse brute-force sum", "[chain]") {
    for (double d : {0.0, 0.05, 0.3, 1.0}) {
        double s = 0.0;
        for (long j = 4000000; j >= 1; --j) {
            const double n = 2.0 * j - 1.0;
            s += std::pow(4 * d * d + n * n, -1.5);
        }
        CHECK(detail::odd_inverse_cube_sum(d, 1e-15) == Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("ring Hessian matches finite differences of the energy", "[chain]") {
    for (double k : {0.3, 0.6}) {
        const ChainConfig c = make(k, 8, Boundary::PeriodicRing);
        const auto eq = solve_delta0(c);
        const Hessian hs = build_hessian(c, eq);
        std::vector<double> r(24);
        for (int l = 0; l < 8; ++l)
            for (int nu = 0; nu < 3; ++nu) r[nu * 8 + l] = eq.positions[l][nu];
        const double h = 1e-4;
        double worst = 0.0;
        for (int i = 0; i < 24; ++i)
            for (int j = 0; j < 24; ++j) {
                auto e = [&](double si, double sj) {
                    auto rr = r;
                    rr[i] += si;
                    rr[j] += sj;
                    return ring_energy(c, rr);
                };
                const double fd = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4 * h * h);
                worst = std::max(worst, std::abs(fd - hs.matrix(i, j)));
            }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("Hessian annihilates uniform translation along the chain", "[chain]") {
    for (auto b : {Boundary::PeriodicRing, Boundary::ThermodynamicLimit}) {
        const ChainConfig c = make(0.6, 16, b);
        const Hessian hs = build_hessian(c, solve_delta0(c));
        Eigen::VectorXd t = Eigen::VectorXd::Zero(48);
        t.head(16).setOnes();
        CHECK((hs.matrix * t).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((hs.matrix - hs.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("straight-chain bare frequencies from a long direct lattice sum", "[chain]") {
    const double k = 0.35;
    const ChainConfig c = make(k, 16, Boundary::ThermodynamicLimit);
    const auto om = bare_frequencies(c, solve_delta0(c));
    double s = 0.0;
    for (long n = 2000000; n >= 1; --n) s += 1.0 / (double(n) * n * n);
    CHECK(om[X] == Approx(std::sqrt(2 * k * s)).epsilon(1e-11));
    CHECK(om[Y] == Approx(std::sqrt(1 - k * s)).epsilon(1e-11));
    CHECK(om[Z] == Approx(om[Y]).epsilon(1e-15));
}

TEST_CASE("bulk supercell coupling sums all periodic images", "[chain]") {
    // N = 2048 supercell vs a direct image sum, and vs the bare pair for the nearest ions
    const double k = 0.3;
    const int n = 2048;
    const ChainConfig c = make(k, n, Boundary::ThermodynamicLimit);
    const auto eq = solve_delta0(c);
    for (int b = 1; b <= 8; ++b) {
        double s = 0.0;
        for (long m = 100000; m >= 1; --m) {
            const double p = double(b) + m * n, q = double(m) * n - b;
            s += 1.0 / (p * p * p) + 1.0 / (q * q * q);
        }
        s += 1.0 / (double(b) * b * b);
        const Mat3 t = coupled_pair_curvature(c, eq, 0, b);
        CHECK(t(0, 0) == Approx(k * s).epsilon(1e-14));
        CHECK(t(1, 1) == Approx(-0.5 * k * s).epsilon(1e-14));
        CHECK(std::abs(t(0, 0) - k / (b * b * b)) < 1e-10);  // images add 2κζ(3)/N³
    }
}

TEST_CASE("bare instability above the upper bound", "[chain]") {
    const ChainConfig c = make(0.9, 16, Boundary::ThermodynamicLimit);
    CHECK_THROWS_AS(bare_frequencies(c, make_equilibrium(c, 0.0)), BareInstability);
}

TEST_CASE("ring bare frequency approaches the infinite chain as 4κ/N²", "[chain]") {
    const double k = 0.3;
    const ChainConfig inf = make(k, 16, Boundary::ThermodynamicLimit);
    const double w2 = std::pow(bare_frequencies(inf, solve_delta0(inf))[X], 2);
    double prev = 0.0;
    for (int n : {64, 256, 1024}) {
        const ChainConfig c = make(k, n, Boundary::PeriodicRing);
        const double gap = (w2 - std::pow(bare_frequencies(c, solve_delta0(c))[X], 2)) * n * n / k;
        CHECK(gap == Approx(4.0).epsilon(4.0 / n));
        if (prev != 0.0) CHECK(std::abs(gap - 4.0) < std::abs(prev - 4.0));
        prev = gap;
    }
}
