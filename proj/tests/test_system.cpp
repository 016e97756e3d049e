#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nbodylab/system.hpp"
#include "support.hpp"

using namespace nbodylab;
using namespace nbodylab::testing;

TEST_CASE("two-body accelerations", "[system]") {
    auto [b, s] = circular_two_body();
    const auto a = accelerations(s, b, ForceLaw::newtonian());
    CHECK(a[0] == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(a[1] == Catch::Approx(0.0).margin(1e-15));
    CHECK(a[2] == Catch::Approx(-1.0).epsilon(1e-14));
    CHECK(a[3] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("pair force contributions cancel exactly", "[system]") {
    // For n = 2 the per-body force accumulators hold a single shared pair
    // term with opposite signs, so the sum is the zero vector bit-for-bit.
    for (std::uint64_t seed : {3u, 17u, 99u}) {
        auto [b, s] = random_barycentric_state(seed, 2, 3);
        const auto f = net_forces(s, b, ForceLaw::newtonian());
        for (int a = 0; a < 3; ++a) CHECK(f[a] + f[3 + a] == 0.0);
    }
    // equal masses divide the shared pair force by the same value, so the
    // accelerations are exact negatives as well
    {
        Bodies b{.dim = 2, .masses = {1.7, 1.7}};
        PhaseState s;
        s.dim = 2;
        s.q = {-0.3, 0.2, 0.6, -0.4};
        s.v.assign(4, 0.0);
        const auto a = accelerations(s, b, ForceLaw::newtonian());
        CHECK(a[0] == -a[2]);
        CHECK(a[1] == -a[3]);
    }
    // With more bodies the per-body sums round, but the residual stays at the
    // accumulation noise floor.
    for (std::uint64_t seed : {5u, 23u}) {
        auto [b, s] = random_barycentric_state(seed, 6, 3);
        const auto f = net_forces(s, b, ForceLaw::newtonian());
        double scale = 0.0;
        for (double x : f) scale = std::max(scale, std::abs(x));
        for (int a = 0; a < 3; ++a) {
            double sum = 0.0;
            for (int k = 0; k < 6; ++k) sum += f[k * 3 + a];
            CHECK(std::abs(sum) < 1e-13 * (1.0 + scale));
        }
    }
}

TEST_CASE("equilateral triangle acceleration magnitude", "[system]") {
    Bodies b{.dim = 2, .masses = {1, 1, 1}};
    PhaseState s;
    s.dim = 2;
    s.q = triangle_positions(1.0);
    s.v.assign(6, 0.0);
    const auto a = accelerations(s, b, ForceLaw::newtonian());
    // two unit-magnitude attractions at 60 degrees
    for (int k = 0; k < 3; ++k)
        CHECK(std::hypot(a[2 * k], a[2 * k + 1]) == Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("collision guard", "[system]") {
    Bodies b{.dim = 2, .masses = {1, 1}};
    PhaseState s;
    s.dim = 2;
    s.q = {0.0, 0.0, 5e-11, 0.0};
    s.v.assign(4, 0.0);
    CHECK_THROWS_AS(accelerations(s, b, ForceLaw::newtonian()), CollisionApproach);
    try {
        accelerations(s, b, ForceLaw::newtonian());
    } catch (const CollisionApproach& e) {
        CHECK(e.body_j == 0);
        CHECK(e.body_k == 1);
        CHECK(e.distance == Catch::Approx(5e-11));
    }
}

TEST_CASE("moment of inertia", "[system]") {
    auto [b, s] = circular_two_body();
    CHECK(moment_of_inertia(s, b) == Catch::Approx(0.5).epsilon(1e-15));

    // scaling q by c scales I by c^2
    PhaseState scaled = s;
    for (auto& x : scaled.q) x *= 3.0;
    CHECK(moment_of_inertia(scaled, b) == Catch::Approx(9.0 * 0.5).epsilon(1e-14));

    // translating by s adds M |s|^2 at a barycentric state
    PhaseState shifted = s;
    for (int k = 0; k < 2; ++k) {
        shifted.q[2 * k] += 1.5;
        shifted.q[2 * k + 1] += -0.5;
    }
    const double shift_sq = 1.5 * 1.5 + 0.5 * 0.5;
    CHECK(moment_of_inertia(shifted, b) ==
          Catch::Approx(moment_of_inertia(s, b) + b.total_mass() * shift_sq).epsilon(1e-13));
}

TEST_CASE("total energy", "[system]") {
    auto [b, s] = circular_two_body();
    const ForceLaw newt = ForceLaw::newtonian();
    // T = 0.5, potential term = (1/4) * 2 * F(1) = -1
    CHECK(total_energy(s, b, newt) == Catch::Approx(-0.5).epsilon(1e-14));

    PhaseState rest = s;
    rest.v.assign(rest.v.size(), 0.0);
    CHECK(total_energy(rest, b, newt) == Catch::Approx(-1.0).epsilon(1e-14));
    CHECK(kinetic_energy(rest, b) == 0.0);

    // inverse-cube with T = -V gives E = 0 by construction
    const ForceLaw invcube = ForceLaw::inverse_cube();
    PhaseState tuned = s;
    const double v_needed = std::sqrt(-potential_energy(tuned, b, invcube) /
                                      kinetic_energy(tuned, b));
    for (auto& x : tuned.v) x *= v_needed;
    CHECK(std::abs(total_energy(tuned, b, invcube)) < 1e-14);
}

TEST_CASE("c1 sum and the 2IM identity", "[system]") {
    auto [b, s] = circular_two_body();
    CHECK(c1_sum(s, b) == Catch::Approx(2.0).epsilon(1e-15));
    CHECK(c1_sum(s, b) ==
          Catch::Approx(2.0 * moment_of_inertia(s, b) * b.total_mass()).epsilon(1e-15));

    // two bodies, arbitrary masses, distance r: 2 m1 m2 r^2
    Bodies b2{.dim = 2, .masses = {2.5, 0.4}};
    PhaseState s2;
    s2.dim = 2;
    s2.q = {0.0, 0.0, 3.0, 4.0};  // r = 5
    s2.v.assign(4, 0.0);
    CHECK(c1_sum(s2, b2) == Catch::Approx(2.0 * 2.5 * 0.4 * 25.0).epsilon(1e-14));

    // the identity holds for every barycentric state, purely algebraically
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto [rb, rs] = random_barycentric_state(seed, 2 + seed % 5, 1 + seed % 3);
        const double c1 = c1_sum(rs, rb);
        const double im2 = 2.0 * moment_of_inertia(rs, rb) * rb.total_mass();
        CHECK(std::abs(c1 - im2) < 1e-11 * c1);
    }
}

TEST_CASE("c2 sum", "[system]") {
    auto [b, s] = circular_two_body();
    CHECK(c2_sum(s, b, ForceLaw::newtonian()) == Catch::Approx(-2.0).epsilon(1e-13));

    // degenerate law: identically zero up to pair-term rounding, which the
    // m_j m_k weights (up to 100 here) scale up from the 1e-16 floor
    for (std::uint64_t seed : {2u, 9u}) {
        auto [rb, rs] = random_barycentric_state(seed, 4, 2);
        double weight = 0.0;
        for (const auto& pd : pairwise_distances(rs))
            weight += rb.masses[pd.j] * rb.masses[pd.k] / (pd.r * pd.r);
        CHECK(std::abs(c2_sum(rs, rb, ForceLaw::inverse_cube())) < 1e-14 * (1.0 + weight));
    }

    // Newtonian scaling: g(c^2 x) = -(c^2 x)^(-1/2) scales c2 by 1/c
    auto [rb, rs] = random_barycentric_state(11, 3, 2);
    const double base = c2_sum(rs, rb, ForceLaw::newtonian());
    PhaseState scaled = rs;
    for (auto& x : scaled.q) x *= 2.0;
    CHECK(c2_sum(scaled, rb, ForceLaw::newtonian()) == Catch::Approx(base / 2.0).epsilon(1e-12));
}

TEST_CASE("Lagrange-Jacobi right side", "[system]") {
    auto [b, s] = circular_two_body();
    const ForceLaw newt = ForceLaw::newtonian();
    CHECK(std::abs(lagrange_jacobi_rhs(s, b, newt)) < 1e-14);

    // inverse-cube: r^2 f(r^2) = 1/r^2, so the pair sum is -4V and
    // d^2I/dt^2 = 4T + 4V = 4E at any state
    const ForceLaw invcube = ForceLaw::inverse_cube();
    for (std::uint64_t seed = 30; seed < 40; ++seed) {
        auto [rb, rs] = random_barycentric_state(seed, 3 + seed % 3, 2);
        CHECK(lagrange_jacobi_rhs(rs, rb, invcube) ==
              Catch::Approx(4.0 * total_energy(rs, rb, invcube)).epsilon(1e-11).margin(1e-11));
    }

    // at rest under an attractive law the pair term dominates: negative
    PhaseState rest = s;
    rest.v.assign(rest.v.size(), 0.0);
    CHECK(lagrange_jacobi_rhs(rest, b, newt) < 0.0);
}

TEST_CASE("barycenter reduction", "[system]") {
    auto [b, s] = circular_two_body();
    // already barycentric: unchanged
    const PhaseState same = reduce_to_barycenter(s, b);
    for (std::size_t i = 0; i < s.q.size(); ++i) {
        CHECK(same.q[i] == Catch::Approx(s.q[i]).margin(1e-15));
        CHECK(same.v[i] == Catch::Approx(s.v[i]).margin(1e-15));
    }

    // output is independent of a rigid shift of the input
    Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        auto [rb, rs] = random_barycentric_state(100 + trial, 4, 3);
        PhaseState shifted = rs;
        const double sx = rng.uniform(-5, 5), sy = rng.uniform(-5, 5), sz = rng.uniform(-5, 5);
        for (int k = 0; k < 4; ++k) {
            shifted.q[3 * k] += sx;
            shifted.q[3 * k + 1] += sy;
            shifted.q[3 * k + 2] += sz;
        }
        const PhaseState back = reduce_to_barycenter(shifted, rb);
        for (std::size_t i = 0; i < rs.q.size(); ++i)
            CHECK(back.q[i] == Catch::Approx(rs.q[i]).margin(1e-12));

        // separations untouched, c1 = 2IM restored
        const double c1 = c1_sum(back, rb);
        CHECK(std::abs(c1 - 2.0 * moment_of_inertia(back, rb) * rb.total_mass()) < 1e-12 * c1);
    }
}

TEST_CASE("pairwise distances", "[system]") {
    Bodies b{.dim = 2, .masses = {1, 1, 1}};
    PhaseState s;
    s.dim = 2;
    s.q = triangle_positions(1.0);
    s.v.assign(6, 0.0);
    auto pds = pairwise_distances(s);
    REQUIRE(pds.size() == 3);
    for (const auto& pd : pds) CHECK(pd.r == Catch::Approx(1.0).epsilon(1e-14));

    PhaseState line;
    line.dim = 1;
    line.q = {0.0, 1.0, 3.0};
    line.v = {0.0, 0.0, 0.0};
    pds = pairwise_distances(line);
    REQUIRE(pds.size() == 3);
    CHECK(pds[0].r == 1.0);  // (0,1)
    CHECK(pds[1].r == 3.0);  // (0,2)
    CHECK(pds[2].r == 2.0);  // (1,2)
}

TEST_CASE("momentum and angular momentum shapes", "[system]") {
    auto [b3, s3] = random_barycentric_state(77, 3, 3);
    CHECK(total_momentum(s3, b3).size() == 3);
    CHECK(angular_momentum(s3, b3).size() == 3);  // d(d-1)/2 for d = 3

    auto [b1, s1] = random_barycentric_state(78, 3, 1);
    CHECK(angular_momentum(s1, b1).empty());

    // after barycentric reduction the momentum vanishes
    for (double p : total_momentum(s3, b3)) CHECK(std::abs(p) < 1e-13);
}

TEST_CASE("state validation", "[system]") {
    Bodies b{.dim = 2, .masses = {1, 1}};
    PhaseState s;
    s.dim = 2;
    s.q = {0.0, 0.0, 0.0, 0.0};  // coincident
    s.v.assign(4, 0.0);
    CHECK_THROWS_AS(s.validate(b), ValidationError);

    Bodies bad{.dim = 2, .masses = {1.0, -1.0}};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    Bodies single{.dim = 2, .masses = {1.0}};
    CHECK_THROWS_AS(single.validate(), ValidationError);
}
