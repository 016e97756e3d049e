#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nbodylab/forcelaw.hpp"
#include "nbodylab/rng.hpp"

using namespace nbodylab;

TEST_CASE("power-law kernel and antiderivative values", "[forcelaw]") {
    const ForceLaw newt = ForceLaw::power_law(3.0, 1.0);
    CHECK(newt.f(4.0) == Catch::Approx(0.125).epsilon(1e-14));  // 4^(-3/2)
    // F(x) = -2 x^(-1/2), so g(x) = x^(-1/2) - 2 x^(-1/2) = -x^(-1/2)
    CHECK(newt.antiderivative(4.0) == Catch::Approx(-1.0).epsilon(1e-14));
    CHECK(newt.g(4.0) == Catch::Approx(-0.5).epsilon(1e-13));
    CHECK(newt.g(1.0) == Catch::Approx(-1.0).epsilon(1e-13));

    const ForceLaw shallow = ForceLaw::power_law(1.0, 1.0);  // F = 2 sqrt(x), g = 3 sqrt(x)
    CHECK(shallow.g(4.0) == Catch::Approx(6.0).epsilon(1e-13));

    const ForceLaw invcube = ForceLaw::inverse_cube();
    CHECK(std::abs(invcube.g(7.3)) < 1e-15);

    const ForceLaw log_case = ForceLaw::power_law(2.0, 1.0);  // F = ln x, g = 1 + ln x
    CHECK(log_case.g(1.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(log_case.g(std::exp(-1.0)) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("g rejects non-positive arguments", "[forcelaw]") {
    const ForceLaw newt = ForceLaw::newtonian();
    CHECK_THROWS_AS(newt.g(0.0), NonPositiveArgument);
    CHECK_THROWS_AS(newt.g(-1.0), NonPositiveArgument);
    CHECK_THROWS_AS(ForceLaw::power_law(3.0, 0.0), ValidationError);
    CHECK_THROWS_AS(ForceLaw::power_law(3.0, -2.0), ValidationError);
}

TEST_CASE("admissibility classification of the power family", "[forcelaw]") {
    const std::vector<double> grid{0.1, 1.0, 10.0, 100.0};

    CHECK(classify_admissibility(ForceLaw::power_law(3.0, 1.0), std::span<const double>(grid)).cls ==
          AdmissibilityClass::NegativeG);
    CHECK(classify_admissibility(ForceLaw::power_law(1.0, 1.0), std::span<const double>(grid)).cls ==
          AdmissibilityClass::PositiveG);

    for (double c : {0.5, 1.0, 2.0})
        CHECK(classify_admissibility(ForceLaw::power_law(4.0, c)).cls ==
              AdmissibilityClass::DegenerateInverseCube);

    // The logarithmic boundary case alpha = 2 changes sign at x = 1/e.
    CHECK(classify_admissibility(ForceLaw::power_law(2.0, 1.0)).cls == AdmissibilityClass::Indefinite);

    CHECK_THROWS_AS(classify_admissibility(ForceLaw::newtonian(), std::span<const double>{}), EmptyGrid);
    const std::vector<double> bad{1.0, -1.0};
    CHECK_THROWS_AS(classify_admissibility(ForceLaw::newtonian(), std::span<const double>(bad)),
                    NonPositiveArgument);
}

TEST_CASE("power laws away from the boundaries keep a fixed sign", "[forcelaw]") {
    // alpha = 2 (log case) and alpha = 4 (degenerate) are the only
    // exceptions in 0 < alpha; sampled classification must never be
    // Indefinite elsewhere.
    const auto grid = log_grid(1e-2, 1e2, 25);
    for (double alpha : {0.5, 1.0, 1.5, 2.5, 3.0, 3.5, 5.0}) {
        for (double c : {0.3, 1.0, 4.0}) {
            const auto cls = classify_admissibility(ForceLaw::power_law(alpha, c),
                                                    std::span<const double>(grid)).cls;
            INFO("alpha=" << alpha << " C=" << c);
            CHECK(is_admissible(cls));
            // sign of g follows sign of (4 - alpha)/(2 - alpha)
            const bool positive = (4.0 - alpha) / (2.0 - alpha) > 0.0;
            CHECK(cls == (positive ? AdmissibilityClass::PositiveG : AdmissibilityClass::NegativeG));
        }
    }
}

TEST_CASE("g equals the derivative of x F(x) on an audit grid", "[forcelaw]") {
    // Independent oracle: central finite difference of x -> x F(x).
    auto xF_prime = [](const ForceLaw& law, double x) {
        const double h = 1e-6 * x;
        const double up = (x + h) * law.antiderivative(x + h);
        const double dn = (x - h) * law.antiderivative(x - h);
        return (up - dn) / (2.0 * h);
    };
    const auto grid = log_grid(1e-2, 1e3, 31);
    std::vector<ForceLaw> laws;
    for (double alpha : {0.5, 1.0, 2.0, 3.0, 4.0, 5.0}) laws.push_back(ForceLaw::power_law(alpha, 1.0));
    laws.push_back(ForceLaw::custom("hooke-like", [](double) { return 1.0; }, [](double x) { return x; }));
    for (const auto& law : laws)
        for (double x : grid) {
            INFO(law.name() << " at x=" << x);
            CHECK(std::abs(law.g(x) - xF_prime(law, x)) < 1e-6);
        }
}

TEST_CASE("antiderivative audit: F' matches f by finite differences", "[forcelaw]") {
    Rng rng(91);
    for (double alpha : {0.5, 2.0, 3.0, 4.0}) {
        const ForceLaw law = ForceLaw::power_law(alpha, 1.7);
        for (int i = 0; i < 20; ++i) {
            const double x = std::exp(rng.uniform(std::log(0.05), std::log(50.0)));
            const double h = 1e-6 * x;
            const double fd = (law.antiderivative(x + h) - law.antiderivative(x - h)) / (2.0 * h);
            CHECK(std::abs(fd - law.f(x)) < 1e-6 * (1.0 + std::abs(law.f(x))));
        }
    }
}

TEST_CASE("laws cast across working precisions", "[forcelaw]") {
    const auto wide = ForceLaw::newtonian().cast<long double>();
    CHECK(static_cast<double>(wide.g(4.0L)) == Catch::Approx(-0.5).epsilon(1e-15));
    CHECK(wide.alpha() == 3.0);

    const auto custom = ForceLaw::custom("unit-push", [](double) { return 1.0; },
                                         [](double x) { return x; });
    const auto bridged = custom.cast<long double>();
    CHECK(static_cast<double>(bridged.g(2.0L)) == Catch::Approx(4.0));
}

TEST_CASE("custom laws classify by their own g", "[forcelaw]") {
    // f constant 1, F = x: g = 2x > 0.
    const auto push = ForceLaw::custom("unit-push", [](double) { return 1.0; }, [](double x) { return x; });
    CHECK(classify_admissibility(push).cls == AdmissibilityClass::PositiveG);

    // f = -1/x^2, F = 1/x: g identically zero (the degenerate family with C < 0).
    const auto repel = ForceLaw::custom("inverse-cube-repulsive", [](double x) { return -1.0 / (x * x); },
                                        [](double x) { return 1.0 / x; });
    CHECK(classify_admissibility(repel).cls == AdmissibilityClass::DegenerateInverseCube);
}
