#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>

#include "cowqkd/sampling.hpp"

using namespace cowqkd::sampling;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

cpp_int binom(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    cpp_int r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

// exact rational P[X <= k], X hypergeometric(N, K, n)
double exact_tail(std::int64_t N, std::int64_t K, std::int64_t n, std::int64_t k) {
    cpp_int num = 0;
    for (std::int64_t j = 0; j <= k; ++j) num += binom(K, j) * binom(N - K, n - j);
    return cpp_rational(num, binom(N, n)).convert_to<double>();
}

} // namespace

TEST_CASE("correction factor") {
    CHECK(correction_c(1e5, 1e3, 0.02) ==
          doctest::Approx(0.99585876524055551).epsilon(1e-12));
    // vanishes (factor -> 1) for large samples away from the edges
    CHECK(correction_c(1e7, 1e6, 0.3) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(correction_c(1e5, 1e3, 0.02) > 0.0);
}

TEST_CASE("deviation values") {
    CHECK(deviation_t(660000, 42000, 0.97, 1e-9) ==
          doctest::Approx(0.0073944680407457843).epsilon(1e-12));
    CHECK(deviation_t(1e5, 1e2, 0.95, 1e-9) ==
          doctest::Approx(0.19535243053097772).epsilon(1e-12));
    CHECK(deviation_t(1e5, 1e4, 0.95, 1e-9) ==
          doctest::Approx(0.019849901914784226).epsilon(1e-12));
    CHECK(deviation_t(1e5, 1e3, 1.0, 1e-9) ==
          doctest::Approx(0.00092800912328415685).epsilon(1e-12));
    CHECK(baseline_deviation(1e5, 1e3, 1e-9) ==
          doctest::Approx(0.10235093793857287).epsilon(1e-12));
}

TEST_CASE("deviation monotonicity and symmetry") {
    // more monitoring events -> tighter estimate
    CHECK(deviation_t(1e5, 1e2, 0.95, 1e-9) > deviation_t(1e5, 1e3, 0.95, 1e-9));
    CHECK(deviation_t(1e5, 1e3, 0.95, 1e-9) > deviation_t(1e5, 1e4, 0.95, 1e-9));
    // stricter failure probability -> larger deviation
    CHECK(deviation_t(1e5, 1e3, 0.95, 1e-12) > deviation_t(1e5, 1e3, 0.95, 1e-6));
    // the bound only depends on lambda through lambda(1-lambda) symmetric terms
    CHECK(deviation_t_lambda(1e5, 1e3, 0.1, 1e-9) ==
          doctest::Approx(deviation_t_lambda(1e5, 1e3, 0.9, 1e-9)).epsilon(1e-14));
    // lambda is clamped at 1/(2N)
    const double n_cpp = 1e5, n_vis = 1e3;
    CHECK(deviation_t_lambda(n_cpp, n_vis, 0.0, 1e-9) ==
          doctest::Approx(deviation_t_lambda(n_cpp, n_vis, 0.5 / (n_cpp + n_vis), 1e-9))
              .epsilon(1e-14));
    CHECK(deviation_t_lambda(n_cpp, n_vis, 0.0, 1e-9) > 0.0);
}

TEST_CASE("deviation beats the baseline in the protocol regime") {
    for (const double v : {0.90, 0.95, 0.97, 0.999}) {
        for (const double eps : {1e-3, 1e-9}) {
            CHECK(deviation_t(660000, 42000, v, eps) < baseline_deviation(660000, 42000, eps));
            CHECK(deviation_t(1e5, 1e4, v, eps) < baseline_deviation(1e5, 1e4, eps));
            CHECK(deviation_t(1e4, 1e3, v, eps) < baseline_deviation(1e4, 1e3, eps));
        }
    }
}

TEST_CASE("estimate_visibility") {
    const auto est = estimate_visibility(660000, 42000, 0.97, 1e-9);
    CHECK(est.v_obs == 0.97);
    CHECK(est.lambda == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(est.t == doctest::Approx(deviation_t(660000, 42000, 0.97, 1e-9)).epsilon(1e-14));
    CHECK(est.v_hat == doctest::Approx(0.97 - est.t).epsilon(1e-14));
    CHECK(est.beta == 1e-9);
    // clamped at 0 when the sample is too small to certify anything
    CHECK(estimate_visibility(1e5, 2, 0.1, 1e-9).v_hat == 0.0);
}

TEST_CASE("hypergeometric tail") {
    CHECK(hypergeom_tail(200, 20, 50, 2) ==
          doctest::Approx(0.080014007072379212).epsilon(1e-12));
    CHECK(hypergeom_tail(200, 20, 50, 50) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hypergeom_tail(200, 20, 50, -1) == 0.0);
    // monotone non-decreasing in the threshold
    double prev = 0.0;
    for (std::int64_t k = 0; k <= 20; ++k) {
        const double p = hypergeom_tail(200, 20, 50, k);
        CHECK(p >= prev);
        prev = p;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hypergeometric tail matches exact rational enumeration") {
    const struct { std::int64_t N, K, n; } cases[] = {
        {50, 5, 10},   {100, 30, 40}, {200, 20, 50},  {500, 250, 100},
        {500, 7, 499}, {333, 111, 222}, {500, 499, 250}, {41, 40, 41},
    };
    for (const auto& c : cases) {
        for (std::int64_t k = 0; k <= std::min(c.K, c.n); ++k) {
            const double got = hypergeom_tail(c.N, c.K, c.n, k);
            const double want = exact_tail(c.N, c.K, c.n, k);
            CHECK(std::abs(got - want) <= 1e-12);
        }
    }
}

TEST_CASE("validate_inequality frozen instances") {
    {
        const auto rep = validate_inequality({1000, 100}, 40, 1e-3);
        CHECK(rep.holds);
        CHECK(rep.violating_outcomes == 0);
        CHECK(rep.max_violation_probability == 0.0);
        CHECK(rep.t_at_population_fraction == doctest::Approx(0.13398).epsilon(1e-3));
    }
    {
        const auto rep = validate_inequality({100, 100}, 10, 1e-6);
        CHECK(rep.holds);
        CHECK(rep.t_at_population_fraction == doctest::Approx(0.31089).epsilon(1e-3));
    }
    {
        // an error-free population cannot produce a violating sample
        const auto rep = validate_inequality({1000, 1000}, 0, 1e-9);
        CHECK(rep.holds);
        CHECK(rep.violating_outcomes == 0);
        CHECK(rep.max_violation_probability == 0.0);
    }
}

TEST_CASE("validate_inequality negative control") {
    // shrinking t must break the bound somewhere on the dense instance
    const auto rep = validate_inequality({1000, 1000}, 500, 1e-3, 0.1);
    CHECK_FALSE(rep.holds);
    CHECK(rep.violating_outcomes > 0);
    CHECK(rep.max_violation_probability > 1e-3);
}

TEST_CASE("validate_inequality guards") {
    CHECK_THROWS_AS(validate_inequality({100000, 100000}, 10, 1e-3), std::length_error);
    CHECK_THROWS_AS(validate_inequality({1000, 100}, -1, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(validate_inequality({1000, 100}, 20, 0.0), std::invalid_argument);
}

TEST_CASE("validation report serializes") {
    const auto rep = validate_inequality({1000, 100}, 40, 1e-3);
    const std::string j = rep.to_json();
    CHECK(j.find("\"n_cpp\"") != std::string::npos);
    CHECK(j.find("\"holds\"") != std::string::npos);
    CHECK(j.find("\"max_violation_probability\"") != std::string::npos);
}
