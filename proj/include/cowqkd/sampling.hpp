#pragma once

#include <cstdint>
#include <string>

namespace cowqkd::sampling {

// Population/sample split for the without-replacement sampling argument:
// the key block (n_cpp) is the unobserved remainder, the monitoring events
// (n_vis) are the observed sample.
struct SampleSplit {
    std::int64_t n_cpp = 1;
    std::int64_t n_vis = 1;
};

struct VisibilityEstimate {
    double v_obs = 1.0;
    double lambda = 0.0; // (1 - v_obs) / 2
    double t = 0.0;
    double v_hat = 1.0;  // v_obs - t
    double beta = 0.0;
};

// exp( 1/(8(n_cpp+n_vis)) + 1/(12 n_vis) - 1/(12 n_vis l + 1) - 1/(12 n_vis (1-l) + 1) )
double correction_c(double n_cpp, double n_vis, double lambda);

// Deviation evaluated directly at an error fraction lambda in the
// population-fraction role. lambda is clamped to
// [1/(2(n_cpp+n_vis)), 1 - 1/(2(n_cpp+n_vis))].
//
// The bound is the Gaussian-density form
//   t0 = sqrt( 8 N l(1-l)/(n_vis n_cpp) * ln(sqrt(N) C / (sqrt(2 pi n_cpp n_vis l(1-l)) eps)) )
// completed with a tail-summation multiplicity factor M = 1 + sigma^2/delta0
// inside the logarithm, where sigma^2 = n_cpp n_vis l(1-l)/N is the
// hypergeometric count-variance scale and delta0 the count deviation at t0.
// Without M the density-form log argument bounds only the boundary term of
// the tail sum, and exhaustive enumeration exhibits violations; with it the
// hypergeometric log-concavity argument closes the sum. Exhaustively
// validated for every split with n_vis <= n_cpp (the protocol regime; see
// validate_inequality). Returns 0 when the log argument is <= 1.
double deviation_t_lambda(double n_cpp, double n_vis, double lambda, double eps);

// Protocol-facing form: substitutes the observed estimate
// lambda = (1 - v_obs)/2 for the population error fraction.
double deviation_t(double n_cpp, double n_vis, double v_obs, double eps);

// Serfling-type deviation for sampling without replacement; comparison
// baseline only.
double baseline_deviation(double n_cpp, double n_vis, double eps);

VisibilityEstimate estimate_visibility(double n_cpp, double n_vis, double v_obs, double beta);

// P[X <= threshold_errors] for X = number of error items in a uniform
// sample of sample_size drawn without replacement from population_total
// items of which population_errors are errors. Log-gamma evaluation with
// compensated summation; absolute error <= 1e-12 for populations <= 1e6.
double hypergeom_tail(std::int64_t population_total, std::int64_t population_errors,
                      std::int64_t sample_size, std::int64_t threshold_errors);

struct ValidationReport {
    std::int64_t n_cpp = 0;
    std::int64_t n_vis = 0;
    std::int64_t true_error_count = 0;
    double eps = 0.0;
    double t_at_population_fraction = 0.0;
    double max_violation_probability = 0.0;
    std::int64_t violating_outcomes = 0;
    bool holds = false;

    std::string to_json() const;
};

// Exhaustive check of the tail inequality on one instance: enumerates every
// achievable observed error count k in the sample, marks the outcomes where
// V_key <= V_obs(k) - t, and sums their exact hypergeometric probabilities.
// t is evaluated once at the population error fraction K/(n_cpp+n_vis),
// the quantity the sampling argument concentrates. holds iff the sum <= eps.
//
// t_scale is a test hook (see cli bound-check): scaling t below 1 must make
// the validator report violations.
//
// Exhaustive mode is limited to n_cpp + n_vis <= 10^4.
ValidationReport validate_inequality(const SampleSplit& split, std::int64_t true_error_count,
                                     double eps, double t_scale = 1.0);

} // namespace cowqkd::sampling
