#include "cowqkd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace cowqkd::sampling {

namespace {

void check_counts(double n_cpp, double n_vis) {
    if (!(n_cpp >= 1.0) || !(n_vis >= 1.0))
        throw std::invalid_argument("sampling: counts must be >= 1");
}

void check_eps(double eps) {
    if (!(eps > 0.0) || !(eps < 1.0))
        throw std::invalid_argument("sampling: eps must be in (0,1)");
}

// log C(n, k) via lgammal
long double lchoose(long double n, long double k) {
    return std::lgammal(n + 1.0L) - std::lgammal(k + 1.0L) - std::lgammal(n - k + 1.0L);
}

struct Kahan {
    long double sum = 0.0L, c = 0.0L;
    void add(long double x) {
        long double y = x - c;
        long double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

} // namespace

double correction_c(double n_cpp, double n_vis, double lambda) {
    check_counts(n_cpp, n_vis);
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw std::domain_error("correction_c: lambda must be in (0,1)");
    const double e = 1.0 / (8.0 * (n_cpp + n_vis)) + 1.0 / (12.0 * n_vis)
                   - 1.0 / (12.0 * n_vis * lambda + 1.0)
                   - 1.0 / (12.0 * n_vis * (1.0 - lambda) + 1.0);
    return std::exp(e);
}

double deviation_t_lambda(double n_cpp, double n_vis, double lambda, double eps) {
    check_counts(n_cpp, n_vis);
    check_eps(eps);
    const double n = n_cpp + n_vis;
    const double lam_min = 1.0 / (2.0 * n);
    const double lam = std::clamp(lambda, lam_min, 1.0 - lam_min);
    const double ll = lam * (1.0 - lam);
    const double c = correction_c(n_cpp, n_vis, lam);
    const double pref = 8.0 * n * ll / (n_vis * n_cpp);
    const double base = std::sqrt(n) * c / (std::sqrt(2.0 * M_PI * n_cpp * n_vis * ll) * eps);
    if (base <= 1.0) return 0.0;
    const double t0 = std::sqrt(pref * std::log(base));
    const double delta0 = t0 * n_cpp * n_vis / (2.0 * n); // count deviation at t0
    const double sigma2 = n_cpp * n_vis * ll / n;
    const double m = 1.0 + sigma2 / delta0;
    return std::sqrt(pref * std::log(base * m));
}

double deviation_t(double n_cpp, double n_vis, double v_obs, double eps) {
    if (!(v_obs >= 0.0) || !(v_obs <= 1.0))
        throw std::domain_error("deviation_t: v_obs must be in [0,1]");
    return deviation_t_lambda(n_cpp, n_vis, (1.0 - v_obs) / 2.0, eps);
}

double baseline_deviation(double n_cpp, double n_vis, double eps) {
    check_counts(n_cpp, n_vis);
    if (!(eps > 0.0) || !(eps <= 1.0))
        throw std::invalid_argument("baseline_deviation: eps must be in (0,1]");
    return std::sqrt((n_cpp + n_vis) * (n_vis + 1.0) * std::log(1.0 / eps)
                     / (2.0 * n_vis * n_vis * n_cpp));
}

VisibilityEstimate estimate_visibility(double n_cpp, double n_vis, double v_obs, double beta) {
    VisibilityEstimate e;
    e.v_obs = v_obs;
    e.lambda = (1.0 - v_obs) / 2.0;
    e.beta = beta;
    e.t = deviation_t(n_cpp, n_vis, v_obs, beta);
    e.v_hat = std::clamp(v_obs - e.t, 0.0, 1.0);
    return e;
}

double hypergeom_tail(std::int64_t population_total, std::int64_t population_errors,
                      std::int64_t sample_size, std::int64_t threshold_errors) {
    if (population_total < 1 || population_errors < 0 || population_errors > population_total)
        throw std::invalid_argument("hypergeom_tail: inconsistent population counts");
    if (sample_size < 1 || sample_size > population_total)
        throw std::invalid_argument("hypergeom_tail: sample size out of range");
    if (threshold_errors < 0) return 0.0;

    const std::int64_t k_lo = std::max<std::int64_t>(0, sample_size - (population_total - population_errors));
    const std::int64_t k_hi = std::min({threshold_errors, population_errors, sample_size});
    if (k_hi < k_lo) return 0.0;

    const long double ldenom = lchoose(static_cast<long double>(population_total),
                                       static_cast<long double>(sample_size));
    Kahan acc;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        const long double lp = lchoose(static_cast<long double>(population_errors),
                                       static_cast<long double>(k))
                             + lchoose(static_cast<long double>(population_total - population_errors),
                                       static_cast<long double>(sample_size - k))
                             - ldenom;
        acc.add(std::exp(lp));
    }
    return std::clamp(static_cast<double>(acc.sum), 0.0, 1.0);
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    j["n_cpp"] = n_cpp;
    j["n_vis"] = n_vis;
    j["true_error_count"] = true_error_count;
    j["eps"] = eps;
    j["t_at_population_fraction"] = t_at_population_fraction;
    j["max_violation_probability"] = max_violation_probability;
    j["violating_outcomes"] = violating_outcomes;
    j["holds"] = holds;
    return j.dump();
}

ValidationReport validate_inequality(const SampleSplit& split, std::int64_t true_error_count,
                                     double eps, double t_scale) {
    if (split.n_cpp < 1 || split.n_vis < 1)
        throw std::invalid_argument("validate_inequality: counts must be >= 1");
    check_eps(eps);
    const std::int64_t n = split.n_cpp + split.n_vis;
    if (n > 10000)
        throw std::length_error("validate_inequality: exhaustive mode limited to n_cpp+n_vis <= 1e4");
    if (true_error_count < 0 || true_error_count > n)
        throw std::invalid_argument("validate_inequality: error count out of range");

    ValidationReport rep;
    rep.n_cpp = split.n_cpp;
    rep.n_vis = split.n_vis;
    rep.true_error_count = true_error_count;
    rep.eps = eps;

    const double lam_pop = static_cast<double>(true_error_count) / static_cast<double>(n);
    const double t = t_scale * deviation_t_lambda(static_cast<double>(split.n_cpp),
                                                  static_cast<double>(split.n_vis), lam_pop, eps);
    rep.t_at_population_fraction = t;

    const std::int64_t big_n = n;
    const std::int64_t big_k = true_error_count;
    const std::int64_t m = split.n_vis;
    const std::int64_t k_lo = std::max<std::int64_t>(0, m - (big_n - big_k));
    const std::int64_t k_hi = std::min(m, big_k);

    const long double ldenom = lchoose(static_cast<long double>(big_n), static_cast<long double>(m));
    Kahan viol;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        const double v_obs = 1.0 - 2.0 * static_cast<double>(k) / static_cast<double>(m);
        const double v_key = 1.0 - 2.0 * static_cast<double>(big_k - k) / static_cast<double>(split.n_cpp);
        if (v_key <= v_obs - t) {
            const long double lp = lchoose(static_cast<long double>(big_k), static_cast<long double>(k))
                                 + lchoose(static_cast<long double>(big_n - big_k), static_cast<long double>(m - k))
                                 - ldenom;
            viol.add(std::exp(lp));
            ++rep.violating_outcomes;
        }
    }
    rep.max_violation_probability = std::clamp(static_cast<double>(viol.sum), 0.0, 1.0);
    rep.holds = rep.max_violation_probability <= eps;
    return rep;
}

} // namespace cowqkd::sampling
