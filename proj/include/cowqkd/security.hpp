#pragma once

#include <functional>
#include <string>

namespace cowqkd::security {

struct SecurityParams {
    double eps_qkd = 4e-9;
    double eps_cor = 1e-11;
    double eps_auth = 1e-15;
    double beta = 1e-9; // tail/smoothing parameter, in (0, eps_qkd/4]

    void validate() const; // throws std::invalid_argument
};

// One CPP block's statistics. Counts are carried as doubles so the analytic
// rate model can feed expected (fractional) values through the same path the
// simulator feeds integers through.
struct ObservedBlock {
    double n_cpp = 1;
    double n_vis = 1;
    double q_hat = 0.0;
    double v_obs = 1.0;
    double m_ir = 0.0;
    double mu = 0.5;

    void validate() const;
};

struct KeyLengthTerms {
    double entropy_term = 0.0; // n_cpp [1 - Q - (1-Q) h((1+xi)/2)]
    double beta_penalty = 0.0; // 7 sqrt(n_cpp log2(1/beta))
    double m_ir = 0.0;
    double eps_cor_term = 0.0; // log2(2/(4 eps_cor beta^2))
    double raw = 0.0;          // pre-floor length
};

struct KeyLengthResult {
    long long ell = 0;
    double beta_used = 0.0;
    double v_hat = 0.0;
    KeyLengthTerms terms;
    bool aborted = false;
    std::string abort_reason;
};

// h(x) = -x log2 x - (1-x) log2(1-x), h(0)=h(1)=0
double binary_entropy(double x);

// xi(mu, v) = (2v-1) e^{-mu} - 2 sqrt((1 - e^{-2 mu}) v (1-v))
double xi(double mu, double v_hat);

// ell = floor( n[1 - Q - (1-Q) h((1+xi(mu,v))/2)] - 7 sqrt(n log2(1/beta))
//              - m_ir - log2(2/(4 eps_cor beta^2)) ), clamped at 0.
// The h argument is clamped to [0,1]. beta must lie in (0, eps_qkd/4].
KeyLengthResult key_length(const ObservedBlock& block, double v_hat,
                           const SecurityParams& params, double beta);

// deviation callback: (n_cpp, n_vis, v_obs, eps) -> t
using DeviationFn = std::function<double(double, double, double, double)>;

// Maximizes ell over beta in [1e-30, eps_qkd/4): log10 grid, 0.1-decade
// step, then one golden-section refinement on the pre-floor objective.
// v_hat = clamp(v_obs - deviation(n_cpp, n_vis, v_obs, beta), 0, 1) is
// recomputed per candidate.
KeyLengthResult optimize_beta(const ObservedBlock& block, const SecurityParams& params,
                              const DeviationFn& deviation);

// max(0, 1 - q - (1-q) h((1+xi(mu,v))/2) - h(q)): the per-bit secret
// fraction with all finite-size penalties dropped and reconciliation at the
// Shannon limit m_ir/n = h(q).
double asymptotic_fraction(double q, double v, double mu);

// 4 beta + eps_verify + eps_auth; throws std::domain_error if the
// composition exceeds eps_qkd (with 0.5% slack for the one-significant-
// figure eps_qkd target).
double epsilon_budget(const SecurityParams& params, double eps_verify);

} // namespace cowqkd::security
