#include "cowqkd/security.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cowqkd::security {

namespace {
constexpr double kLn2 = 0.6931471805599453094;
constexpr double kBetaGridLo = 1e-30;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
} // namespace

void SecurityParams::validate() const {
    auto in01 = [](double x) { return x > 0.0 && x < 1.0; };
    if (!in01(eps_qkd) || !in01(eps_cor) || !in01(eps_auth) || !in01(beta))
        throw std::invalid_argument("SecurityParams: all fields must be in (0,1)");
    // closed at the top: the reference operating point sits exactly at
    // beta = eps_qkd/4, and the budget check carries the rounding slack
    if (!(beta <= eps_qkd / 4.0))
        throw std::invalid_argument("SecurityParams: beta must be <= eps_qkd/4");
}

void ObservedBlock::validate() const {
    if (!(n_cpp >= 1.0) || !(n_vis >= 1.0))
        throw std::invalid_argument("ObservedBlock: n_cpp and n_vis must be >= 1");
    if (!(m_ir >= 0.0) || !(m_ir <= n_cpp))
        throw std::invalid_argument("ObservedBlock: m_ir must be in [0, n_cpp]");
    if (!(q_hat >= 0.0) || !(q_hat <= 1.0) || !(v_obs >= 0.0) || !(v_obs <= 1.0))
        throw std::invalid_argument("ObservedBlock: q_hat and v_obs must be in [0,1]");
    if (!(mu > 0.0))
        throw std::invalid_argument("ObservedBlock: mu must be > 0");
}

double binary_entropy(double x) {
    if (!(x >= 0.0) || !(x <= 1.0))
        throw std::domain_error("binary_entropy: argument must be in [0,1]");
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return (-x * std::log(x) - (1.0 - x) * std::log(1.0 - x)) / kLn2;
}

double xi(double mu, double v_hat) {
    if (!(mu >= 0.0))
        throw std::domain_error("xi: mu must be >= 0");
    if (!(v_hat >= 0.0) || !(v_hat <= 1.0))
        throw std::domain_error("xi: v_hat must be in [0,1]");
    const double root = std::max((1.0 - std::exp(-2.0 * mu)) * v_hat * (1.0 - v_hat), 0.0);
    return (2.0 * v_hat - 1.0) * std::exp(-mu) - 2.0 * std::sqrt(root);
}

namespace {

// pre-floor objective; shared by key_length and the beta optimizer
double raw_length(const ObservedBlock& b, double v_hat, const SecurityParams& p,
                  double beta, KeyLengthTerms* terms) {
    const double arg = clamp01((1.0 + xi(b.mu, v_hat)) / 2.0);
    const double ent = b.n_cpp * (1.0 - b.q_hat - (1.0 - b.q_hat) * binary_entropy(arg));
    const double pen = 7.0 * std::sqrt(b.n_cpp * std::log(1.0 / beta) / kLn2);
    const double ecor = std::log(2.0 / (4.0 * p.eps_cor * beta * beta)) / kLn2;
    const double raw = ent - pen - b.m_ir - ecor;
    if (terms) {
        terms->entropy_term = ent;
        terms->beta_penalty = pen;
        terms->m_ir = b.m_ir;
        terms->eps_cor_term = ecor;
        terms->raw = raw;
    }
    return raw;
}

} // namespace

KeyLengthResult key_length(const ObservedBlock& block, double v_hat,
                           const SecurityParams& params, double beta) {
    block.validate();
    if (!(beta > 0.0) || !(beta <= params.eps_qkd / 4.0))
        throw std::invalid_argument("key_length: beta must be in (0, eps_qkd/4]");
    if (!(v_hat >= 0.0) || !(v_hat <= 1.0))
        throw std::invalid_argument("key_length: v_hat must be in [0,1]");

    KeyLengthResult r;
    r.beta_used = beta;
    r.v_hat = v_hat;
    const double raw = raw_length(block, v_hat, params, beta, &r.terms);
    if (r.terms.entropy_term <= 0.0) {
        r.ell = 0;
        r.aborted = true;
        r.abort_reason = "entropy factor non-positive";
        return r;
    }
    r.ell = raw > 0.0 ? static_cast<long long>(std::floor(raw)) : 0;
    if (r.ell <= 0) {
        r.ell = 0;
        r.aborted = true;
        r.abort_reason = "finite-size penalties exceed entropy term";
    }
    return r;
}

KeyLengthResult optimize_beta(const ObservedBlock& block, const SecurityParams& params,
                              const DeviationFn& deviation) {
    block.validate();
    params.validate();

    const double hi = std::log10(params.eps_qkd / 4.0);
    const double lo = std::min(std::log10(kBetaGridLo), hi - 1.0);

    auto eval_raw = [&](double g) {
        const double beta = std::pow(10.0, g);
        const double t = deviation(block.n_cpp, block.n_vis, block.v_obs, beta);
        const double v_hat = clamp01(block.v_obs - t);
        return raw_length(block, v_hat, params, beta, nullptr);
    };

    // coarse grid, 0.1 decades, plus the open upper endpoint
    double best_g = lo;
    double best_raw = eval_raw(lo);
    for (double g = lo + 0.1; g < hi - 1e-12; g += 0.1) {
        const double raw = eval_raw(g);
        if (raw > best_raw) { best_raw = raw; best_g = g; }
    }
    {
        const double g_end = hi - 1e-9;
        const double raw = eval_raw(g_end);
        if (raw > best_raw) { best_raw = raw; best_g = g_end; }
    }

    // one golden-section pass on the pre-floor objective around the grid best
    {
        constexpr double kGr = 0.6180339887498949;
        double a = std::max(lo, best_g - 0.1);
        double b = std::min(hi - 1e-9, best_g + 0.1);
        double x1 = b - kGr * (b - a), x2 = a + kGr * (b - a);
        double f1 = eval_raw(x1), f2 = eval_raw(x2);
        for (int it = 0; it < 48 && (b - a) > 1e-12; ++it) {
            if (f1 < f2) {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + kGr * (b - a); f2 = eval_raw(x2);
            } else {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - kGr * (b - a); f1 = eval_raw(x1);
            }
        }
        const double g_ref = (a + b) / 2.0;
        const double raw = eval_raw(g_ref);
        if (raw > best_raw) { best_raw = raw; best_g = g_ref; }
    }

    const double beta = std::pow(10.0, best_g);
    const double t = deviation(block.n_cpp, block.n_vis, block.v_obs, beta);
    const double v_hat = clamp01(block.v_obs - t);
    KeyLengthResult r = key_length(block, v_hat, params, beta);
    if (r.ell == 0 && !r.aborted) {
        r.aborted = true;
        r.abort_reason = "no beta yields positive length";
    }
    return r;
}

double asymptotic_fraction(double q, double v, double mu) {
    if (!(q >= 0.0) || !(q <= 1.0) || !(v >= 0.0) || !(v <= 1.0))
        throw std::domain_error("asymptotic_fraction: fractions must be in [0,1]");
    const double arg = clamp01((1.0 + xi(mu, v)) / 2.0);
    const double frac = 1.0 - q - (1.0 - q) * binary_entropy(arg) - binary_entropy(q);
    return std::max(frac, 0.0);
}

double epsilon_budget(const SecurityParams& params, double eps_verify) {
    params.validate();
    if (!(eps_verify > 0.0) || !(eps_verify < 1.0))
        throw std::invalid_argument("epsilon_budget: eps_verify must be in (0,1)");
    const double total = 4.0 * params.beta + eps_verify + params.eps_auth;
    // eps_qkd is a one-significant-figure target; 0.5% slack covers its
    // rounding so the nominal operating point (4 beta = eps_qkd exactly,
    // plus the small correctness/authentication terms) composes cleanly
    if (total > params.eps_qkd * 1.005)
        throw std::domain_error("epsilon_budget: composition exceeds eps_qkd");
    return total;
}

} // namespace cowqkd::security
