#include "cowqkd/rate_scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cowqkd/sampling.hpp"

namespace cowqkd::scan {

std::string to_string(BoundKind k) {
    switch (k) {
        case BoundKind::new_bound: return "new";
        case BoundKind::baseline: return "baseline";
        case BoundKind::asymptotic: return "asymptotic";
    }
    return "?";
}

BoundKind bound_from_string(const std::string& s) {
    if (s == "new") return BoundKind::new_bound;
    if (s == "baseline") return BoundKind::baseline;
    if (s == "asymptotic") return BoundKind::asymptotic;
    throw std::invalid_argument("unknown bound kind: " + s);
}

namespace {

security::DeviationFn deviation_for(BoundKind kind) {
    if (kind == BoundKind::baseline)
        return [](double n_cpp, double n_vis, double, double eps) {
            return sampling::baseline_deviation(n_cpp, n_vis, eps);
        };
    return [](double n_cpp, double n_vis, double v_obs, double eps) {
        return sampling::deviation_t(n_cpp, n_vis, v_obs, eps);
    };
}

struct PointInputs {
    model::SystemConfig cfg;
    double distance_km = 0.0;
    double n_cpp = 0.0;
};

ScanPoint zero_point(const PointInputs& in, BoundKind kind, double mu, double temp, double tau,
                     const std::string& reason) {
    ScanPoint p;
    p.distance_km = in.distance_km;
    p.n_cpp = in.n_cpp;
    p.bound = kind;
    p.mu_opt = mu;
    p.temp_opt_k = temp;
    p.dead_time_opt_s = tau;
    p.reason = reason;
    return p;
}

ScanPoint eval_one(const PointInputs& in, const security::SecurityParams& params, BoundKind kind,
                   double mu, double temp_k, double dead_time_s) {
    model::SystemConfig cfg = in.cfg;
    cfg.source.mu = mu;
    cfg.det_data.temp_k = temp_k;
    cfg.det_data.dead_time_s = dead_time_s;
    cfg.det_mon.temp_k = temp_k;
    cfg.det_mon.dead_time_s = dead_time_s;

    const model::ExpectedStats st = model::expected_stats(cfg);
    if (!(st.sifted_rate_hz > 0.0))
        return zero_point(in, kind, mu, temp_k, dead_time_s, "no sifted rate");
    if (st.degenerate_data || st.degenerate_monitor)
        return zero_point(in, kind, mu, temp_k, dead_time_s, "dark-dominated");

    const double t_coll = in.n_cpp / st.sifted_rate_hz;
    const double n_vis = st.n_vis_rate_hz * t_coll;
    if (n_vis < 1.0)
        return zero_point(in, kind, mu, temp_k, dead_time_s, "n_vis < 1");

    const double h_qraw = security::binary_entropy(st.q_raw);
    const double m_ir = std::min(cfg.f_ir * in.n_cpp * h_qraw, in.n_cpp);

    ScanPoint p;
    p.distance_km = in.distance_km;
    p.n_cpp = in.n_cpp;
    p.bound = kind;
    p.mu_opt = mu;
    p.temp_opt_k = temp_k;
    p.dead_time_opt_s = dead_time_s;
    p.q_hat = st.q_hat;
    p.block_collection_time_s = t_coll;

    if (kind == BoundKind::asymptotic) {
        // secrecy terms use the dark-corrected QBER, but reconciliation still
        // pays for every raw error, dark-induced ones included
        const double arg =
            std::clamp((1.0 + security::xi(mu, st.v_hat_input)) / 2.0, 0.0, 1.0);
        const double frac =
            std::max(0.0, 1.0 - st.q_hat -
                              (1.0 - st.q_hat) * security::binary_entropy(arg) -
                              security::binary_entropy(st.q_raw));
        p.ell = static_cast<long long>(std::floor(std::max(frac, 0.0) * in.n_cpp));
        p.skr_bps = p.ell / t_coll;
        p.beta_opt = 0.0;
        p.v_hat = st.v_hat_input;
        if (p.ell == 0) p.reason = "asymptotic fraction zero";
        return p;
    }

    security::ObservedBlock block;
    block.n_cpp = in.n_cpp;
    block.n_vis = n_vis;
    block.q_hat = st.q_hat;
    block.v_obs = st.v_hat_input;
    block.m_ir = m_ir;
    block.mu = mu;

    const security::KeyLengthResult res = security::optimize_beta(block, params, deviation_for(kind));
    p.ell = res.ell;
    p.skr_bps = res.ell / t_coll;
    p.beta_opt = res.beta_used;
    p.v_hat = res.v_hat;
    if (res.ell == 0) p.reason = res.abort_reason;
    return p;
}

ScanPoint best_mu(const PointInputs& in, const security::SecurityParams& params, BoundKind kind,
                  double temp_k, double dead_time_s, const ScanSettings& s) {
    const double g_lo = std::log10(s.mu_lo);
    const double g_hi = std::log10(s.mu_hi);
    ScanPoint best = zero_point(in, kind, s.mu_lo, temp_k, dead_time_s, "unevaluated");
    double best_g = g_lo;
    for (double g = g_lo; g <= g_hi + 1e-12; g += s.mu_step_decades) {
        const double mu = std::pow(10.0, std::min(g, g_hi));
        ScanPoint p = eval_one(in, params, kind, mu, temp_k, dead_time_s);
        if (p.skr_bps > best.skr_bps) { best = p; best_g = g; }
    }
    // one finer sweep inside the winning interval
    for (int i = -9; i <= 9; ++i) {
        const double g = best_g + i * s.mu_step_decades / 10.0;
        if (g < g_lo || g > g_hi || i == 0) continue;
        ScanPoint p = eval_one(in, params, kind, std::pow(10.0, g), temp_k, dead_time_s);
        if (p.skr_bps > best.skr_bps) best = p;
    }
    return best;
}

PointInputs make_inputs(const model::SystemConfig& config, double distance_km, double n_cpp,
                        const ScanSettings& s) {
    if (!(n_cpp >= 1000.0))
        throw std::invalid_argument("skr_at: n_cpp must be >= 1e3");
    PointInputs in;
    in.cfg = config;
    in.distance_km = distance_km;
    in.n_cpp = n_cpp;
    if (s.scale_extra_loss_with_distance) {
        in.cfg.link.length_km = distance_km;
        in.cfg.link.extra_loss_db = distance_km * s.extra_loss_db_per_km;
    }
    return in;
}

} // namespace

ScanPoint skr_at(const model::SystemConfig& config, double distance_km, double n_cpp,
                 const security::SecurityParams& params, BoundKind kind,
                 const ScanSettings& settings) {
    params.validate();
    const PointInputs in = make_inputs(config, distance_km, n_cpp, settings);
    if (!settings.optimize_operating_point)
        return best_mu(in, params, kind, config.det_data.temp_k, config.det_data.dead_time_s, settings);

    ScanPoint best;
    best.distance_km = distance_km;
    best.n_cpp = n_cpp;
    best.bound = kind;
    best.reason = "no operating point yields positive rate";
    bool first = true;
    for (double temp : settings.temps_k) {
        for (double tau : settings.dead_times_s) {
            ScanPoint p = best_mu(in, params, kind, temp, tau, settings);
            if (first || p.skr_bps > best.skr_bps) { best = p; first = false; }
        }
    }
    return best;
}

ScanPoint preset_point(const model::SystemConfig& config, const security::SecurityParams& params,
                       BoundKind kind) {
    ScanSettings s;
    s.optimize_operating_point = false;
    s.scale_extra_loss_with_distance = false;
    return skr_at(config, config.link.length_km, static_cast<double>(config.n_cpp), params, kind, s);
}

std::vector<ScanPoint> scan(const model::SystemConfig& config, const std::vector<double>& distances,
                            const std::vector<double>& n_cpp_list,
                            const security::SecurityParams& params, BoundKind kind,
                            const ScanSettings& settings) {
    if (distances.empty() || n_cpp_list.empty())
        throw std::invalid_argument("scan: distance and n_cpp lists must be non-empty");
    std::vector<ScanPoint> rows;
    rows.reserve(distances.size() * n_cpp_list.size());
    for (double n_cpp : n_cpp_list)
        for (double d : distances)
            rows.push_back(skr_at(config, d, n_cpp, params, kind, settings));
    return rows;
}

double find_cutoff(const model::SystemConfig& config, double n_cpp,
                   const security::SecurityParams& params, BoundKind kind,
                   const ScanSettings& settings) {
    auto positive = [&](double d) {
        return skr_at(config, d, n_cpp, params, kind, settings).skr_bps > 0.0;
    };
    // coarse: find the positive/zero bracket
    const double step = 10.0;
    double last_pos = -1.0;
    double first_zero = -1.0;
    for (double d = 0.0; d <= settings.max_distance_km + 1e-9; d += step) {
        if (positive(d)) {
            last_pos = d;
            first_zero = -1.0;
        } else if (last_pos >= 0.0 && first_zero < 0.0) {
            first_zero = d;
            break;
        }
    }
    if (last_pos < 0.0) return 0.0;
    if (first_zero < 0.0) return settings.max_distance_km;
    double lo = last_pos, hi = first_zero;
    while (hi - lo > 1.0) {
        const double mid = (lo + hi) / 2.0;
        if (positive(mid)) lo = mid; else hi = mid;
    }
    return lo;
}

std::string csv_header() {
    return "distance_km,n_cpp,bound_kind,skr_bps,ell,mu_opt,beta_opt,temp_k,dead_time_us,q_hat,v_hat,collection_s";
}

void write_csv(std::ostream& os, const std::vector<ScanPoint>& points) {
    os << csv_header() << '\n';
    char buf[512];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf),
                      "%.9g,%.9g,%s,%.9g,%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      p.distance_km, p.n_cpp, to_string(p.bound).c_str(), p.skr_bps, p.ell,
                      p.mu_opt, p.beta_opt, p.temp_opt_k, p.dead_time_opt_s * 1e6, p.q_hat,
                      p.v_hat, p.block_collection_time_s);
        os << buf;
    }
}

} // namespace cowqkd::scan
