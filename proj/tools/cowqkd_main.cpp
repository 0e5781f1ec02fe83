// cowqkd: finite-key analysis, rate scans, bound validation, and protocol
// simulation for a coherent-one-way QKD system.
//
// Exit codes: 0 success (including analysis runs that end in a documented
// abort), 2 configuration/input error, 3 simulation run in which every
// block aborted, 4 tail-bound violation detected by bound-check.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cowqkd/postproc.hpp"
#include "cowqkd/presets.hpp"
#include "cowqkd/rate_scan.hpp"
#include "cowqkd/rng.hpp"
#include "cowqkd/sampling.hpp"
#include "cowqkd/security.hpp"
#include "cowqkd/sim.hpp"
#include "cowqkd/system_model.hpp"
#include "cowqkd/version.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace cowqkd;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAllAborted = 3;
constexpr int kExitViolation = 4;

std::string iso_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

json make_manifest(const std::string& command, const std::string& config_desc,
                   std::uint64_t seed, const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["config_path"] = config_desc;
    m["seed"] = seed;
    m["output_paths"] = outputs;
    m["tool_version"] = kVersion;
    m["timestamp"] = iso_timestamp();
    return m;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

struct ResolvedConfig {
    model::SystemConfig config;
    security::SecurityParams params;
    std::string desc;
};

ResolvedConfig resolve_config(const std::string& config_path, const std::string& preset) {
    ResolvedConfig r;
    if (!preset.empty()) {
        r.config = presets::make_preset(preset);
        r.params = presets::preset_params(preset);
        r.desc = "preset:" + preset;
    } else if (!config_path.empty()) {
        r.config = model::load_config(config_path);
        r.params = security::SecurityParams{};
        r.desc = config_path;
    } else {
        throw std::invalid_argument("one of --config or --preset is required");
    }
    return r;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("empty list: " + s);
    return out;
}

std::vector<double> parse_range(const std::string& s) {
    const auto c1 = s.find(':');
    const auto c2 = s.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("expected A:B:STEP, got " + s);
    const double a = std::stod(s.substr(0, c1));
    const double b = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    const double step = std::stod(s.substr(c2 + 1));
    if (!(step > 0.0) || b < a) throw std::invalid_argument("bad range: " + s);
    std::vector<double> out;
    for (double d = a; d <= b + 1e-9; d += step) out.push_back(d);
    return out;
}

std::vector<scan::BoundKind> parse_bounds(const std::string& s) {
    if (s == "all")
        return {scan::BoundKind::new_bound, scan::BoundKind::baseline,
                scan::BoundKind::asymptotic};
    return {scan::bound_from_string(s)};
}

security::DeviationFn deviation_for(scan::BoundKind kind) {
    if (kind == scan::BoundKind::baseline)
        return [](double n_cpp, double n_vis, double, double eps) {
            return sampling::baseline_deviation(n_cpp, n_vis, eps);
        };
    return [](double n_cpp, double n_vis, double v_obs, double eps) {
        return sampling::deviation_t(n_cpp, n_vis, v_obs, eps);
    };
}

json terms_json(const security::KeyLengthTerms& t) {
    return {{"entropy_term", t.entropy_term},
            {"beta_penalty", t.beta_penalty},
            {"m_ir", t.m_ir},
            {"eps_cor_term", t.eps_cor_term},
            {"raw", t.raw}};
}

json result_json(const security::KeyLengthResult& r) {
    return {{"ell", r.ell},          {"beta", r.beta_used},
            {"v_hat", r.v_hat},      {"aborted", r.aborted},
            {"abort_reason", r.abort_reason}, {"terms", terms_json(r.terms)}};
}

json epsilon_json(const security::SecurityParams& params, double beta_used) {
    json e = {{"eps_qkd", params.eps_qkd},
              {"eps_cor", params.eps_cor},
              {"eps_auth", params.eps_auth},
              {"beta", beta_used}};
    security::SecurityParams p = params;
    if (beta_used > 0.0) p.beta = beta_used;
    try {
        e["budget"] = security::epsilon_budget(p, params.eps_cor);
        e["budget_exceeded"] = false;
    } catch (const std::domain_error&) {
        e["budget"] = 4.0 * p.beta + params.eps_cor + params.eps_auth;
        e["budget_exceeded"] = true;
    }
    return e;
}

// ---------------------------------------------------------------------------
// rate
// ---------------------------------------------------------------------------

struct RateArgs {
    std::string config_path, preset, bound = "new", out_dir;
    std::uint64_t seed = 12345;
    std::optional<double> ncpp, nvis, qhat, vobs, mir, mu;
};

int cmd_rate(const RateArgs& a) {
    const auto kind = scan::bound_from_string(a.bound);
    json doc;
    doc["command"] = "rate";
    doc["bound"] = scan::to_string(kind);

    security::SecurityParams params;
    security::ObservedBlock block;
    std::string desc = "overrides";
    double collection_s = 0.0;

    const bool any_obs = a.ncpp || a.nvis || a.qhat || a.vobs || a.mir || a.mu;
    if (any_obs) {
        if (!(a.ncpp && a.nvis && a.qhat && a.vobs && a.mir && a.mu))
            throw std::invalid_argument(
                "explicit statistics need all of --obs-ncpp --obs-nvis --obs-qhat "
                "--obs-vobs --obs-mir --obs-mu");
        if (!a.config_path.empty() || !a.preset.empty()) {
            const ResolvedConfig rc = resolve_config(a.config_path, a.preset);
            params = rc.params;
            desc = rc.desc + "+overrides";
        }
        block.n_cpp = *a.ncpp;
        block.n_vis = *a.nvis;
        block.q_hat = *a.qhat;
        block.v_obs = *a.vobs;
        block.m_ir = *a.mir;
        block.mu = *a.mu;
        doc["inputs"] = {{"source", "overrides"}, {"n_cpp", block.n_cpp},
                         {"n_vis", block.n_vis},  {"q_hat", block.q_hat},
                         {"v_obs", block.v_obs},  {"m_ir", block.m_ir},
                         {"mu", block.mu}};
    } else {
        const ResolvedConfig rc = resolve_config(a.config_path, a.preset);
        params = rc.params;
        desc = rc.desc;
        // pin the operating point and link from the config; optimize mu, beta
        const scan::ScanPoint pp = scan::preset_point(rc.config, params, kind);
        model::SystemConfig cfg = rc.config;
        cfg.source.mu = pp.mu_opt;
        const model::ExpectedStats st = model::expected_stats(cfg);
        if (!(st.sifted_rate_hz > 0.0) || st.degenerate_data || st.degenerate_monitor)
            throw std::invalid_argument("rate: config yields no usable signal");
        collection_s = static_cast<double>(cfg.n_cpp) / st.sifted_rate_hz;
        block.n_cpp = static_cast<double>(cfg.n_cpp);
        block.n_vis = st.n_vis_rate_hz * collection_s;
        block.q_hat = st.q_hat;
        block.v_obs = st.v_hat_input;
        block.m_ir = std::min(cfg.f_ir * block.n_cpp * security::binary_entropy(st.q_raw),
                              block.n_cpp);
        block.mu = pp.mu_opt;
        doc["inputs"] = {{"source", desc},       {"n_cpp", block.n_cpp},
                         {"n_vis", block.n_vis}, {"q_hat", block.q_hat},
                         {"v_obs", block.v_obs}, {"m_ir", block.m_ir},
                         {"mu", block.mu},       {"distance_km", rc.config.link.length_km},
                         {"collection_s", collection_s}};
    }

    if (kind == scan::BoundKind::asymptotic) {
        const double frac = security::asymptotic_fraction(block.q_hat, block.v_obs, block.mu);
        const auto ell = static_cast<long long>(std::floor(frac * block.n_cpp));
        doc["result"] = {{"ell", ell},
                         {"beta", 0.0},
                         {"v_hat", block.v_obs},
                         {"aborted", ell == 0},
                         {"abort_reason", ell == 0 ? "asymptotic fraction zero" : ""},
                         {"asymptotic_fraction", frac}};
        if (collection_s > 0.0) doc["result"]["skr_bps"] = ell / collection_s;
    } else {
        const auto res = security::optimize_beta(block, params, deviation_for(kind));
        doc["result"] = result_json(res);
        if (collection_s > 0.0) doc["result"]["skr_bps"] = res.ell / collection_s;
        doc["epsilon"] = epsilon_json(params, res.beta_used);
    }

    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        const std::string path = (fs::path(a.out_dir) / "rate.json").string();
        write_text(path, text);
        write_text((fs::path(a.out_dir) / "rate_manifest.json").string(),
                   make_manifest("rate", desc, a.seed, {path}).dump(2) + "\n");
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

struct ScanArgs {
    std::string config_path, preset, distances, ncpp, bound = "new", out_dir = ".";
    std::uint64_t seed = 12345;
};

int cmd_scan(const ScanArgs& a) {
    const ResolvedConfig rc = resolve_config(a.config_path, a.preset);
    const auto dists = parse_range(a.distances);
    const auto ncpps = parse_list(a.ncpp);
    const auto kinds = parse_bounds(a.bound);

    scan::ScanSettings settings;
    std::vector<std::vector<scan::ScanPoint>> per_kind;
    per_kind.reserve(kinds.size());
    for (const auto kind : kinds)
        per_kind.push_back(scan::scan(rc.config, dists, ncpps, rc.params, kind, settings));

    // interleave so each (n_cpp, distance) keeps its bound variants adjacent
    std::vector<scan::ScanPoint> rows;
    rows.reserve(per_kind.size() * per_kind[0].size());
    for (std::size_t i = 0; i < per_kind[0].size(); ++i)
        for (const auto& rows_k : per_kind) rows.push_back(rows_k[i]);

    fs::create_directories(a.out_dir);
    const std::string csv_path = (fs::path(a.out_dir) / "scan.csv").string();
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + csv_path);
        scan::write_csv(out, rows);
    }

    // cutoff summary per (n_cpp, bound): largest scanned distance with skr > 0
    for (const double n : ncpps) {
        for (const auto kind : kinds) {
            double cutoff = -1.0;
            for (const auto& p : rows)
                if (p.n_cpp == n && p.bound == kind && p.skr_bps > 0.0)
                    cutoff = std::max(cutoff, p.distance_km);
            char buf[160];
            if (cutoff >= 0.0)
                std::snprintf(buf, sizeof(buf), "cutoff n_cpp=%.3g bound=%s: %.9g km",
                              n, scan::to_string(kind).c_str(), cutoff);
            else
                std::snprintf(buf, sizeof(buf), "cutoff n_cpp=%.3g bound=%s: none in range",
                              n, scan::to_string(kind).c_str());
            std::cout << buf << '\n';
        }
    }
    std::cout << "wrote " << rows.size() << " rows to " << csv_path << '\n';
    write_text((fs::path(a.out_dir) / "scan_manifest.json").string(),
               make_manifest("scan", rc.desc, a.seed, {csv_path}).dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bound-check
// ---------------------------------------------------------------------------

struct BoundCheckArgs {
    std::vector<std::int64_t> ncpp = {100, 1000, 1000, 5000};
    std::vector<std::int64_t> nvis = {100, 100, 1000, 500};
    std::vector<double> fracs = {0.01, 0.05, 0.25};
    std::vector<double> eps = {1e-3, 1e-6, 1e-9};
    double t_scale = 1.0;
    std::string out_dir;
    std::uint64_t seed = 12345;
};

int cmd_bound_check(const BoundCheckArgs& a) {
    if (a.ncpp.size() != a.nvis.size())
        throw std::invalid_argument("--ncpp and --nvis must pair up (equal lengths)");
    json doc;
    doc["command"] = "bound-check";
    doc["t_scale"] = a.t_scale;
    json grid = json::array();
    bool all_hold = true;
    for (std::size_t i = 0; i < a.ncpp.size(); ++i) {
        for (const double frac : a.fracs) {
            for (const double eps : a.eps) {
                sampling::SampleSplit split{a.ncpp[i], a.nvis[i]};
                const auto k = static_cast<std::int64_t>(
                    std::llround(frac * static_cast<double>(split.n_cpp + split.n_vis)));
                const auto rep = sampling::validate_inequality(split, k, eps, a.t_scale);
                all_hold = all_hold && rep.holds;
                grid.push_back(json::parse(rep.to_json()));
                char buf[200];
                std::snprintf(buf, sizeof(buf),
                              "n_cpp=%lld n_vis=%lld K=%lld eps=%.1e  P[viol]=%.3e  %s",
                              static_cast<long long>(split.n_cpp),
                              static_cast<long long>(split.n_vis), static_cast<long long>(k),
                              eps, rep.max_violation_probability,
                              rep.holds ? "holds" : "VIOLATED");
                std::cout << buf << '\n';
            }
        }
    }
    doc["grid"] = grid;
    doc["all_hold"] = all_hold;
    std::cout << (all_hold ? "all grid points hold" : "violations found") << '\n';
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        const std::string path = (fs::path(a.out_dir) / "bound_check.json").string();
        write_text(path, doc.dump(2) + "\n");
        write_text((fs::path(a.out_dir) / "bound_check_manifest.json").string(),
                   make_manifest("bound-check", "builtin-grid", a.seed, {path}).dump(2) + "\n");
    }
    return all_hold ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config_path, preset, out_dir = ".";
    std::uint64_t seed = 12345;
    int blocks = 1;
    long long ell_override = -1;
    bool dump_records = false;
};

const char* cause_name(sim::Cause c) {
    switch (c) {
        case sim::Cause::signal: return "signal";
        case sim::Cause::dark: return "dark";
        case sim::Cause::afterpulse: return "afterpulse";
    }
    return "?";
}

int cmd_simulate(const SimulateArgs& a) {
    if (a.blocks < 1) throw std::invalid_argument("--blocks must be >= 1");
    const ResolvedConfig rc = resolve_config(a.config_path, a.preset);
    const model::SystemConfig& cfg = rc.config;
    const model::ExpectedStats st = model::expected_stats(cfg);
    const double q_est = std::clamp(st.q_raw, 1e-3, 0.25);

    fs::create_directories(a.out_dir);
    std::vector<std::string> outputs;
    json blocks_json = json::array();
    long long total_ell = 0;
    int keyed = 0;

    for (int b = 0; b < a.blocks; ++b) {
        const std::uint64_t s_alice = derive_seed(a.seed, 3ull * b);
        const std::uint64_t s_chan = derive_seed(a.seed, 3ull * b + 1);
        const std::uint64_t s_post = derive_seed(a.seed, 3ull * b + 2);

        const auto stream = sim::alice_generate(
            static_cast<std::int64_t>(cfg.n_symbols_per_block), cfg.source.decoy_prob, s_alice);
        const auto records = sim::transmit_detect(stream, cfg, s_chan);

        if (a.dump_records) {
            char name[64];
            std::snprintf(name, sizeof(name), "records_block%04d.csv", b);
            const std::string path = (fs::path(a.out_dir) / name).string();
            std::ofstream out(path, std::ios::binary);
            out << "slot,line,cause\n";
            for (const auto& r : records)
                out << r.slot << ',' << (r.line == sim::Line::data ? "data" : "monitor")
                    << ',' << cause_name(r.cause) << '\n';
            outputs.push_back(path);
        }

        const sim::SiftedBlock sifted = sim::sift(records, stream, cfg);

        json jb;
        jb["block"] = b;
        jb["n_cpp"] = sifted.n_cpp;
        jb["n_vis"] = sifted.n_vis;
        jb["v_obs_raw"] = sifted.v_obs;
        auto abort_block = [&](const std::string& reason) {
            jb["aborted"] = true;
            jb["reason"] = reason;
            jb["ell"] = 0;
            blocks_json.push_back(jb);
        };

        if (sifted.n_cpp < 1) { abort_block("no sifted bits"); continue; }

        // reconciliation over IR sub-blocks
        const std::size_t n = static_cast<std::size_t>(sifted.n_cpp);
        const std::size_t chunk = postproc::default_ir_block_size(n);
        BitVec corrected(n);
        std::size_t m_ir = 0, corrections = 0;
        for (std::size_t lo = 0, ci = 0; lo < n; lo += chunk, ++ci) {
            const std::size_t hi = std::min(lo + chunk, n);
            BitVec ka(hi - lo), kb(hi - lo);
            for (std::size_t i = lo; i < hi; ++i) {
                ka.set(i - lo, sifted.alice_bits.get(i));
                kb.set(i - lo, sifted.bob_bits.get(i));
            }
            const auto res = postproc::cascade_reconcile(ka, kb, q_est, derive_seed(s_post, ci));
            m_ir += res.m_ir;
            corrections += res.corrections;
            for (std::size_t i = lo; i < hi; ++i)
                corrected.set(i, res.corrected_b.get(i - lo));
        }
        jb["m_ir"] = m_ir;
        jb["corrections"] = corrections;

        const auto ver = postproc::verify(sifted.alice_bits, corrected, rc.params.eps_cor,
                                          derive_seed(s_post, 90));
        jb["verified"] = ver.pass;
        if (!ver.pass) { abort_block("verification failed"); continue; }

        const double q_meas = postproc::measure_qber(sifted.bob_bits, corrected);
        jb["q_meas"] = q_meas;

        if (st.degenerate_data || st.degenerate_monitor) { abort_block("dark-dominated"); continue; }
        const double dfd = st.dark_fraction_data;
        const double dfm = st.dark_fraction_monitor;
        const double q_hat = std::clamp((q_meas - dfd / 2.0) / (1.0 - dfd), 0.0, 1.0);
        const double v_corr =
            std::clamp(1.0 - (2.0 * (1.0 - sifted.v_obs) - dfm) / (2.0 * (1.0 - dfm)), 0.0, 1.0);
        jb["q_hat"] = q_hat;
        jb["v_obs"] = v_corr;

        if (sifted.n_vis < 1) { abort_block("no visibility sample"); continue; }

        security::ObservedBlock blk;
        blk.n_cpp = static_cast<double>(sifted.n_cpp);
        blk.n_vis = static_cast<double>(sifted.n_vis);
        blk.q_hat = q_hat;
        blk.v_obs = v_corr;
        blk.m_ir = static_cast<double>(std::min<std::size_t>(m_ir, n));
        blk.mu = cfg.source.mu;
        const auto res = security::optimize_beta(blk, rc.params,
                                                 deviation_for(scan::BoundKind::new_bound));
        jb["beta"] = res.beta_used;
        jb["v_hat"] = res.v_hat;

        long long ell = res.ell;
        if (a.ell_override >= 0)
            ell = std::min<long long>(a.ell_override, static_cast<long long>(n));
        jb["ell"] = ell;
        if (ell == 0) { abort_block(res.abort_reason.empty() ? "zero length" : res.abort_reason); continue; }

        const auto spec = postproc::make_toeplitz(n, static_cast<std::size_t>(ell),
                                                  derive_seed(s_post, 91));
        const BitVec final_a = postproc::privacy_amplify(sifted.alice_bits, spec);
        const BitVec final_b = postproc::privacy_amplify(corrected, spec);

        char header[160];
        std::snprintf(header, sizeof(header),
                      "# block %d\n# ell %lld\n# eps_qkd %.9g\n# beta %.9g\n", b, ell,
                      rc.params.eps_qkd, res.beta_used);
        for (const char* side : {"alice", "bob"}) {
            char name[64];
            std::snprintf(name, sizeof(name), "key_block%04d_%s.hex", b, side);
            const std::string path = (fs::path(a.out_dir) / name).string();
            write_text(path, std::string(header) +
                                 (side[0] == 'a' ? final_a : final_b).to_hex() + "\n");
            outputs.push_back(path);
        }
        jb["aborted"] = false;
        jb["reason"] = "";
        blocks_json.push_back(jb);
        total_ell += ell;
        ++keyed;
    }

    const double protocol_s = a.blocks * static_cast<double>(cfg.n_symbols_per_block) /
                              cfg.source.rep_rate_hz;
    json doc;
    doc["command"] = "simulate";
    doc["config"] = rc.desc;
    doc["seed"] = a.seed;
    doc["expected"] = {{"sifted_rate_hz", st.sifted_rate_hz},
                       {"q_raw", st.q_raw},
                       {"v_raw", st.v_raw},
                       {"q_hat", st.q_hat},
                       {"v_hat_input", st.v_hat_input},
                       {"qber_estimate_used", q_est}};
    doc["blocks"] = blocks_json;
    doc["aggregate"] = {{"blocks", a.blocks},
                        {"keyed_blocks", keyed},
                        {"total_ell", total_ell},
                        {"protocol_time_s", protocol_s},
                        {"skr_bps", protocol_s > 0.0 ? total_ell / protocol_s : 0.0}};

    const std::string stats_path = (fs::path(a.out_dir) / "simulate_stats.json").string();
    write_text(stats_path, doc.dump(2) + "\n");
    outputs.push_back(stats_path);
    write_text((fs::path(a.out_dir) / "simulate_manifest.json").string(),
               make_manifest("simulate", rc.desc, a.seed, outputs).dump(2) + "\n");

    std::cout << "blocks: " << a.blocks << "  keyed: " << keyed << "  total ell: " << total_ell
              << "  skr: " << (protocol_s > 0.0 ? total_ell / protocol_s : 0.0) << " bps\n";
    return keyed > 0 ? kExitOk : kExitAllAborted;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coherent-one-way QKD finite-key analysis and simulation"};
    app.require_subcommand(1);

    RateArgs rate;
    auto* c_rate = app.add_subcommand("rate", "key length for one block of statistics");
    auto* rate_cfg = c_rate->add_option("--config", rate.config_path, "system config JSON");
    c_rate->add_option("--preset", rate.preset, "shipped preset name")->excludes(rate_cfg);
    c_rate->add_option("--bound", rate.bound, "new|baseline|asymptotic")
        ->check(CLI::IsMember({"new", "baseline", "asymptotic"}));
    c_rate->add_option("--out", rate.out_dir, "output directory");
    c_rate->add_option("--seed", rate.seed, "manifest seed");
    double obs_ncpp, obs_nvis, obs_qhat, obs_vobs, obs_mir, obs_mu;
    c_rate->add_option("--obs-ncpp", obs_ncpp, "override: sifted bits in the block");
    c_rate->add_option("--obs-nvis", obs_nvis, "override: visibility events");
    c_rate->add_option("--obs-qhat", obs_qhat, "override: corrected QBER");
    c_rate->add_option("--obs-vobs", obs_vobs, "override: observed visibility");
    c_rate->add_option("--obs-mir", obs_mir, "override: disclosed reconciliation bits");
    c_rate->add_option("--obs-mu", obs_mu, "override: mean photon number");

    ScanArgs scan_args;
    auto* c_scan = app.add_subcommand("scan", "secret key rate vs distance");
    auto* scan_cfg = c_scan->add_option("--config", scan_args.config_path, "system config JSON");
    c_scan->add_option("--preset", scan_args.preset, "shipped preset name")->excludes(scan_cfg);
    c_scan->add_option("--distances", scan_args.distances, "A:B:STEP in km")->required();
    c_scan->add_option("--ncpp", scan_args.ncpp, "comma-separated CPP block sizes")->required();
    c_scan->add_option("--bound", scan_args.bound, "new|baseline|asymptotic|all")
        ->check(CLI::IsMember({"new", "baseline", "asymptotic", "all"}));
    c_scan->add_option("--out", scan_args.out_dir, "output directory");
    c_scan->add_option("--seed", scan_args.seed, "manifest seed");

    BoundCheckArgs bc;
    auto* c_bc = app.add_subcommand("bound-check", "exhaustive tail-inequality validation");
    c_bc->add_option("--ncpp", bc.ncpp, "population-side counts (pairs with --nvis)");
    c_bc->add_option("--nvis", bc.nvis, "sample-side counts (pairs with --ncpp)");
    c_bc->add_option("--error-fracs", bc.fracs, "true error fractions");
    c_bc->add_option("--eps", bc.eps, "failure probabilities");
    c_bc->add_option("--out", bc.out_dir, "output directory");
    c_bc->add_option("--seed", bc.seed, "manifest seed");
    c_bc->add_option("--scale-t", bc.t_scale, "")->group(""); // test hook, hidden

    SimulateArgs sa;
    auto* c_sim = app.add_subcommand("simulate", "Monte-Carlo protocol blocks end to end");
    auto* sim_cfg = c_sim->add_option("--config", sa.config_path, "system config JSON");
    c_sim->add_option("--preset", sa.preset, "shipped preset name")->excludes(sim_cfg);
    c_sim->add_option("--blocks", sa.blocks, "number of blocks");
    c_sim->add_option("--seed", sa.seed, "root seed");
    c_sim->add_option("--out", sa.out_dir, "output directory");
    c_sim->add_flag("--dump-records", sa.dump_records, "write per-block detection CSVs");
    c_sim->add_option("--ell-override", sa.ell_override, "")->group(""); // test hook, hidden

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_rate->parsed()) {
            if (c_rate->count("--obs-ncpp")) rate.ncpp = obs_ncpp;
            if (c_rate->count("--obs-nvis")) rate.nvis = obs_nvis;
            if (c_rate->count("--obs-qhat")) rate.qhat = obs_qhat;
            if (c_rate->count("--obs-vobs")) rate.vobs = obs_vobs;
            if (c_rate->count("--obs-mir")) rate.mir = obs_mir;
            if (c_rate->count("--obs-mu")) rate.mu = obs_mu;
            return cmd_rate(rate);
        }
        if (c_scan->parsed()) return cmd_scan(scan_args);
        if (c_bc->parsed()) return cmd_bound_check(bc);
        if (c_sim->parsed()) return cmd_simulate(sa);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
