#include "cowqkd/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace cowqkd::model {

namespace {
constexpr double kDegenerateDarkFraction = 1.0 - 1e-9;
constexpr double kAfterpulseRefDeadTime = 8e-6;

void check_prob(double p, const char* what) {
    if (!(p >= 0.0) || !(p <= 1.0))
        throw std::runtime_error(std::string("expected_stats: ") + what + " left [0,1]");
}
} // namespace

void SystemConfig::validate() const {
    if (!(link.length_km >= 0.0) || !(link.atten_db_per_km > 0.0))
        throw std::invalid_argument("SystemConfig: invalid fibre link");
    if (!(source.rep_rate_hz > 0.0) || !(source.mu > 0.0))
        throw std::invalid_argument("SystemConfig: invalid source");
    if (!(source.decoy_prob > 0.0) || !(source.decoy_prob < 1.0))
        throw std::invalid_argument("SystemConfig: decoy_prob must be in (0,1)");
    if (!(source.intrinsic_visibility >= 0.0) || !(source.intrinsic_visibility <= 1.0))
        throw std::invalid_argument("SystemConfig: intrinsic_visibility must be in [0,1]");
    if (!(source.intrinsic_error >= 0.0) || !(source.intrinsic_error <= 0.5))
        throw std::invalid_argument("SystemConfig: intrinsic_error must be in [0,0.5]");
    for (const DetectorModel* d : {&det_data, &det_mon}) {
        if (!(d->efficiency > 0.0) || !(d->efficiency <= 1.0))
            throw std::invalid_argument("SystemConfig: detector efficiency must be in (0,1]");
        if (!(d->dcr_ref_hz >= 0.0) || !(d->dead_time_s >= 0.0))
            throw std::invalid_argument("SystemConfig: invalid detector DCR/dead time");
    }
    if (!(receiver.data_tap > 0.0) || !(receiver.data_tap < 1.0))
        throw std::invalid_argument("SystemConfig: data_tap must be in (0,1)");
    if (!(receiver.insertion_loss_db >= 0.0))
        throw std::invalid_argument("SystemConfig: insertion loss must be >= 0");
    if (n_cpp < 1 || n_symbols_per_block < 1)
        throw std::invalid_argument("SystemConfig: block sizes must be >= 1");
}

double channel_transmittance(const FiberLink& link) {
    return std::pow(10.0, -link.total_db() / 10.0);
}

DcrEstimate dcr_at_temperature(const DetectorModel& det) {
    DcrEstimate e;
    e.hz = det.dcr_ref_hz * std::pow(2.0, (det.temp_k - 200.0) / 10.0);
    e.extrapolated = det.temp_k > 200.0;
    e.out_of_range = det.temp_k < 150.0 || det.temp_k > 225.0;
    return e;
}

double afterpulse_factor(const DetectorModel& det) {
    if (det.afterpulse_coeff == 0.0) return 0.0;
    if (!(det.dead_time_s > 0.0))
        throw std::invalid_argument("afterpulse_factor: needs dead_time_s > 0");
    return det.afterpulse_coeff * std::exp(-(det.temp_k - 200.0) / det.afterpulse_temp_scale)
         * (kAfterpulseRefDeadTime / det.dead_time_s);
}

double dead_time_throughput(double raw_rate_hz, double dead_time_s) {
    if (!(raw_rate_hz >= 0.0))
        throw std::invalid_argument("dead_time_throughput: rate must be >= 0");
    return raw_rate_hz / (1.0 + raw_rate_hz * dead_time_s);
}

namespace {

ExpectedStats expected_stats_impl(const SourceModel& source, const FiberLink& link,
                                  const DetectorModel& det_data, const DetectorModel& det_mon,
                                  double data_tap, double insertion_loss_db) {
    if (!(data_tap > 0.0) || !(data_tap < 1.0))
        throw std::invalid_argument("expected_stats: data_tap must be in (0,1)");

    const double rep = source.rep_rate_hz;
    const double f = source.decoy_prob;
    const double t_ch = channel_transmittance(link);
    const double eta_rx = std::pow(10.0, -insertion_loss_db / 10.0);
    const double nu_d = source.mu * t_ch * data_tap * det_data.efficiency * eta_rx;
    const double nu_m = source.mu * t_ch * (1.0 - data_tap) * det_mon.efficiency * eta_rx;

    const double dcr_d = dcr_at_temperature(det_data).hz * (1.0 + afterpulse_factor(det_data));
    const double dcr_m = dcr_at_temperature(det_mon).hz * (1.0 + afterpulse_factor(det_mon));

    ExpectedStats st;

    // ---- data line ----
    const double p_bit = 1.0 - std::exp(-nu_d);        // bit symbol: one occupied bin
    const double p_test = 1.0 - std::exp(-2.0 * nu_d); // test symbol: both bins
    const double r_data_raw = rep * ((1.0 - f) * p_bit + f * p_test) + dcr_d;
    st.throughput_data = r_data_raw > 0.0 ? dead_time_throughput(r_data_raw, det_data.dead_time_s) / r_data_raw : 1.0;

    st.sifted_rate_hz = ((1.0 - f) * rep * p_bit + (1.0 - f) * dcr_d) * st.throughput_data;

    const double sig = rep * p_bit; // per-second signal click rate within bit symbols
    st.q_raw = (sig + dcr_d) > 0.0
                   ? (0.5 * dcr_d + source.intrinsic_error * sig) / (dcr_d + sig)
                   : 0.0;
    st.dark_fraction_data = (sig + dcr_d) > 0.0 ? dcr_d / (dcr_d + sig) : 1.0;
    st.degenerate_data = st.dark_fraction_data >= kDegenerateDarkFraction;

    // ---- monitor line (single detector on the destructive port) ----
    // Slot taxonomy per symbol: both-neighbour (interfering) slots occur at
    // rate f + ((1+f)/2)^2, single-contributor (reference) slots at
    // (1-f) + (1-f^2)/2; the remainder has no signal contribution.
    st.frac_int = f + (1.0 + f) * (1.0 + f) / 4.0;
    st.frac_ref = (1.0 - f) + (1.0 - f * f) / 2.0;

    const double d_bin = dcr_m / (2.0 * rep); // dark probability per time bin
    st.p_dest = 1.0 - std::exp(-nu_m / 2.0 * (1.0 - source.intrinsic_visibility));
    st.p_ref = 1.0 - std::exp(-nu_m / 4.0);
    st.p_dark_bin_mon = d_bin;

    const double r_mon_raw = rep * (st.frac_int * st.p_dest + st.frac_ref * st.p_ref) + dcr_m;
    st.throughput_monitor = r_mon_raw > 0.0 ? dead_time_throughput(r_mon_raw, det_mon.dead_time_s) / r_mon_raw : 1.0;

    const double r_int_obs = st.p_dest + d_bin * (1.0 - st.p_dest); // per interfering slot
    const double r_ref_obs = st.p_ref + d_bin * (1.0 - st.p_ref);   // per reference slot
    st.v_raw = r_ref_obs > 0.0 ? 1.0 - r_int_obs / (2.0 * r_ref_obs) : 0.0;
    st.dark_fraction_monitor = r_ref_obs > 0.0 ? d_bin / r_ref_obs : 1.0;
    st.degenerate_monitor = st.dark_fraction_monitor >= kDegenerateDarkFraction;

    st.n_vis_rate_hz = rep * st.frac_int * (1.0 - std::exp(-nu_m)) * st.throughput_monitor;

    st.p_sig_data = p_bit;
    st.p_dark_bin_data = dcr_d / (2.0 * rep);

    // dark-subtracted inputs to the security bound; noise values when the
    // correction is degenerate (the bound then aborts on its own)
    if (!st.degenerate_data) {
        const double dfd = st.dark_fraction_data;
        st.q_hat = std::clamp((st.q_raw - dfd / 2.0) / (1.0 - dfd), 0.0, 1.0);
    } else {
        st.q_hat = 0.5;
    }
    if (!st.degenerate_monitor) {
        const double dfm = st.dark_fraction_monitor;
        st.v_hat_input = std::clamp(1.0 - (2.0 * (1.0 - st.v_raw) - dfm) / (2.0 * (1.0 - dfm)), 0.0, 1.0);
    } else {
        st.v_hat_input = 0.0;
    }

    check_prob(st.q_raw, "q_raw");
    check_prob(st.p_dest, "p_dest");
    check_prob(st.p_ref, "p_ref");
    check_prob(st.p_sig_data, "p_sig_data");
    return st;
}

} // namespace

ExpectedStats expected_stats(const SourceModel& source, const FiberLink& link,
                             const DetectorModel& det_data, const DetectorModel& det_mon,
                             double data_tap) {
    return expected_stats_impl(source, link, det_data, det_mon, data_tap, 0.0);
}

ExpectedStats expected_stats(const SystemConfig& config) {
    config.validate();
    return expected_stats_impl(config.source, config.link, config.det_data, config.det_mon,
                               config.receiver.data_tap, config.receiver.insertion_loss_db);
}

std::pair<double, double> trusted_detector_correction(const ExpectedStats& stats) {
    if (stats.dark_fraction_data >= kDegenerateDarkFraction ||
        stats.dark_fraction_monitor >= kDegenerateDarkFraction)
        throw std::domain_error("trusted_detector_correction: signal indistinguishable from darks");
    const double dfd = stats.dark_fraction_data;
    const double dfm = stats.dark_fraction_monitor;
    const double q_hat = std::clamp((stats.q_raw - dfd / 2.0) / (1.0 - dfd), 0.0, 1.0);
    const double v_hat = std::clamp(1.0 - (2.0 * (1.0 - stats.v_raw) - dfm) / (2.0 * (1.0 - dfm)), 0.0, 1.0);
    return {q_hat, v_hat};
}

namespace {

FiberLink link_from_json(const nlohmann::json& j) {
    FiberLink l;
    l.length_km = j.at("length_km").get<double>();
    l.atten_db_per_km = j.value("atten_db_per_km", 0.160);
    l.extra_loss_db = j.value("extra_loss_db", 0.0);
    return l;
}

DetectorModel det_from_json(const nlohmann::json& j) {
    DetectorModel d;
    d.efficiency = j.value("efficiency", 0.20);
    d.dcr_ref_hz = j.value("dcr_ref_hz", 40.0);
    d.temp_k = j.value("temp_k", 200.0);
    d.dead_time_s = j.value("dead_time_s", 0.0);
    d.afterpulse_coeff = j.value("afterpulse_coeff", 0.0);
    d.afterpulse_temp_scale = j.value("afterpulse_temp_scale", 30.0);
    return d;
}

nlohmann::json det_to_json(const DetectorModel& d) {
    return {{"efficiency", d.efficiency},
            {"dcr_ref_hz", d.dcr_ref_hz},
            {"temp_k", d.temp_k},
            {"dead_time_s", d.dead_time_s},
            {"afterpulse_coeff", d.afterpulse_coeff},
            {"afterpulse_temp_scale", d.afterpulse_temp_scale}};
}

} // namespace

SystemConfig config_from_json(const nlohmann::json& j) {
    SystemConfig c;
    c.name = j.value("name", "");
    c.link = link_from_json(j.at("link"));
    const auto& s = j.at("source");
    c.source.rep_rate_hz = s.value("rep_rate_hz", 6.25e8);
    c.source.mu = s.value("mu", 0.5);
    c.source.decoy_prob = s.value("decoy_prob", 0.155);
    c.source.intrinsic_visibility = s.value("intrinsic_visibility", 0.98);
    c.source.intrinsic_error = s.value("intrinsic_error", 0.013);
    c.det_data = det_from_json(j.at("detector_data"));
    c.det_mon = det_from_json(j.at("detector_monitor"));
    if (j.contains("receiver")) {
        c.receiver.data_tap = j["receiver"].value("data_tap", 0.9);
        c.receiver.insertion_loss_db = j["receiver"].value("insertion_loss_db", 0.0);
    }
    c.f_ir = j.value("f_ir", 1.06);
    c.n_cpp = j.value("n_cpp", static_cast<std::size_t>(660000));
    c.n_symbols_per_block = j.value("n_symbols_per_block", static_cast<std::size_t>(1000000));
    c.validate();
    return c;
}

nlohmann::json config_to_json(const SystemConfig& c) {
    nlohmann::json j;
    j["name"] = c.name;
    j["link"] = {{"length_km", c.link.length_km},
                 {"atten_db_per_km", c.link.atten_db_per_km},
                 {"extra_loss_db", c.link.extra_loss_db}};
    j["source"] = {{"rep_rate_hz", c.source.rep_rate_hz},
                   {"mu", c.source.mu},
                   {"decoy_prob", c.source.decoy_prob},
                   {"intrinsic_visibility", c.source.intrinsic_visibility},
                   {"intrinsic_error", c.source.intrinsic_error}};
    j["detector_data"] = det_to_json(c.det_data);
    j["detector_monitor"] = det_to_json(c.det_mon);
    j["receiver"] = {{"data_tap", c.receiver.data_tap},
                     {"insertion_loss_db", c.receiver.insertion_loss_db}};
    j["f_ir"] = c.f_ir;
    j["n_cpp"] = c.n_cpp;
    j["n_symbols_per_block"] = c.n_symbols_per_block;
    return j;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

} // namespace cowqkd::model
