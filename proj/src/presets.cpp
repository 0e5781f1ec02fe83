#include "cowqkd/presets.hpp"

#include <stdexcept>

namespace cowqkd::presets {

namespace {

model::SystemConfig base_config() {
    model::SystemConfig c;
    c.link.atten_db_per_km = 0.160;
    c.source.rep_rate_hz = 6.25e8;
    c.source.decoy_prob = 0.155;
    c.source.intrinsic_error = 0.013;
    c.det_data.efficiency = 0.20;
    c.det_data.dcr_ref_hz = 40.0;
    c.det_mon = c.det_data;
    c.receiver.data_tap = 0.9;
    c.receiver.insertion_loss_db = 1.5;
    c.f_ir = 1.06;
    c.n_symbols_per_block = 1000000;
    return c;
}

void set_operating_point(model::SystemConfig& c, double temp_k, double dead_time_s) {
    c.det_data.temp_k = temp_k;
    c.det_data.dead_time_s = dead_time_s;
    c.det_mon.temp_k = temp_k;
    c.det_mon.dead_time_s = dead_time_s;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"ull_307km", "ull_200km", "ull_104km", "desk"};
}

model::SystemConfig make_preset(const std::string& name) {
    model::SystemConfig c = base_config();
    if (name == "ull_307km") {
        c.name = name;
        c.link.length_km = 307.0;
        c.link.extra_loss_db = 2.78;
        c.source.mu = 0.103;   // finite-key optimum for this block size
        c.source.intrinsic_visibility = 0.970;
        set_operating_point(c, 153.0, 115e-6);
        c.n_cpp = 660000;
    } else if (name == "ull_200km") {
        c.name = name;
        c.link.length_km = 200.0;
        c.link.extra_loss_db = 1.81;
        c.source.mu = 0.124;   // finite-key optimum for this block size
        c.source.intrinsic_visibility = 0.9775;
        set_operating_point(c, 183.0, 16e-6);
        c.n_cpp = 1000000;
    } else if (name == "ull_104km") {
        c.name = name;
        c.link.length_km = 104.0;
        c.link.extra_loss_db = 0.94;
        c.source.mu = 0.082;   // finite-key optimum for this block size
        c.source.intrinsic_visibility = 0.980;
        set_operating_point(c, 223.0, 8e-6);
        c.n_cpp = 10000000;
    } else if (name == "desk") {
        c.name = name;
        c.link.length_km = 0.0;
        c.link.extra_loss_db = 25.0;
        c.source.mu = 5.0;
        c.source.intrinsic_visibility = 0.98;
        c.source.intrinsic_error = 0.02;
        c.receiver.insertion_loss_db = 0.0;
        set_operating_point(c, 200.0, 0.0);
        c.n_cpp = 2400;
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    c.validate();
    return c;
}

security::SecurityParams preset_params(const std::string& name) {
    make_preset(name); // name check
    security::SecurityParams p;
    p.eps_qkd = 4e-9;
    p.eps_cor = 1e-11;
    p.eps_auth = 1e-15;
    p.beta = 1e-9;
    return p;
}

} // namespace cowqkd::presets
