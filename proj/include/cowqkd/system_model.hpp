#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "json.hpp"

namespace cowqkd::model {

struct FiberLink {
    double length_km = 0.0;
    double atten_db_per_km = 0.160;
    double extra_loss_db = 0.0; // splices / connectors

    double total_db() const { return length_km * atten_db_per_km + extra_loss_db; }
};

struct DetectorModel {
    double efficiency = 0.20;
    double dcr_ref_hz = 40.0; // at the 200 K reference temperature
    double temp_k = 200.0;
    double dead_time_s = 0.0;
    double afterpulse_coeff = 0.0; // 0 disables the afterpulse term
    double afterpulse_temp_scale = 30.0;
};

struct SourceModel {
    double rep_rate_hz = 6.25e8; // symbol rate; two time bins per symbol
    double mu = 0.5;
    double decoy_prob = 0.155;   // test-state fraction f
    double intrinsic_visibility = 0.98;
    double intrinsic_error = 0.013; // optical QBER floor
};

// Receiver front end: asymmetric tap into data/monitor lines plus common
// insertion loss ahead of both detectors.
struct ReceiverModel {
    double data_tap = 0.9;
    double insertion_loss_db = 0.0;
};

struct SystemConfig {
    std::string name;
    FiberLink link;
    SourceModel source;
    DetectorModel det_data;
    DetectorModel det_mon;
    ReceiverModel receiver;
    double f_ir = 1.06;                     // reconciliation inefficiency for analytic scans
    std::size_t n_cpp = 660000;             // CPP block size
    std::size_t n_symbols_per_block = 1000000; // simulator frame length

    void validate() const;
};

struct DcrEstimate {
    double hz = 0.0;
    bool extrapolated = false; // above the 200 K anchor
    bool out_of_range = false; // outside the modelled 150-225 K span
};

struct ExpectedStats {
    double sifted_rate_hz = 0.0;
    double q_raw = 0.0;
    double v_raw = 0.0;
    double q_hat = 0.0;
    double v_hat_input = 0.0;
    double dark_fraction_data = 0.0;    // dark share of data-line clicks in bit symbols
    double dark_fraction_monitor = 0.0; // dark share of monitor reference-slot clicks
    double n_vis_rate_hz = 0.0;

    // model internals, exposed so the simulator tests can compare counts
    double throughput_data = 1.0;
    double throughput_monitor = 1.0;
    double p_sig_data = 0.0;       // per-pulse data-line click probability
    double p_dark_bin_data = 0.0;  // per-bin dark probability, data detector
    double p_dest = 0.0;           // destructive-port click prob, interfering slot
    double p_ref = 0.0;            // destructive-port click prob, reference slot
    double p_dark_bin_mon = 0.0;
    double frac_int = 0.0;         // interfering slots per symbol
    double frac_ref = 0.0;         // single-contributor slots per symbol
    bool degenerate_data = false;  // signal indistinguishable from darks
    bool degenerate_monitor = false;
};

// 10^(-total_db/10)
double channel_transmittance(const FiberLink& link);

// dcr_ref * 2^((T-200)/10); flagged as extrapolated above 200 K and
// out-of-range outside [150, 225] K.
DcrEstimate dcr_at_temperature(const DetectorModel& det);

// afterpulse inflation factor: coeff * exp(-(T-200)/scale) * (8us / dead);
// 0 when coeff is 0. Applied multiplicatively to the DCR.
double afterpulse_factor(const DetectorModel& det);

// non-paralyzable: raw / (1 + raw * dead)
double dead_time_throughput(double raw_rate_hz, double dead_time_s);

// Spec-form entry point: receiver insertion loss 0.
ExpectedStats expected_stats(const SourceModel& source, const FiberLink& link,
                             const DetectorModel& det_data, const DetectorModel& det_mon,
                             double data_tap);

// Full-config form, including receiver insertion loss.
ExpectedStats expected_stats(const SystemConfig& config);

// Removes the dark-count contribution from (q_raw, v_raw):
//   q_hat = (q_raw - dfd/2) / (1 - dfd)
//   v_hat = 1 - (2(1 - v_raw) - dfm) / (2 (1 - dfm))
// both clamped to [0,1]. Throws std::domain_error when a dark fraction is
// degenerate (p_click <= p_dark).
std::pair<double, double> trusted_detector_correction(const ExpectedStats& stats);

SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& c);
SystemConfig load_config(const std::string& path);

} // namespace cowqkd::model
