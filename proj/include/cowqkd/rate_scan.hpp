#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cowqkd/security.hpp"
#include "cowqkd/system_model.hpp"

namespace cowqkd::scan {

enum class BoundKind { new_bound, baseline, asymptotic };

std::string to_string(BoundKind k);
BoundKind bound_from_string(const std::string& s); // "new" | "baseline" | "asymptotic"

struct ScanPoint {
    double distance_km = 0.0;
    double n_cpp = 0.0;
    BoundKind bound = BoundKind::new_bound;
    double skr_bps = 0.0;
    long long ell = 0;
    double mu_opt = 0.0;
    double beta_opt = 0.0;     // 0 for the asymptotic bound
    double temp_opt_k = 0.0;
    double dead_time_opt_s = 0.0;
    double q_hat = 0.0;
    double v_hat = 0.0;
    double block_collection_time_s = 0.0;
    std::string reason; // set when skr_bps == 0
};

struct ScanSettings {
    // operating-point grid (temperature x dead time); disabled for preset
    // evaluation where the config pins both
    bool optimize_operating_point = true;
    std::vector<double> temps_k = {153, 163, 173, 183, 193, 203, 213, 223};
    std::vector<double> dead_times_s = {8e-6, 16e-6, 32e-6, 64e-6, 115e-6};

    // mu search: log grid over [mu_lo, mu_hi], 0.01-decade steps, one
    // finer sweep inside the winning interval
    double mu_lo = 0.01;
    double mu_hi = 1.5;
    double mu_step_decades = 0.01;

    // distance scans rebuild the link as length d with extra loss d * rate;
    // preset evaluation keeps the config's own link
    bool scale_extra_loss_with_distance = true;
    double extra_loss_db_per_km = 2.78 / 307.0;

    double max_distance_km = 500.0; // find_cutoff search ceiling
};

// Best secret key rate at one distance: optimizes mu, beta (via
// security_core) and, if enabled, the detector operating point.
ScanPoint skr_at(const model::SystemConfig& config, double distance_km, double n_cpp,
                 const security::SecurityParams& params, BoundKind kind,
                 const ScanSettings& settings = {});

// Preset evaluation: config link, temperatures and dead times as given;
// only mu and beta are optimized.
ScanPoint preset_point(const model::SystemConfig& config, const security::SecurityParams& params,
                       BoundKind kind);

std::vector<ScanPoint> scan(const model::SystemConfig& config, const std::vector<double>& distances,
                            const std::vector<double>& n_cpp_list,
                            const security::SecurityParams& params, BoundKind kind,
                            const ScanSettings& settings = {});

// Largest distance with skr > 0, to 1 km, via coarse scan plus bisection.
double find_cutoff(const model::SystemConfig& config, double n_cpp,
                   const security::SecurityParams& params, BoundKind kind,
                   const ScanSettings& settings = {});

std::string csv_header();
void write_csv(std::ostream& os, const std::vector<ScanPoint>& points);

} // namespace cowqkd::scan
