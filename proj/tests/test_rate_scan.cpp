#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cowqkd/presets.hpp"
#include "cowqkd/rate_scan.hpp"

using namespace cowqkd;
using namespace cowqkd::scan;
namespace sc = cowqkd::scan;

namespace {

ScanSettings pinned_settings() {
    ScanSettings s;
    s.optimize_operating_point = false;
    s.scale_extra_loss_with_distance = true;
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

} // namespace

TEST_CASE("bound kind names") {
    CHECK(to_string(BoundKind::new_bound) == "new");
    CHECK(to_string(BoundKind::baseline) == "baseline");
    CHECK(to_string(BoundKind::asymptotic) == "asymptotic");
    CHECK(bound_from_string("new") == BoundKind::new_bound);
    CHECK(bound_from_string("baseline") == BoundKind::baseline);
    CHECK(bound_from_string("asymptotic") == BoundKind::asymptotic);
    CHECK_THROWS_AS(bound_from_string("serfling"), std::invalid_argument);
}

TEST_CASE("preset point populates every field") {
    const auto cfg = presets::make_preset("ull_307km");
    const auto params = presets::preset_params("ull_307km");
    const auto p = preset_point(cfg, params, BoundKind::new_bound);
    CHECK(p.distance_km == 307.0);
    CHECK(p.n_cpp == 660000.0);
    CHECK(p.bound == BoundKind::new_bound);
    CHECK(p.skr_bps > 0.0);
    CHECK(p.ell > 0);
    CHECK(p.mu_opt > 0.0);
    CHECK(p.mu_opt <= 1.5);
    CHECK(p.beta_opt > 0.0);
    CHECK(p.beta_opt <= params.eps_qkd / 4.0);
    CHECK(p.temp_opt_k == cfg.det_data.temp_k);
    CHECK(p.dead_time_opt_s == cfg.det_data.dead_time_s);
    CHECK(p.q_hat > 0.0);
    CHECK(p.v_hat < cfg.source.intrinsic_visibility); // deviation was paid
    CHECK(p.v_hat > 0.9);
    CHECK(p.block_collection_time_s > 0.0);
    CHECK(p.reason.empty());
}

TEST_CASE("bound ordering at a fixed operating point") {
    const auto cfg = presets::make_preset("ull_200km");
    const auto params = presets::preset_params("ull_200km");
    const auto p_new = preset_point(cfg, params, BoundKind::new_bound);
    const auto p_base = preset_point(cfg, params, BoundKind::baseline);
    const auto p_asy = preset_point(cfg, params, BoundKind::asymptotic);
    CHECK(p_new.skr_bps > p_base.skr_bps); // sharper tail estimate, longer key
    CHECK(p_asy.skr_bps > p_new.skr_bps);  // finite-size penalties are real
    CHECK(p_asy.beta_opt == 0.0);
}

TEST_CASE("skr_at equals the matching scan row") {
    const auto cfg = presets::make_preset("ull_200km");
    const auto params = presets::preset_params("ull_200km");
    const auto s = pinned_settings();
    const auto single = skr_at(cfg, 150.0, 1000000, params, BoundKind::new_bound, s);
    const auto rows = sc::scan(cfg, {100.0, 150.0}, {100000.0, 1000000.0}, params,
                           BoundKind::new_bound, s);
    REQUIRE(rows.size() == 4); // n_cpp outer, distance inner
    CHECK(rows[0].n_cpp == 100000.0);
    CHECK(rows[0].distance_km == 100.0);
    CHECK(rows[3].n_cpp == 1000000.0);
    CHECK(rows[3].distance_km == 150.0);
    CHECK(rows[3].skr_bps == single.skr_bps);
    CHECK(rows[3].ell == single.ell);
    CHECK(rows[3].mu_opt == single.mu_opt);
    CHECK(rows[3].beta_opt == single.beta_opt);
}

TEST_CASE("rate falls with distance and rises with block size") {
    const auto cfg = presets::make_preset("ull_200km");
    const auto params = presets::preset_params("ull_200km");
    const auto s = pinned_settings();
    const auto d100 = skr_at(cfg, 100.0, 1000000, params, BoundKind::new_bound, s);
    const auto d200 = skr_at(cfg, 200.0, 1000000, params, BoundKind::new_bound, s);
    const auto d280 = skr_at(cfg, 280.0, 1000000, params, BoundKind::new_bound, s);
    CHECK(d100.skr_bps > d200.skr_bps);
    CHECK(d200.skr_bps > d280.skr_bps);

    const auto small = skr_at(cfg, 200.0, 100000, params, BoundKind::new_bound, s);
    const auto large = skr_at(cfg, 200.0, 10000000, params, BoundKind::new_bound, s);
    CHECK(small.skr_bps <= d200.skr_bps);
    CHECK(d200.skr_bps <= large.skr_bps);
}

TEST_CASE("hopeless link yields a zero point with a reason") {
    auto cfg = presets::make_preset("ull_307km");
    const auto params = presets::preset_params("ull_307km");
    auto s = pinned_settings();
    s.scale_extra_loss_with_distance = false;
    cfg.link.extra_loss_db = 150.0;
    const auto p = skr_at(cfg, 307.0, 660000, params, BoundKind::new_bound, s);
    CHECK(p.skr_bps == 0.0);
    CHECK(p.ell == 0);
    CHECK_FALSE(p.reason.empty());
}

TEST_CASE("n_cpp floor is enforced") {
    const auto cfg = presets::make_preset("ull_200km");
    const auto params = presets::preset_params("ull_200km");
    CHECK_THROWS_AS(skr_at(cfg, 100.0, 10, params, BoundKind::new_bound, pinned_settings()),
                    std::invalid_argument);
}

TEST_CASE("scan input validation") {
    const auto cfg = presets::make_preset("ull_200km");
    const auto params = presets::preset_params("ull_200km");
    CHECK_THROWS_AS(sc::scan(cfg, {}, {1e6}, params, BoundKind::new_bound, pinned_settings()),
                    std::invalid_argument);
    CHECK_THROWS_AS(sc::scan(cfg, {100.0}, {}, params, BoundKind::new_bound, pinned_settings()),
                    std::invalid_argument);
}

TEST_CASE("find_cutoff respects the search ceiling") {
    const auto cfg = presets::make_preset("ull_200km");
    const auto params = presets::preset_params("ull_200km");
    auto s = pinned_settings();
    s.max_distance_km = 30.0;
    // positive all the way to the ceiling -> the ceiling is the answer
    CHECK(find_cutoff(cfg, 1000000, params, BoundKind::new_bound, s) == 30.0);

    auto dead = cfg;
    dead.link.extra_loss_db = 150.0;
    auto s2 = pinned_settings();
    s2.scale_extra_loss_with_distance = false;
    s2.max_distance_km = 30.0;
    CHECK(find_cutoff(dead, 1000000, params, BoundKind::new_bound, s2) == 0.0);
}

TEST_CASE("operating-point optimization stays on the grid") {
    const auto cfg = presets::make_preset("ull_200km");
    const auto params = presets::preset_params("ull_200km");
    ScanSettings s; // optimization on
    const auto p = skr_at(cfg, 200.0, 1000000, params, BoundKind::new_bound, s);
    bool temp_on_grid = false;
    for (const double t : s.temps_k) temp_on_grid = temp_on_grid || p.temp_opt_k == t;
    bool dead_on_grid = false;
    for (const double d : s.dead_times_s) dead_on_grid = dead_on_grid || p.dead_time_opt_s == d;
    CHECK(temp_on_grid);
    CHECK(dead_on_grid);
    // optimized choice cannot lose to the preset's own operating point
    const auto pinned = skr_at(cfg, 200.0, 1000000, params, BoundKind::new_bound,
                               pinned_settings());
    CHECK(p.skr_bps >= pinned.skr_bps);
}

TEST_CASE("csv output") {
    CHECK(csv_header() ==
          "distance_km,n_cpp,bound_kind,skr_bps,ell,mu_opt,beta_opt,temp_k,"
          "dead_time_us,q_hat,v_hat,collection_s");
    const auto cfg = presets::make_preset("ull_200km");
    const auto params = presets::preset_params("ull_200km");
    const auto rows = sc::scan(cfg, {100.0, 200.0}, {1000000.0}, params,
                           BoundKind::new_bound, pinned_settings());
    std::ostringstream out;
    write_csv(out, rows);
    std::stringstream ss(out.str());
    std::string line;
    REQUIRE(std::getline(ss, line));
    CHECK(line == csv_header());
    REQUIRE(std::getline(ss, line));
    const auto fields = split_csv_line(line);
    REQUIRE(fields.size() == 12);
    CHECK(std::stod(fields[0]) == 100.0);
    CHECK(std::stod(fields[1]) == 1000000.0);
    CHECK(fields[2] == "new");
    CHECK(std::stod(fields[3]) == doctest::Approx(rows[0].skr_bps).epsilon(1e-8));
    CHECK(std::stoll(fields[4]) == rows[0].ell);
    CHECK(std::stod(fields[8]) ==
          doctest::Approx(rows[0].dead_time_opt_s * 1e6).epsilon(1e-8));
    REQUIRE(std::getline(ss, line));
    CHECK_FALSE(std::getline(ss, line)); // no trailing rows
}
