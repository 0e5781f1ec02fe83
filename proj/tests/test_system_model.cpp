#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cowqkd/system_model.hpp"

using namespace cowqkd::model;

namespace {

SystemConfig desk_scale_config() {
    SystemConfig c;
    c.name = "unit";
    c.link.length_km = 0.0;
    c.link.extra_loss_db = 25.0;
    c.source.mu = 0.5;
    c.source.intrinsic_visibility = 0.98;
    c.source.intrinsic_error = 0.013;
    c.det_data.temp_k = 200.0;
    c.det_mon.temp_k = 200.0;
    c.det_data.dead_time_s = 0.0;
    c.det_mon.dead_time_s = 0.0;
    return c;
}

} // namespace

TEST_CASE("channel transmittance") {
    FiberLink link;
    link.length_km = 307.0;
    link.extra_loss_db = 2.78;
    CHECK(link.total_db() == doctest::Approx(51.9).epsilon(1e-12));
    CHECK(channel_transmittance(link) ==
          doctest::Approx(std::pow(10.0, -5.19)).epsilon(1e-12));
    FiberLink none;
    CHECK(channel_transmittance(none) == 1.0);
}

TEST_CASE("dark count rate versus temperature") {
    DetectorModel det;
    det.dcr_ref_hz = 40.0;
    det.temp_k = 153.0;
    const auto e = dcr_at_temperature(det);
    CHECK(e.hz == doctest::Approx(1.5389305166811454).epsilon(1e-12));
    CHECK_FALSE(e.extrapolated);
    CHECK_FALSE(e.out_of_range);

    det.temp_k = 200.0;
    CHECK(dcr_at_temperature(det).hz == doctest::Approx(40.0).epsilon(1e-12));

    det.temp_k = 210.0; // halving law extended above the anchor
    const auto hot = dcr_at_temperature(det);
    CHECK(hot.hz == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(hot.extrapolated);
    CHECK_FALSE(hot.out_of_range);

    det.temp_k = 149.0;
    CHECK(dcr_at_temperature(det).out_of_range);
    det.temp_k = 226.0;
    CHECK(dcr_at_temperature(det).out_of_range);
}

TEST_CASE("afterpulse factor") {
    DetectorModel det;
    det.afterpulse_coeff = 0.0;
    det.dead_time_s = 0.0;
    CHECK(afterpulse_factor(det) == 0.0);

    det.afterpulse_coeff = 0.02;
    det.dead_time_s = 8e-6;
    det.temp_k = 200.0;
    det.afterpulse_temp_scale = 30.0;
    CHECK(afterpulse_factor(det) == doctest::Approx(0.02).epsilon(1e-12));
    // colder and shorter-lived trapped carriers released within a longer hold-off
    det.dead_time_s = 16e-6;
    CHECK(afterpulse_factor(det) == doctest::Approx(0.01).epsilon(1e-12));
    det.temp_k = 170.0;
    CHECK(afterpulse_factor(det) == doctest::Approx(0.01 * std::exp(1.0)).epsilon(1e-12));

    det.dead_time_s = 0.0;
    CHECK_THROWS_AS(afterpulse_factor(det), std::invalid_argument);
}

TEST_CASE("dead-time throughput") {
    CHECK(dead_time_throughput(1e5, 115e-6) == doctest::Approx(8000.0).epsilon(1e-12));
    CHECK(dead_time_throughput(1e5, 0.0) == doctest::Approx(1e5).epsilon(1e-15));
    CHECK(dead_time_throughput(0.0, 1e-5) == 0.0);
}

TEST_CASE("expected statistics chain") {
    const SystemConfig c = desk_scale_config();
    const ExpectedStats st = expected_stats(c);

    CHECK(st.sifted_rate_hz > 0.0);
    CHECK(st.sifted_rate_hz < c.source.rep_rate_hz);
    CHECK_FALSE(st.degenerate_data);
    CHECK_FALSE(st.degenerate_monitor);

    // the trusted-detector correction recovers the optical error floor exactly
    CHECK(st.q_hat == doctest::Approx(c.source.intrinsic_error).epsilon(1e-12));
    CHECK(st.q_raw > st.q_hat);
    // visibility correction recovers the intrinsic value in the linear regime
    CHECK(st.v_hat_input ==
          doctest::Approx(c.source.intrinsic_visibility).epsilon(1e-3));
    CHECK(st.v_raw < c.source.intrinsic_visibility);

    // correction helper agrees with the embedded fields
    const auto [qh, vh] = trusted_detector_correction(st);
    CHECK(qh == doctest::Approx(st.q_hat).epsilon(1e-14));
    CHECK(vh == doctest::Approx(st.v_hat_input).epsilon(1e-14));

    // per-slot probabilities are probabilities
    for (const double p : {st.p_sig_data, st.p_dark_bin_data, st.p_dest, st.p_ref,
                           st.p_dark_bin_mon}) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    // slot bookkeeping: interfering + single-contributor + dark-boundary
    // slots account for both monitor slots contributed per symbol
    const double f = c.source.decoy_prob;
    const double empty_boundary = (1.0 - f) * (1.0 - f) / 4.0;
    CHECK(st.frac_int + st.frac_ref + empty_boundary == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(st.n_vis_rate_hz > 0.0);
}

TEST_CASE("expected statistics overloads agree when insertion loss is zero") {
    SystemConfig c = desk_scale_config();
    c.receiver.insertion_loss_db = 0.0;
    const ExpectedStats a = expected_stats(c);
    const ExpectedStats b =
        expected_stats(c.source, c.link, c.det_data, c.det_mon, c.receiver.data_tap);
    CHECK(a.sifted_rate_hz == doctest::Approx(b.sifted_rate_hz).epsilon(1e-14));
    CHECK(a.q_raw == doctest::Approx(b.q_raw).epsilon(1e-14));
    CHECK(a.v_raw == doctest::Approx(b.v_raw).epsilon(1e-14));
}

TEST_CASE("dead time suppresses the sifted rate") {
    SystemConfig c = desk_scale_config();
    const double free_running = expected_stats(c).sifted_rate_hz;
    c.det_data.dead_time_s = 115e-6;
    const double held_off = expected_stats(c).sifted_rate_hz;
    CHECK(held_off < free_running);
    CHECK(held_off < 1.0 / 115e-6); // saturation ceiling
}

TEST_CASE("dark-dominated link is flagged degenerate") {
    SystemConfig c = desk_scale_config();
    c.link.extra_loss_db = 200.0;
    const ExpectedStats st = expected_stats(c);
    CHECK(st.degenerate_data);
    CHECK_THROWS_AS(trusted_detector_correction(st), std::domain_error);
}

TEST_CASE("trusted-detector correction arithmetic") {
    ExpectedStats st;
    st.q_raw = 0.02;
    st.dark_fraction_data = 0.02;
    st.v_raw = 0.97;
    st.dark_fraction_monitor = 0.01;
    const auto [qh, vh] = trusted_detector_correction(st);
    CHECK(qh == doctest::Approx(0.010204081632653061).epsilon(1e-12));
    CHECK(vh == doctest::Approx(1.0 - (2.0 * 0.03 - 0.01) / (2.0 * 0.99)).epsilon(1e-12));

    st.dark_fraction_data = 1.0;
    CHECK_THROWS_AS(trusted_detector_correction(st), std::domain_error);
}

TEST_CASE("config JSON round trip") {
    SystemConfig c = desk_scale_config();
    c.name = "round-trip";
    c.link.length_km = 104.0;
    c.link.extra_loss_db = 0.94;
    c.source.mu = 0.082;
    c.det_data.temp_k = 223.0;
    c.det_data.dead_time_s = 8e-6;
    c.receiver.insertion_loss_db = 1.5;
    c.f_ir = 1.06;
    c.n_cpp = 10000000;
    c.n_symbols_per_block = 2000000;

    const SystemConfig d = config_from_json(config_to_json(c));
    CHECK(d.name == c.name);
    CHECK(d.link.length_km == c.link.length_km);
    CHECK(d.link.extra_loss_db == c.link.extra_loss_db);
    CHECK(d.source.mu == c.source.mu);
    CHECK(d.source.decoy_prob == c.source.decoy_prob);
    CHECK(d.det_data.temp_k == c.det_data.temp_k);
    CHECK(d.det_data.dead_time_s == c.det_data.dead_time_s);
    CHECK(d.det_mon.temp_k == c.det_mon.temp_k);
    CHECK(d.receiver.insertion_loss_db == c.receiver.insertion_loss_db);
    CHECK(d.f_ir == c.f_ir);
    CHECK(d.n_cpp == c.n_cpp);
    CHECK(d.n_symbols_per_block == c.n_symbols_per_block);
}

TEST_CASE("config loading") {
    const std::string path = "unit_config_tmp.json";
    {
        std::ofstream out(path);
        out << R"({"link": {"length_km": 12.5, "extra_loss_db": 1.0},
                   "source": {"mu": 0.3},
                   "detector_data": {}, "detector_monitor": {}})";
    }
    const SystemConfig c = load_config(path);
    CHECK(c.link.length_km == 12.5);
    CHECK(c.link.extra_loss_db == 1.0);
    CHECK(c.source.mu == 0.3);
    CHECK(c.source.rep_rate_hz == 6.25e8); // defaults fill the rest
    std::remove(path.c_str());

    CHECK_THROWS(load_config("does-not-exist.json"));
    CHECK_THROWS(config_from_json(nlohmann::json::object())); // length_km required
}

TEST_CASE("config validation") {
    SystemConfig c = desk_scale_config();
    CHECK_NOTHROW(c.validate());
    c.source.mu = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = desk_scale_config();
    c.receiver.data_tap = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = desk_scale_config();
    c.n_cpp = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
