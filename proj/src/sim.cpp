#include "cowqkd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cowqkd/rng.hpp"

namespace cowqkd::sim {

namespace {

std::int64_t dead_bins(double dead_time_s, double rep_rate_hz) {
    return std::llround(dead_time_s * 2.0 * rep_rate_hz);
}

bool occupies_first_bin(SymbolKind k) { return k != SymbolKind::bit0; }
bool occupies_second_bin(SymbolKind k) { return k != SymbolKind::bit1; }

Cause dark_cause(Rng& rng, double ap_factor) {
    if (ap_factor > 0.0 && rng.bernoulli(ap_factor / (1.0 + ap_factor)))
        return Cause::afterpulse;
    return Cause::dark;
}

} // namespace

std::vector<Symbol> alice_generate(std::int64_t n_symbols, double decoy_prob, std::uint64_t seed) {
    if (n_symbols < 1) throw std::invalid_argument("alice_generate: n_symbols must be >= 1");
    if (!(decoy_prob >= 0.0) || !(decoy_prob <= 1.0))
        throw std::invalid_argument("alice_generate: decoy_prob must be in [0,1]");
    std::vector<Symbol> stream;
    stream.reserve(static_cast<std::size_t>(n_symbols));
    Rng rng(seed);
    for (std::int64_t i = 0; i < n_symbols; ++i) {
        Symbol s;
        s.slot_index = i;
        if (rng.uniform() < decoy_prob)
            s.kind = SymbolKind::test;
        else
            s.kind = rng.bernoulli(0.5) ? SymbolKind::bit1 : SymbolKind::bit0;
        stream.push_back(s);
    }
    return stream;
}

std::vector<DetectionRecord> transmit_detect(const std::vector<Symbol>& stream,
                                             const model::SystemConfig& config,
                                             std::uint64_t seed) {
    if (stream.empty()) throw std::invalid_argument("transmit_detect: empty stream");
    const model::ExpectedStats st = model::expected_stats(config);
    const auto n = static_cast<std::int64_t>(stream.size());
    const double e_int = config.source.intrinsic_error;
    const double ap_d = model::afterpulse_factor(config.det_data);
    const double ap_m = model::afterpulse_factor(config.det_mon);
    const std::int64_t dead_d = dead_bins(config.det_data.dead_time_s, config.source.rep_rate_hz);
    const std::int64_t dead_m = dead_bins(config.det_mon.dead_time_s, config.source.rep_rate_hz);

    Rng rng(seed);
    std::vector<DetectionRecord> out;

    // ---- data line, symbol by symbol ----
    std::int64_t next_free = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const SymbolKind k = stream[static_cast<std::size_t>(i)].kind;
        bool cand[2] = {false, false};
        if (k == SymbolKind::test) {
            cand[0] = rng.bernoulli(st.p_sig_data);
            cand[1] = rng.bernoulli(st.p_sig_data);
        } else {
            if (rng.bernoulli(st.p_sig_data)) {
                int bin = occupies_first_bin(k) ? 0 : 1;
                if (rng.bernoulli(e_int)) bin ^= 1; // intrinsic bit flip
                cand[bin] = true;
            }
        }
        for (int b = 0; b < 2; ++b) {
            const bool dark = rng.bernoulli(st.p_dark_bin_data);
            if (!cand[b] && !dark) continue;
            const std::int64_t slot = 2 * i + b;
            if (slot < next_free) continue; // dead; non-paralyzable
            DetectionRecord r;
            r.slot = slot;
            r.line = Line::data;
            r.cause = cand[b] ? Cause::signal : dark_cause(rng, ap_d);
            out.push_back(r);
            next_free = slot + 1 + dead_d;
        }
    }

    // ---- monitor line, output slot by output slot ----
    // Output slot j interferes input bins j-1 and j; bins outside the frame
    // are empty, so the two edge slots are at most single-contributor.
    auto occ = [&](std::int64_t bin) -> bool {
        if (bin < 0 || bin >= 2 * n) return false;
        const Symbol& s = stream[static_cast<std::size_t>(bin / 2)];
        return (bin & 1) ? occupies_second_bin(s.kind) : occupies_first_bin(s.kind);
    };
    next_free = 0;
    for (std::int64_t j = 0; j <= 2 * n; ++j) {
        const int nb = (occ(j - 1) ? 1 : 0) + (occ(j) ? 1 : 0);
        bool sig = false;
        if (nb == 2) sig = rng.bernoulli(st.p_dest);
        else if (nb == 1) sig = rng.bernoulli(st.p_ref);
        const bool dark = rng.bernoulli(st.p_dark_bin_mon);
        if (!sig && !dark) continue;
        if (j < next_free) continue;
        DetectionRecord r;
        r.slot = j;
        r.line = Line::monitor;
        r.cause = sig ? Cause::signal : dark_cause(rng, ap_m);
        out.push_back(r);
        next_free = j + 1 + dead_m;
    }
    return out;
}

SiftedBlock sift(const std::vector<DetectionRecord>& records, const std::vector<Symbol>& stream,
                 const model::SystemConfig& config) {
    const auto n = static_cast<std::int64_t>(stream.size());
    if (n == 0) throw std::invalid_argument("sift: empty stream");

    // per-symbol data-line click mask (bit 0 = first bin, bit 1 = second)
    std::vector<std::uint8_t> clicked(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> mon_slots;
    for (const auto& r : records) {
        if (r.line == Line::data) {
            if (r.slot < 0 || r.slot >= 2 * n)
                throw std::invalid_argument("sift: data record outside frame");
            clicked[static_cast<std::size_t>(r.slot / 2)] |=
                static_cast<std::uint8_t>(1u << (r.slot & 1));
        } else {
            if (r.slot < 0 || r.slot > 2 * n)
                throw std::invalid_argument("sift: monitor record outside frame");
            mon_slots.push_back(r.slot);
        }
    }

    SiftedBlock blk;
    std::vector<std::uint8_t> a_bits, b_bits;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint8_t m = clicked[static_cast<std::size_t>(i)];
        if (m == 0) continue;
        const SymbolKind k = stream[static_cast<std::size_t>(i)].kind;
        if (k == SymbolKind::test) continue; // not key material
        std::uint8_t bob;
        if (m == 1) bob = 1;      // first-bin click: pulse position of bit 1
        else if (m == 2) bob = 0; // second-bin click: pulse position of bit 0
        else bob = static_cast<std::uint8_t>(splitmix64(
                 static_cast<std::uint64_t>(stream[static_cast<std::size_t>(i)].slot_index)) & 1u);
        a_bits.push_back(k == SymbolKind::bit1 ? 1 : 0);
        b_bits.push_back(bob);
        blk.slot_map.push_back(stream[static_cast<std::size_t>(i)].slot_index);
    }
    blk.n_cpp = static_cast<std::int64_t>(a_bits.size());
    blk.alice_bits = BitVec(a_bits.size());
    blk.bob_bits = BitVec(b_bits.size());
    for (std::size_t i = 0; i < a_bits.size(); ++i) {
        blk.alice_bits.set(i, a_bits[i] != 0);
        blk.bob_bits.set(i, b_bits[i] != 0);
    }

    // ---- monitor tallies over live slots ----
    std::sort(mon_slots.begin(), mon_slots.end());
    auto occ = [&](std::int64_t bin) -> bool {
        if (bin < 0 || bin >= 2 * n) return false;
        const Symbol& s = stream[static_cast<std::size_t>(bin / 2)];
        return (bin & 1) ? occupies_second_bin(s.kind) : occupies_first_bin(s.kind);
    };
    const std::int64_t dead_m = dead_bins(config.det_mon.dead_time_s, config.source.rep_rate_hz);
    std::size_t next_rec = 0;
    std::int64_t next_free = 0;
    for (std::int64_t j = 0; j <= 2 * n; ++j) {
        bool click = false;
        while (next_rec < mon_slots.size() && mon_slots[next_rec] == j) {
            click = true;
            ++next_rec;
        }
        if (j < next_free) continue; // dead slot: not part of the sample
        const int nb = (occ(j - 1) ? 1 : 0) + (occ(j) ? 1 : 0);
        if (nb == 2) {
            ++blk.int_slots;
            if (click) ++blk.int_clicks;
        } else if (nb == 1) {
            ++blk.ref_slots;
            if (click) ++blk.ref_clicks;
        }
        if (click) next_free = j + 1 + dead_m;
    }

    if (blk.int_slots > 0 && blk.ref_slots > 0 && blk.ref_clicks > 0) {
        const double r_int = static_cast<double>(blk.int_clicks) / static_cast<double>(blk.int_slots);
        const double r_ref = static_cast<double>(blk.ref_clicks) / static_cast<double>(blk.ref_slots);
        blk.v_obs = std::clamp(1.0 - r_int / (2.0 * r_ref), 0.0, 1.0);
        blk.n_vis = std::llround(static_cast<double>(blk.int_slots) * std::min(4.0 * r_ref, 1.0));
    } else {
        blk.v_obs = 1.0;
        blk.n_vis = 0;
    }
    return blk;
}

} // namespace cowqkd::sim
