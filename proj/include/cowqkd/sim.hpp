#pragma once

#include <cstdint>
#include <vector>

#include "cowqkd/bitvec.hpp"
#include "cowqkd/system_model.hpp"

namespace cowqkd::sim {

enum class SymbolKind : std::uint8_t { bit0, bit1, test };

// One symbol occupies two time bins. bit0 = (empty, pulse), bit1 =
// (pulse, empty), test = (pulse, pulse).
struct Symbol {
    SymbolKind kind = SymbolKind::bit0;
    std::int64_t slot_index = 0; // symbol (time-slot pair) index
};

enum class Line : std::uint8_t { data, monitor };

// Simulation-truth tag; protocol logic (sift and everything downstream)
// never reads it.
enum class Cause : std::uint8_t { signal, dark, afterpulse };

struct DetectionRecord {
    std::int64_t slot = 0; // data: input bin index in [0, 2n); monitor: output slot in [0, 2n]
    Line line = Line::data;
    Cause cause = Cause::signal;
};

struct SiftedBlock {
    BitVec alice_bits;
    BitVec bob_bits;
    std::int64_t n_cpp = 0;  // = alice_bits.size()
    std::int64_t n_vis = 0;  // visibility-measurement events
    double v_obs = 1.0;
    std::vector<std::int64_t> slot_map; // symbol index of each kept key bit

    // monitor-line tallies behind v_obs and n_vis (live slots only)
    std::int64_t int_slots = 0;
    std::int64_t int_clicks = 0;
    std::int64_t ref_slots = 0;
    std::int64_t ref_clicks = 0;
};

// i.i.d. stream: test with probability decoy_prob, otherwise a fair bit.
// decoy_prob may be 0 or 1 here (degenerate streams are useful in tests)
// even though SystemConfig requires (0,1).
std::vector<Symbol> alice_generate(std::int64_t n_symbols, double decoy_prob, std::uint64_t seed);

// Channel + both detectors. Per-pulse Poissonian click probabilities from
// system_model; per-bin dark counts; intrinsic bit-flip errors on the data
// line; monitor-line interference on the destructive port with output slot
// j fed by input bins j-1 and j (empty outside the frame); independent
// non-paralyzable dead time per detector. Records are ordered data line
// first, then monitor, ascending slot.
std::vector<DetectionRecord> transmit_detect(const std::vector<Symbol>& stream,
                                             const model::SystemConfig& config,
                                             std::uint64_t seed);

// Key sifting and visibility estimation. Data clicks in bit symbols become
// key bits (first bin -> 1, second bin -> 0, per the pulse positions);
// test-symbol data clicks are discarded; a double click within one symbol
// resolves to a pseudo-random bit keyed by the symbol index. Monitor slots
// are classified from the stream (interfering = both feeding bins occupied,
// reference = exactly one); detector liveness is reconstructed from the
// recorded clicks and the config dead time, and only live slots enter the
// tallies. v_obs = 1 - r_int/(2 r_ref) clamped to [0,1];
// n_vis = int_slots * min(4 r_ref, 1).
SiftedBlock sift(const std::vector<DetectionRecord>& records, const std::vector<Symbol>& stream,
                 const model::SystemConfig& config);

} // namespace cowqkd::sim
