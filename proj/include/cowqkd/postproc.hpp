#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cowqkd/bitvec.hpp"

namespace cowqkd::postproc {

// permutation-generator seed used when the caller does not supply one
inline constexpr std::uint64_t kCascadeDefaultSeed = 0x0c05cade0c05cadeULL;

enum class Role : std::uint8_t { initiator, responder };
enum class RecordKind : std::uint8_t { block_parity, probe_parity };

// One disclosed parity. Ranges are in permuted index space of the given
// pass; every record costs exactly one bit of m_IR.
struct TranscriptRecord {
    std::uint8_t pass = 0;
    RecordKind kind = RecordKind::block_parity;
    std::uint8_t parity = 0; // initiator's parity of [lo, hi)
    std::uint64_t block = 0; // block index within the pass
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    bool operator==(const TranscriptRecord&) const = default;
};

struct ReconciliationSession {
    Role role = Role::initiator;
    std::size_t key_len = 0;
    std::size_t block_size_initial = 0; // first-pass block size (clamped to key_len)
    int pass_count = 4;
    std::uint64_t perm_seed = kCascadeDefaultSeed;
    std::size_t disclosed_bits = 0; // m_IR; equals transcript.size()
    std::vector<TranscriptRecord> transcript;
};

struct CascadeResult {
    BitVec corrected_b;
    std::size_t m_ir = 0;
    std::size_t corrections = 0; // bits flipped in key_b
    ReconciliationSession session;
};

// 4-pass CASCADE, k1 = ceil(0.73 / qber_estimate), block size doubling per
// pass, seeded permutations (pass 1 is the identity), binary search on
// parity mismatches with backtracking into earlier passes. m_ir counts the
// initiator's disclosed parities: one per top-level block per pass plus one
// per search probe; post-correction re-checks reuse already-disclosed
// parities and are free.
CascadeResult cascade_reconcile(const BitVec& key_a, const BitVec& key_b, double qber_estimate,
                                std::uint64_t seed = kCascadeDefaultSeed);

// Recomputes every disclosed parity from the initiator key (permutations
// regenerated from the session seed); throws std::runtime_error on any
// mismatch. Returns the disclosure count, which equals m_ir.
std::size_t replay_m_ir(const ReconciliationSession& session, const BitVec& key_a);

// length-prefixed binary record stream with a fixed header
void save_transcript(const ReconciliationSession& session, const std::string& path);
ReconciliationSession load_transcript(const std::string& path);

// reconciliation sub-block size: clamp(n_cpp / 100, 1024, n_cpp)
std::size_t default_ir_block_size(std::size_t n_cpp);

// ceil(log2(2 / eps_cor))
int tag_length(double eps_cor);

struct VerificationTag {
    BitVec tag_bits; // tag_length(eps_cor) bits
    std::uint64_t hash_seed = 0;
};

struct VerifyOutcome {
    bool pass = false;
    VerificationTag tag_a;
    VerificationTag tag_b;
};

// Seeded polynomial-evaluation hash over GF(2^64) (reduction polynomial
// x^64 + x^4 + x^3 + x + 1): the key, prefixed by its bit length, is read
// as 64-bit limbs m_i and evaluated as H = sum m_i r^(k-i) via Horner,
// then scaled by s; both r and s are nonzero and derived from the seed.
// The tag is the low tag_length(eps_cor) bits. Collision probability for
// unequal keys is at most (limbs+1)/2^64 + 2^-w <= eps_cor/2 for any key
// short enough that the first term is negligible, which holds for every
// block size this system produces.
VerifyOutcome verify(const BitVec& key_a, const BitVec& key_b, double eps_cor,
                     std::uint64_t seed);

struct ToeplitzSpec {
    std::size_t input_len = 0;
    std::size_t output_len = 0;
    BitVec diagonal_seed; // length input_len + output_len - 1
};

ToeplitzSpec make_toeplitz(std::size_t input_len, std::size_t output_len, std::uint64_t seed);

// out[j] = XOR_i key[i] * diag[input_len - 1 + j - i]; word-parallel via
// shifted-window XOR per set key bit.
BitVec privacy_amplify(const BitVec& key, const ToeplitzSpec& spec);

// bit-by-bit reference implementation
BitVec privacy_amplify_naive(const BitVec& key, const ToeplitzSpec& spec);

// Hamming distance / length; exact
double measure_qber(const BitVec& original_b, const BitVec& corrected_b);

} // namespace cowqkd::postproc
