#include "cowqkd/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "cowqkd/rng.hpp"

namespace cowqkd::postproc {

// ---------------------------------------------------------------------------
// CASCADE
// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> cascade_block_sizes(std::size_t n, std::size_t k1, int passes) {
    std::vector<std::size_t> sizes;
    std::size_t k = std::min(k1, n);
    for (int p = 0; p < passes; ++p) {
        sizes.push_back(std::min(k, n));
        if (k <= n) k *= 2;
    }
    return sizes;
}

std::vector<std::vector<std::uint32_t>> cascade_perms(std::size_t n, int passes,
                                                      std::uint64_t seed) {
    std::vector<std::vector<std::uint32_t>> perms(static_cast<std::size_t>(passes));
    Rng rng(seed);
    for (int p = 0; p < passes; ++p) {
        auto& perm = perms[static_cast<std::size_t>(p)];
        perm.resize(n);
        std::iota(perm.begin(), perm.end(), 0u);
        if (p > 0) rng.shuffle(perm);
    }
    return perms;
}

int range_parity(const BitVec& key, const std::vector<std::uint32_t>& perm, std::size_t lo,
                 std::size_t hi) {
    int par = 0;
    for (std::size_t j = lo; j < hi; ++j) par ^= key.get(perm[j]) ? 1 : 0;
    return par;
}

} // namespace

CascadeResult cascade_reconcile(const BitVec& key_a, const BitVec& key_b, double qber_estimate,
                                std::uint64_t seed) {
    if (key_a.size() != key_b.size())
        throw std::invalid_argument("cascade_reconcile: key length mismatch");
    if (key_a.empty()) throw std::invalid_argument("cascade_reconcile: empty keys");
    if (!(qber_estimate > 0.0) || !(qber_estimate <= 0.25))
        throw std::invalid_argument("cascade_reconcile: qber_estimate must be in (0, 0.25]");

    const std::size_t n = key_a.size();
    const auto k1 = static_cast<std::size_t>(std::ceil(0.73 / qber_estimate));
    constexpr int kPasses = 4;

    const auto sizes = cascade_block_sizes(n, k1, kPasses);
    const auto perms = cascade_perms(n, kPasses, seed);
    std::vector<std::vector<std::uint32_t>> inv(kPasses, std::vector<std::uint32_t>(n));
    for (int p = 0; p < kPasses; ++p)
        for (std::size_t j = 0; j < n; ++j)
            inv[static_cast<std::size_t>(p)][perms[static_cast<std::size_t>(p)][j]] =
                static_cast<std::uint32_t>(j);

    CascadeResult res;
    res.corrected_b = key_b;
    res.session.role = Role::initiator;
    res.session.key_len = n;
    res.session.block_size_initial = sizes[0];
    res.session.pass_count = kPasses;
    res.session.perm_seed = seed;
    BitVec& c = res.corrected_b;

    auto disclose = [&](int pass, RecordKind kind, std::size_t block, std::size_t lo,
                        std::size_t hi) {
        TranscriptRecord r;
        r.pass = static_cast<std::uint8_t>(pass);
        r.kind = kind;
        r.block = block;
        r.lo = lo;
        r.hi = hi;
        r.parity = static_cast<std::uint8_t>(range_parity(key_a, perms[static_cast<std::size_t>(pass)], lo, hi));
        res.session.transcript.push_back(r);
        ++res.m_ir;
        return r.parity;
    };

    // parity pair (initiator, responder) without disclosure accounting
    auto recheck = [&](int pass, std::size_t lo, std::size_t hi) {
        const auto& perm = perms[static_cast<std::size_t>(pass)];
        return std::pair<int, int>{range_parity(key_a, perm, lo, hi),
                                   range_parity(c, perm, lo, hi)};
    };

    // binary search within a mismatching block; every probe discloses the
    // initiator's parity of the first half
    auto correct_block = [&](int pass, std::size_t block, std::size_t lo,
                             std::size_t hi) -> std::size_t {
        const auto& perm = perms[static_cast<std::size_t>(pass)];
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            const int pa = disclose(pass, RecordKind::probe_parity, block, lo, mid);
            const int pb = range_parity(c, perm, lo, mid);
            if (pa != pb) hi = mid; else lo = mid;
        }
        const std::size_t pos = perm[lo];
        c.flip(pos);
        ++res.corrections;
        return pos;
    };

    auto block_range = [&](int pass, std::size_t block) {
        const std::size_t k = sizes[static_cast<std::size_t>(pass)];
        return std::pair<std::size_t, std::size_t>{block * k, std::min((block + 1) * k, n)};
    };
    auto block_of = [&](int pass, std::size_t pos) {
        return inv[static_cast<std::size_t>(pass)][pos] / sizes[static_cast<std::size_t>(pass)];
    };

    for (int p = 0; p < kPasses; ++p) {
        const std::size_t k = sizes[static_cast<std::size_t>(p)];
        const std::size_t nb = (n + k - 1) / k;
        std::vector<std::size_t> pending;
        for (std::size_t bi = 0; bi < nb; ++bi) {
            const auto [lo, hi] = block_range(p, bi);
            const int pa = disclose(p, RecordKind::block_parity, bi, lo, hi);
            if (pa != range_parity(c, perms[static_cast<std::size_t>(p)], lo, hi))
                pending.push_back(bi);
        }
        while (!pending.empty()) {
            const std::size_t bi = pending.back();
            pending.pop_back();
            const auto [lo, hi] = block_range(p, bi);
            const auto [pa, pb] = recheck(p, lo, hi);
            if (pa == pb) continue;
            const std::size_t pos = correct_block(p, bi, lo, hi);
            // the fixed bit flips the parity of its block in every other
            // pass already scanned; recheck those, cascading further
            std::vector<std::pair<int, std::size_t>> stack;
            for (int q = 0; q < p; ++q) stack.emplace_back(q, block_of(q, pos));
            while (!stack.empty()) {
                const auto [q, bj] = stack.back();
                stack.pop_back();
                const auto [lo2, hi2] = block_range(q, bj);
                const auto [pa2, pb2] = recheck(q, lo2, hi2);
                if (pa2 == pb2) continue;
                const std::size_t pos2 = correct_block(q, bj, lo2, hi2);
                for (int q2 = 0; q2 <= p; ++q2)
                    if (q2 != q) stack.emplace_back(q2, block_of(q2, pos2));
            }
            pending.push_back(bi); // re-verify after the correction round
        }
    }

    res.session.disclosed_bits = res.m_ir;
    return res;
}

std::size_t replay_m_ir(const ReconciliationSession& session, const BitVec& key_a) {
    if (key_a.size() != session.key_len)
        throw std::invalid_argument("replay_m_ir: key length does not match session");
    const auto perms = cascade_perms(session.key_len, session.pass_count, session.perm_seed);
    for (const auto& r : session.transcript) {
        if (r.pass >= session.pass_count || r.hi > session.key_len || r.lo >= r.hi)
            throw std::runtime_error("replay_m_ir: malformed record");
        const int pa = range_parity(key_a, perms[r.pass], r.lo, r.hi);
        if (pa != r.parity) throw std::runtime_error("replay_m_ir: parity mismatch");
    }
    return session.transcript.size();
}

// ---------------------------------------------------------------------------
// transcript serialization: fixed header, then length-prefixed records
// ---------------------------------------------------------------------------

namespace {

constexpr char kTranscriptMagic[4] = {'C', 'Q', 'T', 'X'};
constexpr std::uint32_t kTranscriptVersion = 1;
constexpr std::uint8_t kRecordBytes = 27; // pass, kind, parity, block, lo, hi

template <typename T>
void put(std::string& buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& off) {
    if (off + sizeof(T) > buf.size()) throw std::runtime_error("transcript: truncated file");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

} // namespace

void save_transcript(const ReconciliationSession& session, const std::string& path) {
    std::string buf;
    buf.append(kTranscriptMagic, 4);
    put<std::uint32_t>(buf, kTranscriptVersion);
    put<std::uint64_t>(buf, session.key_len);
    put<std::uint64_t>(buf, session.block_size_initial);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(session.pass_count));
    put<std::uint64_t>(buf, session.perm_seed);
    put<std::uint8_t>(buf, static_cast<std::uint8_t>(session.role));
    put<std::uint64_t>(buf, session.transcript.size());
    for (const auto& r : session.transcript) {
        put<std::uint8_t>(buf, kRecordBytes);
        put<std::uint8_t>(buf, r.pass);
        put<std::uint8_t>(buf, static_cast<std::uint8_t>(r.kind));
        put<std::uint8_t>(buf, r.parity);
        put<std::uint64_t>(buf, r.block);
        put<std::uint64_t>(buf, r.lo);
        put<std::uint64_t>(buf, r.hi);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write transcript: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

ReconciliationSession load_transcript(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open transcript: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t off = 0;
    if (buf.size() < 4 || std::memcmp(buf.data(), kTranscriptMagic, 4) != 0)
        throw std::runtime_error("transcript: bad magic");
    off = 4;
    if (take<std::uint32_t>(buf, off) != kTranscriptVersion)
        throw std::runtime_error("transcript: unsupported version");
    ReconciliationSession s;
    s.key_len = take<std::uint64_t>(buf, off);
    s.block_size_initial = take<std::uint64_t>(buf, off);
    s.pass_count = static_cast<int>(take<std::uint32_t>(buf, off));
    s.perm_seed = take<std::uint64_t>(buf, off);
    s.role = static_cast<Role>(take<std::uint8_t>(buf, off));
    const auto count = take<std::uint64_t>(buf, off);
    s.transcript.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        if (take<std::uint8_t>(buf, off) != kRecordBytes)
            throw std::runtime_error("transcript: bad record length");
        TranscriptRecord r;
        r.pass = take<std::uint8_t>(buf, off);
        r.kind = static_cast<RecordKind>(take<std::uint8_t>(buf, off));
        r.parity = take<std::uint8_t>(buf, off);
        r.block = take<std::uint64_t>(buf, off);
        r.lo = take<std::uint64_t>(buf, off);
        r.hi = take<std::uint64_t>(buf, off);
        s.transcript.push_back(r);
    }
    s.disclosed_bits = s.transcript.size();
    return s;
}

std::size_t default_ir_block_size(std::size_t n_cpp) {
    return std::clamp<std::size_t>(n_cpp / 100, std::min<std::size_t>(1024, n_cpp), n_cpp);
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

int tag_length(double eps_cor) {
    if (!(eps_cor > 0.0) || !(eps_cor <= 1.0))
        throw std::invalid_argument("tag_length: eps_cor must be in (0,1]");
    return static_cast<int>(std::ceil(std::log2(2.0 / eps_cor)));
}

namespace {

// GF(2^64), reduction polynomial x^64 + x^4 + x^3 + x + 1
constexpr std::uint64_t kGfReduce = 0x1b;

std::uint64_t gf_xtime(std::uint64_t v) {
    return (v << 1) ^ ((v >> 63) ? kGfReduce : 0);
}

// nibble tables for multiplication by a fixed element
struct GfMulTable {
    std::uint64_t t[16][16];

    explicit GfMulTable(std::uint64_t r) {
        std::uint64_t p[64]; // p[j] = x^j * r
        p[0] = r;
        for (int j = 1; j < 64; ++j) p[j] = gf_xtime(p[j - 1]);
        for (int pos = 0; pos < 16; ++pos)
            for (int v = 0; v < 16; ++v) {
                std::uint64_t acc = 0;
                for (int b = 0; b < 4; ++b)
                    if (v & (1 << b)) acc ^= p[4 * pos + b];
                t[pos][v] = acc;
            }
    }

    std::uint64_t mul(std::uint64_t a) const {
        std::uint64_t acc = 0;
        for (int pos = 0; pos < 16; ++pos) acc ^= t[pos][(a >> (4 * pos)) & 0xF];
        return acc;
    }
};

std::uint64_t poly_hash(const BitVec& key, std::uint64_t r, std::uint64_t s) {
    const GfMulTable mr(r);
    std::uint64_t h = static_cast<std::uint64_t>(key.size()); // length prefix limb
    for (std::uint64_t w : key.words()) h = mr.mul(h) ^ w;
    h = mr.mul(h);
    return GfMulTable(s).mul(h);
}

} // namespace

VerifyOutcome verify(const BitVec& key_a, const BitVec& key_b, double eps_cor,
                     std::uint64_t seed) {
    if (key_a.size() != key_b.size())
        throw std::invalid_argument("verify: key length mismatch");
    const int w = tag_length(eps_cor);
    if (w > 64) throw std::invalid_argument("verify: eps_cor below the 64-bit tag range");
    Rng rng(seed);
    std::uint64_t r = rng.next_u64();
    while (r == 0) r = rng.next_u64();
    std::uint64_t s = rng.next_u64();
    while (s == 0) s = rng.next_u64();

    auto tag_of = [&](const BitVec& k) {
        const std::uint64_t h = poly_hash(k, r, s);
        VerificationTag tag;
        tag.hash_seed = seed;
        tag.tag_bits = BitVec(static_cast<std::size_t>(w));
        for (int i = 0; i < w; ++i)
            tag.tag_bits.set(static_cast<std::size_t>(i), (h >> i) & 1u);
        return tag;
    };

    VerifyOutcome out;
    out.tag_a = tag_of(key_a);
    out.tag_b = tag_of(key_b);
    out.pass = out.tag_a.tag_bits == out.tag_b.tag_bits;
    return out;
}

// ---------------------------------------------------------------------------
// privacy amplification
// ---------------------------------------------------------------------------

ToeplitzSpec make_toeplitz(std::size_t input_len, std::size_t output_len, std::uint64_t seed) {
    if (output_len > input_len)
        throw std::invalid_argument("make_toeplitz: output_len must be <= input_len");
    ToeplitzSpec spec;
    spec.input_len = input_len;
    spec.output_len = output_len;
    if (input_len + output_len > 0) {
        Rng rng(seed);
        spec.diagonal_seed = BitVec::random(input_len + output_len - 1, rng);
    }
    return spec;
}

namespace {

void check_spec(const BitVec& key, const ToeplitzSpec& spec) {
    if (key.size() != spec.input_len)
        throw std::invalid_argument("privacy_amplify: key length does not match spec");
    if (spec.output_len > spec.input_len)
        throw std::invalid_argument("privacy_amplify: output_len exceeds input_len");
    if (spec.output_len > 0 &&
        spec.diagonal_seed.size() != spec.input_len + spec.output_len - 1)
        throw std::invalid_argument("privacy_amplify: diagonal seed has wrong length");
}

} // namespace

BitVec privacy_amplify(const BitVec& key, const ToeplitzSpec& spec) {
    check_spec(key, spec);
    BitVec out(spec.output_len);
    if (spec.output_len == 0) return out;
    const std::size_t n = spec.input_len;
    for (std::size_t i = 0; i < n; ++i)
        if (key.get(i)) out.xor_window(spec.diagonal_seed, n - 1 - i);
    return out;
}

BitVec privacy_amplify_naive(const BitVec& key, const ToeplitzSpec& spec) {
    check_spec(key, spec);
    BitVec out(spec.output_len);
    const std::size_t n = spec.input_len;
    for (std::size_t j = 0; j < spec.output_len; ++j) {
        int bit = 0;
        for (std::size_t i = 0; i < n; ++i)
            bit ^= (key.get(i) && spec.diagonal_seed.get(n - 1 + j - i)) ? 1 : 0;
        out.set(j, bit != 0);
    }
    return out;
}

double measure_qber(const BitVec& original_b, const BitVec& corrected_b) {
    if (original_b.size() != corrected_b.size())
        throw std::invalid_argument("measure_qber: length mismatch");
    if (original_b.empty()) throw std::invalid_argument("measure_qber: empty keys");
    return static_cast<double>(BitVec::hamming(original_b, corrected_b)) /
           static_cast<double>(original_b.size());
}

} // namespace cowqkd::postproc
