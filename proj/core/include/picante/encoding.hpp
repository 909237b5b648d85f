#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "picante/lwe.hpp"

namespace picante {

// Two-token representation of a residue: a high digit in base B and a
// low digit quantized into buckets of size r. Token ids occupy three
// disjoint ranges: specials, high digits, low digits.
struct EncodingConfig {
    u64 q = 0;
    int k = 0;          // number of distinct high digits
    u64 base = 0;       // B = ceil(q / k)
    u64 bucket = 1;     // r, power of two, smallest with ceil(B/r) < 10000
    int num_low = 0;    // ceil(B / r)
    int vocab_size = 0; // num_low + k + 3 specials

    static constexpr int pad_id = 0;
    static constexpr int bos_id = 1;
    static constexpr int eos_id = 2;

    int high_token(int digit) const { return 3 + digit; }
    int low_token(int digit) const { return 3 + k + digit; }
    bool is_high_token(int id) const { return id >= 3 && id < 3 + k; }
    bool is_low_token(int id) const { return id >= 3 + k && id < vocab_size; }
    int high_digit(int id) const { return id - 3; }
    int low_digit(int id) const { return id - 3 - k; }
};

using TokenSeq = std::vector<int>;

// Encoding parameters from (n, q):
//   k = 2*ceil(n/100) + 2, B = ceil(q/k), r = least power of two with
//   ceil(B/r) < 10000. Base uses the ceiling: it is the only reading
//   consistent across all supported (n, q) pairs.
EncodingConfig derive_encoding(int n, u64 q);

// Digit pair (high, low) of a residue in [0, q).
std::pair<int, int> encode_value(u64 v, const EncodingConfig& cfg);

// Bucket-midpoint reconstruction: high*B + low*r + r/2, clamped to [0, q).
// Exact when r == 1; |decode(encode(v)) - v| < r always.
u64 decode_value(int high, int low, const EncodingConfig& cfg);

// Token ids of a centered reduced pair. Input has exactly 2n tokens
// alternating (high, low) per coordinate, output exactly 2 tokens.
struct SamplePair {
    TokenSeq input;
    TokenSeq output;
};
SamplePair encode_sample(const std::vector<i64>& a_centered, i64 b_centered,
                         const EncodingConfig& cfg);

TokenSeq encode_vector(const std::vector<u64>& a_canonical, const EncodingConfig& cfg);
u64 decode_output(const TokenSeq& output, const EncodingConfig& cfg);

// --- vocabulary manifest ----------------------------------------------------
// Text, one line per token id: "<id> <role> <value>" with role one of
// special/high/low. Trained checkpoints store the manifest hash so model
// and recovery tooling agree on the token space bit-exactly.

std::string vocab_manifest(const EncodingConfig& cfg);
void write_vocab_manifest(const EncodingConfig& cfg, const std::string& path);
u64 vocab_manifest_hash(const EncodingConfig& cfg);  // FNV-1a over the manifest text

}  // namespace picante
