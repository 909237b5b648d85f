#include "picante/encoding.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace picante {

EncodingConfig derive_encoding(int n, u64 q) {
    if (n < 1 || q < 3) throw std::invalid_argument("derive_encoding: invalid n or q");
    EncodingConfig cfg;
    cfg.q = q;
    cfg.k = 2 * ((n + 99) / 100) + 2;
    cfg.base = (q + cfg.k - 1) / cfg.k;
    cfg.bucket = 1;
    while ((cfg.base + cfg.bucket - 1) / cfg.bucket >= 10000) cfg.bucket *= 2;
    cfg.num_low = static_cast<int>((cfg.base + cfg.bucket - 1) / cfg.bucket);
    cfg.vocab_size = cfg.num_low + cfg.k + 3;
    return cfg;
}

std::pair<int, int> encode_value(u64 v, const EncodingConfig& cfg) {
    if (v >= cfg.q) throw std::invalid_argument("encode_value: residue out of range [0, q)");
    return {static_cast<int>(v / cfg.base), static_cast<int>((v % cfg.base) / cfg.bucket)};
}

u64 decode_value(int high, int low, const EncodingConfig& cfg) {
    if (high < 0 || high >= cfg.k || low < 0 || low >= cfg.num_low)
        throw std::invalid_argument("decode_value: digit out of range");
    u64 v = static_cast<u64>(high) * cfg.base + static_cast<u64>(low) * cfg.bucket + cfg.bucket / 2;
    if (v >= cfg.q) v = cfg.q - 1;
    return v;
}

TokenSeq encode_vector(const std::vector<u64>& a_canonical, const EncodingConfig& cfg) {
    TokenSeq seq;
    seq.reserve(2 * a_canonical.size());
    for (u64 v : a_canonical) {
        const auto [hi, lo] = encode_value(v, cfg);
        seq.push_back(cfg.high_token(hi));
        seq.push_back(cfg.low_token(lo));
    }
    return seq;
}

SamplePair encode_sample(const std::vector<i64>& a_centered, i64 b_centered,
                         const EncodingConfig& cfg) {
    std::vector<u64> canonical(a_centered.size());
    for (std::size_t i = 0; i < a_centered.size(); ++i)
        canonical[i] = to_canonical(a_centered[i], cfg.q);

    SamplePair pair;
    pair.input = encode_vector(canonical, cfg);
    const auto [bh, bl] = encode_value(to_canonical(b_centered, cfg.q), cfg);
    pair.output = {cfg.high_token(bh), cfg.low_token(bl)};
    return pair;
}

u64 decode_output(const TokenSeq& output, const EncodingConfig& cfg) {
    if (output.size() != 2 || !cfg.is_high_token(output[0]) || !cfg.is_low_token(output[1]))
        throw std::invalid_argument("decode_output: expected (high, low) token pair");
    return decode_value(cfg.high_digit(output[0]), cfg.low_digit(output[1]), cfg);
}

std::string vocab_manifest(const EncodingConfig& cfg) {
    std::ostringstream out;
    out << 0 << " special PAD\n" << 1 << " special BOS\n" << 2 << " special EOS\n";
    for (int d = 0; d < cfg.k; ++d) out << cfg.high_token(d) << " high " << d << '\n';
    for (int d = 0; d < cfg.num_low; ++d) out << cfg.low_token(d) << " low " << d << '\n';
    return out.str();
}

void write_vocab_manifest(const EncodingConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << vocab_manifest(cfg);
}

u64 vocab_manifest_hash(const EncodingConfig& cfg) {
    const std::string text = vocab_manifest(cfg);
    u64 h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace picante
