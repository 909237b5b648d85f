#include "picante/oracle.hpp"

#include <stdexcept>

namespace picante {

CheatOracle::CheatOracle(SecretVector secret, LweParams params, EncodingConfig encoding,
                         bool noisy, bool attention_peaked, u64 noise_seed)
    : secret_(std::move(secret)),
      params_(params),
      encoding_(encoding),
      noisy_(noisy),
      attention_peaked_(attention_peaked),
      noise_seed_(noise_seed) {
    if (static_cast<int>(secret_.bits.size()) != params_.n)
        throw std::invalid_argument("cheat oracle: secret length mismatch");
}

u64 CheatOracle::predict_b(const TokenSeq& input) const {
    if (input.size() != static_cast<std::size_t>(2 * params_.n))
        throw std::invalid_argument("cheat oracle: input must be 2n tokens");
    u64 dot = 0;
    for (int i = 0; i < params_.n; ++i) {
        if (!encoding_.is_high_token(input[2 * i]) || !encoding_.is_low_token(input[2 * i + 1]))
            throw std::invalid_argument("cheat oracle: malformed token pair");
        if (!secret_.bits[i]) continue;
        const u64 v = decode_value(encoding_.high_digit(input[2 * i]),
                                   encoding_.low_digit(input[2 * i + 1]), encoding_);
        dot = (dot + v) % params_.q;
    }
    if (noisy_) {
        // Fresh noise per query, keyed on the input so repeats agree.
        u64 key = noise_seed_;
        for (int t : input) key = splitmix64(key ^ static_cast<u64>(t));
        Rng rng = make_rng(key, 0x636865617465ULL);
        return to_canonical(static_cast<i64>(dot) + sample_error(params_.sigma, rng), params_.q);
    }
    return dot;
}

TokenSeq CheatOracle::predict(const TokenSeq& input) const {
    const auto [hi, lo] = encode_value(predict_b(input), encoding_);
    return {encoding_.high_token(hi), encoding_.low_token(lo)};
}

nn::Mat CheatOracle::logits(const TokenSeq& input, const TokenSeq& partial_output) const {
    (void)partial_output;  // prediction is fully determined by the input
    const TokenSeq out = predict(input);
    nn::Mat logits(2, encoding_.vocab_size);
    for (double& v : logits.w) v = -10.0;
    logits.at(0, out[0]) = 10.0;
    logits.at(1, out[1]) = 10.0;
    return logits;
}

std::vector<double> CheatOracle::cross_attention_scores(const TokenSeq& input) const {
    const int len = static_cast<int>(input.size());
    std::vector<double> scores(len, 0.0);
    if (!attention_peaked_ || secret_.popcount() == 0) {
        std::fill(scores.begin(), scores.end(), 1.0 / len);
        return scores;
    }
    const double mass = 1.0 / secret_.popcount();
    for (int i = 0; i < params_.n; ++i)
        if (secret_.bits[i]) scores[2 * i] = mass;  // high-digit position
    return scores;
}

nn::Mat TransformerOracle::logits(const TokenSeq& input, const TokenSeq& partial_output) const {
    std::vector<int> dec = {EncodingConfig::bos_id};
    dec.insert(dec.end(), partial_output.begin(), partial_output.end());
    return model_.forward(input, dec).logits;
}

TokenSeq TransformerOracle::predict(const TokenSeq& input) const {
    auto argmax_in = [](const nn::Mat& logits, int row, int from, int to) {
        int best = from;
        for (int j = from + 1; j < to; ++j)
            if (logits.at(row, j) > logits.at(row, best)) best = j;
        return best;
    };
    const auto l0 = model_.forward(input, {EncodingConfig::bos_id}).logits;
    const int high = argmax_in(l0, 0, encoding_.high_token(0), encoding_.high_token(encoding_.k));
    const auto l1 = model_.forward(input, {EncodingConfig::bos_id, high}).logits;
    const int low =
        argmax_in(l1, 1, encoding_.low_token(0), encoding_.low_token(encoding_.num_low));
    return {high, low};
}

}  // namespace picante
