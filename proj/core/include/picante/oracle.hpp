#pragma once

#include <vector>

#include "picante/encoding.hpp"
#include "picante/lwe.hpp"
#include "picante/model.hpp"
#include "picante/nn.hpp"

namespace picante {

// Prediction contract shared by the trained transformer and the cheating
// test double: greedy decode, teacher-forced logits, and cross-attention
// mass over input positions.
class ModelOracle {
public:
    virtual ~ModelOracle() = default;
    virtual TokenSeq predict(const TokenSeq& input) const = 0;
    virtual nn::Mat logits(const TokenSeq& input, const TokenSeq& partial_output) const = 0;
    virtual std::vector<double> cross_attention_scores(const TokenSeq& input) const = 0;
};

// Computes a.s mod q directly from the decoded input tokens. Exact when
// the encoding is lossless (r == 1). With attention_peaked it emits
// cross-attention mass on the high-digit positions of the 1-bits;
// otherwise uniform mass.
class CheatOracle final : public ModelOracle {
public:
    CheatOracle(SecretVector secret, LweParams params, EncodingConfig encoding,
                bool noisy = false, bool attention_peaked = true, u64 noise_seed = 0);

    TokenSeq predict(const TokenSeq& input) const override;
    nn::Mat logits(const TokenSeq& input, const TokenSeq& partial_output) const override;
    std::vector<double> cross_attention_scores(const TokenSeq& input) const override;

private:
    SecretVector secret_;
    LweParams params_;
    EncodingConfig encoding_;
    bool noisy_;
    bool attention_peaked_;
    u64 noise_seed_;

    u64 predict_b(const TokenSeq& input) const;
};

// Greedy decoding constrained to the output grammar: position 0 must be
// a high digit, position 1 a low digit, so predictions always decode to
// a residue even from an untrained model. Ties break to the lowest id.
class TransformerOracle final : public ModelOracle {
public:
    TransformerOracle(const Transformer& model, EncodingConfig encoding)
        : model_(model), encoding_(encoding) {}

    TokenSeq predict(const TokenSeq& input) const override;
    nn::Mat logits(const TokenSeq& input, const TokenSeq& partial_output) const override;
    std::vector<double> cross_attention_scores(const TokenSeq& input) const override {
        return model_.cross_attention_scores(input);
    }

private:
    const Transformer& model_;
    EncodingConfig encoding_;
};

}  // namespace picante
