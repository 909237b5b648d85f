#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "picante/encoding.hpp"
#include "picante/nn.hpp"
#include "picante/rng.hpp"

namespace picante {

struct ModelConfig {
    int enc_dim = 1024;
    int dec_dim = 512;
    int enc_layers = 1;
    int dec_shared_iterations = 8;
    int heads_enc = 4;
    int heads_dec = 4;
    int heads_cross = 4;
    int ffn_mult = 4;
    int vocab_size = 0;
    int max_input_len = 0;  // 2n
    int max_output_len = 2;
    u64 init_seed = 0;

    void validate() const;
};

struct TrainConfig {
    int batch_size = 128;
    double lr = 1e-5;
    double warmup_start_lr = 1e-8;
    long warmup_steps = 1000;
    long epoch_size = 2'000'000;
    int reshuffle_period = 2;  // epochs between dataset reshuffles
    u64 seed = 0;

    void validate() const;
};

double lr_at_step(const TrainConfig& cfg, long step);

struct TrainExample {
    TokenSeq input;                 // 2n tokens
    std::array<int, 2> output{};    // (b high, b low) token ids
};

struct AttnParams {
    nn::Param wq, wk, wv, wo, bq, bk, bv, bo;
};
struct FfnParams {
    nn::Param w1, b1, w2, b2;
};
struct LnParams {
    nn::Param gain, bias;
};
struct DecoderLayerParams {
    AttnParams self_attn;
    AttnParams cross;
    FfnParams ffn;
    LnParams ln1, ln2, ln3;
};

// Seq2seq transformer: one encoder layer, a shared decoder layer iterated
// with a per-token copy gate, a second decoder layer, and a linear head
// tied to the decoder token embedding.
class Transformer {
public:
    explicit Transformer(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }

    struct Forward {
        nn::Mat logits;                     // K x V
        std::vector<double> cross_scores;   // input-length attention mass (optional)
    };

    // Teacher-forced forward: decoder input [BOS, out...] trimmed to K
    // positions; logits row k predicts output token k.
    Forward forward(const TokenSeq& input, const std::vector<int>& decoder_input,
                    bool want_cross_scores = false) const;

    TokenSeq greedy_decode(const TokenSeq& input) const;

    // Softmax cross-attention weights from the first shared-layer
    // iteration, first output position's query, summed over heads.
    std::vector<double> cross_attention_scores(const TokenSeq& input) const;

    // Builds the training graph and returns the loss node. Used by the
    // trainer and by the finite-difference checks.
    nn::Tape::Ref build_loss(nn::Tape& tape, const TrainExample& ex) const;

    void visit_params(const std::function<void(nn::Param&)>& fn);
    void visit_params(const std::function<void(const nn::Param&)>& fn) const;
    nn::Param* find_param(const std::string& name);

    void zero_grad();

    // copy-gate weight surgery (tests): force the gate fully open/closed
    void force_gate(double bias_value);

    void save_checkpoint(const std::string& path, u64 vocab_hash) const;
    static Transformer load_checkpoint(const std::string& path, u64 expected_vocab_hash);

private:
    ModelConfig cfg_;

    nn::Param enc_tok_, enc_pos_;
    AttnParams enc_attn_;
    FfnParams enc_ffn_;
    LnParams enc_ln1_, enc_ln2_;
    nn::Param enc_proj_w_, enc_proj_b_;

    nn::Param dec_tok_, dec_pos_;
    DecoderLayerParams shared_;
    nn::Param gate_w_, gate_b_;
    DecoderLayerParams top_;
    nn::Param head_bias_;

    void init_weights();

    struct GraphOut {
        nn::Tape::Ref logits;
        nn::Tape::Ref first_cross_attn;  // heads summed, Lq x Lk
    };
    GraphOut build_graph(nn::Tape& tape, const TokenSeq& input,
                         const std::vector<int>& decoder_input) const;
};

struct EpochMetrics {
    double mean_loss = 0.0;
    double token_accuracy = 0.0;
    std::vector<std::pair<long, double>> loss_curve;  // (global step, batch loss)
};

// Single-threaded trainer: Adam with linear warmup, reshuffles the
// dataset every reshuffle_period epochs, deterministic given seed.
class Trainer {
public:
    Trainer(Transformer& model, const TrainConfig& cfg);

    EpochMetrics train_epoch(const std::vector<TrainExample>& data);

    long global_step() const { return step_; }
    int epochs_done() const { return epochs_; }

private:
    Transformer& model_;
    TrainConfig cfg_;
    long step_ = 0;
    int epochs_ = 0;
    std::size_t cursor_ = 0;
    std::vector<std::size_t> order_;
    Rng shuffle_rng_;

    void adam_step(double lr);
    void reshuffle(std::size_t size);
};

double token_accuracy(const Transformer& model, const std::vector<TrainExample>& data,
                      std::size_t limit = 0);

}  // namespace picante
