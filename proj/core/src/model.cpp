#include "picante/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace picante {

void ModelConfig::validate() const {
    if (enc_dim < 1 || dec_dim < 1) throw std::invalid_argument("model: dims must be positive");
    if (enc_dim % heads_enc != 0 || dec_dim % heads_dec != 0 || dec_dim % heads_cross != 0)
        throw std::invalid_argument("model: dims must be divisible by head counts");
    if (dec_shared_iterations < 1)
        throw std::invalid_argument("model: shared iterations must be >= 1");
    if (enc_layers != 1) throw std::invalid_argument("model: exactly one encoder layer supported");
    if (vocab_size < 4 || max_input_len < 2 || max_output_len < 1)
        throw std::invalid_argument("model: vocab/sequence limits unset");
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (warmup_steps < 0) throw std::invalid_argument("train: warmup_steps must be >= 0");
    if (epoch_size < 1) throw std::invalid_argument("train: epoch_size must be >= 1");
    if (reshuffle_period < 1) throw std::invalid_argument("train: reshuffle_period must be >= 1");
    if (lr <= 0.0) throw std::invalid_argument("train: lr must be positive");
}

double lr_at_step(const TrainConfig& cfg, long step) {
    if (cfg.warmup_steps <= 0 || step >= cfg.warmup_steps) return cfg.lr;
    return cfg.warmup_start_lr +
           static_cast<double>(step) / static_cast<double>(cfg.warmup_steps) *
               (cfg.lr - cfg.warmup_start_lr);
}

namespace {

void init_linear(nn::Param& p, Rng& rng) {
    const double a = std::sqrt(6.0 / (p.value.rows + p.value.cols));
    for (double& v : p.value.w) v = (2.0 * uniform_unit(rng) - 1.0) * a;
}

void init_embedding(nn::Param& p, Rng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(p.value.cols));
    for (double& v : p.value.w) v = s * gaussian(rng);
}

}  // namespace

Transformer::Transformer(const ModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int de = cfg_.enc_dim, dd = cfg_.dec_dim, v = cfg_.vocab_size;

    auto attn = [&](AttnParams& a, const std::string& prefix, int dim, int kv_dim) {
        a.wq.init_shape(prefix + ".wq", dim, dim);
        a.wk.init_shape(prefix + ".wk", kv_dim, dim);
        a.wv.init_shape(prefix + ".wv", kv_dim, dim);
        a.wo.init_shape(prefix + ".wo", dim, dim);
        a.bq.init_shape(prefix + ".bq", 1, dim);
        a.bk.init_shape(prefix + ".bk", 1, dim);
        a.bv.init_shape(prefix + ".bv", 1, dim);
        a.bo.init_shape(prefix + ".bo", 1, dim);
    };
    auto ffn = [&](FfnParams& f, const std::string& prefix, int dim) {
        f.w1.init_shape(prefix + ".w1", dim, cfg_.ffn_mult * dim);
        f.b1.init_shape(prefix + ".b1", 1, cfg_.ffn_mult * dim);
        f.w2.init_shape(prefix + ".w2", cfg_.ffn_mult * dim, dim);
        f.b2.init_shape(prefix + ".b2", 1, dim);
    };
    auto ln = [&](LnParams& l, const std::string& prefix, int dim) {
        l.gain.init_shape(prefix + ".gain", 1, dim);
        l.bias.init_shape(prefix + ".bias", 1, dim);
    };
    auto layer = [&](DecoderLayerParams& dl, const std::string& prefix) {
        attn(dl.self_attn, prefix + ".self", dd, dd);
        attn(dl.cross, prefix + ".cross", dd, dd);
        ffn(dl.ffn, prefix + ".ffn", dd);
        ln(dl.ln1, prefix + ".ln1", dd);
        ln(dl.ln2, prefix + ".ln2", dd);
        ln(dl.ln3, prefix + ".ln3", dd);
    };

    enc_tok_.init_shape("enc.tok_emb", v, de);
    enc_pos_.init_shape("enc.pos_emb", cfg_.max_input_len, de);
    attn(enc_attn_, "enc.l1.attn", de, de);
    ffn(enc_ffn_, "enc.l1.ffn", de);
    ln(enc_ln1_, "enc.l1.ln1", de);
    ln(enc_ln2_, "enc.l1.ln2", de);
    enc_proj_w_.init_shape("enc.proj.w", de, dd);
    enc_proj_b_.init_shape("enc.proj.b", 1, dd);

    dec_tok_.init_shape("dec.tok_emb", v, dd);
    dec_pos_.init_shape("dec.pos_emb", cfg_.max_output_len + 1, dd);
    layer(shared_, "dec.shared");
    gate_w_.init_shape("dec.shared.gate.w", dd, 1);
    gate_b_.init_shape("dec.shared.gate.b", 1, 1);
    layer(top_, "dec.top");
    head_bias_.init_shape("head.bias", 1, v);

    init_weights();
}

void Transformer::init_weights() {
    Rng rng = make_rng(cfg_.init_seed, 0x6d6f64656cULL);
    visit_params([&](nn::Param& p) {
        if (p.name.ends_with(".gain")) {
            std::fill(p.value.w.begin(), p.value.w.end(), 1.0);
        } else if (p.name.ends_with(".bias") || p.name.starts_with("head.bias") ||
                   p.name.ends_with(".b1") || p.name.ends_with(".b2") ||
                   p.name.ends_with(".bq") || p.name.ends_with(".bk") ||
                   p.name.ends_with(".bv") || p.name.ends_with(".bo") ||
                   p.name == "enc.proj.b" || p.name == "dec.shared.gate.b") {
            p.value.zero();
        } else if (p.name.ends_with("tok_emb") || p.name.ends_with("pos_emb")) {
            init_embedding(p, rng);
        } else {
            init_linear(p, rng);
        }
    });
}

void Transformer::visit_params(const std::function<void(nn::Param&)>& fn) {
    auto attn = [&](AttnParams& a) {
        fn(a.wq); fn(a.wk); fn(a.wv); fn(a.wo);
        fn(a.bq); fn(a.bk); fn(a.bv); fn(a.bo);
    };
    auto ffn = [&](FfnParams& f) { fn(f.w1); fn(f.b1); fn(f.w2); fn(f.b2); };
    auto ln = [&](LnParams& l) { fn(l.gain); fn(l.bias); };
    auto layer = [&](DecoderLayerParams& dl) {
        attn(dl.self_attn); attn(dl.cross); ffn(dl.ffn);
        ln(dl.ln1); ln(dl.ln2); ln(dl.ln3);
    };
    fn(enc_tok_); fn(enc_pos_);
    attn(enc_attn_); ffn(enc_ffn_); ln(enc_ln1_); ln(enc_ln2_);
    fn(enc_proj_w_); fn(enc_proj_b_);
    fn(dec_tok_); fn(dec_pos_);
    layer(shared_);
    fn(gate_w_); fn(gate_b_);
    layer(top_);
    fn(head_bias_);
}

void Transformer::visit_params(const std::function<void(const nn::Param&)>& fn) const {
    const_cast<Transformer*>(this)->visit_params(
        [&](nn::Param& p) { fn(static_cast<const nn::Param&>(p)); });
}

nn::Param* Transformer::find_param(const std::string& name) {
    nn::Param* found = nullptr;
    visit_params([&](nn::Param& p) {
        if (p.name == name) found = &p;
    });
    return found;
}

void Transformer::zero_grad() {
    visit_params([](nn::Param& p) { p.grad.zero(); });
}

void Transformer::force_gate(double bias_value) {
    gate_w_.value.zero();
    gate_b_.value.at(0, 0) = bias_value;
}

namespace {

struct AttnRefs {
    nn::Tape::Ref out;
    nn::Tape::Ref heads_sum;  // softmax weights summed over heads, Lq x Lk
};

// Multi-head attention as a tape subgraph; params are const through the
// tape (Tape::param takes non-const ref for gradient accumulation).
AttnRefs attend(nn::Tape& t, nn::Tape::Ref q_in, nn::Tape::Ref kv_in, AttnParams& p, int heads,
                bool causal) {
    const int dim = p.wq.value.cols;
    const int hd = dim / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

    const auto q = t.add_row(t.matmul(q_in, t.param(p.wq)), t.param(p.bq));
    const auto k = t.add_row(t.matmul(kv_in, t.param(p.wk)), t.param(p.bk));
    const auto v = t.add_row(t.matmul(kv_in, t.param(p.wv)), t.param(p.bv));

    std::vector<nn::Tape::Ref> outs;
    nn::Tape::Ref weights_sum = -1;
    for (int h = 0; h < heads; ++h) {
        const auto qh = t.slice_cols(q, h * hd, (h + 1) * hd);
        const auto kh = t.slice_cols(k, h * hd, (h + 1) * hd);
        const auto vh = t.slice_cols(v, h * hd, (h + 1) * hd);
        const auto scores = t.scale(t.matmul_nt(qh, kh), scale);
        const auto attn = t.softmax_rows(scores, causal);
        weights_sum = h == 0 ? attn : t.add(weights_sum, attn);
        outs.push_back(t.matmul(attn, vh));
    }
    const auto merged = t.concat_cols(outs);
    return {t.add_row(t.matmul(merged, t.param(p.wo)), t.param(p.bo)), weights_sum};
}

nn::Tape::Ref ffn_block(nn::Tape& t, nn::Tape::Ref x, FfnParams& p) {
    const auto h = t.relu(t.add_row(t.matmul(x, t.param(p.w1)), t.param(p.b1)));
    return t.add_row(t.matmul(h, t.param(p.w2)), t.param(p.b2));
}

nn::Tape::Ref ln_block(nn::Tape& t, nn::Tape::Ref x, LnParams& p) {
    return t.layer_norm(x, t.param(p.gain), t.param(p.bias));
}

std::vector<int> iota_ids(int len) {
    std::vector<int> ids(len);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

}  // namespace

Transformer::GraphOut Transformer::build_graph(nn::Tape& t, const TokenSeq& input,
                                               const std::vector<int>& decoder_input) const {
    if (static_cast<int>(input.size()) > cfg_.max_input_len)
        throw std::invalid_argument("model: input sequence too long");
    if (static_cast<int>(decoder_input.size()) > cfg_.max_output_len + 1)
        throw std::invalid_argument("model: decoder sequence too long");
    for (int id : input)
        if (id < 0 || id >= cfg_.vocab_size)
            throw std::invalid_argument("model: input token out of vocabulary");

    auto* self = const_cast<Transformer*>(this);

    // encoder
    auto x = t.add(t.gather_rows(t.param(self->enc_tok_), input),
                   t.gather_rows(t.param(self->enc_pos_), iota_ids(static_cast<int>(input.size()))));
    auto sa = attend(t, x, x, self->enc_attn_, cfg_.heads_enc, false);
    x = ln_block(t, t.add(x, sa.out), self->enc_ln1_);
    x = ln_block(t, t.add(x, ffn_block(t, x, self->enc_ffn_)), self->enc_ln2_);
    const auto enc_out =
        t.add_row(t.matmul(x, t.param(self->enc_proj_w_)), t.param(self->enc_proj_b_));

    // decoder
    auto y = t.add(t.gather_rows(t.param(self->dec_tok_), decoder_input),
                   t.gather_rows(t.param(self->dec_pos_),
                                 iota_ids(static_cast<int>(decoder_input.size()))));

    nn::Tape::Ref first_cross = -1;
    for (int iter = 0; iter < cfg_.dec_shared_iterations; ++iter) {
        // gate from the iteration's input representation
        const auto gate = t.sigmoid(
            t.add_row(t.matmul(y, t.param(self->gate_w_)), t.param(self->gate_b_)));
        auto sa_d = attend(t, y, y, self->shared_.self_attn, cfg_.heads_dec, true);
        auto a = ln_block(t, t.add(y, sa_d.out), self->shared_.ln1);
        auto ca = attend(t, a, enc_out, self->shared_.cross, cfg_.heads_cross, false);
        if (iter == 0) first_cross = ca.heads_sum;
        auto c = ln_block(t, t.add(a, ca.out), self->shared_.ln2);
        auto f = ln_block(t, t.add(c, ffn_block(t, c, self->shared_.ffn)), self->shared_.ln3);
        y = t.add(t.mul_col(gate, f), t.mul_col(t.one_minus(gate), y));
    }

    // second (regular) decoder layer
    auto sa_t = attend(t, y, y, self->top_.self_attn, cfg_.heads_dec, true);
    y = ln_block(t, t.add(y, sa_t.out), self->top_.ln1);
    auto ca_t = attend(t, y, enc_out, self->top_.cross, cfg_.heads_cross, false);
    y = ln_block(t, t.add(y, ca_t.out), self->top_.ln2);
    y = ln_block(t, t.add(y, ffn_block(t, y, self->top_.ffn)), self->top_.ln3);

    // linear head tied to the decoder embedding
    const auto logits =
        t.add_row(t.matmul_nt(y, t.param(self->dec_tok_)), t.param(self->head_bias_));
    return {logits, first_cross};
}

Transformer::Forward Transformer::forward(const TokenSeq& input,
                                          const std::vector<int>& decoder_input,
                                          bool want_cross_scores) const {
    nn::Tape tape;
    const auto g = build_graph(tape, input, decoder_input);
    Forward out;
    out.logits = tape.value(g.logits);
    for (double v : out.logits.w)
        if (!std::isfinite(v)) throw std::runtime_error("model: non-finite logits");
    if (want_cross_scores) {
        const nn::Mat& w = tape.value(g.first_cross_attn);
        out.cross_scores.assign(w.cols, 0.0);
        for (int j = 0; j < w.cols; ++j) out.cross_scores[j] = w.at(0, j);
    }
    return out;
}

TokenSeq Transformer::greedy_decode(const TokenSeq& input) const {
    std::vector<int> dec = {EncodingConfig::bos_id};
    TokenSeq out;
    for (int step = 0; step < cfg_.max_output_len; ++step) {
        const auto fw = forward(input, dec);
        const nn::Mat& logits = fw.logits;
        const int row = static_cast<int>(dec.size()) - 1;
        int best = 0;
        double best_v = logits.at(row, 0);
        for (int j = 1; j < logits.cols; ++j) {
            if (logits.at(row, j) > best_v) {  // ties break toward the lowest id
                best_v = logits.at(row, j);
                best = j;
            }
        }
        out.push_back(best);
        dec.push_back(best);
    }
    return out;
}

std::vector<double> Transformer::cross_attention_scores(const TokenSeq& input) const {
    return forward(input, {EncodingConfig::bos_id}, true).cross_scores;
}

nn::Tape::Ref Transformer::build_loss(nn::Tape& tape, const TrainExample& ex) const {
    std::vector<int> dec = {EncodingConfig::bos_id, ex.output[0]};
    dec.resize(std::min<std::size_t>(dec.size(), cfg_.max_output_len));
    const auto g = build_graph(tape, ex.input, dec);
    std::vector<int> targets(ex.output.begin(), ex.output.end());
    targets.resize(tape.value(g.logits).rows);
    return tape.cross_entropy(g.logits, targets);
}

// --- trainer -----------------------------------------------------------------

Trainer::Trainer(Transformer& model, const TrainConfig& cfg)
    : model_(model), cfg_(cfg), shuffle_rng_(make_rng(cfg.seed, 0x747261696eULL)) {
    cfg_.validate();
}

void Trainer::reshuffle(std::size_t size) {
    order_.resize(size);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    for (std::size_t i = size; i > 1; --i)
        std::swap(order_[i - 1], order_[uniform_u64(shuffle_rng_, i)]);
    cursor_ = 0;
}

void Trainer::adam_step(double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double t = static_cast<double>(step_);
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    model_.visit_params([&](nn::Param& p) {
        for (std::size_t i = 0; i < p.value.w.size(); ++i) {
            const double g = p.grad.w[i];
            p.adam_m.w[i] = beta1 * p.adam_m.w[i] + (1.0 - beta1) * g;
            p.adam_v.w[i] = beta2 * p.adam_v.w[i] + (1.0 - beta2) * g * g;
            const double mhat = p.adam_m.w[i] / c1;
            const double vhat = p.adam_v.w[i] / c2;
            p.value.w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    });
}

EpochMetrics Trainer::train_epoch(const std::vector<TrainExample>& data) {
    if (data.empty()) throw std::invalid_argument("train_epoch: empty dataset");
    if (order_.size() != data.size() || epochs_ % cfg_.reshuffle_period == 0)
        reshuffle(data.size());

    EpochMetrics metrics;
    long seen = 0;
    long correct_tokens = 0, total_tokens = 0;
    double loss_sum = 0.0;
    long batches = 0;

    while (seen < cfg_.epoch_size) {
        const int bs = static_cast<int>(std::min<long>(cfg_.batch_size, cfg_.epoch_size - seen));
        model_.zero_grad();
        double batch_loss = 0.0;
        for (int b = 0; b < bs; ++b) {
            const TrainExample& ex = data[order_[cursor_]];
            cursor_ = (cursor_ + 1) % order_.size();
            nn::Tape tape;
            const auto loss = model_.build_loss(tape, ex);
            const double lv = tape.value(loss).at(0, 0);
            if (!std::isfinite(lv))
                throw std::runtime_error("train_epoch: non-finite loss at batch " +
                                         std::to_string(batches) + ", lr " +
                                         std::to_string(lr_at_step(cfg_, step_)));
            batch_loss += lv;
            tape.backward(loss, 1.0 / bs);
        }
        batch_loss /= bs;
        ++step_;
        adam_step(lr_at_step(cfg_, step_));
        loss_sum += batch_loss;
        ++batches;
        seen += bs;
        if (batches % 50 == 1) metrics.loss_curve.emplace_back(step_, batch_loss);
    }

    epochs_ += 1;
    metrics.mean_loss = loss_sum / std::max<long>(batches, 1);

    // accuracy probe on a slice of the data (greedy, teacher-forced)
    const std::size_t probe = std::min<std::size_t>(data.size(), 512);
    for (std::size_t i = 0; i < probe; ++i) {
        const auto& ex = data[i];
        const auto fw = model_.forward(ex.input, {EncodingConfig::bos_id, ex.output[0]});
        for (int k = 0; k < fw.logits.rows && k < 2; ++k) {
            int best = 0;
            for (int j = 1; j < fw.logits.cols; ++j)
                if (fw.logits.at(k, j) > fw.logits.at(k, best)) best = j;
            correct_tokens += best == ex.output[k] ? 1 : 0;
            total_tokens += 1;
        }
    }
    metrics.token_accuracy =
        total_tokens > 0 ? static_cast<double>(correct_tokens) / total_tokens : 0.0;
    return metrics;
}

double token_accuracy(const Transformer& model, const std::vector<TrainExample>& data,
                      std::size_t limit) {
    const std::size_t count = limit > 0 ? std::min(limit, data.size()) : data.size();
    long correct = 0, total = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& ex = data[i];
        const auto fw = model.forward(ex.input, {EncodingConfig::bos_id, ex.output[0]});
        for (int k = 0; k < fw.logits.rows && k < 2; ++k) {
            int best = 0;
            for (int j = 1; j < fw.logits.cols; ++j)
                if (fw.logits.at(k, j) > fw.logits.at(k, best)) best = j;
            correct += best == ex.output[k] ? 1 : 0;
            total += 1;
        }
    }
    return total > 0 ? static_cast<double>(correct) / total : 0.0;
}

// --- checkpoints ---------------------------------------------------------------

namespace {
constexpr char kCkptMagic[4] = {'P', 'I', 'C', 'K'};
constexpr std::uint32_t kCkptVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
}  // namespace

void Transformer::save_checkpoint(const std::string& path, u64 vocab_hash) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kCkptMagic, 4);
    put(out, kCkptVersion);
    put(out, vocab_hash);
    const std::int32_t ints[] = {cfg_.enc_dim, cfg_.dec_dim, cfg_.enc_layers,
                                 cfg_.dec_shared_iterations, cfg_.heads_enc, cfg_.heads_dec,
                                 cfg_.heads_cross, cfg_.ffn_mult, cfg_.vocab_size,
                                 cfg_.max_input_len, cfg_.max_output_len};
    for (auto v : ints) put(out, v);
    put(out, cfg_.init_seed);

    std::uint32_t count = 0;
    visit_params([&](const nn::Param&) { ++count; });
    put(out, count);
    visit_params([&](const nn::Param& p) {
        put(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        put(out, static_cast<std::uint32_t>(p.value.rows));
        put(out, static_cast<std::uint32_t>(p.value.cols));
        for (double v : p.value.w) put(out, static_cast<float>(v));
    });
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Transformer Transformer::load_checkpoint(const std::string& path, u64 expected_vocab_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCkptMagic, 4) != 0)
        throw std::runtime_error("bad checkpoint magic: " + path);
    if (get<std::uint32_t>(in) != kCkptVersion)
        throw std::runtime_error("unsupported checkpoint version: " + path);
    const u64 vocab_hash = get<u64>(in);
    if (expected_vocab_hash != 0 && vocab_hash != expected_vocab_hash)
        throw std::runtime_error("checkpoint vocabulary hash mismatch: " + path);

    ModelConfig cfg;
    cfg.enc_dim = get<std::int32_t>(in);
    cfg.dec_dim = get<std::int32_t>(in);
    cfg.enc_layers = get<std::int32_t>(in);
    cfg.dec_shared_iterations = get<std::int32_t>(in);
    cfg.heads_enc = get<std::int32_t>(in);
    cfg.heads_dec = get<std::int32_t>(in);
    cfg.heads_cross = get<std::int32_t>(in);
    cfg.ffn_mult = get<std::int32_t>(in);
    cfg.vocab_size = get<std::int32_t>(in);
    cfg.max_input_len = get<std::int32_t>(in);
    cfg.max_output_len = get<std::int32_t>(in);
    cfg.init_seed = get<u64>(in);

    Transformer model(cfg);
    const auto count = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = get<std::uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const int rows = static_cast<int>(get<std::uint32_t>(in));
        const int cols = static_cast<int>(get<std::uint32_t>(in));
        nn::Param* p = model.find_param(name);
        if (p == nullptr || p->value.rows != rows || p->value.cols != cols)
            throw std::runtime_error("checkpoint tensor mismatch: " + name);
        for (double& v : p->value.w) v = static_cast<double>(get<float>(in));
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return model;
}

}  // namespace picante
