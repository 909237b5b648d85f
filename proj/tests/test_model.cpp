#include <stdexcept>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "picante/model.hpp"
#include "picante/nn.hpp"
#include "picante/oracle.hpp"

using namespace picante;

namespace {

ModelConfig mini_config(int iterations = 2) {
    ModelConfig cfg;
    cfg.enc_dim = 16;
    cfg.dec_dim = 8;
    cfg.dec_shared_iterations = iterations;
    cfg.vocab_size = 20;
    cfg.max_input_len = 6;  // n = 3
    cfg.max_output_len = 2;
    cfg.init_seed = 123;
    return cfg;
}

TrainExample fixed_example() {
    TrainExample ex;
    ex.input = {3, 8, 4, 9, 5, 10};
    ex.output = {6, 12};
    return ex;
}

}  // namespace

TEST_CASE("model config validation") {
    ModelConfig cfg = mini_config();
    cfg.enc_dim = 18;  // not divisible by 4 heads
    CHECK_THROWS_AS(Transformer{cfg}, std::invalid_argument);
    cfg = mini_config();
    cfg.vocab_size = 0;
    CHECK_THROWS_AS(Transformer{cfg}, std::invalid_argument);
    cfg = mini_config();
    cfg.dec_shared_iterations = 0;
    CHECK_THROWS_AS(Transformer{cfg}, std::invalid_argument);
}

TEST_CASE("forward emits finite logits of shape K x V, deterministically") {
    Transformer model(mini_config());
    const TokenSeq input = {3, 8, 4, 9, 5, 10};
    const auto f1 = model.forward(input, {EncodingConfig::bos_id, 6});
    CHECK(f1.logits.rows == 2);
    CHECK(f1.logits.cols == 20);
    for (double v : f1.logits.w) CHECK(std::isfinite(v));

    const auto f2 = model.forward(input, {EncodingConfig::bos_id, 6});
    CHECK(f1.logits.w == f2.logits.w);

    TokenSeq permuted = input;
    std::swap(permuted[0], permuted[2]);
    const auto f3 = model.forward(permuted, {EncodingConfig::bos_id, 6});
    CHECK(f1.logits.w != f3.logits.w);  // positional information present

    TokenSeq too_long(7, 3);
    CHECK_THROWS_AS(model.forward(too_long, {EncodingConfig::bos_id}), std::invalid_argument);
}

TEST_CASE("cross entropy analytic values") {
    nn::Tape tape;
    const int v = 20;
    auto uniform = tape.leaf(nn::Mat(2, v));
    auto loss = tape.cross_entropy(uniform, {3, 7});
    CHECK(tape.value(loss).at(0, 0) == doctest::Approx(std::log(v)).epsilon(1e-12));

    nn::Mat strong(2, v);
    for (int j = 0; j < v; ++j) {
        strong.at(0, j) = j == 3 ? 50.0 : 0.0;
        strong.at(1, j) = j == 7 ? 50.0 : 0.0;
    }
    nn::Tape tape2;
    auto hot = tape2.leaf(strong);
    auto loss2 = tape2.cross_entropy(hot, {3, 7});
    CHECK(tape2.value(loss2).at(0, 0) < 1e-12);
}

TEST_CASE("softmax rows normalize, causal mask zeroes the future") {
    nn::Tape tape;
    nn::Mat m(3, 3);
    Rng rng = make_rng(5);
    for (auto& v : m.w) v = gaussian(rng);
    auto sm = tape.softmax_rows(tape.leaf(m), true);
    const auto& y = tape.value(sm);
    for (int i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 3; ++j) {
            sum += y.at(i, j);
            if (j > i) CHECK(y.at(i, j) == 0.0);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("learning rate warmup schedule") {
    TrainConfig cfg;
    CHECK(lr_at_step(cfg, 500) ==
          doctest::Approx(1e-8 + 500.0 / 1000.0 * (1e-5 - 1e-8)).epsilon(1e-12));
    CHECK(lr_at_step(cfg, 0) == doctest::Approx(1e-8));
    CHECK(lr_at_step(cfg, 1000) == doctest::Approx(1e-5));
    CHECK(lr_at_step(cfg, 5000) == doctest::Approx(1e-5));
}

TEST_CASE("analytic gradients match central finite differences everywhere") {
    Transformer model(mini_config());
    const TrainExample ex = fixed_example();

    auto loss_value = [&]() {
        nn::Tape tape;
        return tape.value(model.build_loss(tape, ex)).at(0, 0);
    };

    model.zero_grad();
    {
        nn::Tape tape;
        tape.backward(model.build_loss(tape, ex));
    }

    const double h = 1e-4;
    double worst = 0.0;
    std::string worst_name;
    model.visit_params([&](nn::Param& p) {
        // probe a few entries spread across the tensor
        const std::size_t count = p.value.w.size();
        for (std::size_t pick = 0; pick < std::min<std::size_t>(count, 3); ++pick) {
            const std::size_t idx = (pick * 7919) % count;
            const double saved = p.value.w[idx];
            p.value.w[idx] = saved + h;
            const double up = loss_value();
            p.value.w[idx] = saved - h;
            const double down = loss_value();
            p.value.w[idx] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = p.grad.w[idx];
            const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
            const double rel = std::abs(numeric - analytic) / scale;
            if (rel > worst) {
                worst = rel;
                worst_name = p.name;
            }
        }
    });
    INFO("worst tensor: ", worst_name);
    CHECK(worst < 1e-3);
}

TEST_CASE("copy gate surgery: closed gate makes iterations a no-op") {
    ModelConfig cfg8 = mini_config(8);
    ModelConfig cfg1 = mini_config(1);
    Transformer m8(cfg8), m1(cfg1), blend(cfg8);
    const TokenSeq input = {3, 8, 4, 9, 5, 10};
    const std::vector<int> dec = {EncodingConfig::bos_id, 6};

    m8.force_gate(-50.0);  // fully closed
    m1.force_gate(-50.0);
    const auto closed8 = m8.forward(input, dec);
    const auto closed1 = m1.forward(input, dec);
    CHECK(closed8.logits.w == closed1.logits.w);

    m8.force_gate(50.0);  // fully open: the layer is applied each iteration
    m1.force_gate(50.0);
    const auto open8 = m8.forward(input, dec);
    const auto open1 = m1.forward(input, dec);
    CHECK(open8.logits.w != open1.logits.w);
    CHECK(open1.logits.w != closed1.logits.w);

    const auto blended = blend.forward(input, dec);  // learned gate, neither extreme
    CHECK(blended.logits.w != open8.logits.w);
    CHECK(blended.logits.w != closed8.logits.w);
}

TEST_CASE("zeroed model decodes the lowest token id on ties") {
    Transformer model(mini_config());
    model.visit_params([](nn::Param& p) { p.value.zero(); });
    const auto out = model.greedy_decode({3, 8, 4, 9, 5, 10});
    REQUIRE(out.size() == 2);
    CHECK(out[0] == 0);
    CHECK(out[1] == 0);
}

TEST_CASE("cross attention scores cover the input with head-count mass") {
    Transformer model(mini_config());
    const auto scores = model.cross_attention_scores({3, 8, 4, 9, 5, 10});
    REQUIRE(scores.size() == 6);
    double total = 0.0;
    for (double s : scores) {
        CHECK(s >= 0.0);
        total += s;
    }
    CHECK(total == doctest::Approx(4.0).epsilon(1e-6));  // 4 heads, one query
}

TEST_CASE("training learns the noiseless copy task") {
    ModelConfig cfg;
    cfg.enc_dim = 32;
    cfg.dec_dim = 32;
    cfg.dec_shared_iterations = 2;
    cfg.vocab_size = 13;
    cfg.max_input_len = 4;
    cfg.max_output_len = 2;
    cfg.init_seed = 7;
    Transformer model(cfg);

    // output = the first input (high, low) token pair
    Rng rng = make_rng(99);
    std::vector<TrainExample> data;
    for (int i = 0; i < 4096; ++i) {
        TrainExample ex;
        ex.input = {static_cast<int>(3 + uniform_u64(rng, 4)),
                    static_cast<int>(7 + uniform_u64(rng, 6)),
                    static_cast<int>(3 + uniform_u64(rng, 4)),
                    static_cast<int>(7 + uniform_u64(rng, 6))};
        ex.output = {ex.input[0], ex.input[1]};
        data.push_back(ex);
    }

    TrainConfig tc;
    tc.batch_size = 32;
    tc.lr = 1e-3;
    tc.warmup_steps = 100;
    tc.warmup_start_lr = 1e-5;
    tc.epoch_size = 12000;
    tc.seed = 3;
    Trainer trainer(model, tc);

    std::vector<double> epoch_losses;
    double accuracy = 0.0;
    for (int epoch = 0; epoch < 6; ++epoch) {
        const auto metrics = trainer.train_epoch(data);
        epoch_losses.push_back(metrics.mean_loss);
        accuracy = metrics.token_accuracy;
        if (accuracy > 0.95) break;
    }
    CHECK(accuracy > 0.95);

    // loss drops monotonically across epoch averages, 5% jitter allowed
    for (std::size_t e = 1; e < epoch_losses.size(); ++e)
        CHECK(epoch_losses[e] <= epoch_losses[e - 1] * 1.05);
}

TEST_CASE("cheat oracle satisfies the model contract") {
    LweParams p{8, 113, 2, 3.0, 0};
    Rng rng = make_rng(17);
    auto secret = sample_secret(p, rng);
    const auto enc = derive_encoding(p.n, p.q);
    CheatOracle oracle(secret, p, enc);

    for (int t = 0; t < 50; ++t) {
        std::vector<u64> a(p.n);
        for (auto& v : a) v = uniform_u64(rng, p.q);
        u64 expected = 0;
        for (int i = 0; i < p.n; ++i)
            if (secret.bits[i]) expected = (expected + a[i]) % p.q;
        const auto out = oracle.predict(encode_vector(a, enc));
        CHECK(decode_output(out, enc) == expected);

        const auto lg = oracle.logits(encode_vector(a, enc), {});
        CHECK(lg.rows == 2);
        CHECK(lg.cols == enc.vocab_size);
        int best0 = 0, best1 = 0;
        for (int j = 1; j < lg.cols; ++j) {
            if (lg.at(0, j) > lg.at(0, best0)) best0 = j;
            if (lg.at(1, j) > lg.at(1, best1)) best1 = j;
        }
        CHECK(best0 == out[0]);
        CHECK(best1 == out[1]);
    }

    // zero vector maps to the tokens of zero
    std::vector<u64> zero(p.n, 0);
    const auto out0 = oracle.predict(encode_vector(zero, enc));
    CHECK(decode_output(out0, enc) == 0);

    // peaked attention marks the 1-bits' high-digit positions
    const auto scores = oracle.cross_attention_scores(encode_vector(zero, enc));
    for (int i = 0; i < p.n; ++i) {
        CHECK(scores[2 * i + 1] == 0.0);
        CHECK((scores[2 * i] > 0.0) == (secret.bits[i] == 1));
    }

    CheatOracle uniform(secret, p, enc, false, /*attention_peaked=*/false);
    const auto flat = uniform.cross_attention_scores(encode_vector(zero, enc));
    for (double s : flat) CHECK(s == doctest::Approx(1.0 / 16));
}

TEST_CASE("noisy cheat oracle perturbs predictions like the error channel") {
    LweParams p{8, 113, 2, 3.0, 0};
    Rng rng = make_rng(19);
    auto secret = sample_secret(p, rng);
    const auto enc = derive_encoding(p.n, p.q);
    CheatOracle exact(secret, p, enc);
    CheatOracle noisy(secret, p, enc, /*noisy=*/true, true, /*noise_seed=*/3);

    int moved = 0;
    for (int t = 0; t < 200; ++t) {
        std::vector<u64> a(p.n);
        for (auto& v : a) v = uniform_u64(rng, p.q);
        const auto input = encode_vector(a, enc);
        const i64 clean = static_cast<i64>(decode_output(exact.predict(input), enc));
        const i64 fuzzy = static_cast<i64>(decode_output(noisy.predict(input), enc));
        const i64 dev = center_rep_signed(fuzzy - clean, p.q);
        CHECK(std::abs(dev) <= 36);  // 12 sigma
        if (dev != 0) ++moved;
        CHECK(noisy.predict(input) == noisy.predict(input));  // keyed on the input
    }
    CHECK(moved > 100);  // sigma=3 leaves only ~13% of draws at zero
}

TEST_CASE("checkpoints round trip through float32 storage") {
    namespace fs = std::filesystem;
    const auto path = (fs::temp_directory_path() / "picante_ckpt.bin").string();
    ModelConfig cfg = mini_config();
    Transformer model(cfg);
    const u64 vocab_hash = 0x1234abcdULL;
    model.save_checkpoint(path, vocab_hash);

    auto loaded = Transformer::load_checkpoint(path, vocab_hash);
    const TokenSeq input = {3, 8, 4, 9, 5, 10};
    const auto a = model.forward(input, {EncodingConfig::bos_id, 6});
    const auto b = loaded.forward(input, {EncodingConfig::bos_id, 6});
    for (std::size_t i = 0; i < a.logits.w.size(); ++i)
        CHECK(a.logits.w[i] == doctest::Approx(b.logits.w[i]).epsilon(1e-4));

    CHECK_THROWS_AS(Transformer::load_checkpoint(path, 0x9999ULL), std::runtime_error);
    fs::remove(path);
}

TEST_CASE("trainer rejects bad inputs and reports diagnostics on blowup") {
    Transformer model(mini_config());
    TrainConfig tc;
    tc.batch_size = 0;
    CHECK_THROWS_AS(Trainer(model, tc), std::invalid_argument);

    TrainConfig ok;
    Trainer trainer(model, ok);
    CHECK_THROWS_AS(trainer.train_epoch({}), std::invalid_argument);
}
