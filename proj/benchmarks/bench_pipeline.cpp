#include <benchmark/benchmark.h>

#include "picante/encoding.hpp"
#include "picante/lattice.hpp"
#include "picante/lwe.hpp"
#include "picante/model.hpp"
#include "picante/preprocess.hpp"

using namespace picante;

namespace {

LweInstanceSet make_instance(int n, u64 seed) {
    LweParams p{n, 113, std::max(1, n / 10), 3.0, 0};
    Rng rng = make_rng(seed);
    auto secret = sample_secret(p, rng);
    auto inst = gen_samples(p, secret, rng);
    inst.seed = seed;
    return inst;
}

}  // namespace

static void BM_LllEmbedding(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto inst = make_instance(n, 1);
    Rng rng = make_rng(1, 1);
    auto sub = subsample(inst, rng);
    for (auto _ : state) {
        IntMat emb = build_embedding(sub.a_matrix, 15, 113);
        lll_reduce(emb, 0.99);
        benchmark::DoNotOptimize(emb.data.data());
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_LllEmbedding)->Arg(16)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_BkzEmbedding(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto inst = make_instance(n, 2);
    Rng rng = make_rng(2, 1);
    auto sub = subsample(inst, rng);
    ReductionConfig cfg;
    cfg.beta = static_cast<int>(state.range(1));
    cfg.max_tours = 4;
    for (auto _ : state) {
        IntMat emb = build_embedding(sub.a_matrix, 15, 113);
        bkz_reduce(emb, cfg);
        benchmark::DoNotOptimize(emb.data.data());
    }
}
BENCHMARK(BM_BkzEmbedding)->Args({16, 8})->Args({32, 12})->Args({48, 20})
    ->Unit(benchmark::kMillisecond);

static void BM_EncodeSample(benchmark::State& state) {
    const auto cfg = derive_encoding(80, 113);
    Rng rng = make_rng(3);
    std::vector<i64> a(80);
    for (auto& v : a) v = center_rep(uniform_u64(rng, 113), 113);
    for (auto _ : state) {
        auto sp = encode_sample(a, -17, cfg);
        benchmark::DoNotOptimize(sp.input.data());
    }
}
BENCHMARK(BM_EncodeSample);

static void BM_ResidualStd(benchmark::State& state) {
    auto inst = make_instance(80, 4);
    Rng rng = make_rng(5);
    auto guess = sample_secret(inst.params, rng);
    for (auto _ : state) {
        auto st = residual_std(inst.samples, guess, inst.params.q, 1e-5);
        benchmark::DoNotOptimize(st.std_emp);
    }
}
BENCHMARK(BM_ResidualStd);

static void BM_TransformerForward(benchmark::State& state) {
    const auto enc = derive_encoding(16, 113);
    ModelConfig mc;
    mc.enc_dim = static_cast<int>(state.range(0));
    mc.dec_dim = mc.enc_dim / 2;
    mc.dec_shared_iterations = 8;
    mc.vocab_size = enc.vocab_size;
    mc.max_input_len = 32;
    mc.max_output_len = 2;
    mc.init_seed = 6;
    Transformer model(mc);

    Rng rng = make_rng(7);
    std::vector<i64> a(16);
    for (auto& v : a) v = center_rep(uniform_u64(rng, 113), 113);
    const auto sp = encode_sample(a, 5, enc);
    const std::vector<int> dec = {EncodingConfig::bos_id, sp.output[0]};
    for (auto _ : state) {
        auto fw = model.forward(sp.input, dec);
        benchmark::DoNotOptimize(fw.logits.w.data());
    }
    state.SetComplexityN(mc.enc_dim);
}
BENCHMARK(BM_TransformerForward)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
