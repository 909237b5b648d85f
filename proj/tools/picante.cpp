#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "picante/config.hpp"
#include "picante/encoding.hpp"
#include "picante/lattice.hpp"
#include "picante/lwe.hpp"
#include "picante/model.hpp"
#include "picante/oracle.hpp"
#include "picante/preprocess.hpp"
#include "picante/recovery.hpp"

namespace fs = std::filesystem;
using namespace picante;

namespace {

struct CommonFlags {
    std::string config_path;
    std::map<std::string, std::string> dotted;
    std::optional<u64> seed;
    std::optional<int> workers;
    std::optional<long> target_pairs;
    std::optional<long> epoch_size;
    std::optional<int> max_epochs;
    std::string model_kind = "transformer";
    std::string h_range;
    bool no_secret = false;
    bool force = false;
};

void register_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key=value config file");
    for (const auto& key : AttackConfig::known_keys())
        cmd->add_option("--" + key, flags.dotted[key], "config key " + key);
    cmd->add_option("--seed", flags.seed, "global seed (run.seed)");
    cmd->add_option("--workers", flags.workers, "worker count (run.workers)");
    cmd->add_option("--target-pairs", flags.target_pairs, "reduced pairs to produce");
    cmd->add_option("--epoch-size", flags.epoch_size, "examples per training epoch");
    cmd->add_option("--max-epochs", flags.max_epochs, "training epoch cap");
    cmd->add_option("--model", flags.model_kind, "transformer or cheat")
        ->check(CLI::IsMember({"transformer", "cheat"}));
    cmd->add_option("--h-range", flags.h_range, "Hamming weights to try, e.g. 1..12 or 9");
    cmd->add_flag("--no-secret", flags.no_secret, "omit the secret sidecar (blind mode)");
    cmd->add_flag("--force", flags.force, "overwrite existing outputs");
}

AttackConfig build_config(const CLI::App* cmd, const CommonFlags& flags) {
    AttackConfig cfg;
    if (!flags.config_path.empty()) cfg = load_config(flags.config_path);
    for (const auto& key : AttackConfig::known_keys())
        if (cmd->count("--" + key) > 0) cfg.apply(key, flags.dotted.at(key));
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.workers) cfg.workers = *flags.workers;
    if (flags.target_pairs) cfg.target_pairs = *flags.target_pairs;
    if (flags.epoch_size) cfg.train.epoch_size = *flags.epoch_size;
    if (flags.max_epochs) cfg.max_epochs = *flags.max_epochs;
    if (!flags.h_range.empty()) {
        const auto dots = flags.h_range.find("..");
        if (dots == std::string::npos) {
            cfg.h_min = cfg.h_max = std::stoi(flags.h_range);
        } else {
            cfg.h_min = std::stoi(flags.h_range.substr(0, dots));
            cfg.h_max = std::stoi(flags.h_range.substr(dots + 2));
        }
    }
    cfg.finalize();
    return cfg;
}

SecretVector regenerate_secret(const LweInstanceSet& instance) {
    LweParams p = instance.params;
    if (p.h < 1)
        throw std::invalid_argument("instance header has no Hamming weight, cannot rebuild secret");
    Rng rng = make_rng(instance.seed);
    return sample_secret(p, rng);
}

std::vector<int> make_h_range(const AttackConfig& cfg, int n) {
    std::vector<int> hs;
    for (int h = cfg.h_min; h <= std::min(cfg.h_max, n); ++h) hs.push_back(h);
    if (hs.empty()) throw std::invalid_argument("empty h range");
    return hs;
}

// --- gen ---------------------------------------------------------------------

int cmd_gen(const AttackConfig& cfg, bool no_secret, bool force) {
    if (!force && fs::exists(cfg.paths.instance))
        throw std::runtime_error("refusing to overwrite " + cfg.paths.instance +
                                 " (pass --force)");
    LweParams p = cfg.lwe;
    p.validate_with_h();
    const auto parent = fs::path(cfg.paths.instance).parent_path();
    if (!parent.empty()) fs::create_directories(parent);

    Rng rng = make_rng(cfg.seed);
    const auto secret = sample_secret(p, rng);
    auto instance = gen_samples(p, secret, rng);
    instance.seed = cfg.seed;
    write_instance(instance, cfg.paths.instance);
    if (no_secret) {
        fs::remove(cfg.paths.secret);
    } else {
        write_secret(secret, cfg.paths.secret);
    }
    std::printf("instance=%s samples=%zu seed=%llu secret=%s\n", cfg.paths.instance.c_str(),
                instance.samples.size(), static_cast<unsigned long long>(cfg.seed),
                no_secret ? "omitted" : cfg.paths.secret.c_str());
    return 0;
}

// --- preprocess ----------------------------------------------------------------

int cmd_preprocess(const AttackConfig& cfg) {
    const auto instance = read_instance(cfg.paths.instance);
    CampaignOptions opts;
    opts.shard_dir = cfg.paths.shard_dir;
    opts.target_pairs = cfg.target_pairs;
    opts.workers = cfg.workers;
    opts.seed = cfg.seed;
    const auto dataset = preprocess_campaign(instance, cfg.reduction, opts);
    std::printf("matrices=%d pairs=%zu std_ratio=%.4f norm_ratio=%.4f duplicates=%zu "
                "zero_row_fraction=%.4f\n",
                dataset.matrix_count, dataset.pairs.size(), dataset.stats.std_ratio,
                dataset.stats.norm_ratio, dataset.stats.duplicate_count,
                dataset.stats.zero_row_fraction);
    return 0;
}

// --- train ----------------------------------------------------------------------

std::vector<ReducedPair> load_shard_pairs(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw std::runtime_error("shard directory missing: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.starts_with("shard_") && name.ends_with(".picr"))
            files.push_back(entry.path().string());
    }
    if (files.empty()) throw std::runtime_error("no shards in " + dir);
    std::sort(files.begin(), files.end());
    std::vector<ReducedPair> pairs;
    for (const auto& f : files) {
        auto shard = read_shard(f);
        for (auto& p : shard.pairs) pairs.push_back(std::move(p));
    }
    return pairs;
}

struct TrainState {
    int epoch = 0;
    bool success = false;

    static TrainState load(const std::string& path) {
        TrainState st;
        std::ifstream in(path);
        if (!in) return st;
        std::string key;
        while (in >> key) {
            if (key.rfind("epoch=", 0) == 0) st.epoch = std::stoi(key.substr(6));
            if (key.rfind("success=", 0) == 0) st.success = key.substr(8) == "1";
        }
        return st;
    }
    void save(const std::string& path) const {
        std::ofstream out(path);
        out << "epoch=" << epoch << " success=" << (success ? 1 : 0) << '\n';
    }
};

int cmd_train(const AttackConfig& cfg, const std::string& model_kind) {
    auto instance = read_instance(cfg.paths.instance);
    instance.secret.reset();  // recovery never sees the hidden secret
    const int n = instance.params.n;

    fs::create_directories(cfg.paths.checkpoint_dir);
    fs::create_directories(cfg.paths.report_dir);

    const std::string state_path = (fs::path(cfg.paths.report_dir) / "state.txt").string();
    TrainState state = TrainState::load(state_path);
    if (state.success) {
        std::printf("already-succeeded epoch=%d\n", state.epoch);
        return 0;
    }
    if (state.epoch >= cfg.max_epochs) {
        std::printf("max-epochs-reached epoch=%d\n", state.epoch);
        return 0;
    }

    auto pairs = load_shard_pairs(cfg.paths.shard_dir);
    const std::size_t eval_count = std::max<std::size_t>(
        1, std::min<std::size_t>(static_cast<std::size_t>(cfg.eval_samples), pairs.size() / 10));
    if (pairs.size() < 2 * eval_count)
        throw std::runtime_error("reduced dataset too small to split a held-out set");
    std::vector<ReducedPair> eval_pairs(pairs.end() - eval_count, pairs.end());
    pairs.resize(pairs.size() - eval_count);

    const EncodingConfig enc = cfg.derive_encoding_config();
    write_vocab_manifest(enc, (fs::path(cfg.paths.checkpoint_dir) / "vocab.txt").string());
    const u64 vocab_hash = vocab_manifest_hash(enc);

    // trajectory reporting is the one consumer of the sidecar, and only
    // when it exists (experiment mode)
    std::optional<SecretVector> reporting_secret;
    if (fs::exists(cfg.paths.secret)) reporting_secret = read_secret(cfg.paths.secret);

    RecoveryOptions ropts = cfg.recovery;
    ropts.seed = cfg.seed;
    const auto h_range = make_h_range(cfg, n);

    const std::string metrics_path =
        (fs::path(cfg.paths.report_dir) / "train_metrics.csv").string();
    const bool fresh_metrics = !fs::exists(metrics_path);
    std::ofstream metrics(metrics_path, std::ios::app);
    if (fresh_metrics) metrics << "epoch,mean_loss,token_accuracy,success,method,h\n";

    auto run_recovery = [&](const ModelOracle& oracle, int epoch) {
        const auto report =
            recover_all(oracle, eval_pairs, instance, enc, h_range, ropts,
                        reporting_secret ? &*reporting_secret : nullptr, epoch);
        const auto base = fs::path(cfg.paths.report_dir) / ("epoch_" + std::to_string(epoch));
        write_report(report, base.string() + ".txt", base.string() + "_scores.csv");
        return report;
    };

    if (model_kind == "cheat") {
        const auto secret = regenerate_secret(instance);
        CheatOracle oracle(secret, instance.params, enc);
        const int epoch = state.epoch + 1;
        const auto report = run_recovery(oracle, epoch);
        metrics << epoch << ",0,1," << (report.success ? 1 : 0) << ','
                << report.winning_method << ',' << report.winning_h << '\n';
        state.epoch = epoch;
        state.success = report.success;
        state.save(state_path);
        std::printf("epoch=%d success=%s method=%s h=%d\n", epoch,
                    report.success ? "true" : "false", report.winning_method.c_str(),
                    report.winning_h);
        return 0;
    }

    std::vector<TrainExample> examples;
    examples.reserve(pairs.size());
    for (const auto& p : pairs) {
        auto sp = encode_sample(p.a, p.b, enc);
        TrainExample ex;
        ex.input = std::move(sp.input);
        ex.output = {sp.output[0], sp.output[1]};
        examples.push_back(std::move(ex));
    }

    ModelConfig mc = cfg.model;
    mc.vocab_size = enc.vocab_size;
    mc.max_input_len = 2 * n;
    mc.max_output_len = 2;
    if (mc.init_seed == 0) mc.init_seed = cfg.seed;
    Transformer model(mc);

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    Trainer trainer(model, tc);

    for (int epoch = state.epoch + 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto em = trainer.train_epoch(examples);
        TransformerOracle oracle(model, enc);
        const auto report = run_recovery(oracle, epoch);
        model.save_checkpoint(
            (fs::path(cfg.paths.checkpoint_dir) / ("ckpt_epoch_" + std::to_string(epoch) + ".bin"))
                .string(),
            vocab_hash);
        metrics << epoch << ',' << em.mean_loss << ',' << em.token_accuracy << ','
                << (report.success ? 1 : 0) << ',' << report.winning_method << ','
                << report.winning_h << '\n';
        metrics.flush();
        state.epoch = epoch;
        state.success = report.success;
        state.save(state_path);
        std::printf("epoch=%d loss=%.4f token_acc=%.4f success=%s method=%s h=%d\n", epoch,
                    em.mean_loss, em.token_accuracy, report.success ? "true" : "false",
                    report.winning_method.c_str(), report.winning_h);
        if (report.success) return 0;
    }
    return 0;
}

// --- verify ----------------------------------------------------------------------

int cmd_verify(const AttackConfig& cfg, const std::string& instance_path,
               const std::string& guess_path) {
    const auto instance = read_instance(instance_path.empty() ? cfg.paths.instance : instance_path);
    const auto guess = read_secret(guess_path);
    if (guess.bits.size() != static_cast<std::size_t>(instance.params.n))
        throw std::invalid_argument("guess length does not match instance dimension");

    const double alpha = cfg.recovery.confidence_alpha;
    const auto stats = residual_std(instance.samples, guess, instance.params.q, alpha);
    const auto iv = std_interval_multipliers(static_cast<int>(instance.samples.size()), alpha);
    const double wrong_sigma = static_cast<double>(instance.params.q) / std::sqrt(12.0);
    const auto verdict = verify_guess(instance, guess, alpha);

    std::printf("std_emp=%.4f\n", stats.std_emp);
    std::printf("right_interval=[%.4f, %.4f]\n", instance.params.sigma * iv.lo,
                instance.params.sigma * iv.hi);
    std::printf("wrong_interval=[%.4f, %.4f]\n", wrong_sigma * iv.lo, wrong_sigma * iv.hi);
    std::printf("verdict=%s\n", to_string(verdict));
    return 0;
}

// --- compare-sampling ---------------------------------------------------------------

int cmd_compare_sampling(const AttackConfig& cfg) {
    const auto instance = read_instance(cfg.paths.instance);
    const int n = instance.params.n;
    SecretVector secret = fs::exists(cfg.paths.secret) ? read_secret(cfg.paths.secret)
                                                       : regenerate_secret(instance);

    auto run = [&](const std::string& tag, std::function<SubsampleMatrix(int)> source) {
        CampaignOptions opts;
        opts.shard_dir = (fs::path(cfg.paths.shard_dir) / ("compare_" + tag)).string();
        opts.target_pairs = cfg.target_pairs;
        opts.workers = cfg.workers;
        opts.seed = cfg.seed;
        opts.matrix_source = std::move(source);
        const auto ds = preprocess_campaign(instance, cfg.reduction, opts);
        std::printf("%s: matrices=%d pairs=%zu std_ratio=%.4f norm_ratio=%.4f duplicates=%zu "
                    "zero_row_fraction=%.4f\n",
                    tag.c_str(), ds.matrix_count, ds.pairs.size(), ds.stats.std_ratio,
                    ds.stats.norm_ratio, ds.stats.duplicate_count, ds.stats.zero_row_fraction);
        return ds.stats;
    };

    const auto sub_stats = run("subsampled", {});

    LweParams p = instance.params;
    const auto indep_stats = run("independent", [&, secret](int index) {
        // fresh samples, same secret, stream keyed off the matrix index
        Rng rng = make_rng(splitmix64(cfg.seed ^ 0x696e646570ULL), index + 1);
        SubsampleMatrix sub;
        sub.indices.resize(n);
        sub.a_matrix = IntMat(n, n);
        sub.b.resize(n);
        for (int i = 0; i < n; ++i) {
            sub.indices[i] = i;
            u64 dot = 0;
            for (int j = 0; j < n; ++j) {
                const u64 v = uniform_u64(rng, p.q);
                sub.a_matrix.at(i, j) = static_cast<i64>(v);
                if (secret.bits[j]) dot = (dot + v) % p.q;
            }
            sub.b[i] = to_canonical(static_cast<i64>(dot) + sample_error(p.sigma, rng), p.q);
        }
        return sub;
    });

    std::printf("std_ratio_delta=%.4f\n", std::abs(sub_stats.std_ratio - indep_stats.std_ratio));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice-reduction + seq2seq attack pipeline for sparse-binary-secret LWE"};
    app.require_subcommand(1);

    CommonFlags gen_flags, pre_flags, train_flags, verify_flags, compare_flags;
    auto* gen = app.add_subcommand("gen", "generate an LWE instance file (plus secret sidecar)");
    register_common(gen, gen_flags);
    auto* pre = app.add_subcommand("preprocess", "subsample-and-reduce campaign over the instance");
    register_common(pre, pre_flags);
    auto* train = app.add_subcommand("train", "train the model and attempt recovery each epoch");
    register_common(train, train_flags);
    auto* verify = app.add_subcommand("verify", "statistically verify a secret guess");
    register_common(verify, verify_flags);
    std::string verify_instance, verify_guess_path;
    verify->add_option("instance", verify_instance, "instance file")->required();
    verify->add_option("guess", verify_guess_path, "guess file (n 0/1 integers)")->required();
    auto* compare = app.add_subcommand("compare-sampling",
                                       "reduce subsampled vs independently drawn matrices");
    register_common(compare, compare_flags);

    try {
        app.parse(argc, argv);
        if (gen->parsed())
            return cmd_gen(build_config(gen, gen_flags), gen_flags.no_secret, gen_flags.force);
        if (pre->parsed()) return cmd_preprocess(build_config(pre, pre_flags));
        if (train->parsed())
            return cmd_train(build_config(train, train_flags), train_flags.model_kind);
        if (verify->parsed())
            return cmd_verify(build_config(verify, verify_flags), verify_instance,
                              verify_guess_path);
        if (compare->parsed()) return cmd_compare_sampling(build_config(compare, compare_flags));
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error code=invalid-argument msg=\"%s\"\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error code=runtime msg=\"%s\"\n", e.what());
        return 1;
    }
}
