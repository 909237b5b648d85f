#include "picante/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace picante {

namespace {

// Central schema: dotted key, getter, setter. Keeps the file format, the
// CLI flags and to_text() in lockstep.
struct KeyBinding {
    std::string key;
    std::function<std::string(const AttackConfig&)> get;
    std::function<void(AttackConfig&, const std::string&)> set;
};

template <typename T>
T parse_num(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !(in >> std::ws).eof())
        throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
    return out;
}

template <typename T>
std::string fmt_num(T v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

const std::vector<KeyBinding>& bindings() {
    static const std::vector<KeyBinding> table = [] {
        std::vector<KeyBinding> t;
        auto num = [&t](const std::string& key, auto getter) {
            using Field = std::remove_reference_t<decltype(getter(std::declval<AttackConfig&>()))>;
            t.push_back({key,
                         [getter](const AttackConfig& c) {
                             return fmt_num(getter(const_cast<AttackConfig&>(c)));
                         },
                         [key, getter](AttackConfig& c, const std::string& v) {
                             getter(c) = parse_num<Field>(key, v);
                         }});
        };
        auto str = [&t](const std::string& key, auto getter) {
            t.push_back({key,
                         [getter](const AttackConfig& c) {
                             return getter(const_cast<AttackConfig&>(c));
                         },
                         [getter](AttackConfig& c, const std::string& v) { getter(c) = v; }});
        };

        num("lwe.n", [](AttackConfig& c) -> int& { return c.lwe.n; });
        num("lwe.q", [](AttackConfig& c) -> u64& { return c.lwe.q; });
        num("lwe.h", [](AttackConfig& c) -> int& { return c.lwe.h; });
        num("lwe.sigma", [](AttackConfig& c) -> double& { return c.lwe.sigma; });
        num("lwe.m", [](AttackConfig& c) -> int& { return c.lwe.m; });

        num("reduction.omega", [](AttackConfig& c) -> int& { return c.reduction.omega; });
        num("reduction.beta", [](AttackConfig& c) -> int& { return c.reduction.beta; });
        num("reduction.delta", [](AttackConfig& c) -> double& { return c.reduction.delta; });
        num("reduction.timeout_seconds",
            [](AttackConfig& c) -> double& { return c.reduction.timeout_seconds; });
        num("reduction.max_tours", [](AttackConfig& c) -> int& { return c.reduction.max_tours; });

        num("encoding.base", [](AttackConfig& c) -> u64& { return c.encoding.base; });
        num("encoding.bucket", [](AttackConfig& c) -> u64& { return c.encoding.bucket; });

        num("model.enc_dim", [](AttackConfig& c) -> int& { return c.model.enc_dim; });
        num("model.dec_dim", [](AttackConfig& c) -> int& { return c.model.dec_dim; });
        num("model.dec_shared_iterations",
            [](AttackConfig& c) -> int& { return c.model.dec_shared_iterations; });
        num("model.heads_enc", [](AttackConfig& c) -> int& { return c.model.heads_enc; });
        num("model.heads_dec", [](AttackConfig& c) -> int& { return c.model.heads_dec; });
        num("model.heads_cross", [](AttackConfig& c) -> int& { return c.model.heads_cross; });
        num("model.ffn_mult", [](AttackConfig& c) -> int& { return c.model.ffn_mult; });
        num("model.init_seed", [](AttackConfig& c) -> u64& { return c.model.init_seed; });

        num("train.batch_size", [](AttackConfig& c) -> int& { return c.train.batch_size; });
        num("train.lr", [](AttackConfig& c) -> double& { return c.train.lr; });
        num("train.warmup_start_lr",
            [](AttackConfig& c) -> double& { return c.train.warmup_start_lr; });
        num("train.warmup_steps", [](AttackConfig& c) -> long& { return c.train.warmup_steps; });
        num("train.epoch_size", [](AttackConfig& c) -> long& { return c.train.epoch_size; });
        num("train.reshuffle_period",
            [](AttackConfig& c) -> int& { return c.train.reshuffle_period; });

        num("recovery.direct_k_count",
            [](AttackConfig& c) -> int& { return c.recovery.direct_k_count; });
        num("recovery.distinguisher_draws",
            [](AttackConfig& c) -> int& { return c.recovery.distinguisher_draws; });
        num("recovery.attention_samples",
            [](AttackConfig& c) -> int& { return c.recovery.attention_samples; });
        num("recovery.confidence_alpha",
            [](AttackConfig& c) -> double& { return c.recovery.confidence_alpha; });
        num("recovery.h_min", [](AttackConfig& c) -> int& { return c.h_min; });
        num("recovery.h_max", [](AttackConfig& c) -> int& { return c.h_max; });

        str("paths.instance", [](AttackConfig& c) -> std::string& { return c.paths.instance; });
        str("paths.secret", [](AttackConfig& c) -> std::string& { return c.paths.secret; });
        str("paths.shard_dir", [](AttackConfig& c) -> std::string& { return c.paths.shard_dir; });
        str("paths.checkpoint_dir",
            [](AttackConfig& c) -> std::string& { return c.paths.checkpoint_dir; });
        str("paths.report_dir", [](AttackConfig& c) -> std::string& { return c.paths.report_dir; });

        num("run.seed", [](AttackConfig& c) -> u64& { return c.seed; });
        num("run.workers", [](AttackConfig& c) -> int& { return c.workers; });
        num("run.max_epochs", [](AttackConfig& c) -> int& { return c.max_epochs; });
        num("run.target_pairs", [](AttackConfig& c) -> long& { return c.target_pairs; });
        num("run.eval_samples", [](AttackConfig& c) -> int& { return c.eval_samples; });
        return t;
    }();
    return table;
}

const KeyBinding& find_binding(const std::string& key) {
    for (const auto& b : bindings())
        if (b.key == key) return b;
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

}  // namespace

AttackConfig::AttackConfig() {
    // Desk-scale defaults: full-scale model dims stay reachable through
    // model.* keys, the defaults favor a laptop run. 16 tours buys the
    // extra reduction the small-n campaign needs over the library default.
    model.enc_dim = 256;
    model.dec_dim = 128;
    train.epoch_size = 100000;
    reduction.max_tours = 16;
    reduction.timeout_seconds = 600;
}

void AttackConfig::apply(const std::string& dotted_key, const std::string& value) {
    find_binding(dotted_key).set(*this, value);
}

std::string AttackConfig::get(const std::string& dotted_key) const {
    return find_binding(dotted_key).get(*this);
}

const std::vector<std::string>& AttackConfig::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& b : bindings()) k.push_back(b.key);
        return k;
    }();
    return keys;
}

void parse_config_text(AttackConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": bad section header");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto ke = key.find_last_not_of(" \t");
        key = key.substr(0, ke + 1);
        const auto vb = value.find_first_not_of(" \t");
        value = vb == std::string::npos ? "" : value.substr(vb);
        cfg.apply(section.empty() ? key : section + "." + key, value);
    }
}

AttackConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::ostringstream text;
    text << in.rdbuf();
    AttackConfig cfg;
    parse_config_text(cfg, text.str());
    return cfg;
}

void AttackConfig::finalize() {
    std::string root = "data";
    if (const char* env = std::getenv("PICANTE_DATA_DIR"); env != nullptr && *env != '\0')
        root = env;
    auto fill = [&](std::string& path, const char* name) {
        if (path.empty()) path = (fs::path(root) / name).string();
    };
    fill(paths.instance, "instance.txt");
    if (paths.secret.empty()) paths.secret = paths.instance + ".secret";
    fill(paths.shard_dir, "shards");
    fill(paths.checkpoint_dir, "checkpoints");
    fill(paths.report_dir, "reports");

    const std::vector<std::string> all = {paths.instance, paths.secret, paths.shard_dir,
                                          paths.checkpoint_dir, paths.report_dir};
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[i] == all[j])
                throw std::invalid_argument("config: paths must be distinct (" + all[i] + ")");

    if (max_epochs < 1) throw std::invalid_argument("config: run.max_epochs must be >= 1");
    if (workers < 1) throw std::invalid_argument("config: run.workers must be >= 1");
    if (h_min < 1 || h_max < h_min)
        throw std::invalid_argument("config: recovery.h_min/h_max out of order");
    lwe.validate();
}

EncodingConfig AttackConfig::derive_encoding_config() const {
    EncodingConfig cfg = picante::derive_encoding(lwe.n, lwe.q);
    if (encoding.base != 0) {
        cfg.base = encoding.base;
        cfg.k = static_cast<int>((lwe.q + cfg.base - 1) / cfg.base);
    }
    if (encoding.bucket != 0) cfg.bucket = encoding.bucket;
    if (encoding.base != 0 || encoding.bucket != 0) {
        cfg.num_low = static_cast<int>((cfg.base + cfg.bucket - 1) / cfg.bucket);
        cfg.vocab_size = cfg.num_low + cfg.k + 3;
    }
    return cfg;
}

std::string AttackConfig::to_text() const {
    std::ostringstream out;
    std::string section;
    for (const auto& key : known_keys()) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << '=' << get(key) << '\n';
    }
    return out.str();
}

}  // namespace picante
