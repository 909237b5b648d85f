#pragma once

#include <map>
#include <string>
#include <vector>

#include "picante/lattice.hpp"
#include "picante/lwe.hpp"
#include "picante/model.hpp"
#include "picante/recovery.hpp"

namespace picante {

// Flat key=value configuration with one section per module; every key is
// overridable by a CLI flag of the same dotted name. Unknown keys are
// rejected so experiment records stay diff-able and typo-safe.
struct AttackConfig {
    LweParams lwe{80, 113, 9, 3.0, 0};
    ReductionConfig reduction{};
    struct EncodingOverrides {
        u64 base = 0;    // 0 = derive from (n, q)
        u64 bucket = 0;  // 0 = derive
    } encoding;
    ModelConfig model;
    TrainConfig train;
    RecoveryOptions recovery;
    int h_min = 1;
    int h_max = 12;

    struct Paths {
        std::string instance;
        std::string secret;      // sidecar, defaults to instance + ".secret"
        std::string shard_dir;
        std::string checkpoint_dir;
        std::string report_dir;
    } paths;

    u64 seed = 1;
    int workers = 1;
    int max_epochs = 5;
    long target_pairs = 50000;
    int eval_samples = 10000;  // held-out reduced pairs per epoch

    AttackConfig();

    void apply(const std::string& dotted_key, const std::string& value);
    std::string get(const std::string& dotted_key) const;
    static const std::vector<std::string>& known_keys();

    // Fills unset paths from the data root (PICANTE_DATA_DIR or ./data)
    // and checks the path invariants.
    void finalize();

    EncodingConfig derive_encoding_config() const;

    std::string to_text() const;
};

AttackConfig load_config(const std::string& path);
void parse_config_text(AttackConfig& cfg, const std::string& text);

}  // namespace picante
