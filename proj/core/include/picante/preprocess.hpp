#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "picante/lattice.hpp"
#include "picante/lwe.hpp"

namespace picante {

struct SubsampleMatrix {
    std::vector<int> indices;  // n distinct indices into the original samples, ascending
    IntMat a_matrix;           // n x n canonical residues, row i = sample a at indices[i]
    std::vector<u64> b;        // length n
};

struct ReducedPair {
    std::vector<i64> a;  // centered coordinates
    i64 b = 0;
};

struct ReducedBatch {
    std::vector<int> source_indices;
    IntMat transform;  // R, 2n x n, exact integers (left block / omega)
    std::vector<ReducedPair> pairs;
    int zero_rows_dropped = 0;
};

struct DatasetStats {
    double std_ratio = 0.0;   // std(entries) / (q/sqrt(12))
    double norm_ratio = 0.0;  // mean row norm / (q*sqrt(n/12))
    std::size_t duplicate_count = 0;
    double zero_row_fraction = 0.0;
};

struct ReducedDataset {
    LweParams params;
    std::vector<ReducedPair> pairs;
    DatasetStats stats;
    u64 seed = 0;
    ReductionConfig config;
    int matrix_count = 0;
    std::size_t rows_before_drop = 0;  // 2n * matrix_count
};

// n distinct rows chosen uniformly from the instance, copied verbatim.
SubsampleMatrix subsample(const LweInstanceSet& instance, Rng& rng);

// Recovers R from the left block (must be divisible by omega), centers
// the right block mod q and applies R to b. All-zero a' rows dropped.
ReducedBatch extract_reduced_pairs(const IntMat& reduced_embedding, int omega,
                                   const std::vector<u64>& b, u64 q);

DatasetStats dataset_stats(const ReducedDataset& dataset);

struct CampaignOptions {
    std::string shard_dir;
    long target_pairs = 0;
    int workers = 1;
    u64 seed = 0;
    // Experiment hook: when set, matrix i is built from rows_for_matrix(i)
    // instead of subsampling the instance (independent-draw comparison).
    std::function<SubsampleMatrix(int)> matrix_source;
};

// Reduces ceil(target_pairs / 2n) matrices, one shard file per matrix,
// resumable by matrix index and deterministic given (seed, index)
// independent of worker count. Returns the assembled dataset.
ReducedDataset preprocess_campaign(const LweInstanceSet& instance, const ReductionConfig& config,
                                   const CampaignOptions& opts);

// Reduce a single campaign matrix (exposed for tests and resume checks).
ReducedBatch reduce_one_matrix(const LweInstanceSet& instance, const ReductionConfig& config,
                               u64 campaign_seed, int matrix_index,
                               const std::function<SubsampleMatrix(int)>& matrix_source = {});

// --- shard files ------------------------------------------------------------
// Binary, little-endian: magic "PICR", version u32, n u32, q u64,
// matrix_index u64, pair count u32, then pairs of n+1 signed 64-bit
// integers (centered a' then b'). Writes are atomic (tmp + rename).

struct Shard {
    u64 q = 0;
    int n = 0;
    u64 matrix_index = 0;
    std::vector<ReducedPair> pairs;
};

std::string shard_path(const std::string& dir, int matrix_index);
void write_shard(const Shard& shard, const std::string& path);
Shard read_shard(const std::string& path);  // throws on malformed content

// Debug text dump mirroring the instance format.
void dump_shard_text(const Shard& shard, const std::string& path);

}  // namespace picante
