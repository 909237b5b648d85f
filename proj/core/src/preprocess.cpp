#include "picante/preprocess.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace fs = std::filesystem;

namespace picante {

SubsampleMatrix subsample(const LweInstanceSet& instance, Rng& rng) {
    const int n = instance.params.n;
    const int m = static_cast<int>(instance.samples.size());
    if (m < n) throw std::invalid_argument("subsample: need at least n samples");

    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < n; ++i) {
        const int j = i + static_cast<int>(uniform_u64(rng, m - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());

    SubsampleMatrix sub;
    sub.indices = idx;
    sub.a_matrix = IntMat(n, n);
    sub.b.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto& s = instance.samples[idx[i]];
        for (int j = 0; j < n; ++j) sub.a_matrix.at(i, j) = static_cast<i64>(s.a[j]);
        sub.b[i] = s.b;
    }
    return sub;
}

ReducedBatch extract_reduced_pairs(const IntMat& reduced_embedding, int omega,
                                   const std::vector<u64>& b, u64 q) {
    const int n = static_cast<int>(b.size());
    if (reduced_embedding.cols != 2 * n || reduced_embedding.rows != 2 * n)
        throw std::invalid_argument("extract_reduced_pairs: embedding must be 2n x 2n");

    ReducedBatch batch;
    batch.transform = IntMat(2 * n, n);
    for (int i = 0; i < 2 * n; ++i) {
        ReducedPair pair;
        pair.a.resize(n);
        __int128 rb = 0;
        bool all_zero = true;
        for (int j = 0; j < n; ++j) {
            const i64 left = reduced_embedding.at(i, j);
            if (left % omega != 0)
                throw std::runtime_error(
                    "extract_reduced_pairs: left block not divisible by omega (arithmetic bug)");
            const i64 r = left / omega;
            batch.transform.at(i, j) = r;
            rb += static_cast<__int128>(r) * static_cast<i64>(b[j]);

            const i64 aj = center_rep_signed(reduced_embedding.at(i, n + j), q);
            pair.a[j] = aj;
            if (aj != 0) all_zero = false;
        }
        if (all_zero) {
            batch.zero_rows_dropped += 1;
            continue;
        }
        const i64 qi = static_cast<i64>(q);
        i64 rb_mod = static_cast<i64>(rb % qi);
        pair.b = center_rep_signed(rb_mod, q);
        batch.pairs.push_back(std::move(pair));
    }
    return batch;
}

namespace {

struct PairHash {
    std::size_t operator()(const std::vector<i64>& v) const {
        u64 h = 0xcbf29ce484222325ULL;
        for (i64 x : v) {
            h ^= static_cast<u64>(x);
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

DatasetStats dataset_stats(const ReducedDataset& dataset) {
    if (dataset.pairs.empty()) throw std::invalid_argument("dataset_stats: empty dataset");
    const double q = static_cast<double>(dataset.params.q);
    const int n = dataset.params.n;

    double sum = 0.0, sumsq = 0.0, norm_total = 0.0;
    std::size_t count = 0;
    std::unordered_set<std::vector<i64>, PairHash> seen;
    seen.reserve(dataset.pairs.size() * 2);
    for (const auto& p : dataset.pairs) {
        double rowsq = 0.0;
        for (i64 v : p.a) {
            const double x = static_cast<double>(v);
            sum += x;
            sumsq += x * x;
            rowsq += x * x;
        }
        count += p.a.size();
        norm_total += std::sqrt(rowsq);
        seen.insert(p.a);
    }
    const double mean = sum / static_cast<double>(count);
    const double var = sumsq / static_cast<double>(count) - mean * mean;

    DatasetStats st;
    st.std_ratio = std::sqrt(std::max(var, 0.0)) / (q / std::sqrt(12.0));
    st.norm_ratio = (norm_total / static_cast<double>(dataset.pairs.size())) /
                    (q * std::sqrt(static_cast<double>(n) / 12.0));
    st.duplicate_count = dataset.pairs.size() - seen.size();
    st.zero_row_fraction =
        dataset.rows_before_drop > 0
            ? 1.0 - static_cast<double>(dataset.pairs.size()) /
                        static_cast<double>(dataset.rows_before_drop)
            : 0.0;
    return st;
}

ReducedBatch reduce_one_matrix(const LweInstanceSet& instance, const ReductionConfig& config,
                               u64 campaign_seed, int matrix_index,
                               const std::function<SubsampleMatrix(int)>& matrix_source) {
    // Stream 1+index: stream 0 stays reserved for sample generation.
    Rng rng = make_rng(campaign_seed, static_cast<u64>(matrix_index) + 1);
    SubsampleMatrix sub =
        matrix_source ? matrix_source(matrix_index) : subsample(instance, rng);
    IntMat basis = build_embedding(sub.a_matrix, config.omega, instance.params.q);
    bkz_reduce(basis, config);
    ReducedBatch batch = extract_reduced_pairs(basis, config.omega, sub.b, instance.params.q);
    batch.source_indices = sub.indices;
    return batch;
}

// --- shard I/O ---------------------------------------------------------------

namespace {

constexpr char kShardMagic[4] = {'P', 'I', 'C', 'R'};
constexpr std::uint32_t kShardVersion = 1;

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

std::string shard_path(const std::string& dir, int matrix_index) {
    char name[32];
    std::snprintf(name, sizeof(name), "shard_%06d.picr", matrix_index);
    return (fs::path(dir) / name).string();
}

void write_shard(const Shard& shard, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out.write(kShardMagic, 4);
        put(out, kShardVersion);
        put(out, static_cast<std::uint32_t>(shard.n));
        put(out, shard.q);
        put(out, shard.matrix_index);
        put(out, static_cast<std::uint32_t>(shard.pairs.size()));
        for (const auto& p : shard.pairs) {
            for (i64 v : p.a) put(out, v);
            put(out, p.b);
        }
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

Shard read_shard(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kShardMagic, 4) != 0)
        throw std::runtime_error("bad shard magic: " + path);
    if (get<std::uint32_t>(in) != kShardVersion)
        throw std::runtime_error("unsupported shard version: " + path);
    Shard shard;
    shard.n = static_cast<int>(get<std::uint32_t>(in));
    shard.q = get<u64>(in);
    shard.matrix_index = get<u64>(in);
    const auto count = get<std::uint32_t>(in);
    if (!in || shard.n <= 0 || count > static_cast<std::uint32_t>(2 * shard.n))
        throw std::runtime_error("bad shard header: " + path);
    shard.pairs.resize(count);
    for (auto& p : shard.pairs) {
        p.a.resize(shard.n);
        for (auto& v : p.a) v = get<i64>(in);
        p.b = get<i64>(in);
    }
    if (!in) throw std::runtime_error("truncated shard: " + path);
    in.peek();
    if (!in.eof()) throw std::runtime_error("trailing bytes in shard: " + path);
    return shard;
}

void dump_shard_text(const Shard& shard, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << shard.n << ' ' << shard.q << ' ' << shard.matrix_index << ' ' << shard.pairs.size()
        << '\n';
    for (const auto& p : shard.pairs) {
        for (i64 v : p.a) out << v << ' ';
        out << p.b << '\n';
    }
}

// --- campaign ----------------------------------------------------------------

ReducedDataset preprocess_campaign(const LweInstanceSet& instance, const ReductionConfig& config,
                                   const CampaignOptions& opts) {
    config.validate();
    const int n = instance.params.n;
    if (opts.target_pairs < 2 * n)
        throw std::invalid_argument("preprocess_campaign: target_pairs must be >= 2n");
    const int num_matrices = static_cast<int>((opts.target_pairs + 2 * n - 1) / (2 * n));
    const int workers = std::max(opts.workers, 1);

    fs::create_directories(opts.shard_dir);

    // Shards already on disk are trusted if well-formed and matching;
    // anything corrupt is quarantined and recomputed.
    auto shard_ok = [&](int index) {
        const std::string path = shard_path(opts.shard_dir, index);
        if (!fs::exists(path)) return false;
        try {
            const Shard s = read_shard(path);
            if (s.n == n && s.q == instance.params.q &&
                s.matrix_index == static_cast<u64>(index))
                return true;
        } catch (const std::exception&) {
        }
        fs::rename(path, path + ".bad");
        return false;
    };

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto work = [&] {
        for (;;) {
            const int index = next.fetch_add(1);
            if (index >= num_matrices || failed.load()) return;
            try {
                if (shard_ok(index)) continue;
                ReducedBatch batch = reduce_one_matrix(instance, config, opts.seed, index,
                                                       opts.matrix_source);
                Shard shard;
                shard.n = n;
                shard.q = instance.params.q;
                shard.matrix_index = static_cast<u64>(index);
                shard.pairs = std::move(batch.pairs);
                write_shard(shard, shard_path(opts.shard_dir, index));
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                failed.store(true);
                if (error_message.empty()) error_message = e.what();
                return;
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw std::runtime_error("preprocess_campaign: " + error_message);

    ReducedDataset dataset;
    dataset.params = instance.params;
    dataset.seed = opts.seed;
    dataset.config = config;
    dataset.matrix_count = num_matrices;
    dataset.rows_before_drop = static_cast<std::size_t>(num_matrices) * 2 * n;
    dataset.pairs.reserve(dataset.rows_before_drop);
    for (int index = 0; index < num_matrices; ++index) {
        Shard s = read_shard(shard_path(opts.shard_dir, index));
        for (auto& p : s.pairs) dataset.pairs.push_back(std::move(p));
    }
    dataset.stats = dataset_stats(dataset);
    return dataset;
}

}  // namespace picante
