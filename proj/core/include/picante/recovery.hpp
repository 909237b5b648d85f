#pragma once

#include <string>
#include <vector>

#include "picante/encoding.hpp"
#include "picante/lwe.hpp"
#include "picante/oracle.hpp"
#include "picante/preprocess.hpp"

namespace picante {

struct BitScores {
    std::string method;
    std::vector<double> scores;  // length n, larger means more likely a 1-bit
};

struct SecretGuess {
    std::vector<std::uint8_t> bits;
    int h_used = 0;
    std::string provenance;

    SecretVector as_secret() const { return SecretVector{bits}; }
};

enum class CombineMode { HighestRank, SumRank, MaxNormalized, SumNormalized };
const char* to_string(CombineMode mode);

struct RecoveryOptions {
    int direct_k_count = 15;       // probes per bit in direct recovery
    int distinguisher_draws = 128; // N_a random base vectors
    int attention_samples = 10000; // reduced pairs fed to cross-attention
    double confidence_alpha = 1e-5;
    u64 seed = 0;
};

// Probes K_j * e_i for 15 evenly spaced K_j in [ceil(q/4), ceil(q/2));
// score_i sums |centered decode| over probes. 15n inferences.
BitScores direct_recover(const ModelOracle& model, const LweParams& params,
                         const EncodingConfig& encoding, const RecoveryOptions& opts = {});

// Compares M(a + K*e_i) against M(a) for N_a random a (one fresh K per
// draw, shared across bits). N_a*(n+1) inferences.
BitScores distinguisher_recover(const ModelOracle& model, const LweParams& params, Rng& rng,
                                const EncodingConfig& encoding, const RecoveryOptions& opts = {});

// Sums cross-attention mass over reduced samples and keeps the
// high-digit position of each coordinate.
BitScores cross_attention_recover(const ModelOracle& model,
                                  const std::vector<ReducedPair>& dataset,
                                  const LweParams& params, const EncodingConfig& encoding,
                                  const RecoveryOptions& opts = {});

// Rank modes replace scores with n minus the 0-based descending position
// (ties to the lower index), then take elementwise max or sum. Normalized
// modes min-max rescale to [0,1] (all-constant maps to zeros) first.
BitScores combine(const std::vector<BitScores>& score_sets, CombineMode mode);

// h largest scores set to 1, ties broken toward the lowest index.
SecretGuess top_h_guess(const BitScores& scores, int h);

struct GuessOutcome {
    SecretGuess guess;
    Verdict verdict = Verdict::Wrong;
    double std_emp = 0.0;
};

struct RecoveryReport {
    int epoch = 0;
    std::vector<BitScores> method_scores;
    std::vector<GuessOutcome> attempts;
    bool success = false;
    std::string winning_method;
    int winning_h = 0;
    // Experiment mode only: descending-rank of each true 1-bit per method.
    struct TrueBitRank {
        std::string method;
        int bit = 0;
        int rank = 0;
    };
    std::vector<TrueBitRank> true_bit_ranks;
};

// Runs the three base methods once, then for each h emits guesses from
// every method and every combination subset of size >= 2 in all four
// modes, verifying each against the original instance. Stops at the
// first verified guess. A combined success is only credited when no
// individual method verified at that h.
RecoveryReport recover_all(const ModelOracle& model, const std::vector<ReducedPair>& dataset,
                           const LweInstanceSet& instance, const EncodingConfig& encoding,
                           const std::vector<int>& h_range, const RecoveryOptions& opts = {},
                           const SecretVector* true_secret_for_reporting = nullptr,
                           int epoch = 0);

// Per-bit descending ranks (1 = best) of a score vector.
std::vector<int> descending_ranks(const std::vector<double>& scores);

// Line-oriented key=value report plus a per-bit score CSV
// (columns: bit, method, score, rank).
void write_report(const RecoveryReport& report, const std::string& text_path,
                  const std::string& csv_path);

}  // namespace picante
