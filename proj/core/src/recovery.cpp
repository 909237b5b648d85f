#include "picante/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace picante {

const char* to_string(CombineMode mode) {
    switch (mode) {
        case CombineMode::HighestRank: return "highest_rank";
        case CombineMode::SumRank: return "sum_rank";
        case CombineMode::MaxNormalized: return "max_normalized";
        case CombineMode::SumNormalized: return "sum_normalized";
    }
    return "?";
}

namespace {

i64 centered_decode(const ModelOracle& model, const TokenSeq& input, const EncodingConfig& cfg,
                    u64 q) {
    return center_rep(decode_output(model.predict(input), cfg), q);
}

TokenSeq encode_canonical(const std::vector<u64>& a, const EncodingConfig& cfg) {
    return encode_vector(a, cfg);
}

}  // namespace

BitScores direct_recover(const ModelOracle& model, const LweParams& params,
                         const EncodingConfig& encoding, const RecoveryOptions& opts) {
    const int n = params.n;
    const u64 lo = (params.q + 3) / 4;  // ceil(q/4)
    const u64 hi = (params.q + 1) / 2;  // ceil(q/2)
    const int count = opts.direct_k_count;

    BitScores out;
    out.method = "direct";
    out.scores.assign(n, 0.0);
    std::vector<u64> probe(n, 0);
    for (int j = 0; j < count; ++j) {
        const u64 k_val = lo + static_cast<u64>(j) * (hi - lo) / static_cast<u64>(count);
        for (int i = 0; i < n; ++i) {
            probe[i] = k_val;
            const i64 decoded = centered_decode(model, encode_canonical(probe, encoding),
                                                encoding, params.q);
            out.scores[i] += std::abs(static_cast<double>(decoded));
            probe[i] = 0;
        }
    }
    return out;
}

BitScores distinguisher_recover(const ModelOracle& model, const LweParams& params, Rng& rng,
                                const EncodingConfig& encoding, const RecoveryOptions& opts) {
    const int n = params.n;
    BitScores out;
    out.method = "distinguisher";
    out.scores.assign(n, 0.0);

    std::vector<u64> a(n);
    for (int draw = 0; draw < opts.distinguisher_draws; ++draw) {
        for (auto& v : a) v = uniform_u64(rng, params.q);
        const u64 k_val = 1 + uniform_u64(rng, params.q - 1);  // fresh K per draw
        const i64 base = centered_decode(model, encode_canonical(a, encoding), encoding, params.q);
        for (int i = 0; i < n; ++i) {
            const u64 saved = a[i];
            a[i] = (a[i] + k_val) % params.q;
            const i64 shifted =
                centered_decode(model, encode_canonical(a, encoding), encoding, params.q);
            a[i] = saved;
            out.scores[i] += std::abs(static_cast<double>(
                center_rep_signed(shifted - base, params.q)));
        }
    }
    for (auto& s : out.scores) s /= std::max(opts.distinguisher_draws, 1);
    return out;
}

BitScores cross_attention_recover(const ModelOracle& model,
                                  const std::vector<ReducedPair>& dataset,
                                  const LweParams& params, const EncodingConfig& encoding,
                                  const RecoveryOptions& opts) {
    if (dataset.empty()) throw std::invalid_argument("cross_attention_recover: empty dataset");
    const int n = params.n;
    const std::size_t count =
        std::min<std::size_t>(dataset.size(), static_cast<std::size_t>(opts.attention_samples));

    std::vector<double> mass(2 * n, 0.0);
    for (std::size_t s = 0; s < count; ++s) {
        const auto pair = encode_sample(dataset[s].a, dataset[s].b, encoding);
        const auto scores = model.cross_attention_scores(pair.input);
        if (scores.size() != mass.size())
            throw std::runtime_error("cross_attention_recover: score length mismatch");
        for (std::size_t j = 0; j < mass.size(); ++j) mass[j] += scores[j];
    }

    BitScores out;
    out.method = "cross_attention";
    out.scores.resize(n);
    for (int i = 0; i < n; ++i) out.scores[i] = mass[2 * i];  // high-digit positions
    return out;
}

std::vector<int> descending_ranks(const std::vector<double>& scores) {
    const int n = static_cast<int>(scores.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<int> rank(n);
    for (int pos = 0; pos < n; ++pos) rank[idx[pos]] = pos + 1;
    return rank;
}

namespace {

std::vector<double> rank_scores(const std::vector<double>& scores) {
    const auto ranks = descending_ranks(scores);
    const int n = static_cast<int>(scores.size());
    std::vector<double> rs(n);
    for (int i = 0; i < n; ++i) rs[i] = static_cast<double>(n - (ranks[i] - 1));
    return rs;
}

std::vector<double> minmax_normalize(const std::vector<double>& scores) {
    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size(), 0.0);
    if (*mx > *mn)
        for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - *mn) / (*mx - *mn);
    return out;  // all-constant input maps to all zeros
}

}  // namespace

BitScores combine(const std::vector<BitScores>& score_sets, CombineMode mode) {
    if (score_sets.size() < 2) throw std::invalid_argument("combine: need >= 2 score sets");
    const std::size_t n = score_sets.front().scores.size();
    for (const auto& s : score_sets)
        if (s.scores.size() != n) throw std::invalid_argument("combine: length mismatch");

    const bool use_rank = mode == CombineMode::HighestRank || mode == CombineMode::SumRank;
    const bool use_max = mode == CombineMode::HighestRank || mode == CombineMode::MaxNormalized;

    BitScores out;
    out.scores.assign(n, use_max ? -1e300 : 0.0);
    std::string names;
    for (const auto& s : score_sets) {
        const auto transformed = use_rank ? rank_scores(s.scores) : minmax_normalize(s.scores);
        for (std::size_t i = 0; i < n; ++i) {
            if (use_max)
                out.scores[i] = std::max(out.scores[i], transformed[i]);
            else
                out.scores[i] += transformed[i];
        }
        names += (names.empty() ? "" : "+") + s.method;
    }
    out.method = std::string(to_string(mode)) + "(" + names + ")";
    return out;
}

SecretGuess top_h_guess(const BitScores& scores, int h) {
    const int n = static_cast<int>(scores.scores.size());
    if (h < 1 || h > n) throw std::invalid_argument("top_h_guess: h out of range");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
        return a < b;
    });
    SecretGuess guess;
    guess.bits.assign(n, 0);
    for (int i = 0; i < h; ++i) guess.bits[idx[i]] = 1;
    guess.h_used = h;
    guess.provenance = scores.method;
    return guess;
}

RecoveryReport recover_all(const ModelOracle& model, const std::vector<ReducedPair>& dataset,
                           const LweInstanceSet& instance, const EncodingConfig& encoding,
                           const std::vector<int>& h_range, const RecoveryOptions& opts,
                           const SecretVector* true_secret_for_reporting, int epoch) {
    RecoveryReport report;
    report.epoch = epoch;

    Rng rng = make_rng(opts.seed, 0x7265636f76ULL + static_cast<u64>(epoch));
    report.method_scores.push_back(direct_recover(model, instance.params, encoding, opts));
    report.method_scores.push_back(
        distinguisher_recover(model, instance.params, rng, encoding, opts));
    if (!dataset.empty())
        report.method_scores.push_back(
            cross_attention_recover(model, dataset, instance.params, encoding, opts));

    if (true_secret_for_reporting != nullptr) {
        for (const auto& ms : report.method_scores) {
            const auto ranks = descending_ranks(ms.scores);
            for (std::size_t bit = 0; bit < true_secret_for_reporting->bits.size(); ++bit)
                if (true_secret_for_reporting->bits[bit])
                    report.true_bit_ranks.push_back(
                        {ms.method, static_cast<int>(bit), ranks[bit]});
        }
    }

    // All candidate score vectors per h: the base methods first (they win
    // credit over combinations), then every subset of size >= 2 per mode.
    const int base_count = static_cast<int>(report.method_scores.size());
    std::vector<BitScores> candidates = report.method_scores;
    for (int mask = 1; mask < (1 << base_count); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) < 2) continue;
        std::vector<BitScores> subset;
        for (int i = 0; i < base_count; ++i)
            if (mask & (1 << i)) subset.push_back(report.method_scores[i]);
        for (CombineMode mode : {CombineMode::HighestRank, CombineMode::SumRank,
                                 CombineMode::MaxNormalized, CombineMode::SumNormalized})
            candidates.push_back(combine(subset, mode));
    }

    // Base methods come first in the candidate list, so a combination can
    // only win an h where every individual method failed verification.
    for (int h : h_range) {
        if (h < 1 || h > instance.params.n) continue;
        for (const auto& candidate : candidates) {
            SecretGuess guess = top_h_guess(candidate, h);
            const auto stats = residual_std(instance.samples, guess.as_secret(),
                                            instance.params.q, opts.confidence_alpha);
            const Verdict v = verify_guess(instance, guess.as_secret(), opts.confidence_alpha);
            report.attempts.push_back({std::move(guess), v, stats.std_emp});
            if (v != Verdict::Correct) continue;
            report.success = true;
            report.winning_method = report.attempts.back().guess.provenance;
            report.winning_h = h;
            return report;
        }
    }
    return report;
}

void write_report(const RecoveryReport& report, const std::string& text_path,
                  const std::string& csv_path) {
    {
        std::ofstream out(text_path);
        if (!out) throw std::runtime_error("cannot open " + text_path + " for writing");
        out << "epoch=" << report.epoch << '\n';
        out << "success=" << (report.success ? "true" : "false") << '\n';
        if (report.success) {
            out << "winning_method=" << report.winning_method << '\n';
            out << "winning_h=" << report.winning_h << '\n';
        }
        out << "score_aggregation=sum_abs_centered_decode\n";
        out << "attention_query=shared_layer_iter0_position0\n";
        out << "rank_convention=descending_larger_is_better\n";
        for (const auto& att : report.attempts)
            out << "attempt method=" << att.guess.provenance << " h=" << att.guess.h_used
                << " verdict=" << to_string(att.verdict) << " std_emp=" << att.std_emp << '\n';
        for (const auto& tr : report.true_bit_ranks)
            out << "true_bit_rank method=" << tr.method << " bit=" << tr.bit
                << " rank=" << tr.rank << '\n';
    }
    {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot open " + csv_path + " for writing");
        out << "bit,method,score,rank\n";
        for (const auto& ms : report.method_scores) {
            const auto ranks = descending_ranks(ms.scores);
            for (std::size_t bit = 0; bit < ms.scores.size(); ++bit)
                out << bit << ',' << ms.method << ',' << ms.scores[bit] << ',' << ranks[bit]
                    << '\n';
        }
    }
}

}  // namespace picante
