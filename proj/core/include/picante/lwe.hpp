#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "picante/rng.hpp"

namespace picante {

using u64 = std::uint64_t;
using i64 = std::int64_t;

struct LweParams {
    int n = 0;           // lattice dimension
    u64 q = 0;           // odd modulus >= 3
    int h = 0;           // secret Hamming weight, 0 = unknown at attack time
    double sigma = 3.0;  // error standard deviation
    int m = 0;           // number of original samples, 0 = default 4n

    int num_samples() const { return m > 0 ? m : 4 * n; }
    void validate() const;           // throws std::invalid_argument
    void validate_with_h() const;    // additionally requires 1 <= h <= n
};

struct SecretVector {
    std::vector<std::uint8_t> bits;  // 0/1, length n

    int popcount() const;
    bool operator==(const SecretVector&) const = default;
};

struct LweSample {
    std::vector<u64> a;  // residues in [0, q)
    u64 b = 0;
};

struct LweInstanceSet {
    LweParams params;
    std::vector<LweSample> samples;      // length m
    std::optional<SecretVector> secret;  // experiment mode only
    u64 seed = 0;
};

struct ResidualStats {
    double std_emp = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_residuals = 0;
    double confidence_alpha = 0.0;
};

// Tri-state outcome of the statistical secret check. Indeterminate means
// the correct/wrong intervals overlap (sample set too small to decide).
enum class Verdict { Correct, Wrong, Indeterminate };

const char* to_string(Verdict v);

// Canonical centered representative of x mod q, in (-q/2, q/2].
// Bijective on [0, q) for odd q. Throws for even q or q < 3.
i64 center_rep(u64 x, u64 q);

// Centered representative of a signed value.
i64 center_rep_signed(i64 x, u64 q);

// x mod q mapped into [0, q) for signed x.
u64 to_canonical(i64 x, u64 q);

// Binary secret with exactly h ones, positions uniform without replacement.
SecretVector sample_secret(const LweParams& params, Rng& rng);

// Discrete Gaussian realized as round(N(0, sigma)).
i64 sample_error(double sigma, Rng& rng);

// m samples with a uniform over [0,q)^n and b = a.s + e mod q.
// When errors_out is non-null the generated error of each sample is
// recorded there (exact bookkeeping for experiment-mode checks).
LweInstanceSet gen_samples(const LweParams& params, const SecretVector& secret, Rng& rng,
                           std::vector<i64>* errors_out = nullptr);

// Empirical std of centered residuals b - a.guess mod q, with a
// chi-square confidence interval (normal approximation N(m-1, 2m-2)).
ResidualStats residual_std(const std::vector<LweSample>& samples, const SecretVector& guess,
                           u64 q, double confidence_alpha);

// Interval multipliers [lo, hi] such that, at confidence alpha, an
// empirical std of m draws from a distribution with true std sigma
// falls in [sigma*lo, sigma*hi]. hi is +inf when m is too small.
struct IntervalMultipliers {
    double lo = 0.0;
    double hi = 0.0;
};
IntervalMultipliers std_interval_multipliers(int m, double confidence_alpha);

// Quantile of the standard normal distribution (Acklam rational approximation).
double normal_quantile(double p);

// Accepts the guess when the residual std sits in the interval around
// sigma and outside the interval around q/sqrt(12). Uses only the
// original sample set; never reduced data.
Verdict verify_guess(const LweInstanceSet& instance, const SecretVector& guess,
                     double confidence_alpha = 1e-5);

// --- instance file format -------------------------------------------------
// Text, line oriented. Header "n q h sigma m seed", then one sample per
// line as n+1 base-10 integers (a coordinates then b). The secret lives
// in a separate sidecar file (n integers 0/1) so datasets ship without it.

void write_instance(const LweInstanceSet& instance, const std::string& path);
LweInstanceSet read_instance(const std::string& path);

void write_secret(const SecretVector& secret, const std::string& path);
SecretVector read_secret(const std::string& path);

}  // namespace picante
