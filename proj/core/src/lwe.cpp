#include "picante/lwe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace picante {

void LweParams::validate() const {
    if (n < 1) throw std::invalid_argument("lwe: n must be >= 1");
    if (q < 3 || q % 2 == 0) throw std::invalid_argument("lwe: q must be odd and >= 3");
    if (sigma <= 0.0) throw std::invalid_argument("lwe: sigma must be positive");
    if (h != 0 && (h < 1 || h > n)) throw std::invalid_argument("lwe: h out of range [1, n]");
    if (m != 0 && m < n) throw std::invalid_argument("lwe: m must be >= n");
}

void LweParams::validate_with_h() const {
    validate();
    if (h < 1 || h > n) throw std::invalid_argument("lwe: h out of range [1, n]");
}

int SecretVector::popcount() const {
    return static_cast<int>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Correct: return "true";
        case Verdict::Wrong: return "false";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

i64 center_rep(u64 x, u64 q) {
    if (q < 3 || q % 2 == 0) throw std::invalid_argument("center_rep: q must be odd and >= 3");
    const u64 r = x % q;
    return r > (q - 1) / 2 ? static_cast<i64>(r) - static_cast<i64>(q) : static_cast<i64>(r);
}

u64 to_canonical(i64 x, u64 q) {
    const i64 qi = static_cast<i64>(q);
    i64 r = x % qi;
    if (r < 0) r += qi;
    return static_cast<u64>(r);
}

i64 center_rep_signed(i64 x, u64 q) { return center_rep(to_canonical(x, q), q); }

SecretVector sample_secret(const LweParams& params, Rng& rng) {
    params.validate_with_h();
    // Partial Fisher-Yates over the index range: first h slots are the 1-bits.
    std::vector<int> idx(params.n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < params.h; ++i) {
        const int j = i + static_cast<int>(uniform_u64(rng, params.n - i));
        std::swap(idx[i], idx[j]);
    }
    SecretVector s;
    s.bits.assign(params.n, 0);
    for (int i = 0; i < params.h; ++i) s.bits[idx[i]] = 1;
    return s;
}

i64 sample_error(double sigma, Rng& rng) {
    if (sigma <= 0.0) throw std::invalid_argument("sample_error: sigma must be positive");
    return std::llround(sigma * gaussian(rng));
}

LweInstanceSet gen_samples(const LweParams& params, const SecretVector& secret, Rng& rng,
                           std::vector<i64>* errors_out) {
    params.validate();
    if (static_cast<int>(secret.bits.size()) != params.n)
        throw std::invalid_argument("gen_samples: secret length mismatch");

    const int m = params.num_samples();
    LweInstanceSet set;
    set.params = params;
    set.samples.resize(m);
    if (errors_out) errors_out->clear();

    for (auto& sample : set.samples) {
        sample.a.resize(params.n);
        u64 dot = 0;  // a.s mod q; summing n values < q stays below 2^63 for q < 2^32
        for (int j = 0; j < params.n; ++j) {
            sample.a[j] = uniform_u64(rng, params.q);
            if (secret.bits[j]) dot = (dot + sample.a[j]) % params.q;
        }
        const i64 e = sample_error(params.sigma, rng);
        sample.b = to_canonical(static_cast<i64>(dot) + e, params.q);
        if (errors_out) errors_out->push_back(e);
    }
    return set;
}

double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("normal_quantile: p in (0,1) required");
    // Acklam's rational approximation, |relative error| < 1.15e-9.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double u = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (p <= 1.0 - plow) {
        const double u = p - 0.5;
        const double t = u * u;
        x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
            (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
    } else {
        const double u = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    return x;
}

IntervalMultipliers std_interval_multipliers(int m, double confidence_alpha) {
    if (m < 2) throw std::invalid_argument("std_interval_multipliers: m >= 2 required");
    const double dof = m - 1;
    const double z = normal_quantile(1.0 - confidence_alpha / 2.0);
    // chi-square quantiles from the N(m-1, 2m-2) approximation
    const double chi_hi = dof + z * std::sqrt(2.0 * dof);
    const double chi_lo = dof - z * std::sqrt(2.0 * dof);
    IntervalMultipliers iv;
    iv.lo = std::sqrt(dof / chi_hi);
    iv.hi = chi_lo > 0.0 ? std::sqrt(dof / chi_lo) : std::numeric_limits<double>::infinity();
    return iv;
}

ResidualStats residual_std(const std::vector<LweSample>& samples, const SecretVector& guess,
                           u64 q, double confidence_alpha) {
    const int m = static_cast<int>(samples.size());
    if (m < 2) throw std::invalid_argument("residual_std: at least 2 samples required");

    std::vector<double> r(m);
    for (int i = 0; i < m; ++i) {
        const auto& s = samples[i];
        if (s.a.size() != guess.bits.size())
            throw std::invalid_argument("residual_std: guess length mismatch");
        u64 dot = 0;
        for (std::size_t j = 0; j < s.a.size(); ++j)
            if (guess.bits[j]) dot = (dot + s.a[j]) % q;
        r[i] = static_cast<double>(center_rep_signed(static_cast<i64>(s.b) - static_cast<i64>(dot), q));
    }

    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);

    ResidualStats st;
    st.std_emp = std::sqrt(ss / (m - 1));
    st.n_residuals = m;
    st.confidence_alpha = confidence_alpha;
    const auto iv = std_interval_multipliers(m, confidence_alpha);
    st.ci_low = st.std_emp * iv.lo;
    st.ci_high = st.std_emp * iv.hi;
    return st;
}

Verdict verify_guess(const LweInstanceSet& instance, const SecretVector& guess,
                     double confidence_alpha) {
    const auto& p = instance.params;
    const auto st = residual_std(instance.samples, guess, p.q, confidence_alpha);
    const auto iv = std_interval_multipliers(st.n_residuals, confidence_alpha);

    const double sigma_wrong = static_cast<double>(p.q) / std::sqrt(12.0);
    const double right_lo = p.sigma * iv.lo, right_hi = p.sigma * iv.hi;
    const double wrong_lo = sigma_wrong * iv.lo;

    if (right_hi >= wrong_lo) return Verdict::Indeterminate;  // intervals overlap
    if (st.std_emp >= right_lo && st.std_emp <= right_hi) return Verdict::Correct;
    return Verdict::Wrong;
}

// --- instance file I/O ------------------------------------------------------

void write_instance(const LweInstanceSet& instance, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const auto& p = instance.params;
    out << p.n << ' ' << p.q << ' ' << p.h << ' ' << p.sigma << ' '
        << static_cast<int>(instance.samples.size()) << ' ' << instance.seed << '\n';
    for (const auto& s : instance.samples) {
        for (u64 v : s.a) out << v << ' ';
        out << s.b << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

LweInstanceSet read_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    LweInstanceSet set;
    int m = 0;
    in >> set.params.n >> set.params.q >> set.params.h >> set.params.sigma >> m >> set.seed;
    if (!in || m < 1) throw std::runtime_error("malformed instance header: " + path);
    set.params.m = m;
    set.params.validate();
    set.samples.resize(m);
    for (auto& s : set.samples) {
        s.a.resize(set.params.n);
        for (auto& v : s.a) in >> v;
        in >> s.b;
        if (!in) throw std::runtime_error("malformed instance body: " + path);
        for (u64 v : s.a)
            if (v >= set.params.q) throw std::runtime_error("instance coordinate out of range: " + path);
        if (s.b >= set.params.q) throw std::runtime_error("instance b out of range: " + path);
    }
    return set;
}

void write_secret(const SecretVector& secret, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < secret.bits.size(); ++i)
        out << static_cast<int>(secret.bits[i]) << (i + 1 == secret.bits.size() ? '\n' : ' ');
    if (!out) throw std::runtime_error("write failed: " + path);
}

SecretVector read_secret(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    SecretVector s;
    int bit;
    while (in >> bit) {
        if (bit != 0 && bit != 1) throw std::runtime_error("secret file has non-binary entry: " + path);
        s.bits.push_back(static_cast<std::uint8_t>(bit));
    }
    if (s.bits.empty()) throw std::runtime_error("secret file empty: " + path);
    return s;
}

}  // namespace picante
