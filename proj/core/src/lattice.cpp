#include "picante/lattice.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace picante {

void ReductionConfig::validate() const {
    if (omega < 1) throw std::invalid_argument("reduction: omega must be >= 1");
    if (beta < 2) throw std::invalid_argument("reduction: beta must be >= 2");
    if (delta <= 0.25 || delta > 0.9999)
        throw std::invalid_argument("reduction: delta must lie in (0.25, 0.9999]");
    if (max_tours < 1) throw std::invalid_argument("reduction: max_tours must be >= 1");
}

IntMat build_embedding(const IntMat& a_matrix, int omega, u64 q) {
    if (a_matrix.rows != a_matrix.cols) throw std::invalid_argument("build_embedding: A must be square");
    if (omega < 1) throw std::invalid_argument("build_embedding: omega must be >= 1");
    const int n = a_matrix.rows;
    IntMat b(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        b.at(i, i) = omega;
        for (int j = 0; j < n; ++j) b.at(i, n + j) = a_matrix.at(i, j);
        b.at(n + i, n + i) = static_cast<i64>(q);
    }
    return b;
}

double mean_row_norm(const IntMat& m) {
    double total = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) {
            const double v = static_cast<double>(m.at(i, j));
            s += v * v;
        }
        total += std::sqrt(s);
    }
    return m.rows > 0 ? total / m.rows : 0.0;
}

namespace {

struct PrecisionFailure : std::runtime_error {
    explicit PrecisionFailure(const char* where = "gram-schmidt precision failure")
        : std::runtime_error(where) {}
};

using Clock = std::chrono::steady_clock;

// Integer rows stay comfortably inside this for every supported input;
// crossing it means the floating-point bookkeeping sent the reduction off
// the rails, so escalate rather than risk silent overflow.
constexpr i64 kEntryLimit = i64{1} << 42;

// LLL/BKZ engine: exact integer rows, FT-precision Gram-Schmidt.
// Orthogonalization is recomputed fresh for a row at every visit
// (modified Gram-Schmidt against stored b* vectors), so floating-point
// error never accumulates across row operations.
template <typename FT>
class Reducer {
public:
    Reducer(IntMat& basis, double delta) : b_(basis), delta_(static_cast<FT>(delta)) {
        d_ = b_.rows;
        cols_ = b_.cols;
        mu_.assign(d_, std::vector<FT>(d_, FT(0)));
        bstar_.assign(static_cast<std::size_t>(d_) * cols_, FT(0));
        bnorm_.assign(d_, FT(0));
        rnorm_.assign(d_, FT(0));
        for (int i = 0; i < d_; ++i) gs_row(i);
    }

    void lll(int start = 0, bool allow_removal = false) {
        int k = std::max(start, 1);
        long iters = 0;
        const long iter_cap = 10000L * d_ * d_ + 1000000L;
        while (k < d_) {
            if (++iters > iter_cap) throw PrecisionFailure("lll iteration cap");
            size_reduce(k);
            if (allow_removal && row_is_zero(k)) {
                remove_row(k);
                k = std::max(std::min(k, d_ - 1), 1);
                continue;
            }
            const FT lhs = bnorm_[k];
            const FT rhs = (delta_ - mu_[k][k - 1] * mu_[k][k - 1]) * bnorm_[k - 1];
            if (lhs >= rhs) {
                ++k;
            } else {
                std::swap_ranges(b_.row(k - 1), b_.row(k - 1) + cols_, b_.row(k));
                gs_row(k - 1);  // row k is refreshed when the loop revisits it
                k = std::max(k - 1, 1);
            }
        }
    }

    ReduceOutcome bkz(const ReductionConfig& cfg) {
        lll(0);
        ReduceOutcome out;
        const auto t0 = Clock::now();
        const auto deadline = cfg.timeout_seconds > 0
                                  ? t0 + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(cfg.timeout_seconds))
                                  : Clock::time_point::max();
        std::vector<i64> coeffs;
        const int expected_rows = d_;
        for (int tour = 0; tour < cfg.max_tours && !out.timed_out; ++tour) {
            bool changed = false;
            for (int kappa = 0; kappa + 1 < d_; ++kappa) {
                if (Clock::now() >= deadline) {
                    out.timed_out = true;
                    break;
                }
                const int bs = std::min(cfg.beta, d_ - kappa);
                const FT bound = bnorm_[kappa] * FT(0.9999);
                if (!enumerate_block(kappa, bs, bound, coeffs)) continue;
                insert_combination(kappa, coeffs);
                lll(kappa, /*allow_removal=*/true);
                if (d_ != expected_rows) throw PrecisionFailure("dependency did not vanish");
                changed = true;
            }
            out.tours = tour + 1;
            if (!changed) break;
        }
        return out;
    }

private:
    IntMat& b_;
    FT delta_;
    int d_ = 0;
    int cols_ = 0;
    std::vector<std::vector<FT>> mu_;
    std::vector<FT> bstar_;  // d_ x cols_ orthogonalized rows
    std::vector<FT> bnorm_;
    std::vector<FT> rnorm_;  // exact squared norm of the integer row at gs time

    FT* bs_row(int i) { return bstar_.data() + static_cast<std::size_t>(i) * cols_; }

    // A projection this small relative to the row itself means the row is
    // (numerically) dependent on the prefix; treat its b* as zero so
    // later rows never divide by it.
    static FT zero_eps() { return std::numeric_limits<FT>::epsilon() * FT(10000); }

    bool projection_is_zero(int j) const { return bnorm_[j] <= zero_eps() * rnorm_[j]; }

    // Fresh modified Gram-Schmidt of row k against the prefix.
    void gs_row(int k) {
        FT* v = bs_row(k);
        const i64* bk = b_.row(k);
        FT rn = FT(0);
        for (int c = 0; c < cols_; ++c) {
            v[c] = static_cast<FT>(bk[c]);
            rn += v[c] * v[c];
        }
        rnorm_[k] = rn;
        for (int j = 0; j < k; ++j) {
            if (projection_is_zero(j)) {
                mu_[k][j] = FT(0);
                continue;
            }
            const FT* bj = bs_row(j);
            FT dot = FT(0);
            for (int c = 0; c < cols_; ++c) dot += v[c] * bj[c];
            const FT m = dot / bnorm_[j];
            mu_[k][j] = m;
            if (m != FT(0))
                for (int c = 0; c < cols_; ++c) v[c] -= m * bj[c];
        }
        FT norm = FT(0);
        for (int c = 0; c < cols_; ++c) norm += v[c] * v[c];
        bnorm_[k] = norm;
    }

    bool row_is_zero(int k) const {
        const i64* r = b_.row(k);
        for (int c = 0; c < cols_; ++c)
            if (r[c] != 0) return false;
        return true;
    }

    // Rows above k keep stale orthogonalization after structural edits;
    // the lll walk refreshes every row on visit before it is read.
    void remove_row(int k) {
        b_.data.erase(b_.data.begin() + static_cast<std::size_t>(k) * cols_,
                      b_.data.begin() + static_cast<std::size_t>(k + 1) * cols_);
        b_.rows -= 1;
        d_ -= 1;
        mu_.pop_back();
        bnorm_.pop_back();
        rnorm_.pop_back();
        bstar_.resize(static_cast<std::size_t>(d_) * cols_);
        if (k < d_) gs_row(k);
    }

    // b_k -= c * b_j on exact integers, with the matching mu recurrence.
    void row_addmul(int k, int j, i64 c) {
        i64* rk = b_.row(k);
        const i64* rj = b_.row(j);
        for (int t = 0; t < cols_; ++t) {
            rk[t] -= c * rj[t];
            if (rk[t] > kEntryLimit || rk[t] < -kEntryLimit) throw PrecisionFailure("row entry overflow");
        }
        const FT fc = static_cast<FT>(c);
        for (int t = 0; t < j; ++t) mu_[k][t] -= fc * mu_[j][t];
        mu_[k][j] -= fc;
    }

    void size_reduce(int k) {
        // eta slightly above 1/2 keeps |mu| = 0.5 boundary cases from
        // oscillating between +-1 reductions.
        const FT eta = FT(0.501);
        for (int attempt = 0; attempt < 16; ++attempt) {
            gs_row(k);
            bool any = false;
            for (int j = k - 1; j >= 0; --j) {
                const FT m = mu_[k][j];
                if (m > eta || m < -eta) {
                    const i64 c = static_cast<i64>(std::llround(static_cast<double>(m)));
                    if (c != 0) {
                        row_addmul(k, j, c);
                        any = true;
                    }
                }
            }
            if (!any) return;
        }
        throw PrecisionFailure("size reduction did not settle");
    }

    // Unpruned Schnorr-Euchner enumeration over the projected block
    // [kappa, kappa+bs). Finds coefficients of a lattice vector whose
    // projection is strictly shorter than bound; returns false if none.
    bool enumerate_block(int kappa, int bs, FT bound, std::vector<i64>& out) const {
        std::vector<FT> pd(bs, FT(0));  // accumulated dist of levels above i
        std::vector<FT> center(bs, FT(0));
        std::vector<i64> x(bs, 0), x0(bs, 0);
        std::vector<long> cnt(bs, 0);
        std::vector<int> dir(bs, 1);
        FT best = bound;
        bool found = false;
        long nodes = 0;
        constexpr long node_cap = 200000000;

        int i = bs - 1;
        auto step = [&](int lv) {
            if (lv == bs - 1) {
                ++x[lv];  // top level: positive half only (lattice symmetry)
                return;
            }
            ++cnt[lv];
            const i64 off = static_cast<i64>((cnt[lv] + 1) / 2);
            x[lv] = x0[lv] + (cnt[lv] % 2 == 1 ? off * dir[lv] : -off * dir[lv]);
        };

        for (;;) {
            if (++nodes > node_cap) throw PrecisionFailure("enumeration node cap");
            const FT diff = static_cast<FT>(x[i]) - center[i];
            const FT dist = pd[i] + diff * diff * bnorm_[kappa + i];
            if (dist < best) {
                if (i == 0) {
                    bool nonzero = false;
                    for (int t = 0; t < bs; ++t)
                        if (x[t] != 0) nonzero = true;
                    if (nonzero) {
                        best = dist;
                        out = x;
                        found = true;
                    }
                    step(0);
                } else {
                    --i;
                    FT c = FT(0);
                    for (int j = i + 1; j < bs; ++j)
                        c -= mu_[kappa + j][kappa + i] * static_cast<FT>(x[j]);
                    pd[i] = dist;
                    center[i] = c;
                    x0[i] = static_cast<i64>(std::llround(static_cast<double>(c)));
                    x[i] = x0[i];
                    cnt[i] = 0;
                    dir[i] = c >= static_cast<FT>(x0[i]) ? 1 : -1;
                }
            } else {
                ++i;
                if (i == bs) return found;
                step(i);
            }
        }
    }

    void insert_combination(int kappa, const std::vector<i64>& coeffs) {
        std::vector<i64> w(cols_, 0);
        for (std::size_t t = 0; t < coeffs.size(); ++t) {
            if (coeffs[t] == 0) continue;
            const i64* r = b_.row(kappa + static_cast<int>(t));
            for (int c = 0; c < cols_; ++c) {
                w[c] += coeffs[t] * r[c];
                if (w[c] > kEntryLimit || w[c] < -kEntryLimit) throw PrecisionFailure("insert overflow");
            }
        }
        b_.data.insert(b_.data.begin() + static_cast<std::size_t>(kappa) * cols_, w.begin(),
                       w.end());
        b_.rows += 1;
        d_ += 1;
        mu_.emplace_back();
        for (auto& row : mu_) row.resize(d_, FT(0));
        bnorm_.push_back(FT(0));
        rnorm_.push_back(FT(0));
        bstar_.resize(static_cast<std::size_t>(d_) * cols_);
        gs_row(kappa);  // later rows are refreshed by the post-insert lll walk
    }
};

template <typename Fn>
auto with_precision_escalation(Fn&& fn) {
    try {
        return fn(std::type_identity<double>{});
    } catch (const PrecisionFailure&) {
        try {
            return fn(std::type_identity<long double>{});
        } catch (const PrecisionFailure& e) {
            throw std::runtime_error(std::string("lattice reduction failed at long double: ") +
                                     e.what());
        }
    }
}

}  // namespace

void lll_reduce(IntMat& basis, double delta) {
    if (delta <= 0.25 || delta > 0.9999)
        throw std::invalid_argument("lll_reduce: delta must lie in (0.25, 0.9999]");
    if (basis.rows < 2) return;
    const IntMat saved = basis;
    with_precision_escalation([&]<typename FT>(std::type_identity<FT>) {
        basis = saved;  // each precision attempt starts from the input basis
        Reducer<FT> red(basis, delta);
        red.lll();
        return 0;
    });
}

ReduceOutcome bkz_reduce(IntMat& basis, const ReductionConfig& cfg) {
    cfg.validate();
    if (basis.rows < 2) return {};
    const IntMat saved = basis;
    return with_precision_escalation([&]<typename FT>(std::type_identity<FT>) {
        basis = saved;
        Reducer<FT> red(basis, cfg.delta);
        return red.bkz(cfg);
    });
}

}  // namespace picante
