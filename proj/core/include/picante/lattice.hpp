#pragma once

#include <cstdint>
#include <vector>

#include "picante/lwe.hpp"

namespace picante {

// Dense row-major integer matrix. Basis rows are exact 64-bit integers;
// all reduction bookkeeping happens in floating point on the side.
struct IntMat {
    int rows = 0;
    int cols = 0;
    std::vector<i64> data;

    IntMat() = default;
    IntMat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0) {}

    i64& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    i64 at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    i64* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const i64* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    bool operator==(const IntMat&) const = default;
};

struct ReductionConfig {
    int omega = 15;              // error penalization on the identity block
    int beta = 20;               // BKZ block size
    double delta = 0.99;         // Lovasz parameter
    double timeout_seconds = 0;  // wall clock cap per matrix, 0 = none
    int max_tours = 8;

    void validate() const;
};

struct ReduceOutcome {
    int tours = 0;
    bool timed_out = false;
};

// The 2n x 2n basis [omega*I  A; 0  q*I]. A holds canonical residues.
IntMat build_embedding(const IntMat& a_matrix, int omega, u64 q);

// In-place LLL: output spans the same lattice (unimodular row transform),
// satisfies size reduction |mu_ij| <= 1/2 and the Lovasz condition.
// Gram-Schmidt runs in double and escalates to long double when the
// precision safeguards trip; a persistent failure throws.
void lll_reduce(IntMat& basis, double delta);

// In-place BKZ with unpruned Schnorr-Euchner enumeration per block.
// Tours repeat until a tour makes no change, max_tours, or timeout;
// a timeout returns the current (valid) partially reduced basis.
ReduceOutcome bkz_reduce(IntMat& basis, const ReductionConfig& cfg);

double mean_row_norm(const IntMat& m);

}  // namespace picante
