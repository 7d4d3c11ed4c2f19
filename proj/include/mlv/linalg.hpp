#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mlv/field.hpp"

namespace mlv {

/// Dense row-major matrix over F_p.
struct FpMatrix {
    unsigned p = 2;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> a;  // rows * cols entries

    std::uint8_t& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    static FpMatrix zero(unsigned p, std::size_t rows, std::size_t cols) {
        return FpMatrix{p, rows, cols, std::vector<std::uint8_t>(rows * cols, 0)};
    }
};

/// Rank via Gaussian elimination (the input is copied).
std::size_t fp_rank(FpMatrix m);

struct FpSolveResult {
    bool consistent = false;
    /// One solution of A x = b when consistent.
    std::vector<std::uint8_t> solution;
    /// When inconsistent: y with y^T A = 0 and y^T b != 0, an exact
    /// certificate of infeasibility.
    std::vector<std::uint8_t> infeasibility;
    std::size_t rank_a = 0;
    std::size_t rank_augmented = 0;
};

/// Solves A x = b over F_p.
FpSolveResult fp_solve(const FpMatrix& a, const std::vector<std::uint8_t>& b);

/// Incrementally maintained row space; used for greedy selection of
/// independent vectors and for basis completion.
class FpSpan {
public:
    FpSpan(unsigned p, std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t rank() const { return pivots_.size(); }

    bool contains(const std::vector<std::uint8_t>& v) const;
    /// Adds v when it is outside the span; returns whether it was added.
    bool try_add(const std::vector<std::uint8_t>& v);

private:
    std::vector<std::uint8_t> reduce(std::vector<std::uint8_t> v) const;

    unsigned p_;
    std::size_t dim_;
    std::vector<std::vector<std::uint8_t>> rows_;  // reduced row echelon rows
    std::vector<std::size_t> pivots_;
};

/// Writes a rank-r matrix as a sum of r outer products u_i v_i^T.
struct OuterProductTerm {
    std::vector<std::uint8_t> u;  // length rows
    std::vector<std::uint8_t> v;  // length cols
};
std::vector<OuterProductTerm> fp_rank_factorization(FpMatrix m);

}  // namespace mlv
