#include "mlv/linalg.hpp"

#include <algorithm>

namespace mlv {

namespace {

// In-place row reduction; returns pivot columns.  When track != nullptr it
// receives the row operations applied to an identity block (so that
// track rows express the reduced rows as combinations of the input rows).
std::vector<std::size_t> row_reduce(FpMatrix& m, FpMatrix* track = nullptr) {
    const unsigned p = m.p;
    std::vector<std::size_t> pivot_cols;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
        std::size_t pivot = row;
        while (pivot < m.rows && m.at(pivot, col) == 0) ++pivot;
        if (pivot == m.rows) continue;
        if (pivot != row) {
            for (std::size_t c = 0; c < m.cols; ++c) std::swap(m.at(pivot, c), m.at(row, c));
            if (track)
                for (std::size_t c = 0; c < track->cols; ++c)
                    std::swap(track->at(pivot, c), track->at(row, c));
        }
        unsigned inv = mod_inverse(m.at(row, col), p);
        for (std::size_t c = 0; c < m.cols; ++c)
            m.at(row, c) = static_cast<std::uint8_t>(m.at(row, c) * inv % p);
        if (track)
            for (std::size_t c = 0; c < track->cols; ++c)
                track->at(row, c) = static_cast<std::uint8_t>(track->at(row, c) * inv % p);
        for (std::size_t r = 0; r < m.rows; ++r) {
            if (r == row || m.at(r, col) == 0) continue;
            unsigned f = m.at(r, col);
            for (std::size_t c = 0; c < m.cols; ++c)
                m.at(r, c) = static_cast<std::uint8_t>(
                    mod_reduce(static_cast<long long>(m.at(r, c)) -
                                   static_cast<long long>(f) * m.at(row, c),
                               p));
            if (track)
                for (std::size_t c = 0; c < track->cols; ++c)
                    track->at(r, c) = static_cast<std::uint8_t>(
                        mod_reduce(static_cast<long long>(track->at(r, c)) -
                                       static_cast<long long>(f) * track->at(row, c),
                                   p));
        }
        pivot_cols.push_back(col);
        ++row;
    }
    return pivot_cols;
}

}  // namespace

std::size_t fp_rank(FpMatrix m) { return row_reduce(m).size(); }

FpSolveResult fp_solve(const FpMatrix& a, const std::vector<std::uint8_t>& b) {
    if (b.size() != a.rows) throw MismatchError("right-hand side length does not match rows");
    const unsigned p = a.p;
    FpMatrix aug = FpMatrix::zero(p, a.rows, a.cols + 1);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t c = 0; c < a.cols; ++c) aug.at(r, c) = a.at(r, c);
        aug.at(r, a.cols) = b[r];
    }
    FpMatrix track = FpMatrix::zero(p, a.rows, a.rows);
    for (std::size_t r = 0; r < a.rows; ++r) track.at(r, r) = 1;
    std::vector<std::size_t> pivots = row_reduce(aug, &track);

    FpSolveResult result;
    result.rank_augmented = pivots.size();
    bool augmented_pivot = !pivots.empty() && pivots.back() == a.cols;
    result.rank_a = augmented_pivot ? pivots.size() - 1 : pivots.size();
    if (augmented_pivot) {
        result.consistent = false;
        // the row whose pivot sits in the b column certifies infeasibility
        std::size_t bad_row = pivots.size() - 1;
        result.infeasibility.assign(a.rows, 0);
        for (std::size_t c = 0; c < a.rows; ++c) result.infeasibility[c] = track.at(bad_row, c);
        return result;
    }
    result.consistent = true;
    result.solution.assign(a.cols, 0);
    for (std::size_t i = 0; i < pivots.size(); ++i)
        result.solution[pivots[i]] = aug.at(i, a.cols);
    return result;
}

FpSpan::FpSpan(unsigned p, std::size_t dim) : p_(p), dim_(dim) {}

std::vector<std::uint8_t> FpSpan::reduce(std::vector<std::uint8_t> v) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        unsigned f = v[pivots_[i]];
        if (f == 0) continue;
        for (std::size_t c = 0; c < dim_; ++c)
            v[c] = static_cast<std::uint8_t>(mod_reduce(
                static_cast<long long>(v[c]) - static_cast<long long>(f) * rows_[i][c], p_));
    }
    return v;
}

bool FpSpan::contains(const std::vector<std::uint8_t>& v) const {
    if (v.size() != dim_) throw MismatchError("vector length does not match span dimension");
    auto r = reduce(v);
    return std::all_of(r.begin(), r.end(), [](std::uint8_t x) { return x == 0; });
}

bool FpSpan::try_add(const std::vector<std::uint8_t>& v) {
    if (v.size() != dim_) throw MismatchError("vector length does not match span dimension");
    auto r = reduce(v);
    std::size_t pivot = dim_;
    for (std::size_t c = 0; c < dim_; ++c)
        if (r[c]) {
            pivot = c;
            break;
        }
    if (pivot == dim_) return false;
    unsigned inv = mod_inverse(r[pivot], p_);
    for (std::size_t c = 0; c < dim_; ++c)
        r[c] = static_cast<std::uint8_t>(r[c] * inv % p_);
    // keep earlier rows reduced against the new one
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        unsigned f = rows_[i][pivot];
        if (f == 0) continue;
        for (std::size_t c = 0; c < dim_; ++c)
            rows_[i][c] = static_cast<std::uint8_t>(mod_reduce(
                static_cast<long long>(rows_[i][c]) - static_cast<long long>(f) * r[c], p_));
    }
    rows_.push_back(std::move(r));
    pivots_.push_back(pivot);
    return true;
}

std::vector<OuterProductTerm> fp_rank_factorization(FpMatrix m) {
    const unsigned p = m.p;
    std::vector<OuterProductTerm> terms;
    for (;;) {
        std::size_t pr = m.rows, pc = m.cols;
        for (std::size_t r = 0; r < m.rows && pr == m.rows; ++r)
            for (std::size_t c = 0; c < m.cols; ++c)
                if (m.at(r, c)) {
                    pr = r;
                    pc = c;
                    break;
                }
        if (pr == m.rows) break;
        unsigned inv = mod_inverse(m.at(pr, pc), p);
        OuterProductTerm t;
        t.u.resize(m.rows);
        t.v.resize(m.cols);
        for (std::size_t r = 0; r < m.rows; ++r)
            t.u[r] = static_cast<std::uint8_t>(m.at(r, pc) * inv % p);
        for (std::size_t c = 0; c < m.cols; ++c) t.v[c] = m.at(pr, c);
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < m.cols; ++c)
                m.at(r, c) = static_cast<std::uint8_t>(mod_reduce(
                    static_cast<long long>(m.at(r, c)) -
                        static_cast<long long>(t.u[r]) * t.v[c],
                    p));
        terms.push_back(std::move(t));
    }
    return terms;
}

}  // namespace mlv
