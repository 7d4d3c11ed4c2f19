#pragma once

#include <vector>

#include "mlv/forms.hpp"

namespace mlv {

/// Value histogram of a form over the space spanned by its axes (the
/// other coordinates cannot change the value).  counts[a] = number of
/// points with value a.
std::vector<unsigned long long> value_counts(const MultilinearForm& f);
std::vector<unsigned long long> value_counts(const MultiaffineForm& f);

/// |sum_a counts[a] w^a| for w = e^(2 pi i / p).  For p = 2 the sum is a
/// real integer and for p = 3 the squared magnitude is rational, so both
/// are exact; larger p falls back to floating point.
struct CharSumMagnitude {
    bool exact = false;
    Rational squared;   // |S|^2, exact when `exact`
    double approx = 0;  // |S| in floating point, always filled
};
CharSumMagnitude char_sum_magnitude(const std::vector<unsigned long long>& counts, unsigned p);

/// Fraction of assignments of all axes but the last whose induced linear
/// functional on the last axis vanishes identically.  For multilinear
/// forms this equals the averaged character sum, computed exactly.
/// Pre: the form's axes cover every coordinate of its space.
Rational bias(const MultilinearForm& f);

/// -log_f of the bias.  Exact (an integer) whenever the bias is a power
/// of 1/f; otherwise the exact bias is paired with a floating-point log.
struct AnalyticRank {
    Rational bias_value;
    bool exact = false;
    long long exact_value = 0;  // valid when exact
    double approx = 0;          // -log_f(bias), always filled
};
AnalyticRank analytic_rank(const MultilinearForm& f);

/// Rank of the coefficient matrix; k = 2 only.
std::size_t matrix_rank(const MultilinearForm& f);

/// One term beta * gamma of a partition decomposition: two forms on
/// complementary nonempty axis subsets whose product the term denotes.
struct PartitionTerm {
    MultilinearForm left;
    MultilinearForm right;
};

Fp evaluate_partition_terms(const std::vector<PartitionTerm>& terms, const Point& x);

struct PartitionRankBounds {
    std::size_t lower = 0;  // ceiling of the analytic rank
    std::size_t upper = 0;  // witnessed by `witness`
    bool exact = false;     // upper proven minimal by exhaustive search
    std::vector<PartitionTerm> witness;
};

inline constexpr unsigned long long kDefaultPrankBudget = 1u << 20;

/// Bounds on the least number of split-product terms summing to f.
/// k = 2 delegates to matrix rank (exact); the tiny regime k = 3, p = 2,
/// dims <= 2 is decided exactly by breadth-first search over the whole
/// coefficient space; everything else gets the axis-expansion upper
/// bound.  The witness always re-evaluates to f (checked by the tests).
PartitionRankBounds partition_rank_bounds(const MultilinearForm& f,
                                          unsigned long long budget = kDefaultPrankBudget);

/// Factor forms gamma_1..gamma_r drawn from partition decompositions of
/// the given forms, together with an exhaustive verification that their
/// joint zero set is contained in the joint zero set of the inputs.
struct ContainmentCertificate {
    std::vector<MultilinearForm> factors;
    unsigned long long points_checked = 0;
};
ContainmentCertificate containment_from_decomposition(const std::vector<MultilinearForm>& alphas,
                                                      unsigned long long budget = kDefaultPrankBudget);

}  // namespace mlv
