#include "mlv/rank.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <map>

#include "mlv/linalg.hpp"

namespace mlv {

namespace {

/// Reduces a form to the subspace spanned by its axes (identity when the
/// axes already cover the space).
struct ReducedView {
    SubSpace sub;
    MultilinearForm form;
};

ReducedView reduce_to_support(const MultilinearForm& f) {
    SubSpace sub(f.sig(), f.axes());
    return ReducedView{sub, sub.reduce_form(f)};
}

bool covers_space(const MultilinearForm& f) {
    return f.axes().size() == f.sig().k();
}

}  // namespace

std::vector<unsigned long long> value_counts(const MultilinearForm& f) {
    std::vector<unsigned long long> counts(f.sig().p(), 0);
    if (f.is_constant()) {
        counts[f.coeffs()[0]] = 1;
        return counts;
    }
    ReducedView view = reduce_to_support(f);
    for_each_point(view.form.sig(), [&](const Point& x) { ++counts[view.form.evaluate(x).value()]; });
    return counts;
}

std::vector<unsigned long long> value_counts(const MultiaffineForm& f) {
    std::vector<unsigned long long> counts(f.sig().p(), 0);
    for_each_point(f.sig(), [&](const Point& x) { ++counts[f.evaluate(x).value()]; });
    return counts;
}

CharSumMagnitude char_sum_magnitude(const std::vector<unsigned long long>& counts, unsigned p) {
    require_supported_prime(p);
    if (counts.size() != p) throw MismatchError("count vector length must equal the modulus");
    CharSumMagnitude out;
    if (p == 2) {
        BigInt diff = BigInt(counts[0]) - BigInt(counts[1]);
        out.exact = true;
        out.squared = Rational(diff * diff);
        out.approx = std::abs(static_cast<double>(counts[0]) - static_cast<double>(counts[1]));
        return out;
    }
    if (p == 3) {
        // |S|^2 = R(0) - R(1) with R(d) the count autocorrelation
        BigInt r0 = 0, r1 = 0;
        for (unsigned a = 0; a < 3; ++a) {
            r0 += BigInt(counts[a]) * BigInt(counts[a]);
            r1 += BigInt(counts[a]) * BigInt(counts[(a + 1) % 3]);
        }
        out.exact = true;
        out.squared = Rational(r0 - r1);
        out.approx = std::sqrt(static_cast<double>(out.squared.convert_to<double>()));
        return out;
    }
    std::complex<double> s(0, 0);
    for (unsigned a = 0; a < p; ++a) {
        double angle = 2.0 * M_PI * a / p;
        s += static_cast<double>(counts[a]) * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out.exact = false;
    out.approx = std::abs(s);
    return out;
}

Rational bias(const MultilinearForm& f) {
    if (f.is_constant())
        throw PreconditionFailed("bias needs a form with at least one axis");
    ReducedView view = reduce_to_support(f);
    const MultilinearForm& g = view.form;
    const SpaceSignature& sig = g.sig();
    if (sig.k() == 1) return g.is_zero() ? Rational(1) : Rational(0);

    std::vector<int> head_axes(g.axes().begin(), g.axes().end() - 1);
    SubSpace head(sig, head_axes);
    check_cap(head.reduced_sig().total_points());
    unsigned long long zero_slices = 0;
    Point carrier = zero_point(sig);
    for_each_point(head.reduced_sig(), [&](const Point& h) {
        Point full = head.embed_point(h, carrier);
        auto functional = g.last_axis_functional(full);
        bool all_zero = std::all_of(functional.begin(), functional.end(),
                                    [](std::uint8_t c) { return c == 0; });
        if (all_zero) ++zero_slices;
    });
    return Rational(zero_slices) / Rational(head.reduced_sig().total_points());
}

AnalyticRank analytic_rank(const MultilinearForm& f) {
    AnalyticRank out;
    out.bias_value = bias(f);
    if (out.bias_value == 0)
        throw PreconditionFailed("bias vanished; the form cannot be multilinear");
    const unsigned p = f.sig().p();
    if (numerator(out.bias_value) == 1) {
        BigInt den = denominator(out.bias_value);
        long long e = 0;
        while (den % p == 0) {
            den /= p;
            ++e;
        }
        if (den == 1) {
            out.exact = true;
            out.exact_value = e;
            out.approx = static_cast<double>(e);
            return out;
        }
    }
    out.exact = false;
    out.approx = -std::log(out.bias_value.convert_to<double>()) / std::log(static_cast<double>(p));
    return out;
}

std::size_t matrix_rank(const MultilinearForm& f) {
    ReducedView view = reduce_to_support(f);
    const MultilinearForm& g = view.form;
    if (g.sig().k() != 2)
        throw PreconditionFailed("matrix rank needs a form on exactly two axes");
    FpMatrix m{g.sig().p(), g.sig().dim(0), g.sig().dim(1), g.coeffs()};
    return fp_rank(std::move(m));
}

Fp evaluate_partition_terms(const std::vector<PartitionTerm>& terms, const Point& x) {
    if (terms.empty()) throw MismatchError("cannot evaluate an empty term list without a space");
    Fp acc(0, terms.front().left.sig().p());
    for (const auto& t : terms) acc += t.left.evaluate(x) * t.right.evaluate(x);
    return acc;
}

namespace {

std::size_t ceil_analytic_rank(const Rational& b, unsigned p) {
    std::size_t r = 0;
    Rational power(1);
    while (power * b < 1) {
        power *= p;
        ++r;
    }
    return r;
}

/// Decomposition search state for the exact tiny regime: p = 2, k = 3,
/// dims <= 2, whole coefficient space <= 2^8 states, addition = xor.
struct BfsTerm {
    std::uint32_t state;          // tensor bits of the product
    std::vector<int> left_axes;   // reduced axis labels
    std::vector<std::uint8_t> left_coeffs;
    std::vector<int> right_axes;
    std::vector<std::uint8_t> right_coeffs;
};

std::uint32_t encode_bits(const std::vector<std::uint8_t>& coeffs) {
    std::uint32_t s = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        if (coeffs[i]) s |= 1u << i;
    return s;
}

/// Row-major index of the sub-tensor on `axes` extracted from the full
/// multi-index `idx`.
std::size_t sub_index(const std::vector<unsigned>& idx, const std::vector<int>& axes,
                      const SpaceSignature& sig) {
    std::size_t out = 0;
    for (int a : axes) out = out * sig.dim(static_cast<std::size_t>(a)) + idx[static_cast<std::size_t>(a)];
    return out;
}

std::vector<BfsTerm> single_product_terms(const SpaceSignature& sig) {
    const unsigned k = static_cast<unsigned>(sig.k());
    std::vector<BfsTerm> terms;
    std::map<std::uint32_t, bool> seen;
    for (std::uint32_t mask = 1; mask < (1u << k) - 1; ++mask) {
        if (!(mask & 1)) continue;  // one shape per complementary pair
        std::vector<int> left = mask_axes(mask);
        std::vector<int> right = mask_axes(((1u << k) - 1) & ~mask);
        std::size_t ln = 1, rn = 1;
        for (int a : left) ln *= sig.dim(static_cast<std::size_t>(a));
        for (int a : right) rn *= sig.dim(static_cast<std::size_t>(a));
        for (std::uint32_t lb = 1; lb < (1u << ln); ++lb)
            for (std::uint32_t rb = 1; rb < (1u << rn); ++rb) {
                std::vector<std::uint8_t> lc(ln), rc(rn);
                for (std::size_t i = 0; i < ln; ++i) lc[i] = (lb >> i) & 1;
                for (std::size_t i = 0; i < rn; ++i) rc[i] = (rb >> i) & 1;
                // outer product over the full tensor
                std::vector<unsigned> idx(k, 0);
                std::uint32_t state = 0;
                std::size_t flat = 0;
                for (;;) {
                    std::uint8_t v = lc[sub_index(idx, left, sig)] & rc[sub_index(idx, right, sig)];
                    if (v) state |= 1u << flat;
                    std::size_t j = k;
                    bool done = false;
                    while (j-- > 0) {
                        if (++idx[j] < sig.dim(j)) break;
                        idx[j] = 0;
                        if (j == 0) done = true;
                    }
                    if (done) break;
                    ++flat;
                }
                if (!seen[state]) {
                    seen[state] = true;
                    terms.push_back(BfsTerm{state, left, lc, right, rc});
                }
            }
    }
    return terms;
}

/// Exact partition rank of every tensor of the shape by xor-BFS; returns
/// the distance of `target` and fills the witness.  Returns false when
/// the budget ran out.
bool exact_prank_bfs(const SpaceSignature& sig, std::uint32_t target, unsigned long long budget,
                     std::size_t& rank_out, std::vector<PartitionTerm>& witness_out) {
    std::size_t bits = 1;
    for (std::size_t i = 0; i < sig.k(); ++i) bits *= sig.dim(i);
    const std::size_t states = 1ull << bits;
    std::vector<BfsTerm> terms = single_product_terms(sig);
    std::vector<int> dist(states, -1);
    std::vector<std::pair<std::uint32_t, std::size_t>> parent(states);
    std::deque<std::uint32_t> queue;
    dist[0] = 0;
    queue.push_back(0);
    unsigned long long work = 0;
    while (!queue.empty()) {
        std::uint32_t cur = queue.front();
        queue.pop_front();
        if (cur == target) break;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (++work > budget) return false;
            std::uint32_t next = cur ^ terms[t].state;
            if (dist[next] < 0) {
                dist[next] = dist[cur] + 1;
                parent[next] = {cur, t};
                queue.push_back(next);
            }
        }
    }
    if (dist[target] < 0) return false;
    rank_out = static_cast<std::size_t>(dist[target]);
    witness_out.clear();
    for (std::uint32_t cur = target; cur != 0;) {
        const BfsTerm& t = terms[parent[cur].second];
        witness_out.push_back(PartitionTerm{MultilinearForm(sig, t.left_axes, t.left_coeffs),
                                            MultilinearForm(sig, t.right_axes, t.right_coeffs)});
        cur = parent[cur].first;
    }
    return true;
}

/// Upper bound by expanding along the axis with the fewest nonzero
/// contractions: f = sum_j x_a[j] * (f with axis a pinned to basis j).
std::vector<PartitionTerm> axis_expansion_witness(const MultilinearForm& f) {
    const SpaceSignature& sig = f.sig();
    std::size_t best_axis = 0;
    std::size_t best_count = static_cast<std::size_t>(-1);
    std::vector<std::vector<MultilinearForm>> slices(sig.k());
    for (std::size_t a = 0; a < sig.k(); ++a) {
        for (unsigned j = 0; j < sig.dim(a); ++j) {
            std::vector<std::uint8_t> basis(sig.dim(a), 0);
            basis[j] = 1;
            MultilinearForm g = slice_form(f, {{static_cast<int>(a), basis}});
            slices[a].push_back(std::move(g));
        }
        std::size_t count = 0;
        for (const auto& g : slices[a])
            if (!g.is_zero()) ++count;
        if (count < best_count) {
            best_count = count;
            best_axis = a;
        }
    }
    std::vector<PartitionTerm> terms;
    for (unsigned j = 0; j < sig.dim(best_axis); ++j) {
        if (slices[best_axis][j].is_zero()) continue;
        std::vector<std::uint8_t> basis(sig.dim(best_axis), 0);
        basis[j] = 1;
        terms.push_back(PartitionTerm{
            MultilinearForm(sig, {static_cast<int>(best_axis)}, basis), slices[best_axis][j]});
    }
    return terms;
}

}  // namespace

PartitionRankBounds partition_rank_bounds(const MultilinearForm& f, unsigned long long budget) {
    if (!covers_space(f)) {
        // work inside the support and lift the witness back
        SubSpace sub(f.sig(), f.axes());
        PartitionRankBounds reduced = partition_rank_bounds(sub.reduce_form(f), budget);
        for (auto& t : reduced.witness) {
            t.left = sub.lift_form(t.left);
            t.right = sub.lift_form(t.right);
        }
        return reduced;
    }
    const SpaceSignature& sig = f.sig();
    PartitionRankBounds out;
    if (f.is_zero()) {
        out.exact = true;
        return out;
    }
    if (sig.k() < 2)
        throw PreconditionFailed("partition rank needs at least two axes (nonzero form given)");
    if (sig.k() == 2) {
        FpMatrix m{sig.p(), sig.dim(0), sig.dim(1), f.coeffs()};
        auto factorization = fp_rank_factorization(std::move(m));
        out.lower = out.upper = factorization.size();
        out.exact = true;
        for (auto& term : factorization)
            out.witness.push_back(PartitionTerm{MultilinearForm(sig, {0}, term.u),
                                                MultilinearForm(sig, {1}, term.v)});
        return out;
    }

    out.lower = ceil_analytic_rank(bias(f), sig.p());

    bool tiny = sig.p() == 2 && sig.k() == 3 &&
                *std::max_element(sig.dims().begin(), sig.dims().end()) <= 2;
    if (tiny) {
        std::size_t rank = 0;
        std::vector<PartitionTerm> witness;
        if (exact_prank_bfs(sig, encode_bits(f.coeffs()), budget, rank, witness)) {
            out.upper = rank;
            out.exact = true;
            out.witness = std::move(witness);
            return out;
        }
    }
    out.witness = axis_expansion_witness(f);
    out.upper = out.witness.size();
    out.exact = (out.upper == out.lower);
    return out;
}

ContainmentCertificate containment_from_decomposition(const std::vector<MultilinearForm>& alphas,
                                                      unsigned long long budget) {
    ContainmentCertificate cert;
    if (alphas.empty()) return cert;
    const SpaceSignature& sig = alphas.front().sig();
    for (const auto& alpha : alphas) {
        if (alpha.sig() != sig) throw MismatchError("containment targets must share a signature");
        if (alpha.is_zero()) continue;
        if (alpha.axes().size() < 2)
            throw BudgetExhausted("a nonzero form on a single axis admits no partition decomposition");
        PartitionRankBounds bounds = partition_rank_bounds(alpha, budget);
        for (const auto& term : bounds.witness) cert.factors.push_back(term.left);
    }
    // exhaustive check: joint zeros of the factors lie inside the joint
    // zeros of the targets
    for_each_point(sig, [&](const Point& x) {
        ++cert.points_checked;
        for (const auto& g : cert.factors)
            if (!g.evaluate(x).is_zero()) return;
        for (const auto& alpha : alphas)
            if (!alpha.evaluate(x).is_zero())
                throw AuditFailed("containment violated at " + point_str(sig, x));
    });
    return cert;
}

}  // namespace mlv
