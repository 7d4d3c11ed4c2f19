#include "mlv/counterexample.hpp"

#include <map>
#include <string>

#include "mlv/errors.hpp"
#include "mlv/linalg.hpp"

namespace mlv {

namespace {

bool block_is_zero(const std::vector<std::uint8_t>& v) {
    for (std::uint8_t d : v)
        if (d != 0) return false;
    return true;
}

/// In the strip union: x = 0, y = 0, {x1 = 0, y2 = 0}, or {x2 = 0, y1 = 0}.
bool in_strips(const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& y) {
    if (block_is_zero(x) || block_is_zero(y)) return true;
    if (x[0] == 0 && y[1] == 0) return true;
    if (x[1] == 0 && y[0] == 0) return true;
    return false;
}

}  // namespace

HyperbolaInstance build_instance(unsigned p, const std::vector<std::uint8_t>& f_table) {
    SpaceSignature sig(p, {2, 2});
    if (f_table.size() != p - 1)
        throw MismatchError("the value table needs one entry per nonzero scaling");
    for (std::uint8_t v : f_table)
        if (v >= p) throw MismatchError("a value table entry is outside the field");

    MultilinearForm h(sig, {0, 1}, {1, 0, 0, static_cast<std::uint8_t>(p - 1)});
    Variety b(sig, {h});

    std::map<std::uint64_t, std::vector<std::uint8_t>> table;
    for (const Point& q : b.enumerate_points()) {
        const std::vector<std::uint8_t> x = get_coord(sig, q, 0);
        const std::vector<std::uint8_t> y = get_coord(sig, q, 1);
        const bool strips = in_strips(x, y);
        const bool classed = x[0] != 0 && x[1] != 0 && y[0] != 0;
        if (strips == classed)
            throw MismatchError("the strips and scaling classes fail to tile the quadric at " +
                                point_str(sig, q));
        unsigned value = 0;
        if (classed) {
            const unsigned lambda = x[0] * mod_inverse(x[1], p) % p;
            // The class point is (lambda a, a; b, lambda b); re-derive the
            // fourth coordinate as a partition sanity check.
            if (y[1] != lambda * y[0] % p)
                throw MismatchError("a scaling-class point fails its parametrization at " +
                                    point_str(sig, q));
            value = f_table[lambda - 1] * x[1] % p * y[0] % p;
        }
        table[point_rank(sig, q)] = {static_cast<std::uint8_t>(value)};
    }
    PartialMultilinearMap phi(b, 1, std::move(table));
    return {p, f_table, std::move(b), std::move(phi)};
}

ExtendabilityDecision global_extension_exists(const HyperbolaInstance& inst) {
    const SpaceSignature& sig = inst.phi.domain().sig();
    const unsigned p = inst.p;
    const std::vector<Point> points = inst.phi.domain().enumerate_points();

    // One equation per quadric point: sum_ij c_ij x_i y_j = phi(x; y).
    FpMatrix a = FpMatrix::zero(p, points.size(), 4);
    std::vector<std::uint8_t> rhs(points.size(), 0);
    for (std::size_t r = 0; r < points.size(); ++r) {
        const std::vector<std::uint8_t> x = get_coord(sig, points[r], 0);
        const std::vector<std::uint8_t> y = get_coord(sig, points[r], 1);
        for (unsigned i = 0; i < 2; ++i)
            for (unsigned j = 0; j < 2; ++j)
                a.at(r, i * 2 + j) = static_cast<std::uint8_t>(x[i] * y[j] % p);
        rhs[r] = inst.phi.value_at(points[r])[0];
    }

    const FpSolveResult res = fp_solve(a, rhs);
    ExtendabilityDecision out;
    out.equations = points.size();
    out.rank_a = res.rank_a;
    out.rank_augmented = res.rank_augmented;
    if (res.consistent) {
        MultilinearForm phi_hat(sig, {0, 1}, res.solution);
        for (const Point& q : points)
            if (phi_hat.evaluate(q).value() != inst.phi.value_at(q)[0])
                throw AuditFailed("the extension witness disagrees with the map at " +
                                  point_str(sig, q));
        out.extendable = true;
        out.witness = std::move(phi_hat);
        return out;
    }

    // Re-verify the infeasibility certificate: y^T A = 0 but y^T b != 0.
    unsigned yb = 0;
    for (std::size_t r = 0; r < points.size(); ++r)
        yb = (yb + res.infeasibility[r] * rhs[r]) % p;
    if (yb == 0) throw AuditFailed("the infeasibility certificate misses the right-hand side");
    for (unsigned c = 0; c < 4; ++c) {
        unsigned acc = 0;
        for (std::size_t r = 0; r < points.size(); ++r)
            acc = (acc + res.infeasibility[r] * a.at(r, c)) % p;
        if (acc != 0)
            throw AuditFailed("the infeasibility certificate fails to annihilate the system");
    }
    out.infeasibility = res.infeasibility;
    return out;
}

ScanSummary scan_f_tables(unsigned p) {
    unsigned long long tables = 1;
    for (unsigned i = 0; i + 1 < p; ++i) tables *= p;
    // Each table costs one pass over the ambient p^4 points.
    check_cap(tables * SpaceSignature(p, {2, 2}).total_points());

    ScanSummary summary;
    summary.total = tables;
    std::vector<std::uint8_t> f(p - 1, 0);
    while (true) {
        const HyperbolaInstance inst = build_instance(p, f);
        if (global_extension_exists(inst).extendable) {
            ++summary.extendable;
        } else {
            ++summary.non_extendable;
            if (summary.first_non_extendable.empty()) summary.first_non_extendable = f;
        }
        std::size_t i = 0;
        for (; i < f.size(); ++i) {
            if (++f[i] < p) break;
            f[i] = 0;
        }
        if (i == f.size()) break;
    }
    return summary;
}

}  // namespace mlv
