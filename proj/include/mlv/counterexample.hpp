#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mlv/extend.hpp"
#include "mlv/forms.hpp"
#include "mlv/variety.hpp"

namespace mlv {

/// The quadric {x1 y1 - x2 y2 = 0} in F_p^2 x F_p^2 together with the map
/// that is zero on the degenerate strips and f(lambda) * x2 * y1 on the
/// scaling class {(lambda a, a; b, lambda b) : a, b != 0}.  The map obeys
/// the multilinearity laws on the quadric for every value table f, yet
/// extends to a global bilinear form only when f is linear in lambda.
struct HyperbolaInstance {
    unsigned p;
    std::vector<std::uint8_t> f_table;  ///< f(1), ..., f(p-1)
    Variety b;
    PartialMultilinearMap phi;
};

/// Tabulates the map over the quadric and re-verifies that the strips and
/// the scaling classes tile it.  f_table must hold p - 1 field values.
HyperbolaInstance build_instance(unsigned p, const std::vector<std::uint8_t>& f_table);

/// Outcome of the exact extendability decision.  Each quadric point makes
/// the four coefficients of a global bilinear form satisfy one linear
/// equation, so solvability is settled by elimination; both answers carry
/// re-verified evidence.
struct ExtendabilityDecision {
    bool extendable = false;
    /// Global bilinear form agreeing with the map on the whole quadric.
    std::optional<MultilinearForm> witness;
    /// When not extendable: row combination y with y^T A = 0, y^T b != 0.
    std::vector<std::uint8_t> infeasibility;
    std::size_t equations = 0;
    std::size_t rank_a = 0;
    std::size_t rank_augmented = 0;
};

ExtendabilityDecision global_extension_exists(const HyperbolaInstance& inst);

/// Tally of an exhaustive scan over all p^(p-1) value tables.
struct ScanSummary {
    unsigned long long total = 0;
    unsigned long long extendable = 0;
    unsigned long long non_extendable = 0;
    /// First non-extendable table in odometer order; empty when none.
    std::vector<std::uint8_t> first_non_extendable;
};

/// Decides extendability for every value table (cap-checked; the work
/// grows as p^(p+3)).
ScanSummary scan_f_tables(unsigned p);

}  // namespace mlv
