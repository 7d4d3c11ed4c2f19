#pragma once

#include <map>
#include <vector>

#include "mlv/forms.hpp"

namespace mlv {

/// Joint zero set of a list of multilinear constraint forms.  The
/// constraint list is the representation; its length is the variety's
/// stated codimension (no minimization is attempted).
class Variety {
public:
    explicit Variety(SpaceSignature sig, std::vector<MultilinearForm> constraints = {});

    const SpaceSignature& sig() const { return sig_; }
    const std::vector<MultilinearForm>& constraints() const { return constraints_; }
    std::size_t codimension() const { return constraints_.size(); }

    void add_constraint(MultilinearForm f);

    bool membership(const Point& x) const;

    /// Exact point count by enumeration (cap-checked).
    unsigned long long count_points() const;
    /// All points in canonical order (cap-checked).
    std::vector<Point> enumerate_points() const;

    /// Density floor f^(-k d) |G| that the point count is measured against.
    Rational density_floor() const;
    /// count_points() >= density_floor(), decided exactly.
    bool density_floor_satisfied() const;

    /// Fixes whole coordinate blocks and returns the variety induced on
    /// the remaining coordinates (re-labeled to a reduced signature).
    /// Constraints fully supported inside the fixed set are dropped when
    /// satisfied; a violated one leaves a nonzero constant constraint
    /// that marks the slice empty.
    Variety slice(const std::map<int, std::vector<std::uint8_t>>& fixed) const;

    friend bool operator==(const Variety& a, const Variety& b) {
        return a.sig_ == b.sig_ && a.constraints_ == b.constraints_;
    }

private:
    SpaceSignature sig_;
    std::vector<MultilinearForm> constraints_;
};

}  // namespace mlv
