#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mlv/field.hpp"

namespace mlv {

/// Cap on the number of points any single enumeration may visit.
/// Adjustable from the CLI (flag or environment variable).
inline constexpr unsigned long long kDefaultEnumerationCap = 1ull << 24;

unsigned long long enumeration_cap();
void set_enumeration_cap(unsigned long long cap);

/// Throws CapExceeded when an enumeration of n points is over the cap.
void check_cap(unsigned long long n);

/// Shape of a product space G = G_1 x ... x G_k with G_i = F_p^{n_i}.
/// k = 0 (the one-point space) is allowed internally so that slicing away
/// every coordinate stays well defined; files and the CLI require k >= 1.
class SpaceSignature {
public:
    SpaceSignature() : p_(2) {}
    SpaceSignature(unsigned p, std::vector<unsigned> dims);

    unsigned p() const { return p_; }
    std::size_t k() const { return dims_.size(); }
    unsigned dim(std::size_t axis) const { return dims_.at(axis); }
    const std::vector<unsigned>& dims() const { return dims_; }
    /// Offset of coordinate `axis` in the flat digit vector of a point.
    unsigned offset(std::size_t axis) const { return offsets_.at(axis); }
    /// Total number of F_p digits in a point.
    unsigned flat_size() const { return flat_size_; }
    /// |G| = p^(n_1 + ... + n_k).
    unsigned long long total_points() const { return total_points_; }

    friend bool operator==(const SpaceSignature& a, const SpaceSignature& b) {
        return a.p_ == b.p_ && a.dims_ == b.dims_;
    }
    friend bool operator!=(const SpaceSignature& a, const SpaceSignature& b) { return !(a == b); }

private:
    unsigned p_;
    std::vector<unsigned> dims_;
    std::vector<unsigned> offsets_;
    unsigned flat_size_ = 0;
    unsigned long long total_points_ = 1;
};

/// Point of a product space, stored as the flat digit vector
/// (x_1[0..n_1), x_2[0..n_2), ..., x_k[0..n_k)).
struct Point {
    std::vector<std::uint8_t> flat;

    friend bool operator==(const Point& a, const Point& b) { return a.flat == b.flat; }
    friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }
    friend bool operator<(const Point& a, const Point& b) { return a.flat < b.flat; }
};

void check_point(const SpaceSignature& sig, const Point& x);

/// Canonical index of a point: little-endian base-p over the flat digits,
/// so coordinate 1 varies fastest and within a coordinate the basis
/// coefficients vary in ascending order.
unsigned long long point_rank(const SpaceSignature& sig, const Point& x);
Point unrank_point(const SpaceSignature& sig, unsigned long long rank);

/// Advances x to the next point in canonical order; returns false after
/// the last point (x is then all zeros again).
bool next_point(const SpaceSignature& sig, Point& x);

/// The all-zero point.
Point zero_point(const SpaceSignature& sig);

/// Coordinate block i of a point, as a fresh vector.
std::vector<std::uint8_t> get_coord(const SpaceSignature& sig, const Point& x, std::size_t axis);
void set_coord(const SpaceSignature& sig, Point& x, std::size_t axis,
               const std::vector<std::uint8_t>& value);

/// Scales coordinate block `axis` of x by c.
Point scale_coord(const SpaceSignature& sig, const Point& x, std::size_t axis, Fp c);

/// Number of coordinate blocks in which x and y differ.
unsigned differing_coordinates(const SpaceSignature& sig, const Point& x, const Point& y);

/// x (-) y for points differing in exactly one coordinate block: the point
/// that keeps the shared blocks and carries x_d - y_d in the differing one.
/// Throws MismatchError when the points differ in zero or several blocks.
Point ominus(const SpaceSignature& sig, const Point& x, const Point& y);

/// "(d1,d2|d3)" style rendering of the flat digits, block by block.
std::string point_str(const SpaceSignature& sig, const Point& x);

/// Calls fn(x) for every point of the space in canonical order.
template <class Fn>
void for_each_point(const SpaceSignature& sig, Fn&& fn) {
    check_cap(sig.total_points());
    Point x = zero_point(sig);
    do {
        fn(static_cast<const Point&>(x));
    } while (next_point(sig, x));
}

/// Multilinear form on a subset of the coordinates: a dense coefficient
/// tensor with one index per axis in `axes`.  Coefficients are stored
/// row-major over the axes in ascending order (the last listed axis
/// varies fastest), which fixes the file layout.
///
/// An empty axis set is the degenerate constant form; it only arises
/// internally (constant parts of multiaffine forms, fully sliced
/// constraints) and is rejected by the parsers.
class MultilinearForm {
public:
    MultilinearForm(SpaceSignature sig, std::vector<int> axes, std::vector<std::uint8_t> coeffs);

    static MultilinearForm zero(const SpaceSignature& sig, std::vector<int> axes);
    static MultilinearForm constant(const SpaceSignature& sig, Fp value);

    const SpaceSignature& sig() const { return sig_; }
    /// Ascending 0-based coordinate indices.
    const std::vector<int>& axes() const { return axes_; }
    const std::vector<std::uint8_t>& coeffs() const { return coeffs_; }
    std::vector<std::uint8_t>& coeffs() { return coeffs_; }

    bool is_zero() const;
    bool is_constant() const { return axes_.empty(); }

    /// Value at a point; only the blocks named in axes() are read.
    Fp evaluate(const Point& x) const;

    /// Coefficient vector of the linear functional induced on the last
    /// axis of axes() once all earlier axes are fixed to the blocks of x.
    std::vector<std::uint8_t> last_axis_functional(const Point& x) const;

    friend bool operator==(const MultilinearForm& a, const MultilinearForm& b) {
        return a.sig_ == b.sig_ && a.axes_ == b.axes_ && a.coeffs_ == b.coeffs_;
    }
    friend bool operator!=(const MultilinearForm& a, const MultilinearForm& b) { return !(a == b); }

private:
    SpaceSignature sig_;
    std::vector<int> axes_;
    std::vector<std::uint8_t> coeffs_;
};

/// f + g and scalar combinations, for forms sharing signature and axes.
MultilinearForm form_add(const MultilinearForm& f, const MultilinearForm& g);
MultilinearForm form_scale(const MultilinearForm& f, Fp c);

/// Restriction of f that fixes whole coordinate blocks.  `fixed` maps a
/// strict nonempty subset of f's axes to block values; the result is a
/// form on the remaining axes over the same signature.  Fixing every
/// axis is rejected (use evaluate), as is fixing an axis outside f.
MultilinearForm slice_form(const MultilinearForm& f,
                           const std::map<int, std::vector<std::uint8_t>>& fixed);

/// Multiaffine form: a sum of multilinear parts indexed by subsets of the
/// coordinates, plus a constant.
class MultiaffineForm {
public:
    explicit MultiaffineForm(SpaceSignature sig);

    const SpaceSignature& sig() const { return sig_; }
    Fp constant() const { return constant_; }
    void set_constant(Fp c);
    /// Installs (or replaces) the part supported on the part's axes.
    void set_part(MultilinearForm part);
    /// Parts keyed by axis bitmask; only nonempty subsets appear here.
    const std::map<std::uint32_t, MultilinearForm>& parts() const { return parts_; }

    Fp evaluate(const Point& x) const;

    /// The top part on all k coordinates (the zero form when absent).
    MultilinearForm multilinear_part() const;

private:
    SpaceSignature sig_;
    std::map<std::uint32_t, MultilinearForm> parts_;
    Fp constant_;
};

/// Vector-valued multilinear map G -> F_p^c given by one full-support
/// coefficient tensor per output component.
class MultilinearMapH {
public:
    MultilinearMapH(SpaceSignature sig, std::vector<MultilinearForm> components);

    const SpaceSignature& sig() const { return sig_; }
    std::size_t codim_h() const { return components_.size(); }
    const std::vector<MultilinearForm>& components() const { return components_; }

    std::vector<std::uint8_t> evaluate(const Point& x) const;

private:
    SpaceSignature sig_;
    std::vector<MultilinearForm> components_;
};

/// View of the coordinate blocks named in `axes` as a standalone product
/// space, with translation helpers in both directions.
class SubSpace {
public:
    SubSpace(SpaceSignature full, std::vector<int> axes);

    const SpaceSignature& full_sig() const { return full_; }
    const SpaceSignature& reduced_sig() const { return reduced_; }
    const std::vector<int>& axes() const { return axes_; }
    int full_axis(std::size_t reduced_axis) const { return axes_.at(reduced_axis); }

    Point reduce_point(const Point& full_point) const;
    /// Full point that takes the blocks of `reduced_point` on this
    /// subspace's axes and the blocks of `base` elsewhere.
    Point embed_point(const Point& reduced_point, const Point& base) const;

    /// Re-labels a form supported inside this subspace's axes.
    MultilinearForm reduce_form(const MultilinearForm& f) const;
    /// Inverse re-labeling, back to the full signature.
    MultilinearForm lift_form(const MultilinearForm& f) const;

private:
    SpaceSignature full_;
    SpaceSignature reduced_;
    std::vector<int> axes_;            // ascending full-space labels
    std::vector<int> reduced_index_;   // full axis -> reduced axis or -1
};

/// Axis list as bitmask (axes are 0-based, k <= 31).
std::uint32_t axes_mask(const std::vector<int>& axes);
std::vector<int> mask_axes(std::uint32_t mask);

}  // namespace mlv
