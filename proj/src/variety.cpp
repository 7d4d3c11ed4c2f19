#include "mlv/variety.hpp"

#include <algorithm>

namespace mlv {

Variety::Variety(SpaceSignature sig, std::vector<MultilinearForm> constraints)
    : sig_(std::move(sig)), constraints_(std::move(constraints)) {
    for (const auto& f : constraints_)
        if (f.sig() != sig_) throw MismatchError("constraint signature does not match variety");
}

void Variety::add_constraint(MultilinearForm f) {
    if (f.sig() != sig_) throw MismatchError("constraint signature does not match variety");
    constraints_.push_back(std::move(f));
}

bool Variety::membership(const Point& x) const {
    check_point(sig_, x);
    for (const auto& f : constraints_)
        if (!f.evaluate(x).is_zero()) return false;
    return true;
}

unsigned long long Variety::count_points() const {
    unsigned long long n = 0;
    for_each_point(sig_, [&](const Point& x) {
        if (membership(x)) ++n;
    });
    return n;
}

std::vector<Point> Variety::enumerate_points() const {
    std::vector<Point> points;
    for_each_point(sig_, [&](const Point& x) {
        if (membership(x)) points.push_back(x);
    });
    return points;
}

Rational Variety::density_floor() const {
    long long exponent = static_cast<long long>(sig_.k()) * static_cast<long long>(codimension());
    return rational_pow(sig_.p(), -exponent) * Rational(sig_.total_points());
}

bool Variety::density_floor_satisfied() const {
    return Rational(count_points()) >= density_floor();
}

Variety Variety::slice(const std::map<int, std::vector<std::uint8_t>>& fixed) const {
    for (const auto& [axis, value] : fixed) {
        if (axis < 0 || axis >= static_cast<int>(sig_.k()))
            throw MismatchError("fixed axis outside the space");
        if (value.size() != sig_.dim(static_cast<std::size_t>(axis)))
            throw MismatchError("fixed block for axis " + std::to_string(axis + 1) +
                                " has the wrong length");
    }
    std::vector<int> rest;
    for (std::size_t i = 0; i < sig_.k(); ++i)
        if (!fixed.count(static_cast<int>(i))) rest.push_back(static_cast<int>(i));

    // a point carrying the fixed blocks (rest blocks zero) for evaluation
    Point carrier = zero_point(sig_);
    for (const auto& [axis, value] : fixed) set_coord(sig_, carrier, static_cast<std::size_t>(axis), value);

    if (rest.empty()) {
        // degenerate 0-ary result: membership of the fixed point survives
        // as a constant constraint when violated
        SpaceSignature empty_sig(sig_.p(), {});
        std::vector<MultilinearForm> kept;
        for (const auto& f : constraints_) {
            Fp v = f.evaluate(carrier);
            if (!v.is_zero()) {
                kept.push_back(MultilinearForm::constant(empty_sig, v));
                break;
            }
        }
        return Variety(empty_sig, std::move(kept));
    }

    SubSpace sub(sig_, rest);
    std::vector<MultilinearForm> sliced;
    for (const auto& f : constraints_) {
        bool fully_inside = std::all_of(f.axes().begin(), f.axes().end(),
                                        [&](int a) { return fixed.count(a) != 0; });
        if (fully_inside || f.is_constant()) {
            Fp v = f.evaluate(carrier);
            if (!v.is_zero())
                sliced.push_back(MultilinearForm::constant(sub.reduced_sig(), v));
            continue;
        }
        std::map<int, std::vector<std::uint8_t>> touching;
        for (int a : f.axes()) {
            auto it = fixed.find(a);
            if (it != fixed.end()) touching.emplace(a, it->second);
        }
        MultilinearForm g = touching.empty() ? f : slice_form(f, touching);
        sliced.push_back(sub.reduce_form(g));
    }
    return Variety(sub.reduced_sig(), std::move(sliced));
}

}  // namespace mlv
