#include <doctest.h>

#include "mlv/variety.hpp"

#include "../support/gen.hpp"

using namespace mlv;
using mlvtest::Rng;

namespace {

Point make_point(const SpaceSignature& sig, std::vector<std::uint8_t> flat) {
    Point x;
    x.flat = std::move(flat);
    check_point(sig, x);
    return x;
}

MultilinearForm dot_form(unsigned p, unsigned n) {
    SpaceSignature sig(p, {n, n});
    std::vector<std::uint8_t> c(n * n, 0);
    for (unsigned i = 0; i < n; ++i) c[i * n + i] = 1;
    return MultilinearForm(sig, {0, 1}, std::move(c));
}

// independent oracle: count zeros of sum x_i y_i by direct double loop
unsigned long long dot_zero_count_oracle(unsigned p, unsigned n) {
    SpaceSignature sig(p, {n, n});
    unsigned long long count = 0;
    for (unsigned long long r = 0; r < sig.total_points(); ++r) {
        Point pt = unrank_point(sig, r);
        unsigned acc = 0;
        for (unsigned i = 0; i < n; ++i) acc += pt.flat[i] * pt.flat[n + i];
        if (acc % p == 0) ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("membership on pinned points") {
    SpaceSignature sig(2, {2, 2});
    Variety v(sig, {MultilinearForm(sig, {0, 1}, {1, 0, 0, 1})});  // x1y1 - x2y2 over F_2
    CHECK(v.membership(make_point(sig, {1, 1, 1, 1})));
    CHECK(v.membership(make_point(sig, {0, 0, 1, 1})));
    CHECK_FALSE(v.membership(make_point(sig, {1, 0, 1, 0})));
}

TEST_CASE("point counts against the enumeration oracle") {
    // {x . y = 0} on F_2^2 x F_2^2
    Variety v(dot_form(2, 2).sig(), {dot_form(2, 2)});
    CHECK(dot_zero_count_oracle(2, 2) == 10);
    CHECK(v.count_points() == 10);

    // {x1 y1 = 0} on F_2 x F_2
    SpaceSignature s11(2, {1, 1});
    Variety w(s11, {MultilinearForm(s11, {0, 1}, {1})});
    CHECK(w.count_points() == 3);

    // no constraints: the whole space
    SpaceSignature s3(3, {1, 1});
    CHECK(Variety(s3).count_points() == 9);

    CHECK(v.enumerate_points().size() == 10);
    for (const auto& x : v.enumerate_points()) CHECK(v.membership(x));
}

TEST_CASE("density floor: count >= f^(-k d) |G| exactly") {
    Variety v(dot_form(2, 2).sig(), {dot_form(2, 2)});
    CHECK(v.density_floor() == Rational(4));  // 2^(-2) * 16
    CHECK(v.density_floor_satisfied());

    Rng rng(1234);
    for (int trial = 0; trial < 120; ++trial) {
        SpaceSignature sig = mlvtest::random_signature(rng, 1, 3, 2, {2, 3});
        Variety v2 = mlvtest::random_variety(rng, sig, 1 + rng.below(3));
        CHECK(v2.density_floor_satisfied());
    }
}

TEST_CASE("slicing re-labels the remaining coordinates") {
    SpaceSignature sig(2, {2, 2});
    Variety v(sig, {dot_form(2, 2)});

    // fix x = (1,0): induced constraint y1 = 0 on the remaining axis
    Variety s = v.slice({{0, {1, 0}}});
    CHECK(s.sig().k() == 1);
    CHECK(s.codimension() == 1);
    CHECK(s.count_points() == 2);  // y = (0,0), (0,1)

    // fix x = (0,0): constraint satisfied identically, dropped
    Variety all = v.slice({{0, {0, 0}}});
    CHECK(all.codimension() == 1);
    CHECK(all.count_points() == 4);

    // slicing fully inside the constraint support drops or marks
    SpaceSignature s2(2, {1, 1});
    Variety w(s2, {MultilinearForm(s2, {0}, {1})});  // x1 = 0
    Variety sat = w.slice({{0, {0}}});
    CHECK(sat.codimension() == 0);
    CHECK(sat.count_points() == 2);
    Variety vio = w.slice({{0, {1}}});
    CHECK(vio.count_points() == 0);  // empty marker constraint

    // fixing everything leaves the 0-ary space: membership of the point
    Variety degenerate = v.slice({{0, {1, 1}}, {1, {1, 1}}});
    CHECK(degenerate.sig().k() == 0);
    CHECK(degenerate.count_points() == 1);
    Variety degenerate_out = v.slice({{0, {1, 0}}, {1, {1, 0}}});
    CHECK(degenerate_out.count_points() == 0);
}

TEST_CASE("slice counts agree with filtering the full enumeration") {
    Rng rng(555);
    for (int trial = 0; trial < 40; ++trial) {
        SpaceSignature sig = mlvtest::random_signature(rng, 2, 3, 2, {2, 3});
        Variety v = mlvtest::random_variety(rng, sig, 1 + rng.below(2));
        std::size_t axis = rng.below(sig.k());
        Point marker = mlvtest::random_point(rng, sig);
        auto block = get_coord(sig, marker, axis);

        Variety sliced = v.slice({{static_cast<int>(axis), block}});
        unsigned long long direct = 0;
        for_each_point(sig, [&](const Point& x) {
            if (get_coord(sig, x, axis) == block && v.membership(x)) ++direct;
        });
        CHECK(sliced.count_points() == direct);
    }
}

TEST_CASE("enumeration cap guards counting") {
    SpaceSignature big(2, {10, 10, 6});  // 2^26 points
    Variety v(big);
    unsigned long long old_cap = enumeration_cap();
    set_enumeration_cap(1u << 20);
    CHECK_THROWS_AS(v.count_points(), CapExceeded);
    set_enumeration_cap(old_cap);
}
