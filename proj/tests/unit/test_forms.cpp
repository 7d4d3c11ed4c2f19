#include <doctest.h>

#include "mlv/forms.hpp"

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

/// Sum_i x_i y_i on F_p^n x F_p^n.
MultilinearForm dot_form(unsigned p, unsigned n) {
    SpaceSignature sig(p, {n, n});
    std::vector<std::uint8_t> c(n * n, 0);
    for (unsigned i = 0; i < n; ++i) c[i * n + i] = 1;
    return MultilinearForm(sig, {0, 1}, std::move(c));
}

/// x1 y1 - x2 y2 on F_p^2 x F_p^2.
MultilinearForm hyperbola_form(unsigned p) {
    SpaceSignature sig(p, {2, 2});
    return MultilinearForm(sig, {0, 1}, {1, 0, 0, static_cast<std::uint8_t>(p - 1)});
}

}  // namespace

TEST_CASE("signatures, ranks and canonical order") {
    SpaceSignature sig(3, {2, 1});
    CHECK(sig.k() == 2);
    CHECK(sig.flat_size() == 3);
    CHECK(sig.total_points() == 27);
    CHECK(sig.offset(1) == 2);

    // coordinate 1 varies fastest: rank is little-endian over the digits
    CHECK(point_rank(sig, make_point(sig, {1, 0, 0})) == 1);
    CHECK(point_rank(sig, make_point(sig, {0, 1, 0})) == 3);
    CHECK(point_rank(sig, make_point(sig, {0, 0, 1})) == 9);
    for (unsigned long long r = 0; r < sig.total_points(); ++r)
        CHECK(point_rank(sig, unrank_point(sig, r)) == r);

    unsigned long long expected = 0;
    for_each_point(sig, [&](const Point& x) { CHECK(point_rank(sig, x) == expected++); });
    CHECK(expected == 27);

    CHECK_THROWS_AS(SpaceSignature(4, {1}), std::invalid_argument);
    CHECK_THROWS_AS(SpaceSignature(3, {0}), std::invalid_argument);
}

TEST_CASE("evaluation of pinned forms") {
    MultilinearForm dot = dot_form(2, 2);
    const SpaceSignature& sig = dot.sig();
    CHECK(dot.evaluate(make_point(sig, {1, 0, 1, 1})) == Fp(1, 2));
    CHECK(dot.evaluate(make_point(sig, {1, 1, 1, 1})) == Fp(0, 2));
    // any zero coordinate block forces value zero
    CHECK(dot.evaluate(make_point(sig, {0, 0, 1, 1})) == Fp(0, 2));

    MultilinearForm h3 = hyperbola_form(3);
    CHECK(h3.evaluate(make_point(h3.sig(), {1, 2, 2, 1})) == Fp(0, 3));  // 1*2 - 2*1
    CHECK(h3.evaluate(make_point(h3.sig(), {1, 0, 1, 0})) == Fp(1, 3));

    // row-major layout: coefficient index 1 multiplies x[0] * y[1]
    SpaceSignature s22(2, {2, 2});
    MultilinearForm f(s22, {0, 1}, {0, 1, 0, 0});
    CHECK(f.evaluate(make_point(s22, {1, 0, 0, 1})) == Fp(1, 2));
    CHECK(f.evaluate(make_point(s22, {0, 1, 1, 0})) == Fp(0, 2));
}

TEST_CASE("multilinearity of evaluation, randomized") {
    Rng rng(20260823);
    for (int trial = 0; trial < 60; ++trial) {
        SpaceSignature sig = mlvtest::random_signature(rng, 1, 3, 3, {2, 3, 5});
        MultilinearForm f = mlvtest::random_form(rng, sig, mlvtest::random_axes(rng, sig));
        int axis = f.axes()[rng.below(f.axes().size())];
        Point x = mlvtest::random_point(rng, sig);
        Point y = x;;
        std::vector<std::uint8_t> block(sig.dim(static_cast<std::size_t>(axis)));
        for (auto& d : block) d = static_cast<std::uint8_t>(rng.below(sig.p()));
        set_coord(sig, y, static_cast<std::size_t>(axis), block);

        // additivity in the chosen coordinate
        Point sum = x;
        std::vector<std::uint8_t> sum_block = get_coord(sig, x, static_cast<std::size_t>(axis));
        for (std::size_t j = 0; j < sum_block.size(); ++j)
            sum_block[j] = static_cast<std::uint8_t>((sum_block[j] + block[j]) % sig.p());
        set_coord(sig, sum, static_cast<std::size_t>(axis), sum_block);
        CHECK(f.evaluate(sum) == f.evaluate(x) + f.evaluate(y));

        // homogeneity in the chosen coordinate
        Fp c(rng.below(sig.p()), sig.p());
        CHECK(f.evaluate(scale_coord(sig, x, static_cast<std::size_t>(axis), c)) ==
              c * f.evaluate(x));
    }
}

TEST_CASE("slicing fixes whole coordinate blocks") {
    MultilinearForm dot = dot_form(2, 2);
    MultilinearForm sliced = slice_form(dot, {{0, {1, 0}}});
    CHECK(sliced.axes() == std::vector<int>{1});
    CHECK(sliced.coeffs() == std::vector<std::uint8_t>{1, 0});  // y |-> y1

    MultilinearForm zero_slice = slice_form(dot, {{0, {0, 0}}});
    CHECK(zero_slice.is_zero());

    MultilinearForm h5 = hyperbola_form(5);
    MultilinearForm g = slice_form(h5, {{1, {2, 3}}});  // fix y = (2,3): 2 x1 - 3 x2
    CHECK(g.axes() == std::vector<int>{0});
    CHECK(g.coeffs() == std::vector<std::uint8_t>{2, 2});

    CHECK_THROWS_AS(slice_form(dot, {{0, {1, 0}}, {1, {1, 0}}}), MismatchError);
    CHECK_THROWS_AS(slice_form(dot, {{0, {1, 0, 1}}}), MismatchError);

    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        SpaceSignature sig = mlvtest::random_signature(rng, 2, 3, 2, {2, 3});
        MultilinearForm f = mlvtest::random_full_form(rng, sig);
        Point x = mlvtest::random_point(rng, sig);
        int fixed_axis = static_cast<int>(rng.below(sig.k()));
        MultilinearForm s =
            slice_form(f, {{fixed_axis, get_coord(sig, x, static_cast<std::size_t>(fixed_axis))}});
        CHECK(s.evaluate(x) == f.evaluate(x));  // slice reads only the remaining axes
    }
}

TEST_CASE("ominus on points differing in one coordinate") {
    SpaceSignature sig(3, {2, 2});
    Point x = make_point(sig, {2, 2, 1, 0});
    Point y = make_point(sig, {1, 0, 1, 0});
    Point d = ominus(sig, x, y);
    CHECK(d == make_point(sig, {1, 2, 1, 0}));

    CHECK_THROWS_AS(ominus(sig, x, x), MismatchError);
    Point z = make_point(sig, {1, 0, 2, 0});
    CHECK_THROWS_AS(ominus(sig, x, z), MismatchError);  // differs in both blocks
}

TEST_CASE("ominus respects form values") {
    Rng rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        SpaceSignature sig = mlvtest::random_signature(rng, 2, 3, 2, {2, 3, 5});
        MultilinearForm f = mlvtest::random_form(rng, sig, mlvtest::random_axes(rng, sig));
        Point x = mlvtest::random_point(rng, sig);
        std::size_t axis = rng.below(sig.k());
        Point y = x;
        std::vector<std::uint8_t> block(sig.dim(axis));
        for (auto& dgt : block) dgt = static_cast<std::uint8_t>(rng.below(sig.p()));
        set_coord(sig, y, axis, block);
        if (x == y) continue;
        Point d = ominus(sig, x, y);
        bool axis_in_form = false;
        for (int a : f.axes()) axis_in_form |= (a == static_cast<int>(axis));
        if (axis_in_form)
            CHECK(f.evaluate(d) == f.evaluate(x) - f.evaluate(y));
        else
            CHECK(f.evaluate(d) == f.evaluate(x));
    }
}

TEST_CASE("multiaffine forms and their top part") {
    SpaceSignature sig(2, {2, 2});
    MultiaffineForm alpha(sig);
    alpha.set_part(dot_form(2, 2));
    alpha.set_part(MultilinearForm(sig, {0}, {1, 0}));  // + x1
    alpha.set_constant(Fp(1, 2));

    Point x = make_point(sig, {1, 0, 1, 1});
    CHECK(alpha.evaluate(x) == Fp(1, 2) + Fp(1, 2) + Fp(1, 2));  // x.y + x1 + 1
    CHECK(alpha.multilinear_part() == dot_form(2, 2));

    MultiaffineForm low(sig);
    low.set_part(MultilinearForm(sig, {0}, {1, 0}));
    low.set_part(MultilinearForm(sig, {1}, {1, 0}));
    CHECK(low.multilinear_part().is_zero());

    Rng rng(4242);
    for (int trial = 0; trial < 30; ++trial) {
        SpaceSignature s = mlvtest::random_signature(rng, 1, 3, 2, {2, 3});
        MultiaffineForm a = mlvtest::random_multiaffine(rng, s);
        Point pt = mlvtest::random_point(rng, s);
        Fp total = a.constant();
        for (const auto& [mask, part] : a.parts()) total += part.evaluate(pt);
        CHECK(a.evaluate(pt) == total);
    }
}

TEST_CASE("subspace views translate points and forms both ways") {
    SpaceSignature sig(3, {2, 1, 2});
    SubSpace sub(sig, {0, 2});
    CHECK(sub.reduced_sig().k() == 2);
    CHECK(sub.reduced_sig().dims() == std::vector<unsigned>{2, 2});

    Point full = make_point(sig, {1, 2, 1, 0, 2});
    Point reduced = sub.reduce_point(full);
    CHECK(reduced.flat == std::vector<std::uint8_t>{1, 2, 0, 2});
    Point back = sub.embed_point(reduced, full);
    CHECK(back == full);

    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        MultilinearForm f = mlvtest::random_form(rng, sig, {0, 2});
        MultilinearForm r = sub.reduce_form(f);
        CHECK(sub.lift_form(r) == f);
        Point x = mlvtest::random_point(rng, sig);
        CHECK(r.evaluate(sub.reduce_point(x)) == f.evaluate(x));
    }

    MultilinearForm touches_middle = MultilinearForm::zero(sig, {1});
    CHECK_THROWS_AS(sub.reduce_form(touches_middle), MismatchError);
}

TEST_CASE("form constructors validate their input") {
    SpaceSignature sig(2, {2, 2});
    CHECK_THROWS_AS(MultilinearForm(sig, {1, 0}, {1, 0, 0, 1}), MismatchError);  // unsorted
    CHECK_THROWS_AS(MultilinearForm(sig, {0, 2}, {1, 0, 0, 1}), MismatchError);  // out of range
    CHECK_THROWS_AS(MultilinearForm(sig, {0, 1}, {1, 0}), MismatchError);        // wrong size
    CHECK_THROWS_AS(MultilinearForm(sig, {0}, {2, 0}), MismatchError);  // coefficient >= p
}
