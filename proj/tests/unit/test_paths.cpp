#include <doctest.h>

#include "mlv/paths.hpp"

#include "../support/gen.hpp"

using namespace mlv;
using mlvtest::Rng;

namespace {

MultilinearForm dot_form(unsigned p, unsigned n) {
    SpaceSignature sig(p, {n, n});
    std::vector<std::uint8_t> c(n * n, 0);
    for (unsigned i = 0; i < n; ++i) c[i * n + i] = 1;
    return MultilinearForm(sig, {0, 1}, std::move(c));
}

Point make_point(std::vector<std::uint8_t> flat) { return Point{std::move(flat)}; }

/// {x.y = 1} on F_2^2 x F_2^2: a six-vertex cycle in the point graph.
RestrictedSet six_cycle() {
    MultilinearForm rho = dot_form(2, 2);
    return RestrictedSet(rho.sig(), {}, rho);
}

/// {x.y != 0, x1 y2 + x2 y1 = 0} over F_2: two isolated points.
RestrictedSet split_pair() {
    SpaceSignature sig(2, {2, 2});
    MultilinearForm beta(sig, {0, 1}, {0, 1, 1, 0});
    return RestrictedSet(sig, {beta}, dot_form(2, 2));
}

}  // namespace

TEST_CASE("restricted set membership and validation") {
    RestrictedSet set = split_pair();
    CHECK(set.contains(make_point({1, 0, 1, 0})));
    CHECK(set.contains(make_point({0, 1, 0, 1})));
    CHECK_FALSE(set.contains(make_point({1, 1, 1, 0})));  // beta = 1
    CHECK_FALSE(set.contains(make_point({0, 0, 1, 0})));  // rho = 0

    SpaceSignature other(3, {2, 2});
    CHECK_THROWS_AS(RestrictedSet(other, {}, dot_form(2, 2)), MismatchError);
}

TEST_CASE("step bounds by arity") {
    CHECK(diameter_bound(1) == 3);
    CHECK(diameter_bound(2) == 15);
    CHECK(diameter_bound(3) == 49);
    CHECK(default_s_bound(2) == 16);
    CHECK(default_s_bound(3) == 50);
}

TEST_CASE("connected component of the six-cycle") {
    RestrictedSet set = six_cycle();
    ComponentSummary c = connected_component(set, make_point({1, 0, 1, 0}));
    CHECK(c.ranks == std::vector<std::uint64_t>{5, 7, 10, 11, 13, 14});

    CHECK_THROWS_AS(connected_component(set, make_point({0, 0, 0, 0})), PreconditionFailed);
}

TEST_CASE("exact diameters") {
    CHECK(exact_diameter(six_cycle()) == 3);

    // singleton set: {xy != 0} over F_2 x F_2
    MultilinearForm rho1 = dot_form(2, 1);
    CHECK(exact_diameter(RestrictedSet(rho1.sig(), {}, rho1)) == 0);

    CHECK_THROWS_AS(exact_diameter(six_cycle(), 3), CapExceeded);

    MultilinearForm zero = MultilinearForm::zero(SpaceSignature(2, {1, 1}), {0, 1});
    CHECK_THROWS_AS(exact_diameter(RestrictedSet(zero.sig(), {}, zero)),
                    PreconditionFailed);
}

TEST_CASE("disconnected sets are reported with both components") {
    RestrictedSet set = split_pair();
    ComponentSummary c = connected_component(set, make_point({1, 0, 1, 0}));
    CHECK(c.ranks == std::vector<std::uint64_t>{5});

    CHECK_THROWS_WITH_AS(exact_diameter(set),
                         doctest::Contains("disconnected"), NotConnected);
    try {
        good_sequence(set, make_point({1, 0, 1, 0}), make_point({0, 1, 0, 1}));
        FAIL("expected NotConnected");
    } catch (const NotConnected& e) {
        CHECK(e.component_a == "(1,0|1,0)");
        CHECK(e.component_b == "(0,1|0,1)");
    }
}

TEST_CASE("good sequence along the six-cycle") {
    RestrictedSet set = six_cycle();
    Point z = make_point({1, 0, 1, 0});
    Point y = make_point({0, 1, 0, 1});
    GoodSequence seq = good_sequence(set, z, y);
    CHECK(seq.points.size() == 4);  // opposite vertices of a six-cycle
    CHECK(seq.s_bound == 16);
    for (const Fp& l : seq.lambdas) CHECK(l == Fp(1, 2));
    verify_good_sequence(set, seq, z, y);

    // a walk that must stay within two points does not exist
    PathOptions tight;
    tight.s_bound = 2;
    CHECK_THROWS_AS(good_sequence(set, z, y, tight), NotFound);
}

TEST_CASE("rescaling can collapse a walk to its start") {
    // {xy != 0} over F_3 x F_3; the target is a scalar multiple of the start.
    MultilinearForm rho = dot_form(3, 1);
    RestrictedSet set(rho.sig(), {}, rho);
    Point z = make_point({1, 1});
    Point y = make_point({1, 2});
    GoodSequence seq = good_sequence(set, z, y);
    CHECK(seq.points.size() == 1);
    CHECK(seq.points.front() == z);
    CHECK(seq.lambdas[0] == Fp(1, 3));
    CHECK(seq.lambdas[1] == Fp(2, 3));
    verify_good_sequence(set, seq, z, y);
}

TEST_CASE("rescaled endpoint keeps rho at its start value") {
    MultilinearForm rho = dot_form(3, 2);
    RestrictedSet set(rho.sig(), {}, rho);
    Point z = make_point({1, 0, 1, 0});
    Point y = make_point({0, 2, 0, 1});
    REQUIRE(rho.evaluate(y) == Fp(2, 3));
    GoodSequence seq = good_sequence(set, z, y);
    verify_good_sequence(set, seq, z, y);
    CHECK(seq.lambdas[0] * seq.lambdas[1] * rho.evaluate(y) == rho.evaluate(z));
}

TEST_CASE("verification rejects corrupted sequences") {
    RestrictedSet set = six_cycle();
    Point z = make_point({1, 0, 1, 0});
    Point y = make_point({0, 1, 0, 1});
    GoodSequence seq = good_sequence(set, z, y);

    GoodSequence bad = seq;
    bad.points.back() = z;
    CHECK_THROWS_AS(verify_good_sequence(set, bad, z, y), MismatchError);

    bad = seq;
    bad.lambdas[0] = Fp(0, 2);
    CHECK_THROWS_AS(verify_good_sequence(set, bad, z, y), MismatchError);

    bad = seq;
    bad.points.insert(bad.points.begin() + 1, make_point({0, 0, 0, 0}));
    CHECK_THROWS_AS(verify_good_sequence(set, bad, z, y), MismatchError);

    bad = seq;
    bad.s_bound = 2;
    CHECK_THROWS_AS(verify_good_sequence(set, bad, z, y), MismatchError);
}

TEST_CASE("random instances produce verifiable sequences, any seed") {
    Rng rng(424242);
    int built = 0;
    int attempts = 0;
    while (built < 40 && attempts < 400) {
        ++attempts;
        SpaceSignature sig = mlvtest::random_signature(rng, 1, 3, 2, {2, 3});
        std::vector<MultilinearForm> zeros;
        if (rng.flip()) zeros.push_back(mlvtest::random_form(rng, sig, mlvtest::random_axes(rng, sig)));
        RestrictedSet set(sig, zeros, mlvtest::random_full_form(rng, sig));

        std::vector<Point> members;
        for_each_point(sig, [&](const Point& x) {
            if (set.contains(x) && members.size() < 64) members.push_back(x);
        });
        if (members.size() < 2) continue;
        const Point& z = members.front();
        const Point& y = members.back();
        try {
            GoodSequence seq = good_sequence(set, z, y);
            verify_good_sequence(set, seq, z, y);

            PathOptions shuffled;
            shuffled.seed = 9000 + attempts;
            GoodSequence alt = good_sequence(set, z, y, shuffled);
            verify_good_sequence(set, alt, z, y);
            ++built;
        } catch (const NotConnected&) {
            continue;
        }
    }
    CHECK(built == 40);
}
