#include <doctest.h>

#include "msubdiv/scheme.hpp"
#include "test_support.hpp"

using namespace msubdiv;

namespace {

Mask mask1d(std::map<Coord, Rational> values) {
    std::map<Point, Rational> coef;
    for (auto& [x, v] : values) coef[{x}] = v;
    return Mask(1, coef);
}

SubdivisionOp pair_op(int which) {
    std::map<Point, Rational> coef{{{0, -2}, Rational(1, 3)}, {{0, -1}, Rational(2, 3)},
                                   {{0, 0}, Rational(1)},     {{0, 1}, Rational(2, 3)},
                                   {{0, 2}, Rational(1, 3)}};
    IntMatrix m = which == 1 ? IntMatrix(2, {1, 1, 1, -2}) : IntMatrix(2, {2, -1, 1, -2});
    return SubdivisionOp("S" + std::to_string(which), Mask(2, coef), m);
}

SubdivisionOp gap_op() {
    return SubdivisionOp("S1", mask1d({{0, Rational(1, 2)}, {3, Rational(1)}, {6, Rational(1, 2)}}),
                         IntMatrix::scalar(2), LatticeSet(1, {{0}, {3}}));
}

} // namespace

TEST_CASE("sum rules: paper masks pass, broken mask reports the residual") {
    CHECK(check_sum_rules(pair_op(1)).ok);
    CHECK(check_sum_rules(pair_op(2)).ok);

    SubdivisionOp gap("S1", mask1d({{0, Rational(1, 2)}, {3, Rational(1)}, {6, Rational(1, 2)}}),
                      IntMatrix::scalar(2));
    CHECK(check_sum_rules(gap).ok);

    SubdivisionOp broken("S1", mask1d({{0, Rational(1)}, {1, Rational(1, 2)}}),
                         IntMatrix::scalar(2));
    auto rep = check_sum_rules(broken);
    CHECK_FALSE(rep.ok);
    int bad = 0;
    for (auto& [d, res] : rep.residuals)
        if (!res.is_zero()) {
            ++bad;
            CHECK(res == Rational(-1, 2));
        }
    CHECK(bad == 1);
}

TEST_CASE("jointly expanding: pair certified at depth 2, sqrt3-type at depth 2") {
    SchemeSet pair({pair_op(1), pair_op(2)});
    auto rep = check_jointly_expanding(pair, 2);
    CHECK(rep.verdict == Expansion::certified_yes);
    CHECK(rep.depth == 2);

    SchemeSet single({SubdivisionOp(
        "S1", mask1d({{0, Rational(1, 2)}, {1, Rational(1)}, {2, Rational(1, 2)}}),
        IntMatrix::scalar(2))});
    auto rep2 = check_jointly_expanding(single, 1);
    CHECK(rep2.verdict == Expansion::certified_yes);
    CHECK(rep2.depth == 1);

    std::map<Point, Rational> c3{{{0, 0}, Rational(1)}, {{1, 0}, Rational(1)},
                                 {{0, 1}, Rational(1)}};
    SchemeSet sqrt3({SubdivisionOp("S1", Mask(2, c3), IntMatrix(2, {1, -2, 2, -1}))});
    CHECK(check_jointly_expanding(sqrt3, 1).verdict == Expansion::inconclusive);
    auto rep3 = check_jointly_expanding(sqrt3, 2);
    CHECK(rep3.verdict == Expansion::certified_yes);
    CHECK(rep3.depth == 2);

    // eigenvalue 1 on an axis: certified violation
    std::map<Point, Rational> cid{{{0, 0}, Rational(1)}, {{0, 1}, Rational(1)}};
    SchemeSet stretched({SubdivisionOp("S1", Mask(2, cid), IntMatrix(2, {1, 0, 0, 2}))});
    CHECK(check_jointly_expanding(stretched, 3).verdict == Expansion::certified_no);
}

TEST_CASE("assumption N: exact norm decisions") {
    SchemeSet yes({SubdivisionOp("S1", mask1d({{0, Rational(1)}, {1, Rational(1)}}),
                                 IntMatrix::scalar(2))});
    CHECK(check_assumption_n(yes).front().ok);

    std::map<Point, Rational> c{{{0, 0}, Rational(1)}, {{1, 0}, Rational(1)},
                                {{0, 1}, Rational(1)}};
    SchemeSet sqrt3({SubdivisionOp("S1", Mask(2, c), IntMatrix(2, {1, -2, 2, -1}))});
    auto e = check_assumption_n(sqrt3).front();
    CHECK_FALSE(e.ok);
    CHECK(e.norm2 == doctest::Approx(1.0).epsilon(1e-9));

    SchemeSet m1({pair_op(1)});
    auto e1 = check_assumption_n(m1).front();
    CHECK(e1.ok);
    CHECK(e1.norm2 < 1.0);
    // the second dilation of the pair sits exactly on the norm boundary
    SchemeSet m2({pair_op(2)});
    CHECK_FALSE(check_assumption_n(m2).front().ok);
}

TEST_CASE("apply_subdivision: impulse reproduces the mask, iterates by the two-scale sum") {
    SubdivisionOp op("S1", mask1d({{0, Rational(1)}, {1, Rational(1)}}), IntMatrix::scalar(2));
    BoundedSequence delta = BoundedSequence::delta(1);
    BoundedSequence once = apply_subdivision(op, delta);
    CHECK(once.at({0}) == Rational(1));
    CHECK(once.at({1}) == Rational(1));
    CHECK(once.deviation().size() == 2);
    BoundedSequence twice = apply_subdivision(op, once);
    for (Coord x = 0; x <= 3; ++x) CHECK(twice.at({x}) == Rational(1));
    CHECK(twice.deviation().size() == 4);
}

TEST_CASE("apply_subdivision reproduces constants under the sum rules") {
    SubdivisionOp op = gap_op();
    BoundedSequence ones(1, Rational(1));
    BoundedSequence out = apply_subdivision(op, ones);
    CHECK(out.background() == Rational(1));
    CHECK(out.deviation().empty());

    // windowed version: interior points of the output stay at one
    BoundedSequence window(1);
    for (Coord x = -8; x <= 8; ++x) window.set({x}, Rational(1));
    BoundedSequence wout = apply_subdivision(op, window);
    for (Coord a = -4; a <= 4; ++a) CHECK(wout.at({a}) == Rational(1));

    // nonzero background refuses masks without sum rules
    SubdivisionOp bad("S1", mask1d({{0, Rational(1)}, {1, Rational(1, 3)}}), IntMatrix::scalar(2));
    CHECK_THROWS_AS(apply_subdivision(bad, ones), std::invalid_argument);
}

TEST_CASE("support of the result stays inside M supp(c) + supp(a)") {
    std::mt19937 gen(23);
    for (int rep = 0; rep < 60; ++rep) {
        int dim = 1 + int(gen() % 2);
        SchemeSet s = testgen::random_scheme(gen, dim, 1, false);
        BoundedSequence c = testgen::random_sequence(gen, dim, 4);
        if (c.deviation().empty()) continue;
        BoundedSequence out = apply_subdivision(s.ops[0], c);
        LatticeSet hull = minkowski_sum(image(s.ops[0].dilation, c.deviation_support()),
                                        s.ops[0].mask.support());
        CHECK(out.deviation_support().is_subset_of(hull));
    }
}

TEST_CASE("compose matches applying the factors in sequence") {
    SubdivisionOp op("S1", mask1d({{0, Rational(1)}, {1, Rational(1)}}), IntMatrix::scalar(2));
    SubdivisionOp sq = compose(op, op);
    CHECK(sq.dilation.det() == 4);
    for (Coord x = 0; x <= 3; ++x) CHECK(sq.mask.at({x}) == Rational(1));
    CHECK(sq.mask.support().size() == 4);

    CHECK_THROWS_AS(SubdivisionOp("I", mask1d({{0, Rational(1)}}), IntMatrix::scalar(1)),
                    std::invalid_argument);

    std::mt19937 gen(29);
    for (int rep = 0; rep < 40; ++rep) {
        int dim = 1 + int(gen() % 2);
        SchemeSet s = testgen::random_scheme(gen, dim, 2, false);
        BoundedSequence c = testgen::random_sequence(gen, dim, 3);
        SubdivisionOp ab = compose(s.ops[0], s.ops[1]);
        CHECK(apply_subdivision(ab, c) ==
              apply_subdivision(s.ops[0], apply_subdivision(s.ops[1], c)));
    }
}

TEST_CASE("compose is associative up to label") {
    std::mt19937 gen(31);
    for (int rep = 0; rep < 25; ++rep) {
        SchemeSet s = testgen::random_scheme(gen, 1, 2, false);
        SubdivisionOp left = compose(compose(s.ops[0], s.ops[1]), s.ops[0]);
        SubdivisionOp right = compose(s.ops[0], compose(s.ops[1], s.ops[0]));
        CHECK(left.mask == right.mask);
        CHECK(left.dilation == right.dilation);
    }
}

TEST_CASE("sum rules are closed under composition") {
    SchemeSet pair({pair_op(1), pair_op(2)});
    for (const auto& a : pair.ops)
        for (const auto& b : pair.ops) CHECK(check_sum_rules(compose(a, b)).ok);

    std::mt19937 gen(37);
    for (int rep = 0; rep < 30; ++rep) {
        SchemeSet s = testgen::random_scheme(gen, 1 + int(gen() % 2), 2, false);
        CHECK(check_sum_rules(compose(s.ops[0], s.ops[1])).ok);
    }
}

TEST_CASE("power_scheme_set enumerates ordered words") {
    SchemeSet pair({pair_op(1), pair_op(2)});
    CHECK(power_scheme_set(pair, 1) == pair);

    SchemeSet p2 = power_scheme_set(pair, 2);
    CHECK(p2.count() == 4);
    // dilations are M_{j2} M_{j1} over all ordered pairs
    std::vector<IntMatrix> expected;
    for (size_t j2 : {0, 1})
        for (size_t j1 : {0, 1}) expected.push_back(pair.ops[j2].dilation * pair.ops[j1].dilation);
    int found = 0;
    for (const auto& e : expected)
        for (const auto& op : p2.ops)
            if (op.dilation == e) {
                ++found;
                break;
            }
    CHECK(found == 4);

    CHECK_THROWS_AS(power_scheme_set(pair, 8), std::invalid_argument);

    std::map<Point, Rational> c{{{0, 0}, Rational(1)}, {{1, 0}, Rational(1)},
                                {{0, 1}, Rational(1)}, {{1, 1}, Rational(1)}};
    SchemeSet sqrt3({SubdivisionOp("S1", Mask(2, c), IntMatrix(2, {1, -2, 2, -1}))});
    CHECK_FALSE(check_assumption_n(sqrt3).front().ok);
    CHECK(smallest_assumption_n_power(sqrt3) == 2);
    SchemeSet powered = power_scheme_set(sqrt3, 2);
    for (const auto& e : check_assumption_n(powered)) CHECK(e.ok);
}
