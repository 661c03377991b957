#include "termlim/ring.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace termlim;

namespace {

Rational abs_diff(const Rational& a, const Rational& b) {
    Rational d = a - b;
    return d < 0 ? Rational(-d) : d;
}

/// Independent series oracle: x^i and i! accumulated separately, summed
/// to n terms. Different route than the running-term recursion.
Rational series_oracle(std::uint64_t n, const Rational& x) {
    Rational sum = 0;
    for (std::uint64_t i = 0; i <= n; ++i) {
        Rational power = 1;
        for (std::uint64_t j = 0; j < i; ++j) power *= x;
        BigInt fact = 1;
        for (std::uint64_t j = 2; j <= i; ++j) fact *= j;
        sum += power / Rational(fact);
    }
    return sum;
}

} // namespace

TEST_CASE("rational parsing and rendering") {
    REQUIRE(parse_rational("5/2") == Rational(5, 2));
    REQUIRE(parse_rational("-3/4") == Rational(-3, 4));
    REQUIRE(parse_rational("7") == Rational(7));
    REQUIRE(parse_rational("1.25") == Rational(5, 4));
    REQUIRE(parse_rational("-0.5") == Rational(-1, 2));
    REQUIRE(rational_str(Rational(1)) == "1/1");
    REQUIRE(rational_str(Rational(79, 48)) == "79/48");
    REQUIRE(rational_str(parse_rational("2/4")) == "1/2");
    REQUIRE_THROWS(parse_rational("x"));
    REQUIRE_THROWS(parse_rational("1/0"));
}

TEST_CASE("exponential partial sums") {
    REQUIRE(exp_partial(0, Rational(9, 7)) == Rational(1));
    REQUIRE(exp_partial(2, Rational(1)) == Rational(5, 2));
    REQUIRE(exp_partial(3, Rational(1, 2)) == Rational(79, 48));

    SECTION("recursion matches the closed-form series") {
        std::vector<Rational> grid = {Rational(-2), Rational(-1), Rational(-1, 2), Rational(0),
                                      Rational(1, 3), Rational(1), Rational(5, 2)};
        for (std::uint64_t n = 0; n <= 12; ++n)
            for (const Rational& x : grid) REQUIRE(exp_partial(n, x) == series_oracle(n, x));
    }

    SECTION("strictly increasing for positive arguments") {
        for (const Rational& x : {Rational(1, 3), Rational(1), Rational(7, 2)})
            for (std::uint64_t n = 0; n <= 20; ++n)
                REQUIRE(exp_partial(n + 1, x) > exp_partial(n, x));
    }

    SECTION("factorials outgrow fixed-width integers without harm") {
        Rational q = exp_partial(25, Rational(1));
        REQUIRE(denominator(q) > BigInt("100000000000000000000")); // past any 64-bit integer
    }
}

TEST_CASE("lifting rational maps") {
    CauchyReal half = CauchyReal::constant(Rational(1, 2));

    SECTION("identity is pointwise") {
        CauchyReal same = lift(RationalMap::identity(), half);
        REQUIRE(same.at(3) == Rational(1, 2));
        REQUIRE(same.has_modulus());
    }

    SECTION("squaring a constant") {
        RationalMap square{[](const Rational& q) { return Rational(q * q); }, std::nullopt, "sq"};
        CauchyReal sq = lift(square, half);
        REQUIRE(sq.at(0) == Rational(1, 4));
        REQUIRE_FALSE(sq.has_modulus()); // no declared continuity
    }

    SECTION("diagonal exponential produces the partial sums") {
        CauchyReal e = exp_real(CauchyReal::constant(Rational(1)));
        for (std::uint64_t n = 0; n <= 6; ++n) REQUIRE(e.at(n) == exp_partial(n, Rational(1)));
    }
}

TEST_CASE("eval") {
    SECTION("constants evaluate to themselves") {
        EvalResult r = eval(CauchyReal::constant(Rational(3, 7)), 100, 10);
        REQUIRE(r.verdict.converged());
        REQUIRE(r.verdict.witness == 0);
        REQUIRE(*r.approx == Rational(3, 7));
    }

    SECTION("e to a millionth") {
        CauchyReal e = exp_real(CauchyReal::constant(Rational(1)));
        EvalResult r = eval(e, 1000000, 30);
        REQUIRE(r.verdict.converged());
        REQUIRE(abs_diff(*r.approx, series_oracle(30, Rational(1))) < Rational(1, 1000000));
    }

    SECTION("oscillating streams are refuted") {
        CauchyReal sign([](std::uint64_t n) { return Rational(n % 2 ? -1 : 1); }, std::nullopt,
                        "(-1)^n");
        EvalResult r = eval(sign, 1, 12);
        REQUIRE(r.verdict.refuted());
        REQUIRE_FALSE(r.approx.has_value());
    }

    SECTION("slow drift is caught by the long pair") {
        // adjacent gaps shrink but the sum drifts: x_n = H_n / 8
        CauchyReal drift(
            [](std::uint64_t n) {
                Rational h = 0;
                for (std::uint64_t i = 1; i <= n + 1; ++i) h += Rational(1, i);
                return Rational(h / 8);
            },
            std::nullopt, "harmonic/8");
        EvalResult r = eval(drift, 50, 60);
        REQUIRE_FALSE(r.verdict.converged());
    }
}

TEST_CASE("representation independence of the lifted exponential") {
    CauchyReal one = CauchyReal::constant(Rational(1));
    CauchyReal one_wobbly(
        [](std::uint64_t n) {
            BigInt fact = 1;
            for (std::uint64_t j = 2; j <= n + 2; ++j) fact *= j;
            return Rational(1) + Rational(1, fact);
        },
        std::nullopt, "1+eps");

    for (std::uint64_t m : {100, 1000, 10000}) {
        EvalResult a = eval(exp_real(one), m, 40);
        EvalResult b = eval(exp_real(one_wobbly), m, 40);
        REQUIRE(a.verdict.converged());
        REQUIRE(b.verdict.converged());
        REQUIRE(abs_diff(*a.approx, *b.approx) < Rational(2, m));
    }
}
