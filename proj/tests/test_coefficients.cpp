#include <gtest/gtest.h>

#include <cmath>

#include "parametrix/coefficient_field.hpp"
#include "parametrix/errors.hpp"
#include "parametrix/expression.hpp"

using namespace parametrix;

TEST(CoefficientField, ConstantField) {
    const auto f = build_field(constant_spec());
    EXPECT_EQ(f.holder_exponent(), 1.0);
    EXPECT_EQ(f.a_low(), 1.0);
    EXPECT_EQ(f.holder_constant(), 0.0);
    EXPECT_TRUE(f.constant_diffusion());
    EXPECT_TRUE(f.driftless());
    const auto h = estimate_holder(f);
    EXPECT_EQ(h.exponent, 1.0);
    EXPECT_EQ(h.constant, 0.0);
}

TEST(CoefficientField, SinPerturbedFloorAndLipschitz) {
    const auto f = build_field(sin_spec(0.5));
    EXPECT_NEAR(f.a_low(), 0.5, 1e-12);
    EXPECT_EQ(f.holder_exponent(), 1.0);
    EXPECT_LE(f.holder_constant(), 0.5 + 1e-12);
    EXPECT_NEAR(f.a(0.0, 1.0), 1.0 + 0.5 * std::sin(1.0), 1e-15);
    // the sweep over the grid sees the floor
    double lo = 10;
    for (int i = 0; i <= 400; ++i) {
        for (int j = 0; j <= 40; ++j) lo = std::min(lo, f.a(-10.0 + 0.05 * i, 0.25 * j));
    }
    EXPECT_GE(lo, f.a_low() - 1e-12);
    const auto h = estimate_holder(f);
    EXPECT_EQ(h.exponent, 1.0);
    EXPECT_LE(h.constant, 0.5 + 1e-9);
}

TEST(CoefficientField, HoelderHalfExpression) {
    const auto f = build_field(expression_spec("1 + 0.3*min(1,abs(x)^0.5)"));
    EXPECT_NEAR(f.holder_exponent(), 0.5, 1e-12);
    // explicit exponents: 0.5 holds, 0.9 fails
    auto spec = expression_spec("1 + 0.3*min(1,abs(x)^0.5)");
    spec.parameters["eta"] = 0.9;
    EXPECT_THROW(build_field(spec), ValidationError);
    spec.parameters["eta"] = 0.5;
    EXPECT_NO_THROW(build_field(spec));
    const auto g = build_field(expression_spec("1 + 0.5*abs(x)^0.5"), ValidationBox::symmetric(2.0));
    EXPECT_NEAR(estimate_holder(g).exponent, 0.5, 0.05);
}

TEST(CoefficientField, EllipticityViolation) {
    EXPECT_THROW(build_field(sin_spec(1.5)), ValidationError);
    EXPECT_THROW(build_field(expression_spec("x")), ValidationError);
}

TEST(CoefficientField, JsonRoundTripAndParseErrors) {
    const auto spec = parse_coefficient_spec(R"({"kind": "sin_perturbed", "parameters": {"amplitude": 0.25}})");
    EXPECT_EQ(spec.kind, CoefficientKind::sin_perturbed);
    const auto again = parse_coefficient_spec(to_json(spec));
    EXPECT_EQ(again.parameters.at("amplitude"), 0.25);
    try {
        parse_coefficient_spec(R"({"kind": "constant",, })");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 20u);  // offset of the second comma
        EXPECT_NE(std::string(e.what()).find("position"), std::string::npos);
    }
    EXPECT_THROW(parse_coefficient_spec(R"({"kind": "cubic"})"), DomainError);
}

TEST(Expression, ParsesAndReportsPosition) {
    const auto e = Expression::compile("1 + 0.5*sin(x + u)");
    EXPECT_NEAR(e(0.3, 0.2), 1 + 0.5 * std::sin(0.5), 1e-15);
    try {
        Expression::compile("1 + * x");
        FAIL() << "expected a parse error";
    } catch (const ParseError& err) {
        EXPECT_EQ(err.position(), 4u);
    }
}

TEST(DriftSign, ZeroMapsToMinusOne) {
    EXPECT_EQ(drift_sign(0.0), -1.0);
    EXPECT_EQ(drift_sign(-2.0), -1.0);
    EXPECT_EQ(drift_sign(1e-300), 1.0);
}
