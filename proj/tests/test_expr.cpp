#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "caustix/expr.hpp"
#include "caustix/geom_core.hpp"
#include "support/oracles.hpp"

using namespace caustix;

namespace {

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

}  // namespace

TEST(Parse, EllipsoidValueAndGradient) {
  const Expression e = parse_expression("x1^2/4 + x2^2/2 + x3^2 - 1", 3);
  const auto [f, g] = eval_with_gradient(e, v3(2, 0, 0));
  EXPECT_NEAR(f, 0.0, 1e-15);
  EXPECT_TRUE(g.isApprox(v3(1, 0, 0), 1e-15));
}

TEST(Parse, ProductRule) {
  const auto [f, g] = eval_with_gradient(parse_expression("x1*x2", 3), v3(3, 5, 0));
  EXPECT_DOUBLE_EQ(f, 15.0);
  EXPECT_TRUE(g.isApprox(v3(5, 3, 0)));
}

TEST(Parse, TruncatedInputReportsOffset) {
  try {
    parse_expression("x1 +", 3);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Parse, OutOfRangeVariableIsInputError) {
  EXPECT_THROW(parse_expression("x4", 3), InputError);
  EXPECT_THROW(parse_expression("x0", 3), InputError);
}

TEST(Parse, UnknownIdentifierAndBadSyntax) {
  EXPECT_THROW(parse_expression("tan(x1)", 3), ParseError);
  EXPECT_THROW(parse_expression("y + 1", 3), ParseError);
  EXPECT_THROW(parse_expression("(x1", 3), ParseError);
  EXPECT_THROW(parse_expression("x1 x2", 3), ParseError);
  EXPECT_THROW(parse_expression("", 3), ParseError);
}

TEST(Parse, PrecedenceAndAssociativity) {
  const Vec x = v3(2, 3, 0);
  EXPECT_DOUBLE_EQ(parse_expression("2^3^2", 3).eval(x), 512.0);
  EXPECT_DOUBLE_EQ(parse_expression("-x1^2", 3).eval(x), -4.0);
  EXPECT_DOUBLE_EQ(parse_expression("x1 - x2 - 1", 3).eval(x), -2.0);
  EXPECT_DOUBLE_EQ(parse_expression("x2 / x1 / 2", 3).eval(x), 0.75);
  EXPECT_DOUBLE_EQ(parse_expression("1 + 2 * x2", 3).eval(x), 7.0);
  EXPECT_DOUBLE_EQ(parse_expression("1.5e1 + abs(-x1)", 3).eval(x), 17.0);
}

TEST(Eval, DomainViolationsNameTheNode) {
  try {
    parse_expression("sqrt(x1)", 3).eval(v3(-1, 0, 0));
    FAIL() << "expected EvalError";
  } catch (const EvalError& e) {
    EXPECT_NE(e.node().find("sqrt"), std::string::npos);
  }
  EXPECT_THROW(parse_expression("1/x1", 3).eval(v3(0, 0, 0)), EvalError);
  EXPECT_THROW(eval_with_gradient(parse_expression("sqrt(x1)", 3), v3(0, 0, 0)), EvalError);
}

TEST(Eval, DimensionMismatchIsInputError) {
  EXPECT_THROW(parse_expression("x1", 3).eval(Vec::Zero(2)), InputError);
}

TEST(Properties, GradientMatchesFiniteDifferences) {
  const char* sources[] = {
      "x1^2/4 + x2^2/2 + x3^2 - 1",
      "sin(x1)*cos(x2) + exp(0.3*x3)",
      "sqrt(1 + x1^2 + x2^2) - cosh(x3/2)",
      "x1*x2*x3 + sinh(x1 - x2) / (2 + x3^2)",
      "abs(x1 + 5) ^ 1.5 + x2^3 - 2*x3",
      "0.05*exp(-((x1-1)^2 + x2^2 + x3^2)) + x1^2",
  };
  oracle::Gen g(3);
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const Expression e = parse_expression(sources[k % std::size(sources)], 3);
    const Vec x = g.box(3, -1.5, 1.5);
    const Vec grad = eval_with_gradient(e, x).second;
    const Vec fd = oracle::fd_gradient([&](const Vec& y) { return e.eval(y); }, x);
    EXPECT_LE((grad - fd).norm(), 1e-6 * std::max(1.0, grad.norm())) << sources[k % std::size(sources)];
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(Properties, PrintParseRoundTrip) {
  oracle::Gen g(9);
  const char* atoms[] = {"x1", "x2", "x3", "0.5", "3", "1e-3"};
  const char* binops[] = {" + ", " - ", " * ", " / ", "^"};
  const char* funcs[] = {"sin", "cos", "sinh", "cosh", "exp", "sqrt", "abs"};
  for (int k = 0; k < 300; ++k) {
    std::string s = atoms[g.integer(0, 5)];
    const int depth = g.integer(1, 6);
    for (int d = 0; d < depth; ++d) {
      const int choice = g.integer(0, 2);
      if (choice == 0)
        s = "(" + s + ")" + binops[g.integer(0, 4)] + atoms[g.integer(0, 5)];
      else if (choice == 1)
        s = std::string(funcs[g.integer(0, 6)]) + "(" + s + ")";
      else
        s = "-(" + s + ")";
    }
    const Expression e = parse_expression(s, 3);
    const Expression again = parse_expression(e.to_string(), 3);
    EXPECT_TRUE(e == again) << s << " -> " << e.to_string();
  }
}

TEST(Properties, FuzzedInputEitherParsesOrRaisesParseError) {
  oracle::Gen g(21);
  const std::string alphabet = "x123 +-*/^().esincoqrtabh0987,e";
  for (int k = 0; k < 5000; ++k) {
    std::string s;
    const int len = g.integer(0, 24);
    for (int i = 0; i < len; ++i) s.push_back(alphabet[static_cast<std::size_t>(g.integer(0, static_cast<int>(alphabet.size()) - 1))]);
    try {
      parse_expression(s, 3);
    } catch (const ParseError&) {
    } catch (const InputError&) {
      // Out-of-range variables such as x9 are input errors by contract.
    }
  }
  // Deep nesting is rejected rather than overflowing the stack.
  EXPECT_THROW(parse_expression(std::string(10000, '(') + "x1" + std::string(10000, ')'), 3), ParseError);
}
