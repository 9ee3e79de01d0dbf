#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace parametrix {

// A compiled arithmetic expression in the variables x and u.
//
// Grammar (whitespace ignored):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?          right associative, binds tighter than unary minus
//   primary := number | 'x' | 'u' | 'pi' | 'e' | '(' expr ')'
//            | ('sin' | 'cos' | 'exp' | 'abs') '(' expr ')'
//            | ('min' | 'max') '(' expr ',' expr ')'
//
// Compilation produces a postfix program evaluated on a fixed-size stack, so
// evaluation allocates nothing and cannot fail; domain problems such as a
// negative base to a fractional power surface as NaN.
class Expression {
public:
    static Expression compile(std::string_view text);  // throws ParseError

    double operator()(double x, double u) const;
    const std::string& text() const { return text_; }
    bool depends_on_x() const { return uses_x_; }
    bool depends_on_u() const { return uses_u_; }

    enum class Op : std::uint8_t { Const, X, U, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Abs, Min, Max };
    struct Instr {
        Op op;
        double value;
    };

private:
    std::string text_;
    std::vector<Instr> code_;
    int max_depth_ = 0;
    bool uses_x_ = false;
    bool uses_u_ = false;
    friend class ExpressionParser;
};

}  // namespace parametrix
