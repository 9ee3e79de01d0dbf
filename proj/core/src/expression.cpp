#include "parametrix/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "parametrix/errors.hpp"

namespace parametrix {

class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view s) : s_(s) {}

    Expression run() {
        Expression e;
        e.text_ = std::string(s_);
        out_ = &e;
        expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        if (e.code_.empty()) fail("empty expression");
        // stack depth of the postfix program
        int depth = 0, max_depth = 0;
        for (const auto& in : e.code_) {
            switch (in.op) {
                case Expression::Op::Const:
                case Expression::Op::X:
                case Expression::Op::U: ++depth; break;
                case Expression::Op::Add:
                case Expression::Op::Sub:
                case Expression::Op::Mul:
                case Expression::Op::Div:
                case Expression::Op::Pow:
                case Expression::Op::Min:
                case Expression::Op::Max: --depth; break;
                default: break;
            }
            max_depth = std::max(max_depth, depth);
        }
        e.max_depth_ = max_depth;
        return e;
    }

private:
    using Op = Expression::Op;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("expression: " + msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    void emit(Op op, double v = 0.0) { out_->code_.push_back({op, v}); }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) {
                term();
                emit(Op::Add);
            } else if (accept('-')) {
                term();
                emit(Op::Sub);
            } else {
                return;
            }
        }
    }
    void term() {
        unary();
        for (;;) {
            if (accept('*')) {
                unary();
                emit(Op::Mul);
            } else if (accept('/')) {
                unary();
                emit(Op::Div);
            } else {
                return;
            }
        }
    }
    void unary() {
        if (++nesting_ > 200) fail("expression nested too deeply");
        if (accept('-')) {
            unary();
            emit(Op::Neg);
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
        --nesting_;
    }
    void power() {
        primary();
        if (accept('^')) {
            unary();
            emit(Op::Pow);
        }
    }
    void primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string_view id = s_.substr(start, pos_ - start);
            if (id == "x") {
                out_->uses_x_ = true;
                emit(Op::X);
            } else if (id == "u") {
                out_->uses_u_ = true;
                emit(Op::U);
            } else if (id == "pi") {
                emit(Op::Const, std::numbers::pi);
            } else if (id == "e") {
                emit(Op::Const, std::numbers::e);
            } else if (id == "sin" || id == "cos" || id == "exp" || id == "abs") {
                expect('(');
                expr();
                expect(')');
                emit(id == "sin" ? Op::Sin : id == "cos" ? Op::Cos : id == "exp" ? Op::Exp : Op::Abs);
            } else if (id == "min" || id == "max") {
                expect('(');
                expr();
                expect(',');
                expr();
                expect(')');
                emit(id == "min" ? Op::Min : Op::Max);
            } else {
                pos_ = start;
                fail("unknown identifier '" + std::string(id) + "'");
            }
            return;
        }
        if (accept('(')) {
            expr();
            expect(')');
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
    void number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            }
        }
        double v = 0.0;
        const auto* first = s_.data() + start;
        const auto* last = s_.data() + pos_;
        const auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc() || res.ptr != last) {
            pos_ = start;
            fail("malformed number");
        }
        emit(Op::Const, v);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int nesting_ = 0;
    Expression* out_ = nullptr;
};

Expression Expression::compile(std::string_view text) { return ExpressionParser(text).run(); }

double Expression::operator()(double x, double u) const {
    constexpr int kInline = 64;
    double small[kInline] = {};
    std::vector<double> big;
    double* st = small;
    if (max_depth_ > kInline) {
        big.resize(max_depth_);
        st = big.data();
    }
    int sp = 0;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::Const: st[sp++] = in.value; break;
            case Op::X: st[sp++] = x; break;
            case Op::U: st[sp++] = u; break;
            case Op::Add: --sp; st[sp - 1] += st[sp]; break;
            case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
            case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
            case Op::Div: --sp; st[sp - 1] /= st[sp]; break;
            case Op::Pow: --sp; st[sp - 1] = std::pow(st[sp - 1], st[sp]); break;
            case Op::Min: --sp; st[sp - 1] = std::fmin(st[sp - 1], st[sp]); break;
            case Op::Max: --sp; st[sp - 1] = std::fmax(st[sp - 1], st[sp]); break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
            case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
            case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
            case Op::Abs: st[sp - 1] = std::abs(st[sp - 1]); break;
        }
    }
    return st[0];
}

}  // namespace parametrix
