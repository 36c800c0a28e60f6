#include "fumot/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "fumot/error.hpp"

namespace fumot {

class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view text) : text_(text) {}

    Expression run() {
        Expression out;
        out.source_ = std::string(text_);
        program_ = &out.program_;
        parse_sum();
        skip_space();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input");
        }
        out.max_stack_ = max_depth_;
        return out;
    }

private:
    using Op = Expression::Op;

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("expression '" + std::string(text_) + "': " + why +
                          " at column " + std::to_string(pos_ + 1));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void emit(Op op, double value = 0.0) {
        program_->push_back({op, value});
        switch (op) {
            case Op::Push:
            case Op::LoadX:
            case Op::LoadY:
                ++depth_;
                break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow:
            case Op::Min:
            case Op::Max:
                --depth_;
                break;
            default:
                break;
        }
        if (depth_ > max_depth_) max_depth_ = depth_;
    }

    void parse_sum() {
        parse_product();
        for (;;) {
            if (accept('+')) {
                parse_product();
                emit(Op::Add);
            } else if (accept('-')) {
                parse_product();
                emit(Op::Sub);
            } else {
                return;
            }
        }
    }

    void parse_product() {
        parse_unary();
        for (;;) {
            if (accept('*')) {
                parse_unary();
                emit(Op::Mul);
            } else if (accept('/')) {
                parse_unary();
                emit(Op::Div);
            } else {
                return;
            }
        }
    }

    void parse_unary() {
        if (accept('-')) {
            parse_unary();
            emit(Op::Neg);
        } else if (accept('+')) {
            parse_unary();
        } else {
            parse_power();
        }
    }

    void parse_power() {
        parse_primary();
        if (accept('^')) {
            parse_unary();
            emit(Op::Pow);
        }
    }

    void parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (accept('(')) {
            parse_sum();
            if (!accept(')')) fail("expected ')'");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            parse_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            parse_identifier();
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void parse_number() {
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc()) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        emit(Op::Push, value);
    }

    void parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (name == "x") return emit(Op::LoadX);
        if (name == "y") return emit(Op::LoadY);
        if (name == "pi") return emit(Op::Push, std::numbers::pi);
        if (name == "e") return emit(Op::Push, std::numbers::e);

        struct Fn {
            std::string_view name;
            Op op;
            int arity;
        };
        static constexpr std::array<Fn, 11> functions{{
            {"sin", Op::Sin, 1},   {"cos", Op::Cos, 1},   {"tan", Op::Tan, 1},
            {"exp", Op::Exp, 1},   {"log", Op::Log, 1},   {"sqrt", Op::Sqrt, 1},
            {"abs", Op::Abs, 1},   {"tanh", Op::Tanh, 1}, {"pow", Op::Pow, 2},
            {"min", Op::Min, 2},   {"max", Op::Max, 2},
        }};
        for (const auto& fn : functions) {
            if (fn.name != name) continue;
            if (!accept('(')) fail("expected '(' after " + std::string(name));
            for (int i = 0; i < fn.arity; ++i) {
                if (i > 0 && !accept(',')) fail("expected ','");
                parse_sum();
            }
            if (!accept(')')) fail("expected ')'");
            emit(fn.op);
            return;
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::vector<Expression::Instr>* program_ = nullptr;
    int depth_ = 0;
    int max_depth_ = 0;
};

Expression Expression::parse(std::string_view text) {
    return ExpressionParser(text).run();
}

Expression Expression::constant(double value) {
    Expression out;
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.source_.assign(buf, ptr);
    out.program_.push_back({Op::Push, value});
    out.max_stack_ = 1;
    return out;
}

bool Expression::is_constant() const noexcept {
    for (const auto& ins : program_) {
        if (ins.op == Op::LoadX || ins.op == Op::LoadY) return false;
    }
    return true;
}

double Expression::operator()(double x, double y) const {
    // Expressions in configs are tiny; a fixed stack keeps evaluation allocation-free.
    constexpr int kMaxStack = 64;
    if (max_stack_ > kMaxStack) {
        throw ConfigError("expression '" + source_ + "' is nested too deeply");
    }
    std::array<double, kMaxStack> stack{};
    int top = -1;
    for (const auto& ins : program_) {
        switch (ins.op) {
            case Op::Push: stack[++top] = ins.value; break;
            case Op::LoadX: stack[++top] = x; break;
            case Op::LoadY: stack[++top] = y; break;
            case Op::Add: stack[top - 1] += stack[top]; --top; break;
            case Op::Sub: stack[top - 1] -= stack[top]; --top; break;
            case Op::Mul: stack[top - 1] *= stack[top]; --top; break;
            case Op::Div: stack[top - 1] /= stack[top]; --top; break;
            case Op::Pow: stack[top - 1] = std::pow(stack[top - 1], stack[top]); --top; break;
            case Op::Min: stack[top - 1] = std::min(stack[top - 1], stack[top]); --top; break;
            case Op::Max: stack[top - 1] = std::max(stack[top - 1], stack[top]); --top; break;
            case Op::Neg: stack[top] = -stack[top]; break;
            case Op::Sin: stack[top] = std::sin(stack[top]); break;
            case Op::Cos: stack[top] = std::cos(stack[top]); break;
            case Op::Tan: stack[top] = std::tan(stack[top]); break;
            case Op::Exp: stack[top] = std::exp(stack[top]); break;
            case Op::Log: stack[top] = std::log(stack[top]); break;
            case Op::Sqrt: stack[top] = std::sqrt(stack[top]); break;
            case Op::Abs: stack[top] = std::abs(stack[top]); break;
            case Op::Tanh: stack[top] = std::tanh(stack[top]); break;
        }
    }
    return stack[0];
}

}  // namespace fumot
