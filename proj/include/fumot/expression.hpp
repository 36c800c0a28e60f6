#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fumot {

/// Closed-form scalar expression in the coordinates x and y.
///
/// Grammar: numbers, `x`, `y`, `pi`, `e`, the binary operators `+ - * / ^`
/// (`^` is right associative and binds tighter than unary minus), parentheses
/// and the functions sin, cos, tan, exp, log, sqrt, abs, tanh, pow, min, max.
/// Parsing compiles to a small postfix program, so evaluation does not
/// allocate.
class Expression {
public:
    /// Throws ConfigError on syntax errors.
    static Expression parse(std::string_view text);
    static Expression constant(double value);

    double operator()(double x, double y) const;

    const std::string& source() const noexcept { return source_; }

    /// True when the expression does not reference x or y.
    bool is_constant() const noexcept;

private:
    enum class Op : unsigned char {
        Push, LoadX, LoadY,
        Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh,
        Min, Max,
    };
    struct Instr {
        Op op;
        double value = 0.0;
    };

    friend class ExpressionParser;

    std::string source_;
    std::vector<Instr> program_;
    int max_stack_ = 0;
};

}  // namespace fumot
