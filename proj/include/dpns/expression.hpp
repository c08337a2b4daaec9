#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dpns {

struct ExpressionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Arithmetic over identifiers x, y with sin, cos, exp, the constant pi,
/// operators + - * / ^ and parentheses. Parsed once, evaluated many times.
class Expression {
public:
    static Expression parse(const std::string& src);
    double eval(double x, double y) const;
    const std::string& source() const { return src_; }

private:
    enum class Op { Num, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };
    struct Node {
        Op op;
        double value = 0.0;
        int a = -1, b = -1;
    };
    std::vector<Node> nodes_;
    int root_ = -1;
    std::string src_;

    double eval_node(int n, double x, double y) const;
    friend class ExprParser;
};

} // namespace dpns
