#include "dpns/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace dpns {

class ExprParser {
public:
    ExprParser(const std::string& src, Expression& out) : src_(src), out_(out) {}

    void run() {
        out_.root_ = parse_sum();
        skip_ws();
        if (pos_ != src_.size())
            fail("unexpected trailing input");
    }

private:
    const std::string& src_;
    Expression& out_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ExpressionError("expression error at column " + std::to_string(pos_ + 1) +
                              ": " + what + " in '" + src_ + "'");
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int add(Expression::Node n) {
        out_.nodes_.push_back(n);
        return static_cast<int>(out_.nodes_.size() - 1);
    }

    using Op = decltype(Expression::Node::op);

    int parse_sum() {
        int lhs = parse_product();
        while (true) {
            if (eat('+'))
                lhs = add({Op::Add, 0, lhs, parse_product()});
            else if (eat('-'))
                lhs = add({Op::Sub, 0, lhs, parse_product()});
            else
                return lhs;
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        while (true) {
            if (eat('*'))
                lhs = add({Op::Mul, 0, lhs, parse_unary()});
            else if (eat('/'))
                lhs = add({Op::Div, 0, lhs, parse_unary()});
            else
                return lhs;
        }
    }

    int parse_unary() {
        if (eat('-'))
            return add({Op::Neg, 0, parse_unary(), -1});
        return parse_power();
    }

    int parse_power() {
        const int base = parse_atom();
        if (eat('^'))
            return add({Op::Pow, 0, base, parse_unary()}); // right associative
        return base;
    }

    int parse_atom() {
        skip_ws();
        if (pos_ >= src_.size())
            fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = parse_sum();
            if (!eat(')'))
                fail("missing ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(src_.c_str() + pos_, &end);
            if (end == src_.c_str() + pos_)
                fail("bad number");
            pos_ = end - src_.c_str();
            return add({Op::Num, v, -1, -1});
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   std::isalnum(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            const std::string name = src_.substr(start, pos_ - start);
            if (name == "x")
                return add({Op::VarX, 0, -1, -1});
            if (name == "y")
                return add({Op::VarY, 0, -1, -1});
            if (name == "pi")
                return add({Op::Num, 3.14159265358979323846, -1, -1});
            if (name == "sin" || name == "cos" || name == "exp") {
                if (!eat('('))
                    fail("expected '(' after " + name);
                const int arg = parse_sum();
                if (!eat(')'))
                    fail("missing ')' after " + name + " argument");
                const Op op = name == "sin" ? Op::Sin : name == "cos" ? Op::Cos : Op::Exp;
                return add({op, 0, arg, -1});
            }
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

Expression Expression::parse(const std::string& src) {
    Expression e;
    e.src_ = src;
    ExprParser(src, e).run();
    return e;
}

double Expression::eval_node(int n, double x, double y) const {
    const Node& nd = nodes_[n];
    switch (nd.op) {
    case Op::Num: return nd.value;
    case Op::VarX: return x;
    case Op::VarY: return y;
    case Op::Add: return eval_node(nd.a, x, y) + eval_node(nd.b, x, y);
    case Op::Sub: return eval_node(nd.a, x, y) - eval_node(nd.b, x, y);
    case Op::Mul: return eval_node(nd.a, x, y) * eval_node(nd.b, x, y);
    case Op::Div: return eval_node(nd.a, x, y) / eval_node(nd.b, x, y);
    case Op::Pow: return std::pow(eval_node(nd.a, x, y), eval_node(nd.b, x, y));
    case Op::Neg: return -eval_node(nd.a, x, y);
    case Op::Sin: return std::sin(eval_node(nd.a, x, y));
    case Op::Cos: return std::cos(eval_node(nd.a, x, y));
    case Op::Exp: return std::exp(eval_node(nd.a, x, y));
    }
    return 0.0;
}

double Expression::eval(double x, double y) const { return eval_node(root_, x, y); }

} // namespace dpns
