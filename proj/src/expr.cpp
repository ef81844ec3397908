#include "pnp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "pnp/errors.hpp"

namespace pnp {

struct Expression::Node {
    enum class Op { constant, var_x, var_y, add, sub, mul, div, pow, neg,
                    cos, sin, exp, sqrt, abs };
    Op op = Op::constant;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr leaf(double v) {
    auto n = std::make_shared<Node>();
    n->op = Node::Op::constant;
    n->value = v;
    return n;
}

NodePtr unary(Node::Op op, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    return n;
}

NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

/// Recursive-descent parser over the expression text. Grammar:
///   sum     := product (('+' | '-') product)*
///   product := power (('*' | '/') power)*
///   power   := unary ('^' power)?
///   unary   := '-' unary | primary
///   primary := number | 'x' | 'y' | 'pi' | func '(' sum ')' | '(' sum ')'
class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    NodePtr run() {
        NodePtr n = sum();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return n;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression '" + text_ + "': " + what +
                          " at position " + std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr sum() {
        NodePtr n = product();
        for (;;) {
            if (consume('+'))
                n = binary(Node::Op::add, n, product());
            else if (consume('-'))
                n = binary(Node::Op::sub, n, product());
            else
                return n;
        }
    }

    NodePtr product() {
        NodePtr n = unary();
        for (;;) {
            if (consume('*'))
                n = binary(Node::Op::mul, n, unary());
            else if (consume('/'))
                n = binary(Node::Op::div, n, unary());
            else
                return n;
        }
    }

    // unary minus binds looser than '^', so -x^2 means -(x^2); the exponent
    // goes back through unary, which makes '^' right associative and lets it
    // carry a signed exponent
    NodePtr unary() {
        if (consume('-'))
            return pnp::unary(Node::Op::neg, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (consume('^'))
            return binary(Node::Op::pow, base, unary());
        return base;
    }

    std::string identifier() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        return text_.substr(start, pos_ - start);
    }

    NodePtr primary() {
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string id = identifier();
            if (id == "x") return unary_var(Node::Op::var_x);
            if (id == "y") return unary_var(Node::Op::var_y);
            if (id == "pi") return leaf(std::acos(-1.0));
            Node::Op op;
            if (id == "cos") op = Node::Op::cos;
            else if (id == "sin") op = Node::Op::sin;
            else if (id == "exp") op = Node::Op::exp;
            else if (id == "sqrt") op = Node::Op::sqrt;
            else if (id == "abs") op = Node::Op::abs;
            else fail("unknown identifier '" + id + "'");
            if (!consume('('))
                fail("expected '(' after '" + id + "'");
            NodePtr arg = sum();
            if (!consume(')'))
                fail("expected ')'");
            return pnp::unary(op, arg);
        }
        if (consume('(')) {
            NodePtr n = sum();
            if (!consume(')'))
                fail("expected ')'");
            return n;
        }
        fail(pos_ < text_.size()
                 ? "unexpected character '" + std::string(1, c) + "'"
                 : "unexpected end of input");
    }

    NodePtr unary_var(Node::Op op) {
        auto n = std::make_shared<Node>();
        n->op = op;
        return n;
    }

    NodePtr number() {
        skip_ws();
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin)
            fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        return leaf(v);
    }
};

double eval_node(const Node& n, double x, double y) {
    using Op = Node::Op;
    switch (n.op) {
    case Op::constant: return n.value;
    case Op::var_x: return x;
    case Op::var_y: return y;
    case Op::add: return eval_node(*n.a, x, y) + eval_node(*n.b, x, y);
    case Op::sub: return eval_node(*n.a, x, y) - eval_node(*n.b, x, y);
    case Op::mul: return eval_node(*n.a, x, y) * eval_node(*n.b, x, y);
    case Op::div: return eval_node(*n.a, x, y) / eval_node(*n.b, x, y);
    case Op::pow: return std::pow(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
    case Op::neg: return -eval_node(*n.a, x, y);
    case Op::cos: return std::cos(eval_node(*n.a, x, y));
    case Op::sin: return std::sin(eval_node(*n.a, x, y));
    case Op::exp: return std::exp(eval_node(*n.a, x, y));
    case Op::sqrt: return std::sqrt(eval_node(*n.a, x, y));
    case Op::abs: return std::abs(eval_node(*n.a, x, y));
    }
    return 0.0;
}

} // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = Parser(text).run();
    e.text_ = text;
    return e;
}

double Expression::eval(double x, double y) const {
    if (!root_)
        return 0.0;
    return eval_node(*root_, x, y);
}

} // namespace pnp
