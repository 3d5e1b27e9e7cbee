#include "truncgeo/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

#include "truncgeo/errors.hpp"

namespace truncgeo {

namespace {

enum class Op { Const, Theta, Gamma, X, Neg, Log, Exp, Sqrt, Add, Sub, Mul, Div, Pow };

}  // namespace

struct CompiledExpr::Node {
    Op op = Op::Const;
    double value = 0;  // Const
    int index = 0;     // Theta: zero-based component
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const CompiledExpr::Node>;

NodePtr make_node(Op op, double value, int index, NodePtr a, NodePtr b) {
    auto n = std::make_shared<CompiledExpr::Node>();
    n->op = op;
    n->value = value;
    n->index = index;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr leaf_const(double v) { return make_node(Op::Const, v, 0, nullptr, nullptr); }

double eval_node(const CompiledExpr::Node& n, const ParamPoint* p, double x) {
    switch (n.op) {
        case Op::Const:
            return n.value;
        case Op::Theta:
            if (p == nullptr) throw ConfigError("expression uses theta but no parameter point was supplied");
            if (n.index >= p->theta.size())
                throw ConfigError("expression references theta_" + std::to_string(n.index + 1) +
                                  " but the model has dimension " + std::to_string(p->theta.size()));
            return p->theta[n.index];
        case Op::Gamma:
            if (p == nullptr) throw ConfigError("expression uses gamma but no parameter point was supplied");
            return p->gamma;
        case Op::X:
            return x;
        case Op::Neg:
            return -eval_node(*n.a, p, x);
        case Op::Log:
            return std::log(eval_node(*n.a, p, x));
        case Op::Exp:
            return std::exp(eval_node(*n.a, p, x));
        case Op::Sqrt:
            return std::sqrt(eval_node(*n.a, p, x));
        case Op::Add:
            return eval_node(*n.a, p, x) + eval_node(*n.b, p, x);
        case Op::Sub:
            return eval_node(*n.a, p, x) - eval_node(*n.b, p, x);
        case Op::Mul:
            return eval_node(*n.a, p, x) * eval_node(*n.b, p, x);
        case Op::Div:
            return eval_node(*n.a, p, x) / eval_node(*n.b, p, x);
        case Op::Pow:
            return std::pow(eval_node(*n.a, p, x), eval_node(*n.b, p, x));
    }
    throw Error("unreachable expression op");
}

class Parser {
  public:
    explicit Parser(const std::string& src) : src_(src) {}

    NodePtr parse() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

    bool uses_x = false;
    bool uses_params = false;

  private:
    const std::string& src_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression error at position " + std::to_string(pos_) + " in \"" + src_ + "\": " + msg);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    // expression := term {('+'|'-') term}
    NodePtr expression() {
        NodePtr lhs = term();
        for (;;) {
            if (consume('+'))
                lhs = make_node(Op::Add, 0, 0, lhs, term());
            else if (consume('-'))
                lhs = make_node(Op::Sub, 0, 0, lhs, term());
            else
                return lhs;
        }
    }

    // term := unary {('*'|'/') unary}
    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (consume('*'))
                lhs = make_node(Op::Mul, 0, 0, lhs, unary());
            else if (consume('/'))
                lhs = make_node(Op::Div, 0, 0, lhs, unary());
            else
                return lhs;
        }
    }

    // unary := '-' unary | power
    NodePtr unary() {
        if (consume('-')) return make_node(Op::Neg, 0, 0, unary(), nullptr);
        return power();
    }

    // power := primary ['^' unary]   (right associative, binds tighter than unary minus on the left)
    NodePtr power() {
        NodePtr base = primary();
        if (consume('^')) return make_node(Op::Pow, 0, 0, base, unary());
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (consume('(')) {
            NodePtr e = expression();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            size_t mark = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = mark;  // the 'e' was not an exponent
            }
        }
        try {
            size_t used = 0;
            double v = std::stod(src_.substr(start, pos_ - start), &used);
            if (used != pos_ - start) fail("malformed number");
            return leaf_const(v);
        } catch (const std::exception&) {
            fail("malformed number");
        }
    }

    NodePtr identifier() {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name = src_.substr(start, pos_ - start);

        if (name == "pi") return leaf_const(M_PI);
        if (name == "gamma") {
            uses_params = true;
            return make_node(Op::Gamma, 0, 0, nullptr, nullptr);
        }
        if (name == "x") {
            uses_x = true;
            return make_node(Op::X, 0, 0, nullptr, nullptr);
        }
        if (name == "theta") {
            uses_params = true;
            return make_node(Op::Theta, 0, 0, nullptr, nullptr);
        }
        if (name.rfind("theta_", 0) == 0) {
            std::string suffix = name.substr(6);
            if (suffix.empty() || suffix.find_first_not_of("0123456789") != std::string::npos)
                fail("malformed theta component '" + name + "'");
            int idx = std::stoi(suffix);
            if (idx < 1 || idx > 3) fail("theta component out of range in '" + name + "'");
            uses_params = true;
            return make_node(Op::Theta, 0, idx - 1, nullptr, nullptr);
        }

        // function call
        if (!consume('(')) fail("unknown identifier '" + name + "'");
        std::vector<NodePtr> args;
        if (peek() != ')') {
            args.push_back(expression());
            while (consume(',')) args.push_back(expression());
        }
        if (!consume(')')) fail("expected ')' after arguments of '" + name + "'");

        auto expect_arity = [&](size_t n) {
            if (args.size() != n)
                fail("'" + name + "' takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
        };
        if (name == "log") {
            expect_arity(1);
            return make_node(Op::Log, 0, 0, args[0], nullptr);
        }
        if (name == "exp") {
            expect_arity(1);
            return make_node(Op::Exp, 0, 0, args[0], nullptr);
        }
        if (name == "sqrt") {
            expect_arity(1);
            return make_node(Op::Sqrt, 0, 0, args[0], nullptr);
        }
        if (name == "pow") {
            expect_arity(2);
            return make_node(Op::Pow, 0, 0, args[0], args[1]);
        }
        fail("unknown function '" + name + "'");
    }
};

}  // namespace

double CompiledExpr::eval(const ParamPoint& p, double x) const {
    if (!root_) throw ConfigError("empty expression");
    return eval_node(*root_, &p, x);
}

double CompiledExpr::eval_x(double x) const {
    if (!root_) throw ConfigError("empty expression");
    return eval_node(*root_, nullptr, x);
}

CompiledExpr parse_expr(const std::string& src) {
    Parser parser(src);
    CompiledExpr e;
    e.root_ = parser.parse();
    e.uses_x_ = parser.uses_x;
    e.uses_params_ = parser.uses_params;
    e.source_ = src;
    return e;
}

}  // namespace truncgeo
