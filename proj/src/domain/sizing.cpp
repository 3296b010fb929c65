#include "voromesh/domain/sizing.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

#include "voromesh/errors.hpp"

namespace voromesh {

struct Expression::Node {
    enum class Op { kConst, kX, kY, kAdd, kSub, kMul, kDiv, kPow, kNeg, kCall } op = Op::kConst;
    double value = 0.0;
    std::string fn;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(Point2 p) const {
        switch (op) {
            case Op::kConst: return value;
            case Op::kX: return p.x;
            case Op::kY: return p.y;
            case Op::kAdd: return args[0]->eval(p) + args[1]->eval(p);
            case Op::kSub: return args[0]->eval(p) - args[1]->eval(p);
            case Op::kMul: return args[0]->eval(p) * args[1]->eval(p);
            case Op::kDiv: return args[0]->eval(p) / args[1]->eval(p);
            case Op::kPow: return std::pow(args[0]->eval(p), args[1]->eval(p));
            case Op::kNeg: return -args[0]->eval(p);
            case Op::kCall: break;
        }
        const double a = args[0]->eval(p);
        if (fn == "abs") return std::abs(a);
        if (fn == "sqrt") return std::sqrt(a);
        if (fn == "exp") return std::exp(a);
        if (fn == "log") return std::log(a);
        if (fn == "sin") return std::sin(a);
        if (fn == "cos") return std::cos(a);
        if (fn == "tan") return std::tan(a);
        const double b = args[1]->eval(p);
        if (fn == "min") return std::min(a, b);
        if (fn == "max") return std::max(a, b);
        if (fn == "pow") return std::pow(a, b);
        return std::hypot(a, b);  // "hypot", arity checked at parse time
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError("sizing expression: " + msg + " at offset " + std::to_string(pos_));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    static NodePtr make(Op op, std::vector<NodePtr> args) {
        auto n = std::make_shared<Expression::Node>();
        n->op = op;
        n->args = std::move(args);
        return n;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+'))
                lhs = make(Op::kAdd, {lhs, term()});
            else if (eat('-'))
                lhs = make(Op::kSub, {lhs, term()});
            else
                return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*'))
                lhs = make(Op::kMul, {lhs, unary()});
            else if (eat('/'))
                lhs = make(Op::kDiv, {lhs, unary()});
            else
                return lhs;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(Op::kNeg, {unary()});
        if (eat('+')) return unary();
        NodePtr base = primary();
        if (eat('^')) return make(Op::kPow, {base, unary()});
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (eat('(')) {
            NodePtr n = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            const std::string rest(s_.substr(pos_));
            double v = 0.0;
            try {
                v = std::stod(rest, &used);
            } catch (const std::exception&) {
                fail("malformed number");
            }
            pos_ += used;
            auto n = std::make_shared<Expression::Node>();
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string name(s_.substr(start, pos_ - start));
            if (name == "x") return make(Op::kX, {});
            if (name == "y") return make(Op::kY, {});
            if (name == "pi") {
                auto n = std::make_shared<Expression::Node>();
                n->value = std::numbers::pi;
                return n;
            }
            static const std::vector<std::pair<std::string, int>> kFunctions{
                {"abs", 1}, {"sqrt", 1}, {"exp", 1}, {"log", 1}, {"sin", 1},   {"cos", 1},
                {"tan", 1}, {"min", 2},  {"max", 2}, {"pow", 2}, {"hypot", 2}};
            int arity = -1;
            for (const auto& [fname, n] : kFunctions)
                if (fname == name) arity = n;
            if (arity < 0) fail("unknown identifier '" + name + "'");
            if (!eat('(')) fail("expected '(' after " + name);
            std::vector<NodePtr> args{expr()};
            while (eat(',')) args.push_back(expr());
            if (!eat(')')) fail("expected ')'");
            if (static_cast<int>(args.size()) != arity)
                fail(name + " takes " + std::to_string(arity) + " argument(s)");
            auto n = std::make_shared<Expression::Node>();
            n->op = Op::kCall;
            n->fn = name;
            n->args = std::move(args);
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::string source) : source_(std::move(source)) { root_ = Parser(source_).parse(); }

double Expression::operator()(Point2 p) const { return root_->eval(p); }

SizingField SizingField::constant(double h0) {
    if (!(h0 > 0.0) || !std::isfinite(h0)) throw InputError("sizing: constant value must be positive");
    SizingField f;
    f.h0_ = h0;
    return f;
}

SizingField SizingField::expression(const std::string& source) {
    SizingField f;
    f.expr_ = std::make_shared<const Expression>(source);
    return f;
}

double SizingField::operator()(Point2 x) const { return expr_ ? (*expr_)(x) : h0_; }

const std::string& SizingField::expression_source() const {
    static const std::string kEmpty;
    return expr_ ? expr_->source() : kEmpty;
}

void SizingField::validate_positive(const BoundingBox& box) const {
    if (!expr_) return;
    for (int j = 0; j <= 32; ++j)
        for (int i = 0; i <= 32; ++i) {
            const Point2 p{box.min.x + (box.max.x - box.min.x) * i / 32.0,
                           box.min.y + (box.max.y - box.min.y) * j / 32.0};
            const double h = (*this)(p);
            if (!(h > 0.0) || !std::isfinite(h))
                throw InputError("sizing: expression must be positive on the frame (fails at x=" +
                                 std::to_string(p.x) + ", y=" + std::to_string(p.y) + ")");
        }
}

bool operator==(const SizingField& a, const SizingField& b) {
    if (a.is_constant() != b.is_constant()) return false;
    return a.is_constant() ? a.h0_ == b.h0_ : a.expression_source() == b.expression_source();
}

}  // namespace voromesh
