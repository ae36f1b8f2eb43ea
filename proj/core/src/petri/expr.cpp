#include "shopfloor/petri/expr.hpp"

#include "shopfloor/errors.hpp"
#include "shopfloor/petri/rng.hpp"

namespace shopfloor::petri {

namespace {

std::int64_t as_int(const ColorValue& v, const char* ctx) {
    if (const auto* p = std::get_if<std::int64_t>(&v)) return *p;
    throw EvalError(std::string("expected integer operand in ") + ctx);
}

}  // namespace

ExprPtr Expr::int_const(std::int64_t v) {
    auto e = std::shared_ptr<Expr>(new Expr(Op::ConstInt));
    e->int_v_ = v;
    return e;
}

ExprPtr Expr::str_const(std::string v) {
    auto e = std::shared_ptr<Expr>(new Expr(Op::ConstStr));
    e->str_v_ = std::move(v);
    return e;
}

ExprPtr Expr::field(std::string var, std::string name) {
    auto e = std::shared_ptr<Expr>(new Expr(Op::Field));
    e->str_v_ = std::move(var);
    e->field_ = std::move(name);
    return e;
}

ExprPtr Expr::binary(Op op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::shared_ptr<Expr>(new Expr(op));
    e->lhs_ = std::move(lhs);
    e->rhs_ = std::move(rhs);
    return e;
}

ExprPtr Expr::logic_not(ExprPtr inner) {
    auto e = std::shared_ptr<Expr>(new Expr(Op::Not));
    e->lhs_ = std::move(inner);
    return e;
}

ExprPtr Expr::rng_next(ExprPtr state) {
    auto e = std::shared_ptr<Expr>(new Expr(Op::RngNext));
    e->lhs_ = std::move(state);
    return e;
}

ExprPtr Expr::rng_draw(ExprPtr state) {
    auto e = std::shared_ptr<Expr>(new Expr(Op::RngDraw));
    e->lhs_ = std::move(state);
    return e;
}

ColorValue Expr::eval(const Env& env) const {
    switch (op_) {
        case Op::ConstInt: return int_v_;
        case Op::ConstStr: return str_v_;
        case Op::Field: {
            const ColorToken* token = env.find(str_v_);
            if (!token) throw EvalError("unbound variable '" + str_v_ + "'");
            const Color& c = token->color;
            auto f = c.find(field_);
            if (f == c.end())
                throw EvalError("token bound to '" + str_v_ + "' has no field '" + field_ + "'");
            return f->second;
        }
        case Op::Add: return as_int(lhs_->eval(env), "add") + as_int(rhs_->eval(env), "add");
        case Op::Sub: return as_int(lhs_->eval(env), "sub") - as_int(rhs_->eval(env), "sub");
        case Op::Mul: return as_int(lhs_->eval(env), "mul") * as_int(rhs_->eval(env), "mul");
        case Op::Div: {
            auto d = as_int(rhs_->eval(env), "div");
            if (d == 0) throw EvalError("division by zero");
            return as_int(lhs_->eval(env), "div") / d;
        }
        case Op::Mod: {
            auto d = as_int(rhs_->eval(env), "mod");
            if (d == 0) throw EvalError("modulo by zero");
            return as_int(lhs_->eval(env), "mod") % d;
        }
        case Op::Eq: return static_cast<std::int64_t>(lhs_->eval(env) == rhs_->eval(env));
        case Op::Ne: return static_cast<std::int64_t>(lhs_->eval(env) != rhs_->eval(env));
        case Op::Lt: return static_cast<std::int64_t>(lhs_->eval(env) < rhs_->eval(env));
        case Op::Le: return static_cast<std::int64_t>(lhs_->eval(env) <= rhs_->eval(env));
        case Op::Gt: return static_cast<std::int64_t>(lhs_->eval(env) > rhs_->eval(env));
        case Op::Ge: return static_cast<std::int64_t>(lhs_->eval(env) >= rhs_->eval(env));
        case Op::And:
            return static_cast<std::int64_t>(lhs_->eval_bool(env) && rhs_->eval_bool(env));
        case Op::Or:
            return static_cast<std::int64_t>(lhs_->eval_bool(env) || rhs_->eval_bool(env));
        case Op::Not: return static_cast<std::int64_t>(!lhs_->eval_bool(env));
        case Op::RngNext:
            return static_cast<std::int64_t>(splitmix64_next(
                static_cast<std::uint64_t>(as_int(lhs_->eval(env), "rng-next"))));
        case Op::RngDraw:
            return splitmix64_draw53(
                static_cast<std::uint64_t>(as_int(lhs_->eval(env), "rng-draw")));
    }
    throw EvalError("unhandled expression op");
}

bool Expr::eval_bool(const Env& env) const {
    const ColorValue v = eval(env);
    if (const auto* p = std::get_if<std::int64_t>(&v)) return *p != 0;
    throw EvalError("string value used as boolean");
}

std::int64_t Expr::eval_int(const Env& env) const {
    return as_int(eval(env), "int expression");
}

void Expr::collect_vars(std::vector<std::string>& out) const {
    if (op_ == Op::Field) {
        out.push_back(str_v_);
        return;
    }
    if (lhs_) lhs_->collect_vars(out);
    if (rhs_) rhs_->collect_vars(out);
}

void Expr::conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (!e) return;
    if (e->op() == Op::And) {
        conjuncts(e->lhs(), out);
        conjuncts(e->rhs(), out);
    } else {
        out.push_back(e);
    }
}

std::string expr_op_name(Expr::Op op) {
    switch (op) {
        case Expr::Op::ConstInt: return "CONST";
        case Expr::Op::ConstStr: return "CONST";
        case Expr::Op::Field: return "FIELD";
        case Expr::Op::Add: return "ADD";
        case Expr::Op::Sub: return "SUB";
        case Expr::Op::Mul: return "MUL";
        case Expr::Op::Div: return "DIV";
        case Expr::Op::Mod: return "MOD";
        case Expr::Op::Eq: return "EQ";
        case Expr::Op::Ne: return "NE";
        case Expr::Op::Lt: return "LT";
        case Expr::Op::Le: return "LE";
        case Expr::Op::Gt: return "GT";
        case Expr::Op::Ge: return "GE";
        case Expr::Op::And: return "AND";
        case Expr::Op::Or: return "OR";
        case Expr::Op::Not: return "NOT";
        case Expr::Op::RngNext: return "RNG-NEXT";
        case Expr::Op::RngDraw: return "RNG-DRAW";
    }
    return "?";
}

}  // namespace shopfloor::petri
