#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "shopfloor/petri/types.hpp"

namespace shopfloor::petri {

// Declarative expression trees over a binding of variables to tokens.
// Guards, delays and output-token fields are all expressed in this language
// so a net is fully serializable to the XML model format.
class Expr {
public:
    enum class Op {
        ConstInt,
        ConstStr,
        Field,    // field of a bound variable's color
        Add, Sub, Mul, Div, Mod,
        Eq, Ne, Lt, Le, Gt, Ge,
        And, Or, Not,
        RngNext,  // splitmix64 state advance
        RngDraw,  // uniform [0, 2^53) from an advanced state
    };

    // Binding environment: a handful of variables, so linear lookup beats a
    // tree map in the enumeration hot path.
    class Env {
    public:
        void set(const std::string& var, const ColorToken* token) {
            for (auto& e : entries_) {
                if (e.first == var) {
                    e.second = token;
                    return;
                }
            }
            entries_.emplace_back(var, token);
        }
        void erase(const std::string& var) {
            for (std::size_t i = 0; i < entries_.size(); ++i) {
                if (entries_[i].first == var) {
                    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
                    return;
                }
            }
        }
        const ColorToken* find(const std::string& var) const {
            for (const auto& e : entries_)
                if (e.first == var) return e.second;
            return nullptr;
        }

    private:
        std::vector<std::pair<std::string, const ColorToken*>> entries_;
    };

    static ExprPtr int_const(std::int64_t v);
    static ExprPtr str_const(std::string v);
    static ExprPtr field(std::string var, std::string name);
    static ExprPtr binary(Op op, ExprPtr lhs, ExprPtr rhs);
    static ExprPtr logic_not(ExprPtr e);
    static ExprPtr rng_next(ExprPtr state);
    static ExprPtr rng_draw(ExprPtr state);

    // Convenience combinators used heavily by the model builders.
    static ExprPtr eq(ExprPtr a, ExprPtr b) { return binary(Op::Eq, a, b); }
    static ExprPtr both(ExprPtr a, ExprPtr b) { return binary(Op::And, a, b); }

    ColorValue eval(const Env& env) const;
    bool eval_bool(const Env& env) const;
    std::int64_t eval_int(const Env& env) const;

    Op op() const { return op_; }
    std::int64_t int_value() const { return int_v_; }
    const std::string& str_value() const { return str_v_; }
    const std::string& var() const { return str_v_; }
    const std::string& field_name() const { return field_; }
    const ExprPtr& lhs() const { return lhs_; }
    const ExprPtr& rhs() const { return rhs_; }

    // Variables referenced anywhere below this node.
    void collect_vars(std::vector<std::string>& out) const;

    // Splits a conjunction into its conjuncts (a non-And node is itself).
    static void conjuncts(const ExprPtr& e, std::vector<ExprPtr>& out);

private:
    Expr(Op op) : op_(op) {}

    Op op_;
    std::int64_t int_v_ = 0;
    std::string str_v_;   // string constant, or variable name for Field
    std::string field_;   // field name for Field
    ExprPtr lhs_;
    ExprPtr rhs_;
};

std::string expr_op_name(Expr::Op op);

}  // namespace shopfloor::petri
