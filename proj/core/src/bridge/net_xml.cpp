#include "shopfloor/bridge/net_xml.hpp"

#include "shopfloor/bridge/xml.hpp"
#include "shopfloor/errors.hpp"
#include "shopfloor/petri/expr.hpp"

namespace shopfloor::bridge {

using petri::Expr;
using petri::ExprPtr;

namespace {

XmlNode expr_to_node(const ExprPtr& e) {
    XmlNode node;
    using Op = Expr::Op;
    switch (e->op()) {
        case Op::ConstInt:
            node.name = "CONST";
            node.attrs = {{"TYPE", "INT"}, {"VALUE", std::to_string(e->int_value())}};
            return node;
        case Op::ConstStr:
            node.name = "CONST";
            node.attrs = {{"TYPE", "STR"}, {"VALUE", e->str_value()}};
            return node;
        case Op::Field:
            node.name = "FIELD";
            node.attrs = {{"VAR", e->var()}, {"NAME", e->field_name()}};
            return node;
        case Op::Not:
        case Op::RngNext:
        case Op::RngDraw:
            node.name = expr_op_name(e->op());
            node.children.push_back(expr_to_node(e->lhs()));
            return node;
        default:
            node.name = expr_op_name(e->op());
            node.children.push_back(expr_to_node(e->lhs()));
            node.children.push_back(expr_to_node(e->rhs()));
            return node;
    }
}

ExprPtr node_to_expr(const XmlNode& node) {
    using Op = Expr::Op;
    auto require = [&](const char* attr) -> const std::string& {
        const std::string* v = node.attr(attr);
        if (!v)
            throw ParseError(ParseError::Kind::MalformedXml, node.offset,
                             "<" + node.name + "> lacks " + attr);
        return *v;
    };
    if (node.name == "CONST") {
        const auto& type = require("TYPE");
        if (type == "INT") return Expr::int_const(std::stoll(require("VALUE")));
        if (type == "STR") return Expr::str_const(require("VALUE"));
        throw ParseError(ParseError::Kind::MalformedXml, node.offset, "bad CONST type " + type);
    }
    if (node.name == "FIELD") return Expr::field(require("VAR"), require("NAME"));

    auto unary = [&](auto make) {
        if (node.children.size() != 1)
            throw ParseError(ParseError::Kind::MalformedXml, node.offset,
                             "<" + node.name + "> expects one operand");
        return make(node_to_expr(node.children[0]));
    };
    if (node.name == "NOT") return unary([](ExprPtr e) { return Expr::logic_not(e); });
    if (node.name == "RNG-NEXT") return unary([](ExprPtr e) { return Expr::rng_next(e); });
    if (node.name == "RNG-DRAW") return unary([](ExprPtr e) { return Expr::rng_draw(e); });

    static const std::map<std::string, Op> kBinary = {
        {"ADD", Op::Add}, {"SUB", Op::Sub}, {"MUL", Op::Mul}, {"DIV", Op::Div}, {"MOD", Op::Mod},
        {"EQ", Op::Eq},   {"NE", Op::Ne},   {"LT", Op::Lt},   {"LE", Op::Le},   {"GT", Op::Gt},
        {"GE", Op::Ge},   {"AND", Op::And}, {"OR", Op::Or},
    };
    auto it = kBinary.find(node.name);
    if (it == kBinary.end())
        throw ParseError(ParseError::Kind::UnknownElement, node.offset,
                         "unknown expression element <" + node.name + ">");
    if (node.children.size() != 2)
        throw ParseError(ParseError::Kind::MalformedXml, node.offset,
                         "<" + node.name + "> expects two operands");
    return Expr::binary(it->second, node_to_expr(node.children[0]), node_to_expr(node.children[1]));
}

XmlNode color_value_node(const char* element, const std::string& name,
                         const petri::ColorValue& v) {
    XmlNode node;
    node.name = element;
    if (std::holds_alternative<std::int64_t>(v)) {
        node.attrs = {{"NAME", name},
                      {"TYPE", "INT"},
                      {"VALUE", std::to_string(std::get<std::int64_t>(v))}};
    } else {
        node.attrs = {{"NAME", name}, {"TYPE", "STR"}, {"VALUE", std::get<std::string>(v)}};
    }
    return node;
}

}  // namespace

std::string net_to_xml(const petri::NetModel& net, const petri::Marking* initial) {
    XmlNode root;
    root.name = "NET";
    root.attrs = {{"NAME", net.name}};

    XmlNode places;
    places.name = "PLACES-LIST";
    for (const auto& p : net.places) {
        XmlNode place;
        place.name = "PLACE";
        place.attrs = {{"NAME", p.id}};
        if (p.capacity) place.attrs.emplace_back("CAPACITY", std::to_string(*p.capacity));
        XmlNode colors;
        colors.name = "COLOR-SET";
        for (const auto& f : p.color_set) {
            XmlNode field;
            field.name = "FIELD";
            field.attrs = {{"NAME", f.name},
                           {"TYPE", f.type == petri::FieldType::Int ? "INT" : "STR"}};
            colors.children.push_back(std::move(field));
        }
        place.children.push_back(std::move(colors));
        places.children.push_back(std::move(place));
    }
    root.children.push_back(std::move(places));

    XmlNode transitions;
    transitions.name = "TRANSITIONS-LIST";
    for (const auto& t : net.transitions) {
        XmlNode tr;
        tr.name = "TRANSITION";
        tr.attrs = {{"NAME", t.id}, {"PRIORITY", std::to_string(t.priority)}};
        if (t.tag == petri::Transition::Tag::Failure) tr.attrs.emplace_back("TAG", "failure");
        if (t.tag == petri::Transition::Tag::Repair) tr.attrs.emplace_back("TAG", "repair");

        XmlNode inputs;
        inputs.name = "INPUTS";
        for (const auto& arc : t.inputs) {
            XmlNode a;
            a.name = "ARC";
            a.attrs = {{"PLACE", arc.place}, {"VAR", arc.var}};
            inputs.children.push_back(std::move(a));
        }
        tr.children.push_back(std::move(inputs));

        if (t.guard) {
            XmlNode guard;
            guard.name = "GUARD";
            guard.children.push_back(expr_to_node(t.guard));
            tr.children.push_back(std::move(guard));
        }
        if (t.delay) {
            XmlNode delay;
            delay.name = "DELAY";
            delay.children.push_back(expr_to_node(t.delay));
            tr.children.push_back(std::move(delay));
        }

        XmlNode outputs;
        outputs.name = "OUTPUTS";
        for (const auto& arc : t.outputs) {
            XmlNode a;
            a.name = "ARC";
            a.attrs = {{"PLACE", arc.place}};
            for (const auto& spec : arc.tokens) {
                XmlNode token;
                token.name = "TOKEN";
                if (spec.copy_var) token.attrs = {{"COPY", *spec.copy_var}};
                for (const auto& [name, e] : spec.fields) {
                    XmlNode set;
                    set.name = "SET";
                    set.attrs = {{"NAME", name}};
                    set.children.push_back(expr_to_node(e));
                    token.children.push_back(std::move(set));
                }
                a.children.push_back(std::move(token));
            }
            outputs.children.push_back(std::move(a));
        }
        tr.children.push_back(std::move(outputs));
        transitions.children.push_back(std::move(tr));
    }
    root.children.push_back(std::move(transitions));

    if (initial) {
        XmlNode marking;
        marking.name = "INITIAL-MARKING";
        marking.attrs = {{"CLOCK", std::to_string(initial->clock)}};
        for (const auto& [place, tokens] : initial->tokens) {
            for (const auto& tok : tokens) {
                XmlNode tn;
                tn.name = "TOKEN";
                tn.attrs = {{"PLACE", place}, {"TS", std::to_string(tok.timestamp)}};
                for (const auto& [k, v] : tok.color)
                    tn.children.push_back(color_value_node("VALUE", k, v));
                marking.children.push_back(std::move(tn));
            }
        }
        root.children.push_back(std::move(marking));
    }
    return write_xml(root);
}

LoadedModel net_from_xml(const std::string& bytes) {
    XmlNode root = parse_xml(bytes);
    if (root.name != "NET")
        throw ParseError(ParseError::Kind::UnknownElement, root.offset,
                         "expected <NET>, got <" + root.name + ">");
    auto require_attr_of = [](const XmlNode& node, const char* attr) -> const std::string& {
        const std::string* v = node.attr(attr);
        if (!v)
            throw ParseError(ParseError::Kind::MalformedXml, node.offset,
                             "<" + node.name + "> lacks " + attr);
        return *v;
    };

    LoadedModel model;
    model.net.name = require_attr_of(root, "NAME");

    for (const auto& section : root.children) {
        if (section.name == "PLACES-LIST") {
            for (const auto& pn : section.children) {
                if (pn.name != "PLACE")
                    throw ParseError(ParseError::Kind::UnknownElement, pn.offset,
                                     "unknown element <" + pn.name + "> in PLACES-LIST");
                petri::Place p;
                p.id = require_attr_of(pn, "NAME");
                if (pn.attr("CAPACITY")) p.capacity = std::stoi(*pn.attr("CAPACITY"));
                if (const auto* colors = pn.child("COLOR-SET")) {
                    for (const auto& f : colors->children) {
                        petri::FieldSpec spec;
                        spec.name = require_attr_of(f, "NAME");
                        spec.type = require_attr_of(f, "TYPE") == "STR" ? petri::FieldType::Str
                                                                        : petri::FieldType::Int;
                        p.color_set.push_back(std::move(spec));
                    }
                }
                model.net.places.push_back(std::move(p));
            }
        } else if (section.name == "TRANSITIONS-LIST") {
            for (const auto& tn : section.children) {
                if (tn.name != "TRANSITION")
                    throw ParseError(ParseError::Kind::UnknownElement, tn.offset,
                                     "unknown element <" + tn.name + "> in TRANSITIONS-LIST");
                petri::Transition t;
                t.id = require_attr_of(tn, "NAME");
                t.priority = std::stoi(require_attr_of(tn, "PRIORITY"));
                if (tn.attr("TAG")) {
                    const auto& tag = *tn.attr("TAG");
                    if (tag == "failure") t.tag = petri::Transition::Tag::Failure;
                    else if (tag == "repair") t.tag = petri::Transition::Tag::Repair;
                }
                if (const auto* inputs = tn.child("INPUTS")) {
                    for (const auto& a : inputs->children)
                        t.inputs.push_back({require_attr_of(a, "PLACE"), require_attr_of(a, "VAR")});
                }
                if (const auto* guard = tn.child("GUARD")) {
                    if (guard->children.size() == 1) t.guard = node_to_expr(guard->children[0]);
                }
                if (const auto* delay = tn.child("DELAY")) {
                    if (delay->children.size() == 1) t.delay = node_to_expr(delay->children[0]);
                }
                if (const auto* outputs = tn.child("OUTPUTS")) {
                    for (const auto& a : outputs->children) {
                        petri::OutputArc arc;
                        arc.place = require_attr_of(a, "PLACE");
                        for (const auto& token : a.children) {
                            petri::TokenSpec spec;
                            if (token.attr("COPY")) spec.copy_var = *token.attr("COPY");
                            for (const auto& set : token.children) {
                                if (set.children.size() != 1)
                                    throw ParseError(ParseError::Kind::MalformedXml, set.offset,
                                                     "<SET> expects one expression");
                                spec.fields.emplace_back(require_attr_of(set, "NAME"),
                                                         node_to_expr(set.children[0]));
                            }
                            arc.tokens.push_back(std::move(spec));
                        }
                        t.outputs.push_back(std::move(arc));
                    }
                }
                model.net.transitions.push_back(std::move(t));
            }
        } else if (section.name == "INITIAL-MARKING") {
            model.has_marking = true;
            model.initial.clock = std::stoll(require_attr_of(section, "CLOCK"));
            for (const auto& tn : section.children) {
                petri::ColorToken tok;
                tok.timestamp = std::stoll(require_attr_of(tn, "TS"));
                for (const auto& v : tn.children) {
                    if (require_attr_of(v, "TYPE") == "STR")
                        tok.color[require_attr_of(v, "NAME")] = require_attr_of(v, "VALUE");
                    else
                        tok.color[require_attr_of(v, "NAME")] =
                            static_cast<std::int64_t>(std::stoll(require_attr_of(v, "VALUE")));
                }
                // Inserted after the net is complete so conformance checks run.
                model.initial.tokens[require_attr_of(tn, "PLACE")].push_back(std::move(tok));
            }
        } else {
            throw ParseError(ParseError::Kind::UnknownElement, section.offset,
                             "unknown element <" + section.name + "> in NET");
        }
    }
    return model;
}

}  // namespace shopfloor::bridge
