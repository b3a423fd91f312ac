#include "bsdep/expr.hpp"

#include <cmath>
#include <stdexcept>

namespace bsdep {

Expr Expr::constant(double v) {
    Expr e;
    e.op_ = Op::Const;
    e.value_ = v;
    return e;
}
Expr Expr::var_t() {
    Expr e;
    e.op_ = Op::VarT;
    return e;
}
Expr Expr::var_y() {
    Expr e;
    e.op_ = Op::VarY;
    return e;
}
Expr Expr::var_z(int index) {
    Expr e;
    e.op_ = Op::VarZ;
    e.index_ = index;
    return e;
}
Expr Expr::var_u(int index) {
    Expr e;
    e.op_ = Op::VarU;
    e.index_ = index;
    return e;
}
Expr Expr::var_u_int() {
    Expr e;
    e.op_ = Op::VarUInt;
    return e;
}
Expr Expr::var_u_sq_int() {
    Expr e;
    e.op_ = Op::VarUSqInt;
    return e;
}

Expr Expr::add(Expr a, Expr b) {
    Expr e;
    e.op_ = Op::Add;
    e.children_ = {std::move(a), std::move(b)};
    return e;
}
Expr Expr::sub(Expr a, Expr b) {
    Expr e;
    e.op_ = Op::Sub;
    e.children_ = {std::move(a), std::move(b)};
    return e;
}
Expr Expr::mul(Expr a, Expr b) {
    Expr e;
    e.op_ = Op::Mul;
    e.children_ = {std::move(a), std::move(b)};
    return e;
}
Expr Expr::neg(Expr a) {
    Expr e;
    e.op_ = Op::Neg;
    e.children_ = {std::move(a)};
    return e;
}
Expr Expr::abs(Expr a) {
    Expr e;
    e.op_ = Op::Abs;
    e.children_ = {std::move(a)};
    return e;
}
Expr Expr::min(Expr a, Expr b) {
    Expr e;
    e.op_ = Op::Min;
    e.children_ = {std::move(a), std::move(b)};
    return e;
}
Expr Expr::max(Expr a, Expr b) {
    Expr e;
    e.op_ = Op::Max;
    e.children_ = {std::move(a), std::move(b)};
    return e;
}
Expr Expr::clamp(Expr a, double lo, double hi) {
    Expr e;
    e.op_ = Op::Clamp;
    e.children_ = {std::move(a)};
    e.value_ = lo;
    e.value2_ = hi;
    return e;
}
Expr Expr::sin(Expr a) {
    Expr e;
    e.op_ = Op::Sin;
    e.children_ = {std::move(a)};
    return e;
}
Expr Expr::cos(Expr a) {
    Expr e;
    e.op_ = Op::Cos;
    e.children_ = {std::move(a)};
    return e;
}
Expr Expr::sqrt_abs(Expr a) {
    Expr e;
    e.op_ = Op::SqrtAbs;
    e.children_ = {std::move(a)};
    return e;
}
Expr Expr::coeff(TimeFunction f, Expr a) {
    Expr e;
    e.op_ = Op::Coeff;
    e.coeff_ = std::move(f);
    e.children_ = {std::move(a)};
    return e;
}

double Expr::eval(const Args& a) const {
    switch (op_) {
    case Op::Const:
        return value_;
    case Op::VarT:
        return a.t;
    case Op::VarY:
        return a.y;
    case Op::VarZ:
        if (index_ < 0 || static_cast<std::size_t>(index_) >= a.z.size())
            throw std::invalid_argument("Expr: z component index out of range");
        return a.z[static_cast<std::size_t>(index_)];
    case Op::VarU:
        if (index_ < 0 || static_cast<std::size_t>(index_) >= a.u.size())
            throw std::invalid_argument("Expr: u mark index out of range");
        return a.u[static_cast<std::size_t>(index_)];
    case Op::VarUInt: {
        double s = 0.0;
        for (std::size_t i = 0; i < a.u.size(); ++i) s += a.u[i] * a.marks->intensity(i);
        return s;
    }
    case Op::VarUSqInt: {
        double s = 0.0;
        for (std::size_t i = 0; i < a.u.size(); ++i)
            s += a.u[i] * a.u[i] * a.marks->intensity(i);
        return s;
    }
    case Op::Add:
        return children_[0].eval(a) + children_[1].eval(a);
    case Op::Sub:
        return children_[0].eval(a) - children_[1].eval(a);
    case Op::Mul:
        return children_[0].eval(a) * children_[1].eval(a);
    case Op::Neg:
        return -children_[0].eval(a);
    case Op::Abs:
        return std::abs(children_[0].eval(a));
    case Op::Min:
        return std::min(children_[0].eval(a), children_[1].eval(a));
    case Op::Max:
        return std::max(children_[0].eval(a), children_[1].eval(a));
    case Op::Clamp:
        return std::clamp(children_[0].eval(a), value_, value2_);
    case Op::Sin:
        return std::sin(children_[0].eval(a));
    case Op::Cos:
        return std::cos(children_[0].eval(a));
    case Op::SqrtAbs:
        return std::sqrt(std::abs(children_[0].eval(a)));
    case Op::Coeff:
        return coeff_(a.t) * children_[0].eval(a);
    }
    return 0.0;
}

Expr::Deps Expr::deps() const {
    Deps d;
    switch (op_) {
    case Op::VarT:
        d.t = true;
        break;
    case Op::VarY:
        d.y = true;
        break;
    case Op::VarZ:
        d.z = true;
        d.max_z_index = index_;
        break;
    case Op::VarU:
        d.u = true;
        d.max_u_index = index_;
        break;
    case Op::VarUInt:
    case Op::VarUSqInt:
        d.u = true;
        break;
    case Op::Coeff:
        d.t = true;
        break;
    default:
        break;
    }
    for (const Expr& c : children_) d.merge(c.deps());
    return d;
}

Expr Expr::from_json(const nlohmann::json& j) {
    if (j.is_number()) return constant(j.get<double>());
    if (!j.is_object()) throw std::invalid_argument("expr: expected number or object");

    if (j.contains("const")) return constant(j.at("const").get<double>());

    if (j.contains("var")) {
        const std::string v = j.at("var").get<std::string>();
        const int index = j.value("index", 0);
        if (v == "t") return var_t();
        if (v == "y") return var_y();
        if (v == "z") return var_z(index);
        if (v == "u") return var_u(index);
        if (v == "u_int") return var_u_int();
        if (v == "u_sq_int") return var_u_sq_int();
        throw std::invalid_argument("expr: unknown variable '" + v + "'");
    }

    if (!j.contains("op")) throw std::invalid_argument("expr: object needs 'op', 'var' or 'const'");
    const std::string op = j.at("op").get<std::string>();

    auto binary_fold = [&](Expr (*make)(Expr, Expr)) {
        const auto& args = j.at("args");
        if (!args.is_array() || args.size() < 2)
            throw std::invalid_argument("expr: '" + op + "' needs an args array of length >= 2");
        Expr acc = from_json(args[0]);
        for (std::size_t i = 1; i < args.size(); ++i) acc = make(std::move(acc), from_json(args[i]));
        return acc;
    };
    auto unary = [&]() { return from_json(j.at("arg")); };

    if (op == "add") return binary_fold(&Expr::add);
    if (op == "sub") {
        const auto& args = j.at("args");
        if (!args.is_array() || args.size() != 2)
            throw std::invalid_argument("expr: 'sub' needs exactly 2 args");
        return sub(from_json(args[0]), from_json(args[1]));
    }
    if (op == "mul") return binary_fold(&Expr::mul);
    if (op == "min") return binary_fold(&Expr::min);
    if (op == "max") return binary_fold(&Expr::max);
    if (op == "neg") return neg(unary());
    if (op == "abs") return abs(unary());
    if (op == "sin") return sin(unary());
    if (op == "cos") return cos(unary());
    if (op == "sqrt_abs") return sqrt_abs(unary());
    if (op == "clamp")
        return clamp(unary(), j.at("lo").get<double>(), j.at("hi").get<double>());
    if (op == "coeff") return coeff(TimeFunction::from_json(j.at("fn")), unary());
    throw std::invalid_argument("expr: unknown op '" + op + "'");
}

nlohmann::json Expr::to_json() const {
    auto children = [&]() {
        nlohmann::json arr = nlohmann::json::array();
        for (const Expr& c : children_) arr.push_back(c.to_json());
        return arr;
    };
    switch (op_) {
    case Op::Const:
        return value_;
    case Op::VarT:
        return {{"var", "t"}};
    case Op::VarY:
        return {{"var", "y"}};
    case Op::VarZ:
        return {{"var", "z"}, {"index", index_}};
    case Op::VarU:
        return {{"var", "u"}, {"index", index_}};
    case Op::VarUInt:
        return {{"var", "u_int"}};
    case Op::VarUSqInt:
        return {{"var", "u_sq_int"}};
    case Op::Add:
        return {{"op", "add"}, {"args", children()}};
    case Op::Sub:
        return {{"op", "sub"}, {"args", children()}};
    case Op::Mul:
        return {{"op", "mul"}, {"args", children()}};
    case Op::Min:
        return {{"op", "min"}, {"args", children()}};
    case Op::Max:
        return {{"op", "max"}, {"args", children()}};
    case Op::Neg:
        return {{"op", "neg"}, {"arg", children_[0].to_json()}};
    case Op::Abs:
        return {{"op", "abs"}, {"arg", children_[0].to_json()}};
    case Op::Sin:
        return {{"op", "sin"}, {"arg", children_[0].to_json()}};
    case Op::Cos:
        return {{"op", "cos"}, {"arg", children_[0].to_json()}};
    case Op::SqrtAbs:
        return {{"op", "sqrt_abs"}, {"arg", children_[0].to_json()}};
    case Op::Clamp:
        return {{"op", "clamp"}, {"arg", children_[0].to_json()}, {"lo", value_}, {"hi", value2_}};
    case Op::Coeff:
        return {{"op", "coeff"}, {"fn", coeff_.to_json()}, {"arg", children_[0].to_json()}};
    }
    return {};
}

} // namespace bsdep
