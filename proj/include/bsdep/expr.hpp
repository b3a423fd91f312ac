#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "bsdep/grid.hpp"
#include "bsdep/time_function.hpp"

namespace bsdep {

/// Expression tree for generator drivers f(t, y, z, u).
///
/// Variables: t, y, z_j (Brownian direction j), u_i (mark i), and the
/// lambda-weighted aggregates u_int = sum u_i lambda_i and
/// u_sq_int = sum u_i^2 lambda_i. Operators: add/sub/mul, neg, abs,
/// min/max, clamp, sin/cos, sqrt of absolute value, and products with a
/// closed-form coefficient function of t.
class Expr {
public:
    enum class Op {
        Const,
        VarT,
        VarY,
        VarZ,
        VarU,
        VarUInt,
        VarUSqInt,
        Add,
        Sub,
        Mul,
        Neg,
        Abs,
        Min,
        Max,
        Clamp,
        Sin,
        Cos,
        SqrtAbs,
        Coeff,
    };

    struct Args {
        double t = 0.0;
        double y = 0.0;
        std::span<const double> z;
        std::span<const double> u;
        const MarkSpace* marks = nullptr;
    };

    struct Deps {
        bool t = false, y = false, z = false, u = false;
        int max_z_index = -1;
        int max_u_index = -1;
        void merge(const Deps& o) {
            t |= o.t;
            y |= o.y;
            z |= o.z;
            u |= o.u;
            max_z_index = std::max(max_z_index, o.max_z_index);
            max_u_index = std::max(max_u_index, o.max_u_index);
        }
    };

    Expr() : op_(Op::Const), value_(0.0) {}

    static Expr constant(double v);
    static Expr var_t();
    static Expr var_y();
    static Expr var_z(int index = 0);
    static Expr var_u(int index = 0);
    static Expr var_u_int();
    static Expr var_u_sq_int();
    static Expr add(Expr a, Expr b);
    static Expr sub(Expr a, Expr b);
    static Expr mul(Expr a, Expr b);
    static Expr neg(Expr a);
    static Expr abs(Expr a);
    static Expr min(Expr a, Expr b);
    static Expr max(Expr a, Expr b);
    static Expr clamp(Expr a, double lo, double hi);
    static Expr sin(Expr a);
    static Expr cos(Expr a);
    static Expr sqrt_abs(Expr a);
    static Expr coeff(TimeFunction f, Expr a);

    double eval(const Args& args) const;
    Deps deps() const;

    static Expr from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    Op op() const { return op_; }

private:
    Op op_;
    double value_ = 0.0;  // Const; clamp lo
    double value2_ = 0.0; // clamp hi
    int index_ = 0;       // VarZ / VarU component
    TimeFunction coeff_;
    std::vector<Expr> children_;
};

} // namespace bsdep
