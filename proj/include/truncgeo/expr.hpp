#pragma once

#include <memory>
#include <string>

#include "truncgeo/model.hpp"

namespace truncgeo {

// Arithmetic expressions over theta_1..theta_d (alias: theta), gamma, and x,
// with + - * / ^, unary minus, log, exp, sqrt, pow(a, b), and the constant
// pi. Used for user-supplied priors and config-defined family components.
class CompiledExpr {
  public:
    double eval(const ParamPoint& p, double x = 0) const;
    double eval_x(double x) const;  // expressions over x only
    bool uses_x() const { return uses_x_; }
    bool uses_params() const { return uses_params_; }
    const std::string& source() const { return source_; }

    struct Node;

  private:
    friend CompiledExpr parse_expr(const std::string&);
    std::shared_ptr<const Node> root_;
    bool uses_x_ = false;
    bool uses_params_ = false;
    std::string source_;
};

// Throws ConfigError on malformed input.
CompiledExpr parse_expr(const std::string& src);

}  // namespace truncgeo
