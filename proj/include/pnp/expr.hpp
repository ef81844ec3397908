#pragma once

#include <memory>
#include <string>

namespace pnp {

/// Small arithmetic grammar for initial-condition fields: numbers, x, y, pi,
/// + - * / ^, unary minus, parentheses and the functions cos, sin, exp,
/// sqrt, abs. Parsing failures raise ConfigError naming the offending spot.
class Expression {
public:
    Expression() = default; ///< constant zero
    static Expression parse(const std::string& text);

    double eval(double x, double y) const;

    /// Source text the expression was parsed from ("" for default-zero).
    const std::string& text() const { return text_; }

    struct Node; ///< implementation detail, defined in the source file

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace pnp
