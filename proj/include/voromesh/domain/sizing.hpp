#pragma once

#include <memory>
#include <string>

#include "voromesh/domain/implicit_domain.hpp"
#include "voromesh/geometry/vec2.hpp"

namespace voromesh {

/// Arithmetic expression in x and y, e.g. "0.05 + 0.05*sqrt(x*x + y*y)".
/// Supports + - * / ^, parentheses, pi, and abs sqrt exp log sin cos tan
/// min max pow hypot.
class Expression {
public:
    /// Throws InputError with the character offset of the first problem.
    explicit Expression(std::string source);

    double operator()(Point2 p) const;
    const std::string& source() const { return source_; }

    struct Node;

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

/// Target edge length field h(x) > 0.
class SizingField {
public:
    static SizingField constant(double h0);
    static SizingField expression(const std::string& source);

    double operator()(Point2 x) const;

    bool is_constant() const { return !expr_; }
    double constant_value() const { return h0_; }
    const std::string& expression_source() const;

    /// Samples a 33 x 33 grid and throws InputError unless h > 0 everywhere.
    void validate_positive(const BoundingBox& box) const;

    friend bool operator==(const SizingField& a, const SizingField& b);

private:
    double h0_ = 0.0;
    std::shared_ptr<const Expression> expr_;
};

}  // namespace voromesh
