#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "voromesh/geometry/vec2.hpp"

namespace voromesh {

// Primitive fields are negative inside the shape and positive outside.

struct Circle {
    Point2 center;
    double radius = 1.0;
};

struct HalfPlane {
    Point2 point;
    Vec2 normal{0, 1};  // outward, unit length after validation
};

struct AxisRectangle {
    Point2 min;
    Point2 max;
};

struct ConvexPolygon {
    std::vector<Point2> vertices;  // counterclockwise
};

class CsgNode;

struct Union {
    std::vector<CsgNode> children;
};
struct Intersection {
    std::vector<CsgNode> children;
};
struct Complement {
    std::vector<CsgNode> child;  // exactly one element
};

/// Value and gradient of the field at one point. `has_gradient` is false where
/// the active primitive has no analytic gradient (circle center).
struct FieldSample {
    double value = 0.0;
    Vec2 gradient;
    bool has_gradient = true;
};

/// Node of a constructive-solid-geometry tree. Union takes the minimum of its
/// children, intersection the maximum, complement negates; ties resolve to the
/// child with the smallest index.
class CsgNode {
public:
    using Variant = std::variant<Circle, HalfPlane, AxisRectangle, ConvexPolygon, Union, Intersection, Complement>;

    CsgNode(Variant v);  // NOLINT(google-explicit-constructor): tree literals read naturally

    static CsgNode circle(Point2 center, double radius);
    static CsgNode half_plane(Point2 point, Vec2 outward_normal);
    static CsgNode rectangle(Point2 min, Point2 max);
    static CsgNode polygon(std::vector<Point2> ccw_vertices);
    static CsgNode make_union(std::vector<CsgNode> children);
    static CsgNode make_intersection(std::vector<CsgNode> children);
    static CsgNode complement(CsgNode child);
    /// a \ b, encoded as intersection(a, complement(b)).
    static CsgNode difference(CsgNode a, CsgNode b);

    double value(Point2 x) const;
    FieldSample sample(Point2 x) const;

    const Variant& node() const { return node_; }

    /// Throws InputError naming the offending field ("radius", "normal", ...).
    void validate() const;

    /// Primitive leaves in depth-first order.
    std::vector<const CsgNode*> primitives() const;

    friend bool operator==(const CsgNode&, const CsgNode&);

private:
    Variant node_;
};

bool operator==(const Circle&, const Circle&);
bool operator==(const HalfPlane&, const HalfPlane&);
bool operator==(const AxisRectangle&, const AxisRectangle&);
bool operator==(const ConvexPolygon&, const ConvexPolygon&);
bool operator==(const Union&, const Union&);
bool operator==(const Intersection&, const Intersection&);
bool operator==(const Complement&, const Complement&);

}  // namespace voromesh
