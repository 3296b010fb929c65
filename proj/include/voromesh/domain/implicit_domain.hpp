#pragma once

#include <vector>

#include "voromesh/domain/csg.hpp"
#include "voromesh/geometry/vec2.hpp"

namespace voromesh {

struct BoundingBox {
    Point2 min;
    Point2 max;

    double diagonal() const { return distance(min, max); }
    bool contains(Point2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Sharp feature of the interface: a point on Gamma where the field has a
/// gradient discontinuity (two primitives meet at an angle, polygon vertex).
struct CornerSummit {
    Point2 position;
    double turn_angle = 0.0;  // angle between the one-sided normals, radians
};

/// Implicit two-material domain: u < 0 in material 1, u > 0 in material 0,
/// and the interface Gamma is the zero level set.
class ImplicitDomain {
public:
    ImplicitDomain(CsgNode root, BoundingBox box);

    double eval_u(Point2 x) const { return root_.value(x); }

    /// Analytic gradient of the active primitive, falling back to central
    /// differences with step 1e-6 * bbox diagonal. Throws
    /// VanishingGradientError when |grad u| < 1e-12.
    Vec2 eval_grad(Point2 x) const;

    /// Newton projection onto Gamma, x <- x - u grad u / |grad u|^2, at most 30
    /// steps with backtracking, then bisection along the last gradient
    /// direction. Result satisfies |u| <= 1e-9 * bbox diagonal.
    Point2 project_to_boundary(Point2 x) const;

    double projection_tolerance() const { return 1e-9 * box_.diagonal(); }
    double gradient_step() const { return 1e-6 * box_.diagonal(); }

    const CsgNode& root() const { return root_; }
    const BoundingBox& box() const { return box_; }

    /// Sharp corners of Gamma inside the bounding box, computed from pairwise
    /// intersections of primitive boundaries and polygon vertices.
    const std::vector<CornerSummit>& corners() const { return corners_; }

private:
    void find_corners();

    CsgNode root_;
    BoundingBox box_;
    std::vector<CornerSummit> corners_;
};

}  // namespace voromesh
