#pragma once

#include "voromesh/geometry/vec2.hpp"

namespace voromesh {

/// Sign of twice the signed area of abc: +1 counterclockwise, -1 clockwise, 0 collinear.
/// Floating-point filter with exact expansion arithmetic fallback, so the
/// result is always the sign of the exact determinant of the double inputs.
int orient2d(Point2 a, Point2 b, Point2 c);

/// +1 if d lies strictly inside the circle through a, b, c (counterclockwise),
/// 0 if cocircular, -1 outside. Exact like orient2d.
/// Throws DegeneracyError when a, b, c are collinear.
int in_circle(Point2 a, Point2 b, Point2 c, Point2 d);

/// in_circle without the collinearity check, for callers that already know
/// abc is a proper counterclockwise triangle.
int in_circle_unchecked(Point2 a, Point2 b, Point2 c, Point2 d);

/// Center of the circle through a, b, c. Throws DegeneracyError if collinear.
Point2 circumcenter(Point2 a, Point2 b, Point2 c);

namespace predicates_detail {
/// Counts how often the exact stage ran; used by tests to make sure the
/// fallback is exercised.
long exact_fallback_count();
}

}  // namespace voromesh
