#pragma once

#include <span>

#include "voromesh/geometry/vec2.hpp"

namespace voromesh {

/// L0^2 (L/L0 - 1 - log(L/L0)) for L < L0, else 0. Throws InputError for L <= 0.
double repulsion_energy_edge(double L, double L0);

/// (L0/L - 1)(L0/L), clamped to 0 once the edge is slack.
double repulsion_weight(double L, double L0);

/// 1/2 |c1 - c2| (n . (c2 - c1))^2
double sharpening_energy_edge(Point2 c1, Point2 c2, Vec2 n);

/// 1/2 (L0/L)^2 u_c^2 for the Voronoi edge with midpoint c and dual length L.
double attraction_energy_edge(Point2 c, double L_dual, double L0, double u_c);

/// d(circumcenter)/d(p_i) for the counterclockwise triangle (p_i, p_j, p_k).
/// Throws DegeneracyError when the triangle is nearly collinear.
Mat2 circumcenter_jacobian(Point2 p_i, Point2 p_j, Point2 p_k);

/// Neighbor of p_i along one star edge.
struct StarNeighbor {
    Point2 p;
    double L0;
};

/// Sum of phi_r (p_i - p_j) over the star, i.e. -dW_r/dp_i.
Vec2 repulsion_gradient_sum(Point2 p_i, std::span<const StarNeighbor> star);

/// Preconditioned repulsion: theta_r * sum / sum(phi_r), zero if every edge is slack.
Vec2 repulsion_force(Point2 p_i, std::span<const StarNeighbor> star, double theta_r);

/// One boundary Voronoi edge as seen from an endpoint p_i of its dual edge.
struct SharpeningTerm {
    Point2 c1, c2;
    Mat2 C1, C2;  // d c1 / d p_i, d c2 / d p_i
    Vec2 n;       // frozen unit normal at the touching point
    Vec2 e;       // unit vector from p_i to the other endpoint of the dual edge
};

struct SharpeningResult {
    Vec2 F_s;
    Vec2 F_r_corrected;
};

/// Sharpening force with the repulsion interaction gate and the subsequent
/// correction of F_r. `gate = false` disables the interaction (for testing).
SharpeningResult sharpening_force(std::span<const SharpeningTerm> terms, Vec2 F_r, double theta_s,
                                  bool gate = true);

/// Removes the component of F_r opposing F_s.
Vec2 correct_repulsion(Vec2 F_s, Vec2 F_r);

struct AttractionTerm {
    Mat2 C1, C2;
    double u_c;
    Vec2 grad_u;  // gradient of u at the edge midpoint
    double L;     // dual Delaunay edge length
    double L0;
};

/// -theta_a * sum 1/2 (L0/L)^2 u(c) (C1 + C2)^T grad u / |grad u|.
Vec2 attraction_force(std::span<const AttractionTerm> terms, double theta_a);

}  // namespace voromesh
