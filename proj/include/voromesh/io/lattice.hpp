#pragma once

#include <cstdint>
#include <vector>

#include "voromesh/domain/implicit_domain.hpp"

namespace voromesh {

struct Lattice {
    std::vector<Point2> points;  // row-major, rows of increasing y
    std::vector<bool> fixed;     // points on the frame boundary
    int nx = 0;
    int ny = 0;
};

/// Cartesian lattice spanning the frame with floor(W / spacing) + 1 points
/// per axis, spread uniformly. A nonzero seed displaces interior points by up
/// to jitter * spacing in each coordinate. Throws InputError when spacing is
/// not positive or exceeds a frame side.
Lattice init_lattice(const BoundingBox& frame, double spacing, std::uint64_t seed = 0, double jitter = 0.1);

}  // namespace voromesh
