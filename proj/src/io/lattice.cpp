#include "voromesh/io/lattice.hpp"

#include <cmath>
#include <random>

#include "voromesh/errors.hpp"

namespace voromesh {

namespace {

int axis_count(double width, double spacing) {
    // The relative slack absorbs widths that are exact multiples of the spacing
    // but round down, such as 1 / 0.1.
    return static_cast<int>(std::floor(width / spacing + 1e-9)) + 1;
}

}  // namespace

Lattice init_lattice(const BoundingBox& frame, double spacing, std::uint64_t seed, double jitter) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw InputError("lattice: spacing must be positive");
    const double w = frame.max.x - frame.min.x, hgt = frame.max.y - frame.min.y;
    if (!(w > 0.0 && hgt > 0.0)) throw InputError("lattice: frame must have positive extent");
    if (spacing > w || spacing > hgt) throw InputError("lattice: spacing larger than the frame");
    if (!(jitter >= 0.0 && jitter < 0.5)) throw InputError("lattice: jitter must be in [0, 0.5)");

    Lattice l;
    l.nx = axis_count(w, spacing);
    l.ny = axis_count(hgt, spacing);
    const double dx = w / (l.nx - 1), dy = hgt / (l.ny - 1);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    l.points.reserve(static_cast<std::size_t>(l.nx) * l.ny);
    for (int j = 0; j < l.ny; ++j)
        for (int i = 0; i < l.nx; ++i) {
            const bool edge = i == 0 || j == 0 || i == l.nx - 1 || j == l.ny - 1;
            // Exact end coordinates keep the frame rows collinear.
            Point2 p{i == l.nx - 1 ? frame.max.x : frame.min.x + i * dx,
                     j == l.ny - 1 ? frame.max.y : frame.min.y + j * dy};
            if (seed != 0 && !edge) {
                p.x += jitter * dx * unit(rng);
                p.y += jitter * dy * unit(rng);
            }
            l.points.push_back(p);
            l.fixed.push_back(edge);
        }
    return l;
}

}  // namespace voromesh
