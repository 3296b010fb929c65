#include "voromesh/solver/elastic.hpp"

#include <cmath>

#include "voromesh/errors.hpp"
#include "voromesh/geometry/predicates.hpp"
#include "voromesh/solver/config.hpp"

namespace voromesh {

namespace {

constexpr double kTinyDenominator = 1e-14;

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("solver: ") + field + " must be positive");
}

}  // namespace

void SolverConfig::validate() const {
    if (!(theta_r >= 0) || !(theta_s >= 0) || !(theta_a >= 0))
        throw InputError("solver: theta weights must be nonnegative");
    if (!(m_compress > 1.0)) throw InputError("solver: m_compress must exceed 1");
    require_positive(w_r, "w_r");
    require_positive(w_s, "w_s");
    require_positive(tau_a, "tau_a");
    require_positive(step_cap_divisor, "step_cap_divisor");
    require_positive(band_factor, "band_factor");
    require_positive(stable_factor, "stable_factor");
    require_positive(angle_tol_deg, "angle_tol_deg");
    require_positive(stall_tol, "stall_tol");
    if (n_attract < 1) throw InputError("solver: n_attract must be at least 1");
    if (stall_window < 1) throw InputError("solver: stall_window must be at least 1");
    if (max_iterations < 1) throw InputError("solver: max_iterations must be at least 1");
}

double repulsion_energy_edge(double L, double L0) {
    if (!(L > 0.0)) throw InputError("repulsion_energy_edge: edge length must be positive");
    if (!(L0 > 0.0)) throw InputError("repulsion_energy_edge: target length must be positive");
    if (L >= L0) return 0.0;
    const double r = L / L0;
    return L0 * L0 * (r - 1.0 - std::log(r));
}

double repulsion_weight(double L, double L0) {
    if (L >= L0) return 0.0;
    const double r = L0 / L;
    return (r - 1.0) * r;
}

double sharpening_energy_edge(Point2 c1, Point2 c2, Vec2 n) {
    const double a = dot(n, c2 - c1);
    return 0.5 * distance(c1, c2) * a * a;
}

double attraction_energy_edge(Point2 /*c*/, double L_dual, double L0, double u_c) {
    if (!(L_dual > 0.0)) throw InputError("attraction_energy_edge: dual edge length must be positive");
    const double r = L0 / L_dual;
    return 0.5 * r * r * u_c * u_c;
}

Mat2 circumcenter_jacobian(Point2 p_i, Point2 p_j, Point2 p_k) {
    const Mat2 E = Mat2::from_columns(p_j - p_i, p_k - p_i);
    const double scale = std::max(norm2(p_j - p_i), norm2(p_k - p_i));
    if (!(std::abs(E.det()) >= 1e-14 * scale))
        throw DegeneracyError("circumcenter_jacobian: nearly collinear triangle", p_i, p_j, p_k);
    const Vec2 r = circumcenter(p_i, p_j, p_k) - p_i;
    // C^T = (r r) E^{-1}
    return (Mat2::from_columns(r, r) * E.inverse()).transposed();
}

Vec2 repulsion_gradient_sum(Point2 p_i, std::span<const StarNeighbor> star) {
    Vec2 sum;
    for (const StarNeighbor& nb : star) sum += repulsion_weight(distance(p_i, nb.p), nb.L0) * (p_i - nb.p);
    return sum;
}

Vec2 repulsion_force(Point2 p_i, std::span<const StarNeighbor> star, double theta_r) {
    Vec2 sum;
    double d = 0.0;
    for (const StarNeighbor& nb : star) {
        const double phi = repulsion_weight(distance(p_i, nb.p), nb.L0);
        sum += phi * (p_i - nb.p);
        d += phi;
    }
    if (d <= 0.0) return {};
    return (theta_r / d) * sum;
}

Vec2 correct_repulsion(Vec2 F_s, Vec2 F_r) {
    const double fs2 = norm2(F_s);
    if (fs2 == 0.0) return F_r;
    const double a = dot(F_s, F_r);
    return F_r - ((a - std::abs(a)) / (2.0 * fs2)) * F_s;
}

SharpeningResult sharpening_force(std::span<const SharpeningTerm> terms, Vec2 F_r, double theta_s, bool gate) {
    Vec2 num;
    double den = 0.0;
    for (const SharpeningTerm& t : terms) {
        const Vec2 q = (t.C2 - t.C1).transposed() * t.n;
        const double len = distance(t.c1, t.c2);
        const double mis = dot(t.n, t.c1 - t.c2);
        Vec2 r = (len * mis) * q;
        if (gate && dot(t.e, F_r) * dot(t.e, q) * mis < 0.0) r -= dot(t.e, r) * t.e;
        num += r;
        den += len * norm2(q);
    }
    if (den < kTinyDenominator) return {{}, F_r};
    const Vec2 F_s = (theta_s / den) * num;
    return {F_s, correct_repulsion(F_s, F_r)};
}

Vec2 attraction_force(std::span<const AttractionTerm> terms, double theta_a) {
    Vec2 sum;
    for (const AttractionTerm& t : terms) {
        const double g = norm(t.grad_u);
        if (!(g > 0.0) || !(t.L > 0.0)) continue;
        const double r = t.L0 / t.L;
        sum += (0.5 * r * r * t.u_c / g) * ((t.C1 + t.C2).transposed() * t.grad_u);
    }
    return -theta_a * sum;
}

}  // namespace voromesh
