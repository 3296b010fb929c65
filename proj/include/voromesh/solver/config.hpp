#pragma once

namespace voromesh {

/// Tunables of the elastic solver and of the band analysis it drives.
struct SolverConfig {
    // term weights of the potential
    double theta_r = 1.0;
    double theta_s = 1.0;
    double theta_a = 1.0;
    /// Target length inflation, L0 = m_compress * h.
    double m_compress = 1.2;

    double w_r = 1.0 / 20.0;
    double w_s = 0.5;
    double tau_a = 0.1;
    int n_attract = 3;
    double step_cap_divisor = 5.0;

    /// Band half-width in units of local h.
    double band_factor = 1.0;
    /// Stable crossing edge: dual Voronoi edge length >= stable_factor * h.
    double stable_factor = 0.1;
    /// Stable crossing edges deviating more than this from the normal are defects.
    double angle_tol_deg = 25.0;

    /// Stall: max displacement below stall_tol * h for stall_window iterations.
    double stall_tol = 0.02;
    int stall_window = 5;
    int max_iterations = 2000;

    /// Throws InputError naming the first out-of-range field.
    void validate() const;

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

}  // namespace voromesh
