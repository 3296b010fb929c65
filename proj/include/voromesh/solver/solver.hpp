#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "voromesh/domain/implicit_domain.hpp"
#include "voromesh/domain/sizing.hpp"
#include "voromesh/geometry/delaunay.hpp"
#include "voromesh/geometry/voronoi.hpp"
#include "voromesh/repair/topology_repair.hpp"
#include "voromesh/solver/config.hpp"

namespace voromesh {

struct EnergyTerms {
    double repulsion = 0.0;
    double sharpening = 0.0;
    double attraction = 0.0;
    double total = 0.0;
};

struct IterationState {
    DelaunayMesh mesh;
    VoronoiMesh voronoi;
    BoundaryBand band;
    /// Frame vertices never move.
    std::vector<bool> fixed;
    /// Bounding box of the fixed vertices; moving vertices are kept inside it.
    BoundingBox frame;
    bool has_frame = false;
    int iteration = 0;
    std::vector<Vec2> F_r, F_s, F_a;
    /// Per-vertex displacement of the last step in units of local h, and its maximum.
    std::vector<double> last_displacement;
    double last_max_displacement = 0.0;
};

/// Builds the triangulation, its dual and the band for a starting point set.
IterationState make_state(std::vector<Point2> points, std::vector<bool> fixed, const ImplicitDomain& domain,
                          const SizingField& sizing, const SolverConfig& cfg);

/// Rebuilds dual and band after the mesh changed.
void refresh(IterationState& state, const ImplicitDomain& domain, const SizingField& sizing,
             const SolverConfig& cfg);

/// Weighted potential with the band's normals frozen.
EnergyTerms total_energy(const IterationState& state, const ImplicitDomain& domain, const SizingField& sizing,
                         const SolverConfig& cfg);

/// Fills F_r (corrected by sharpening), F_s and F_a for the current state.
void assemble_forces(IterationState& state, const ImplicitDomain& domain, const SizingField& sizing,
                     const SolverConfig& cfg);

/// Two-stage displacement, relegalization and reclassification. Expects
/// forces from assemble_forces.
void step(IterationState& state, const ImplicitDomain& domain, const SizingField& sizing, const SolverConfig& cfg);

struct IterationRecord {
    int iteration = 0;
    EnergyTerms energy;
    double max_displacement = 0.0;  // units of local h
    std::size_t vertices = 0;
    std::size_t crossing_edges = 0;
    std::size_t stable_edges = 0;
    std::size_t defects = 0;
    bool stalled = false;
};

struct RefinementRecord {
    int iteration = 0;
    std::size_t round = 0;
    std::size_t defects_before = 0;
    std::size_t pentagons = 0;
    std::size_t hexagons = 0;
    std::size_t inserted = 0;
    std::vector<std::string> skipped;
};

/// Receives progress of a run. All callbacks default to no-ops.
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void on_iteration(const IterationRecord&) {}
    virtual void on_state(const IterationState&) {}
    virtual void on_refinement(const RefinementRecord&) {}
    virtual void on_diagnostic(int /*iteration*/, const std::string& /*kind*/, const std::string& /*message*/) {}
};

struct RunResult {
    IterationState state;
    bool converged = false;
    int iterations = 0;
    std::size_t refinement_rounds = 0;
    std::size_t remaining_defects = 0;
};

/// Iterates force assembly and stepping, refining defects whenever the
/// vertices stall, until stalled without defects or the iteration cap.
/// On non-convergence the state with the fewest defects is returned.
RunResult run(std::vector<Point2> points, std::vector<bool> fixed, const ImplicitDomain& domain,
              const SizingField& sizing, const SolverConfig& cfg, EventSink* sink = nullptr);

}  // namespace voromesh
