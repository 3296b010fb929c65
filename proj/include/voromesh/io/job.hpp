#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "voromesh/io/run_spec.hpp"
#include "voromesh/post/postprocess.hpp"
#include "voromesh/solver/solver.hpp"

namespace voromesh {

/// Every file of a run, kept in memory until write_outputs.
struct JobOutputs {
    struct File {
        std::string name;
        std::string content;
    };
    std::vector<File> files;

    const std::string* find(const std::string& name) const;
};

struct JobResult {
    bool converged = false;
    int iterations = 0;
    std::size_t vertices = 0;
    std::size_t refinement_rounds = 0;
    std::size_t remaining_defects = 0;
    QualityReport quality;
    JobOutputs outputs;
};

/// Plain-text polygon list: "NV NP", NV lines of "x y" with 17 significant
/// digits, then NP lines of "k id_1 ... id_k tag".
std::string format_mesh(const HybridMesh& mesh);

/// One JSON object per line. Holds no timestamps, so equal runs give equal logs.
class EventLog : public EventSink {
public:
    void on_iteration(const IterationRecord& r) override;
    void on_refinement(const RefinementRecord& r) override;
    void on_diagnostic(int iteration, const std::string& kind, const std::string& message) override;
    void record(const std::string& json_line);
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

std::string quality_report_json(const JobResult& result, const std::vector<Subdomain>& subdomains);

/// Seeds the lattice, runs the solver, collapses short edges and renders the
/// report, event log, mesh and SVG snapshots. Progress is forwarded to the
/// observer. Writes nothing to disk.
JobResult run_job(const RunSpec& spec, EventSink* observer = nullptr);

/// Creates the directory and writes every file of the job.
void write_outputs(const JobOutputs& outputs, const std::filesystem::path& directory);

/// File name of the snapshot taken at an iteration.
std::string snapshot_name(int iteration);

}  // namespace voromesh
