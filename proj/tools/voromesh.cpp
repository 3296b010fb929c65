#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "voromesh/errors.hpp"
#include "voromesh/io/job.hpp"
#include "voromesh/io/run_spec.hpp"

namespace {

using namespace voromesh;

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void configure_logging(bool quiet) {
    auto logger = spdlog::stderr_color_mt("voromesh");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
    spdlog::level::level_enum level = spdlog::level::info;
    if (const char* env = std::getenv("VOROMESH_LOG")) {
        const std::string v = env;
        if (v == "error")
            level = spdlog::level::err;
        else if (v == "debug")
            level = spdlog::level::debug;
        else if (v != "info")
            spdlog::warn("VOROMESH_LOG={} not recognized, using info", v);
    }
    if (quiet) level = spdlog::level::err;
    spdlog::set_level(level);
}

class Progress : public EventSink {
public:
    void on_iteration(const IterationRecord& r) override {
        const auto level = r.iteration % 50 == 0 ? spdlog::level::info : spdlog::level::debug;
        spdlog::log(level, "iteration {}: {} vertices, {} crossing ({} stable), {} defects, max step {:.4f} h",
                    r.iteration, r.vertices, r.crossing_edges, r.stable_edges, r.defects, r.max_displacement);
    }
    void on_refinement(const RefinementRecord& r) override {
        spdlog::info("refinement round {} at iteration {}: {} defects, {} inserted, {} skipped", r.round,
                     r.iteration, r.defects_before, r.inserted, r.skipped.size());
        for (const std::string& s : r.skipped) spdlog::debug("  skipped: {}", s);
    }
    void on_diagnostic(int iteration, const std::string& kind, const std::string& message) override {
        spdlog::debug("iteration {}: {}: {}", iteration, kind, message);
    }
};

int cmd_check(const std::string& path) {
    const RunSpec spec = parse_spec(read_file(path));
    spdlog::info("{}: valid, frame spacing {}", path, spec.frame.spacing);
    return 0;
}

int cmd_mesh(const std::string& path, const std::string& out, const std::vector<int>& snapshots, int max_iter) {
    RunSpec spec = parse_spec(read_file(path));
    // --out leaves the recorded spec untouched, so reruns into other directories stay byte-identical.
    const std::string directory = out.empty() ? spec.output : out;
    if (!snapshots.empty()) spec.snapshots = snapshots;
    if (max_iter >= 0) spec.solver.max_iterations = max_iter;

    Progress progress;
    const JobResult job = run_job(spec, &progress);
    write_outputs(job.outputs, directory);
    if (job.converged) {
        spdlog::info("converged after {} iterations, {} vertices, {} refinement rounds; wrote {}", job.iterations,
                     job.vertices, job.refinement_rounds, directory);
        return 0;
    }
    spdlog::warn("not converged after {} iterations, {} defects remain; wrote best state to {}", job.iterations,
                 job.remaining_defects, directory);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voronoi meshing of implicit two-material domains"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "Only report errors");

    std::string spec_path, out;
    std::vector<int> snapshots;
    int max_iter = -1;
    CLI::App* mesh = app.add_subcommand("mesh", "Run the mesher and write outputs");
    mesh->add_option("spec", spec_path, "JSON run spec")->required();
    mesh->add_option("--out", out, "Output directory (overrides the spec)");
    mesh->add_option("--snapshots", snapshots, "Iterations to snapshot, comma separated")->delimiter(',');
    mesh->add_option("--max-iter", max_iter, "Iteration cap (overrides the spec)")->check(CLI::NonNegativeNumber);
    mesh->add_flag("--quiet", quiet, "Only report errors");

    CLI::App* check = app.add_subcommand("check", "Validate a spec without running");
    check->add_option("spec", spec_path, "JSON run spec")->required();
    check->add_flag("--quiet", quiet, "Only report errors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    configure_logging(quiet);
    try {
        if (*check) return cmd_check(spec_path);
        return cmd_mesh(spec_path, out, snapshots, max_iter);
    } catch (const SpecParseError& e) {
        spdlog::error("{}: {}", spec_path, e.what());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
    }
    return 1;
}
