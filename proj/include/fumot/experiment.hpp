#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fumot/config.hpp"
#include "fumot/error.hpp"
#include "fumot/forward.hpp"
#include "fumot/internal_data.hpp"

namespace fumot {

/// An error tagged with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// ||recon - truth|| / ||truth|| in L1, L2 and nodal Linf.
struct RelativeErrors {
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
};

/// Throws MeshMismatch unless both fields share a mesh layout.
RelativeErrors compare_fields(const ScalarField& recon, const ScalarField& truth);
/// Truth given in closed form, interpolated on the reconstruction mesh.
RelativeErrors compare_fields(const ScalarField& recon,
                              const std::function<double(double, double)>& truth);

/// Model, forward state and clean internal data on the inversion mesh. With
/// synthesis_refinement > 1 the forward solves run on a finer mesh and every
/// field is transferred down by nodal sampling.
struct Synthesis {
    MeshPtr mesh;
    MeshPtr synthesis_mesh;
    OpticalModel model;
    ElastoOpticalConstants constants;
    ForwardState state;
    InternalData data;
};

Synthesis synthesize(const Config& config);

struct NoiseRecord {
    double level = 0.0;
    std::uint64_t q_seed = 0;
    std::uint64_t s_seed = 0;

    bool sigma_done = false;
    CaseKind scheme = CaseKind::Unsupported;
    int psi_iterations = 0;
    double psi_residual = 0.0;
    bool psi_monotone = false;
    double sign_violation_fraction = 0.0;
    RelativeErrors sigma_error;

    bool eta_done = false;
    int gmres_iterations = 0;
    double gmres_certificate = 0.0;
    RelativeErrors eta_error;

    std::string failed_stage;  ///< empty on success
    std::string failure;

    double sigma_seconds = 0.0;
    double eta_seconds = 0.0;
};

enum class PipelineMode {
    Forward,           ///< synthesis and internal data only
    ReconstructSigma,  ///< plus sigma_xf at every noise level
    ReconstructEta,    ///< plus eta at every noise level, using the true sigma_xf
    Full,              ///< sigma_xf, then eta built on the reconstructed sigma_xf
};

struct ExperimentReport {
    Config config;
    PipelineMode mode = PipelineMode::Full;
    CaseTag clean_case;
    int triangles = 0;
    int dofs = 0;
    std::vector<NoiseRecord> records;
    std::vector<std::string> files;  ///< relative to the output directory
    double synthesis_seconds = 0.0;

    bool ok() const;
    /// Key-value text. Excludes wall times so it is reproducible.
    std::string format() const;
    /// Flat table with one row per noise level.
    std::string errors_csv() const;
};

struct RunOptions {
    PipelineMode mode = PipelineMode::Full;
    /// Write fields, traces and reports under config.output_dir.
    bool write_files = true;
};

/// Forward -> internal data -> per noise level (noise -> sigma_xf -> eta) ->
/// metrics. Stage failures inside a noise level are recorded and the run
/// continues; failures before the noise loop throw StageError.
ExperimentReport run_pipeline(const Config& config, const RunOptions& options = {});

std::string to_string(PipelineMode mode);

}  // namespace fumot
