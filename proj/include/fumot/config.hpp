#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fumot/inverse_eta.hpp"
#include "fumot/inverse_sigma.hpp"
#include "fumot/model.hpp"

namespace fumot {

struct SolverSettings {
    IterationOptions psi;
    SemilinearOptions semilinear;
    KrylovOptions krylov;
};

/// Complete experiment description. Serialized as JSON with the sections
/// domain, mesh, coefficients, elasto, bounds, solver, noise and output.
struct Config {
    std::string name = "custom";
    double half_width = 0.5;
    int n = 128;
    int order = 2;
    CoefficientExpressions coefficients;
    double n_x = -0.8;
    double n_m = -0.7;
    double n_f = -0.9;
    double K0 = 0.01;  ///< lower coefficient bound
    double K1 = 10.0;  ///< upper coefficient bound
    SolverSettings solver;
    std::vector<double> noise_levels{0.0, 0.01, 0.02};
    std::uint64_t seed = 20240917;
    /// Synthesize data on a mesh refined by this factor and transfer it down.
    int synthesis_refinement = 1;
    std::string output_dir = "fumot_out";
    int output_grid = 101;

    ElastoOpticalConstants constants() const { return derive_constants(n_x, n_m, n_f); }

    /// Throws ConfigError on out-of-range settings.
    void check() const;
};

/// Throws ConfigError on malformed input or unknown keys.
Config parse_config(std::string_view json_text);
Config load_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, two-space indent).
std::string dump_config(const Config& config);

/// Built-in configurations: case11, case12, case2.
std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
Config preset(std::string_view name);
/// n = 136, k = 4, close to the reference mesh.
Config paper_fidelity(Config config);

/// A preset name or a path to a JSON file.
Config resolve_config(const std::string& name_or_path);

}  // namespace fumot
