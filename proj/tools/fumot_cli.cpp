#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fumot/config.hpp"
#include "fumot/error.hpp"
#include "fumot/experiment.hpp"
#include "fumot/field_io.hpp"

namespace {

struct RunFlags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> noise;
    bool anti_crime = false;
    bool paper_fidelity = false;
};

std::vector<double> parse_levels(const std::string& text) {
    std::vector<double> levels;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw fumot::ConfigError("bad noise level '" + item + "'");
        levels.push_back(value);
    }
    return levels;
}

fumot::Config build_config(const RunFlags& flags) {
    fumot::Config config = fumot::resolve_config(flags.config);
    if (flags.paper_fidelity) config = fumot::paper_fidelity(config);
    if (flags.out) config.output_dir = *flags.out;
    if (flags.seed) config.seed = *flags.seed;
    if (flags.noise) config.noise_levels = parse_levels(*flags.noise);
    if (flags.anti_crime) config.synthesis_refinement = 2;
    config.check();
    return config;
}

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
    cmd->add_option("config", flags.config, "Preset name or JSON config path")->required();
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_option("--seed", flags.seed, "Noise seed");
    cmd->add_option("--noise", flags.noise, "Comma separated relative noise levels");
    cmd->add_flag("--anti-crime", flags.anti_crime, "Synthesize data on a 2x finer mesh");
    cmd->add_flag("--paper-fidelity", flags.paper_fidelity, "Use n = 136 and quartic elements");
}

void print_summary(const fumot::ExperimentReport& report) {
    using fumot::format_double;
    std::cout << report.config.name << ": case " << fumot::to_string(report.clean_case.kind)
              << ", " << report.triangles << " triangles, " << report.dofs << " dofs\n";
    for (const fumot::NoiseRecord& r : report.records) {
        std::cout << "  noise " << format_double(r.level);
        if (r.sigma_done) {
            std::cout << "  sigma_xf rel L1 " << format_double(r.sigma_error.l1) << " ("
                      << r.psi_iterations << " it)";
        }
        if (r.eta_done) {
            std::cout << "  eta rel L2 " << format_double(r.eta_error.l2) << " ("
                      << r.gmres_iterations << " it)";
        }
        if (!r.failed_stage.empty()) std::cout << "  FAILED [" << r.failed_stage << "] " << r.failure;
        std::cout << '\n';
    }
    std::cout << "output: " << report.config.output_dir << '\n';
}

int run(const RunFlags& flags, fumot::PipelineMode mode) {
    fumot::Config config;
    try {
        config = build_config(flags);
    } catch (const fumot::Error& e) {
        std::cerr << "error [config]: " << e.what() << '\n';
        return 2;
    }
    try {
        const fumot::ExperimentReport report = fumot::run_pipeline(config, {mode, true});
        print_summary(report);
        if (!report.ok()) {
            for (const auto& r : report.records) {
                if (!r.failed_stage.empty()) {
                    std::cerr << "error [" << r.failed_stage << "] noise "
                              << fumot::format_double(r.level) << ": " << r.failure << '\n';
                }
            }
            return 1;
        }
    } catch (const fumot::StageError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error [unknown]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fluorescence ultrasound-modulated optical tomography toolkit"};
    app.require_subcommand(1);

    RunFlags forward_flags, sigma_flags, eta_flags, experiment_flags;
    auto* forward = app.add_subcommand("forward", "Synthesize forward fields and internal data");
    add_run_flags(forward, forward_flags);
    auto* sigma = app.add_subcommand("reconstruct-sigma", "Reconstruct sigma_xf from Q");
    add_run_flags(sigma, sigma_flags);
    auto* eta = app.add_subcommand("reconstruct-eta", "Reconstruct eta from S with the true sigma_xf");
    add_run_flags(eta, eta_flags);
    auto* experiment = app.add_subcommand("experiment", "Full pipeline over all noise levels");
    add_run_flags(experiment, experiment_flags);

    auto* presets = app.add_subcommand("presets", "Built-in configurations");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "List preset names");
    std::string show_name;
    bool show_fidelity = false;
    auto* show = presets->add_subcommand("show", "Print a preset as JSON");
    show->add_option("name", show_name)->required();
    show->add_flag("--paper-fidelity", show_fidelity);

    CLI11_PARSE(app, argc, argv);

    if (*forward) return run(forward_flags, fumot::PipelineMode::Forward);
    if (*sigma) return run(sigma_flags, fumot::PipelineMode::ReconstructSigma);
    if (*eta) return run(eta_flags, fumot::PipelineMode::ReconstructEta);
    if (*experiment) return run(experiment_flags, fumot::PipelineMode::Full);
    if (*list) {
        for (const auto& name : fumot::preset_names()) std::cout << name << '\n';
        return 0;
    }
    if (*show) {
        try {
            fumot::Config config = fumot::preset(show_name);
            if (show_fidelity) config = fumot::paper_fidelity(config);
            std::cout << fumot::dump_config(config) << '\n';
        } catch (const fumot::Error& e) {
            std::cerr << "error [config]: " << e.what() << '\n';
            return 2;
        }
        return 0;
    }
    return 0;
}
