#include "fumot/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fumot/field_io.hpp"
#include "fumot/inverse_eta.hpp"
#include "fumot/inverse_sigma.hpp"

namespace fumot {

namespace {

namespace fs = std::filesystem;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string level_tag(double level) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "noise_%.4f", level);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

CaseTag classify_clean(const ScalarField& Q, const OpticalModel& model,
                       const ElastoOpticalConstants& k) {
    const double e = k.psi_exponent();
    const ScalarField b = model.sigma_xa * (-e * k.mu);
    const ScalarField c = Q * (e / k.beta_f);
    return classify_case(k.theta, std::span<const double>(b.values().data(), b.size()),
                         std::span<const double>(c.values().data(), c.size()));
}

/// Output directory bookkeeping; a no-op when files are disabled.
class Outputs {
public:
    Outputs(const Config& config, bool enabled, std::vector<std::string>& manifest)
        : root_(config.output_dir), grid_(config.output_grid), enabled_(enabled),
          manifest_(manifest) {
        if (enabled_) fs::create_directories(root_);
    }

    void field(const std::string& rel, const ScalarField& f) {
        if (!enabled_) return;
        write_field_csv(f, grid_, root_ / rel);
        manifest_.push_back(rel);
    }
    void psi_trace(const std::string& rel, const IterationTrace& t) {
        if (!enabled_) return;
        write_psi_trace_csv(t, root_ / rel);
        manifest_.push_back(rel);
    }
    void krylov_trace(const std::string& rel, const KrylovTrace& t) {
        if (!enabled_) return;
        write_krylov_trace_csv(t, root_ / rel);
        manifest_.push_back(rel);
    }
    void text(const std::string& rel, const std::string& body, bool record = true) {
        if (!enabled_) return;
        write_text(root_ / rel, body);
        if (record) manifest_.push_back(rel);
    }
    /// Rewrites the reports; called after every stage so a later failure
    /// still leaves a consistent partial report on disk.
    void reports(const ExperimentReport& report) {
        if (!enabled_) return;
        write_text(root_ / "report.txt", report.format());
        write_text(root_ / "errors.csv", report.errors_csv());
        std::ostringstream t;
        t << "synthesis_seconds = " << format_double(report.synthesis_seconds) << '\n';
        for (const NoiseRecord& r : report.records) {
            t << level_tag(r.level) << ".sigma_seconds = " << format_double(r.sigma_seconds) << '\n'
              << level_tag(r.level) << ".eta_seconds = " << format_double(r.eta_seconds) << '\n';
        }
        write_text(root_ / "timing.txt", t.str());
    }

private:
    fs::path root_;
    int grid_;
    bool enabled_;
    std::vector<std::string>& manifest_;
};

void put(std::ostringstream& out, const std::string& key, const std::string& value) {
    out << key << " = " << value << '\n';
}
void put(std::ostringstream& out, const std::string& key, double value) {
    put(out, key, format_double(value));
}
void put(std::ostringstream& out, const std::string& key, int value) {
    put(out, key, std::to_string(value));
}
void put_errors(std::ostringstream& out, const std::string& prefix, const RelativeErrors& e) {
    put(out, prefix + ".rel_l1", e.l1);
    put(out, prefix + ".rel_l2", e.l2);
    put(out, prefix + ".rel_linf", e.linf);
}

}  // namespace

std::string to_string(PipelineMode mode) {
    switch (mode) {
        case PipelineMode::Forward: return "forward";
        case PipelineMode::ReconstructSigma: return "reconstruct-sigma";
        case PipelineMode::ReconstructEta: return "reconstruct-eta";
        case PipelineMode::Full: return "experiment";
    }
    return "unknown";
}

RelativeErrors compare_fields(const ScalarField& recon, const ScalarField& truth) {
    if (!recon.mesh() || !truth.mesh() ||
        (recon.mesh() != truth.mesh() && !recon.mesh()->same_layout(*truth.mesh()))) {
        throw MeshMismatch("compare_fields: reconstruction and truth live on different meshes");
    }
    const ScalarField diff = recon - ScalarField(recon.mesh(), truth.values());
    const FieldNorms d = norms(diff);
    const FieldNorms t = norms(truth);
    auto ratio = [](double num, double den) { return den > 0.0 ? num / den : num; };
    return {ratio(d.l1, t.l1), ratio(d.l2, t.l2), ratio(d.linf, t.linf)};
}

RelativeErrors compare_fields(const ScalarField& recon,
                              const std::function<double(double, double)>& truth) {
    return compare_fields(recon, ScalarField::interpolate(recon.mesh(), truth));
}

Synthesis synthesize(const Config& config) {
    config.check();
    Synthesis out;
    out.constants = config.constants();
    out.mesh = Mesh::structured(config.half_width, config.n, config.order);
    out.model = OpticalModel::sample(out.mesh, config.coefficients);
    out.model.validate(config.K0, config.K1);

    if (config.synthesis_refinement == 1) {
        out.synthesis_mesh = out.mesh;
        out.state = solve_forward(out.model);
        out.data = compute_internal_data(out.state, out.model, out.constants);
        return out;
    }
    out.synthesis_mesh =
        Mesh::structured(config.half_width, config.n * config.synthesis_refinement, config.order);
    const OpticalModel fine = OpticalModel::sample(out.synthesis_mesh, config.coefficients);
    const ForwardState state = solve_forward(fine);
    const InternalData data = compute_internal_data(state, fine, out.constants);
    out.state = {transfer(state.u0, out.mesh), transfer(state.w0, out.mesh),
                 transfer(state.v, out.mesh), transfer(state.p, out.mesh)};
    out.data = {transfer(data.Q, out.mesh), transfer(data.S, out.mesh), data.q_provenance,
                data.s_provenance};
    return out;
}

bool ExperimentReport::ok() const {
    for (const NoiseRecord& r : records) {
        if (!r.failed_stage.empty()) return false;
    }
    return true;
}

std::string ExperimentReport::format() const {
    std::ostringstream out;
    const ElastoOpticalConstants k = config.constants();
    put(out, "name", config.name);
    put(out, "mode", to_string(mode));
    put(out, "domain.half_width", config.half_width);
    put(out, "mesh.n", config.n);
    put(out, "mesh.order", config.order);
    put(out, "mesh.synthesis_refinement", config.synthesis_refinement);
    put(out, "mesh.triangles", triangles);
    put(out, "mesh.dofs", dofs);
    put(out, "elasto.n_x", config.n_x);
    put(out, "elasto.n_m", config.n_m);
    put(out, "elasto.n_f", config.n_f);
    put(out, "elasto.tau", k.tau);
    put(out, "elasto.mu", k.mu);
    put(out, "elasto.theta", k.theta);
    put(out, "case", std::string(fumot::to_string(clean_case.kind)));
    if (!clean_case.reason.empty()) put(out, "case.reason", clean_case.reason);
    put(out, "noise.seed", std::to_string(config.seed));
    put(out, "noise.levels", static_cast<int>(config.noise_levels.size()));
    put(out, "status", ok() ? std::string("ok") : std::string("failed"));

    for (std::size_t i = 0; i < records.size(); ++i) {
        const NoiseRecord& r = records[i];
        out << "\n[record " << i << "]\n";
        put(out, "noise_level", r.level);
        put(out, "q_seed", std::to_string(r.q_seed));
        put(out, "s_seed", std::to_string(r.s_seed));
        put(out, "status", r.failed_stage.empty() ? std::string("ok") : "failed:" + r.failed_stage);
        if (!r.failure.empty()) put(out, "error", r.failure);
        if (r.sigma_done) {
            put(out, "sigma.scheme", std::string(fumot::to_string(r.scheme)));
            put(out, "sigma.iterations", r.psi_iterations);
            put(out, "sigma.final_residual", r.psi_residual);
            put(out, "sigma.monotone", std::string(r.psi_monotone ? "true" : "false"));
            put(out, "sigma.sign_violation_fraction", r.sign_violation_fraction);
            put_errors(out, "sigma", r.sigma_error);
        }
        if (r.eta_done) {
            put(out, "eta.gmres_iterations", r.gmres_iterations);
            put(out, "eta.residual_certificate", r.gmres_certificate);
            put_errors(out, "eta", r.eta_error);
        }
    }
    out << "\n[files]\n";
    for (const std::string& f : files) out << f << '\n';
    return out.str();
}

std::string ExperimentReport::errors_csv() const {
    std::ostringstream out;
    out << "noise_level,status,sigma_rel_l1,sigma_rel_l2,sigma_rel_linf,psi_iterations,"
           "eta_rel_l1,eta_rel_l2,eta_rel_linf,gmres_iterations\n";
    const std::string na = "nan";
    for (const NoiseRecord& r : records) {
        out << format_double(r.level) << ',' << (r.failed_stage.empty() ? "ok" : r.failed_stage)
            << ',';
        if (r.sigma_done) {
            out << format_double(r.sigma_error.l1) << ',' << format_double(r.sigma_error.l2) << ','
                << format_double(r.sigma_error.linf) << ',' << r.psi_iterations << ',';
        } else {
            out << na << ',' << na << ',' << na << ",0,";
        }
        if (r.eta_done) {
            out << format_double(r.eta_error.l1) << ',' << format_double(r.eta_error.l2) << ','
                << format_double(r.eta_error.linf) << ',' << r.gmres_iterations << '\n';
        } else {
            out << na << ',' << na << ',' << na << ",0\n";
        }
    }
    return out.str();
}

ExperimentReport run_pipeline(const Config& config, const RunOptions& options) {
    ExperimentReport report;
    report.config = config;
    report.mode = options.mode;
    in_stage("config", [&] { config.check(); });

    Outputs out(config, options.write_files, report.files);
    out.text("config.json", dump_config(config) + "\n");
    if (options.write_files) {
        for (const char* f : {"report.txt", "errors.csv", "timing.txt"}) report.files.emplace_back(f);
    }

    const auto t0 = Clock::now();
    const Synthesis syn = in_stage("synthesis", [&] { return synthesize(config); });
    report.synthesis_seconds = seconds_since(t0);
    report.triangles = syn.mesh->element_count();
    report.dofs = syn.mesh->dof_count();
    report.clean_case = classify_clean(syn.data.Q, syn.model, syn.constants);

    in_stage("output", [&] {
        out.field("truth/sigma_xf.csv", syn.model.sigma_xf);
        out.field("truth/eta.csv", syn.model.eta);
        out.field("forward/u0.csv", syn.state.u0);
        out.field("forward/w0.csv", syn.state.w0);
        out.field("forward/v.csv", syn.state.v);
        out.field("forward/p.csv", syn.state.p);
        out.field("data/Q.csv", syn.data.Q);
        out.field("data/S.csv", syn.data.S);
        out.reports(report);
    });
    if (options.mode == PipelineMode::Forward) return report;

    const ElastoOpticalConstants& k = syn.constants;
    const SolverSettings& solver = config.solver;
    for (double level : config.noise_levels) {
        NoiseRecord rec;
        rec.level = level;
        rec.q_seed = config.seed;
        rec.s_seed = derived_seed(config.seed, 1);
        const std::string dir = level_tag(level) + "/";
        const ScalarField Q = add_noise(syn.data.Q, level, rec.q_seed);
        const ScalarField S = add_noise(syn.data.S, level, rec.s_seed);

        std::optional<ScalarField> sigma_rec;
        if (options.mode != PipelineMode::ReconstructEta) {
            const auto ts = Clock::now();
            try {
                SigmaReconstruction r =
                    reconstruct_sigma(Q, syn.model, k, solver.psi, solver.semilinear);
                rec.sigma_done = true;
                rec.scheme = r.psi.trace.scheme;
                rec.psi_iterations = r.psi.trace.iterations;
                rec.psi_residual = r.psi.trace.final_residual();
                rec.psi_monotone = r.psi.trace.monotone();
                rec.sign_violation_fraction = r.problem.sign_violation_fraction;
                rec.sigma_error = compare_fields(r.sigma_xf, syn.model.sigma_xf);
                out.field(dir + "sigma_xf.csv", r.sigma_xf);
                out.psi_trace(dir + "psi_trace.csv", r.psi.trace);
                sigma_rec = std::move(r.sigma_xf);
            } catch (const std::exception& e) {
                rec.failed_stage = "inverse_sigma";
                rec.failure = e.what();
            }
            rec.sigma_seconds = seconds_since(ts);
        }

        const bool want_eta = options.mode == PipelineMode::ReconstructEta ||
                              (options.mode == PipelineMode::Full && sigma_rec.has_value());
        if (want_eta) {
            const auto te = Clock::now();
            try {
                ScalarField eta;
                KrylovTrace trace;
                if (options.mode == PipelineMode::ReconstructEta) {
                    const EtaOperator op(syn.model, k, syn.state.u0, syn.state.v,
                                         solver.psi.linear_solver);
                    EtaSolution s = solve_eta(S, op, solver.krylov);
                    eta = std::move(s.eta);
                    trace = std::move(s.trace);
                } else {
                    const OpticalModel model_rec = syn.model.with_sigma_xf(*sigma_rec);
                    const ScalarField u0 = solve_excitation(model_rec);
                    const EtaOperator op(model_rec, k, u0, syn.state.v, solver.psi.linear_solver);
                    EtaSolution s = solve_eta(S, op, solver.krylov);
                    eta = std::move(s.eta);
                    trace = std::move(s.trace);
                }
                rec.eta_done = true;
                rec.gmres_iterations = trace.iterations;
                rec.gmres_certificate = trace.certificate;
                rec.eta_error = compare_fields(eta, syn.model.eta);
                out.field(dir + "eta.csv", eta);
                out.krylov_trace(dir + "gmres_trace.csv", trace);
            } catch (const std::exception& e) {
                rec.failed_stage = "inverse_eta";
                rec.failure = e.what();
            }
            rec.eta_seconds = seconds_since(te);
        }
        report.records.push_back(std::move(rec));
        out.reports(report);
    }
    return report;
}

}  // namespace fumot
