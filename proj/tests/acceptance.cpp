// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "draws.hpp"
#include "fumot/config.hpp"
#include "fumot/experiment.hpp"
#include "fumot/inverse_eta.hpp"
#include "fumot/inverse_sigma.hpp"

using namespace fumot;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("FAILED " + what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

int failures = 0;

void run(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.notes.push_back(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << " ("
              << fmt("%.1f", seconds_since(t0)) << " s)\n";
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
}

// Variable-coefficient manufactured problem with inhomogeneous boundary data.
double mms_u(double x, double y) { return std::exp(x) * std::sin(2 * y) + x * x; }
double mms_a(double x, double y) { return 1.0 + 0.3 * x * y; }
double mms_f(double x, double y) {
    const double ex = std::exp(x), s = std::sin(2 * y), c = std::cos(2 * y);
    const double lap = -3.0 * ex * s + 2.0;
    const double ux = ex * s + 2.0 * x, uy = 2.0 * ex * c;
    return -mms_a(x, y) * lap - (0.3 * y * ux + 0.3 * x * uy) + 0.5 * mms_u(x, y);
}

double mms_error(int n, int k) {
    auto mesh = Mesh::structured(0.5, n, k);
    const EllipticOperator op(ScalarField::interpolate(mesh, mms_a), ScalarField::constant(mesh, 0.5));
    const ScalarField u = op.solve(ScalarField::interpolate(mesh, mms_f), ScalarField::interpolate(mesh, mms_u));
    return l2_error(u, mms_u);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* expected_scheme_name(const std::string& preset_name) {
    return preset_name == "case11" ? "case11" : preset_name == "case12" ? "case12" : "case2";
}

// Criterion 4 and 5 checks on one converged Psi solve.
void check_psi(Outcome& o, const std::string& label, const SigmaReconstruction& rec) {
    const IterationTrace& t = rec.psi.trace;
    o.require(t.monotone(1e-10), label + ": iterates not monotone");
    o.require(t.converged && t.final_residual() <= 1e-8 && t.iterations <= 200,
              label + ": r = " + fmt("%.3g", t.final_residual()) + " after " + std::to_string(t.iterations) +
                  " iterations");
}

void check_max_principle(Outcome& o, const std::string& label, const SigmaReconstruction& rec) {
    const ScalarField& psi = rec.psi.psi;
    const MeshPtr& mesh = psi.mesh();
    double bmax = -1e300, imax = -1e300;
    for (int d : mesh->boundary_dofs()) bmax = std::max(bmax, psi[d]);
    for (int d : mesh->interior_dofs()) imax = std::max(imax, psi[d]);
    o.require(imax <= bmax + 1e-8 * std::abs(bmax),
              label + ": interior max " + fmt("%.12g", imax) + " > boundary max " + fmt("%.12g", bmax));
    const IterationTrace& t = rec.psi.trace;
    if (t.scheme == CaseKind::Case12) {
        const double worst = *std::max_element(t.psi_max.begin(), t.psi_max.end());
        o.require(worst <= t.upper_bound + 1e-8,
                  label + ": iterate max " + fmt("%.12g", worst) + " exceeds h-bar " + fmt("%.12g", t.upper_bound));
    }
}

SigmaReconstruction clean_sigma(const Synthesis& syn, const Config& cfg) {
    return reconstruct_sigma(syn.data.Q, syn.model, syn.constants, cfg.solver.psi, cfg.solver.semilinear);
}

}  // namespace

int main() {
    const std::vector<std::string> names = preset_names();

    run(1, "manufactured-solution convergence order >= k + 0.7, n = 16..128, k = 1, 2, < 30 s",
        [](Outcome& o) {
            const auto t0 = Clock::now();
            for (int k : {1, 2}) {
                std::vector<double> errs;
                for (int n : {16, 32, 64, 128}) errs.push_back(mms_error(n, k));
                std::string line = "k = " + std::to_string(k) + " orders:";
                for (size_t i = 1; i < errs.size(); ++i) {
                    const double order = std::log2(errs[i - 1] / errs[i]);
                    line += " " + fmt("%.3f", order);
                    o.require(order >= k + 0.7, "k = " + std::to_string(k) + " order " + fmt("%.3f", order));
                }
                o.note(line + "  (finest L2 error " + fmt("%.3e", errs.back()) + ")");
            }
            const double t = seconds_since(t0);
            o.require(t < 30.0, "runtime " + fmt("%.1f", t) + " s");
        });

    // Criteria 2 and 3 share one full pipeline run per preset.
    std::map<std::string, ExperimentReport> reports;
    std::map<std::string, double> runtimes;
    std::string pipeline_error;
    for (const auto& name : names) {
        try {
            const auto t0 = Clock::now();
            reports.emplace(name, run_pipeline(preset(name), {PipelineMode::Full, false}));
            runtimes[name] = seconds_since(t0);
        } catch (const std::exception& e) {
            pipeline_error += name + ": " + e.what() + "; ";
        }
    }

    run(2, "noiseless round trip: sigma_xf L1 < 1%, eta L2 < 1%, < 5 min per preset", [&](Outcome& o) {
        o.require(pipeline_error.empty(), "pipeline: " + pipeline_error);
        for (const auto& name : names) {
            if (!reports.count(name)) continue;
            const ExperimentReport& rep = reports.at(name);
            const auto it = std::find_if(rep.records.begin(), rep.records.end(),
                                         [](const NoiseRecord& r) { return r.level == 0.0; });
            if (it == rep.records.end()) {
                o.require(false, name + ": no noiseless record");
                continue;
            }
            o.require(it->sigma_done && it->eta_done, name + ": failed at " + it->failed_stage + ": " + it->failure);
            o.require(it->sigma_error.l1 < 0.01, name + ": sigma L1 " + fmt("%.4g", it->sigma_error.l1));
            o.require(it->eta_error.l2 < 0.01, name + ": eta L2 " + fmt("%.4g", it->eta_error.l2));
            o.require(runtimes.at(name) < 300.0, name + ": runtime " + fmt("%.1f", runtimes.at(name)) + " s");
            o.note(name + ": sigma L1 " + fmt("%.3e", it->sigma_error.l1) + ", eta L2 " +
                   fmt("%.3e", it->eta_error.l2) + ", all levels in " + fmt("%.1f", runtimes.at(name)) + " s");
        }
    });

    run(3, "noise study bands and strictly increasing errors over {0, 1%, 2%}", [&](Outcome& o) {
        o.require(pipeline_error.empty(), "pipeline: " + pipeline_error);
        const std::map<double, std::pair<double, double>> band{{0.01, {0.005, 0.12}}, {0.02, {0.01, 0.20}}};
        for (const auto& name : names) {
            if (!reports.count(name)) continue;
            const ExperimentReport& rep = reports.at(name);
            std::vector<double> levels, sig, eta;
            for (const NoiseRecord& r : rep.records) {
                o.require(r.sigma_done && r.eta_done,
                          name + " level " + fmt("%.2f", r.level) + ": failed at " + r.failed_stage);
                levels.push_back(r.level);
                sig.push_back(r.sigma_error.l1);
                eta.push_back(r.eta_error.l2);
            }
            o.require(levels == std::vector<double>{0.0, 0.01, 0.02}, name + ": unexpected noise levels");
            if (levels.size() != 3) continue;
            for (int i = 1; i < 3; ++i) {
                const auto [lo, hi] = band.at(levels[i]);
                o.require(sig[i] >= lo && sig[i] <= hi, name + ": sigma L1 " + fmt("%.4g", sig[i]) + " outside band");
                o.require(eta[i] >= lo && eta[i] <= hi, name + ": eta L2 " + fmt("%.4g", eta[i]) + " outside band");
                o.require(sig[i] > sig[i - 1], name + ": sigma errors not strictly increasing");
                o.require(eta[i] > eta[i - 1], name + ": eta errors not strictly increasing");
            }
            o.note(name + ": sigma L1 " + fmt("%.3e", sig[0]) + " / " + fmt("%.3e", sig[1]) + " / " +
                   fmt("%.3e", sig[2]) + ", eta L2 " + fmt("%.3e", eta[0]) + " / " + fmt("%.3e", eta[1]) + " / " +
                   fmt("%.3e", eta[2]));
        }
    });

    // Clean preset reconstructions reused by criteria 4 and 5.
    std::map<std::string, SigmaReconstruction> preset_psi;
    std::map<std::string, Synthesis> preset_syn;
    std::string preset_error;
    for (const auto& name : names) {
        try {
            const Config cfg = preset(name);
            Synthesis syn = synthesize(cfg);
            preset_psi.emplace(name, clean_sigma(syn, cfg));
            preset_syn.emplace(name, std::move(syn));
        } catch (const std::exception& e) {
            preset_error += name + ": " + e.what() + "; ";
        }
    }

    // Randomized admissible draws, ten per case.
    struct Draw {
        std::string label;
        SigmaReconstruction rec;
    };
    std::vector<Draw> draws;
    std::string draw_error;
    std::map<std::string, int> draw_counts;
    {
        std::mt19937_64 rng(20240917);
        const std::map<std::string, CaseKind> kinds{
            {"case11", CaseKind::Case11}, {"case12", CaseKind::Case12}, {"case2", CaseKind::Case2}};
        for (const auto& name : names) {
            int accepted = 0;
            for (int attempt = 0; attempt < 200 && accepted < 10; ++attempt) {
                const Config cfg = testing::random_draw(name, rng, 32);
                const Synthesis syn = synthesize(cfg);
                if (!testing::admissible(syn, kinds.at(name))) continue;
                const std::string label = name + " draw " + std::to_string(accepted++);
                try {
                    draws.push_back({label, clean_sigma(syn, cfg)});
                } catch (const std::exception& e) {
                    draw_error += label + ": " + e.what() + "; ";
                }
            }
            draw_counts[name] = accepted;
        }
    }

    run(4, "monotone iterates (slack 1e-10 ||Psi_0||), r <= 1e-8 within 200 iterations", [&](Outcome& o) {
        o.require(preset_error.empty(), "presets: " + preset_error);
        o.require(draw_error.empty(), "draws: " + draw_error);
        for (const auto& [name, rec] : preset_psi) {
            o.require(std::string(to_string(rec.psi.trace.scheme)) == expected_scheme_name(name),
                      name + ": scheme " + std::string(to_string(rec.psi.trace.scheme)));
            check_psi(o, name, rec);
            o.note(name + ": " + std::to_string(rec.psi.trace.iterations) + " iterations, r = " +
                   fmt("%.2e", rec.psi.trace.final_residual()));
        }
        for (const auto& [name, count] : draw_counts)
            o.require(count == 10, name + ": only " + std::to_string(count) + " admissible draws");
        int max_iter = 0;
        for (const Draw& d : draws) {
            check_psi(o, d.label, d.rec);
            max_iter = std::max(max_iter, d.rec.psi.trace.iterations);
        }
        for (const auto& [name, rep] : reports)
            for (const NoiseRecord& r : rep.records)
                o.require(!r.sigma_done || r.psi_monotone,
                          name + " level " + fmt("%.2f", r.level) + ": noisy iterates not monotone");
        o.note(std::to_string(draws.size()) + " random draws, at most " + std::to_string(max_iter) + " iterations");
    });

    run(5, "maximum principle for case11/case12; case12 iterates bounded by h-bar", [&](Outcome& o) {
        o.require(preset_error.empty(), "presets: " + preset_error);
        int checked = 0;
        for (const auto& [name, rec] : preset_psi) {
            if (name == "case2") continue;
            check_max_principle(o, name, rec);
            ++checked;
        }
        for (const Draw& d : draws) {
            if (d.rec.psi.trace.scheme == CaseKind::Case2) continue;
            check_max_principle(o, d.label, d.rec);
            ++checked;
        }
        o.note(std::to_string(checked) + " converged solutions checked");
    });

    run(6, "stability ratios vary by at most a factor 3 over perturbations {1e-3, 1e-2, 1e-1}", [&](Outcome& o) {
        o.require(preset_error.empty(), "presets: " + preset_error);
        const std::vector<double> deltas{1e-3, 1e-2, 1e-1};
        for (const auto& name : names) {
            if (!preset_syn.count(name)) continue;
            const Synthesis& syn = preset_syn.at(name);
            const Config cfg = preset(name);
            const SigmaReconstruction& base = preset_psi.at(name);

            std::vector<double> psi_ratios;
            for (double d : deltas) {
                SemilinearProblem p = base.problem;
                p.c = add_noise(base.problem.c, d, cfg.seed);
                const PsiSolution s = solve_psi(p, cfg.solver.psi);
                psi_ratios.push_back(l2_norm(s.psi - base.psi.psi) / l2_norm(p.c - base.problem.c));
            }
            const EtaOperator op(syn.model, syn.constants, syn.state.u0, syn.state.v);
            const ScalarField eta0 = solve_eta(syn.data.S, op, cfg.solver.krylov).eta;
            std::vector<double> eta_ratios;
            for (double d : deltas) {
                const ScalarField S = add_noise(syn.data.S, d, derived_seed(cfg.seed, 1));
                const ScalarField eta = solve_eta(S, op, cfg.solver.krylov).eta;
                eta_ratios.push_back(l2_norm(eta - eta0) / l2_norm(S - syn.data.S));
            }
            auto spread = [](const std::vector<double>& r) {
                const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
                return *hi / *lo;
            };
            const double sp = spread(psi_ratios), se = spread(eta_ratios);
            o.require(sp <= 3.0, name + ": Psi ratio spread " + fmt("%.3f", sp));
            o.require(se <= 3.0, name + ": eta ratio spread " + fmt("%.3f", se));
            o.note(name + ": Psi ratios " + fmt("%.4g", psi_ratios[0]) + " / " + fmt("%.4g", psi_ratios[1]) +
                   " / " + fmt("%.4g", psi_ratios[2]) + ", eta ratios " + fmt("%.4g", eta_ratios[0]) + " / " +
                   fmt("%.4g", eta_ratios[1]) + " / " + fmt("%.4g", eta_ratios[2]));
        }
    });

    run(7, "apply_A(true eta) matches S within 0.5% L2; residual certificate <= 1e-10", [&](Outcome& o) {
        o.require(preset_error.empty(), "presets: " + preset_error);
        for (const auto& name : names) {
            if (!preset_syn.count(name)) continue;
            const Synthesis& syn = preset_syn.at(name);
            const EtaOperator op(syn.model, syn.constants, syn.state.u0, syn.state.v);
            const double mismatch = compare_fields(op.apply_A(syn.model.eta), syn.data.S).l2;
            o.require(mismatch < 5e-3, name + ": operator mismatch " + fmt("%.3e", mismatch));
            const EtaSolution sol = solve_eta(syn.data.S, op, preset(name).solver.krylov);
            o.require(sol.trace.certificate <= 1e-10, name + ": certificate " + fmt("%.3e", sol.trace.certificate));
            double worst = sol.trace.certificate;
            if (reports.count(name)) {
                for (const NoiseRecord& r : reports.at(name).records) {
                    if (!r.eta_done) continue;
                    worst = std::max(worst, r.gmres_certificate);
                    o.require(r.gmres_certificate <= 1e-10, name + " level " + fmt("%.2f", r.level) +
                                                                ": certificate " + fmt("%.3e", r.gmres_certificate));
                }
            }
            o.note(name + ": mismatch " + fmt("%.3e", mismatch) + ", worst certificate " + fmt("%.2e", worst));
        }
    });

    run(8, "repeated experiment runs with a fixed seed are byte-identical", [&](Outcome& o) {
        const fs::path dir = fs::temp_directory_path() / "fumot_acceptance_determinism";
        fs::remove_all(dir);
        for (const auto& name : names) {
            Config cfg = preset(name);
            cfg.n = 64;
            cfg.output_dir = (dir / name).string();
            const ExperimentReport first = run_pipeline(cfg);
            std::map<std::string, std::string> bytes;
            for (const auto& f : first.files)
                if (f != "timing.txt") bytes[f] = slurp(fs::path(cfg.output_dir) / f);
            const ExperimentReport second = run_pipeline(cfg);
            o.require(second.files == first.files, name + ": file lists differ");
            int same = 0;
            for (const auto& [f, b] : bytes) {
                const bool eq = slurp(fs::path(cfg.output_dir) / f) == b;
                o.require(eq, name + ": " + f + " differs");
                same += eq;
            }
            o.note(name + ": " + std::to_string(same) + " files identical (timing.txt excluded)");
        }
        fs::remove_all(dir);
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
