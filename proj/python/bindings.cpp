#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fumot/config.hpp"
#include "fumot/error.hpp"
#include "fumot/experiment.hpp"
#include "fumot/forward.hpp"
#include "fumot/internal_data.hpp"
#include "fumot/inverse_eta.hpp"
#include "fumot/inverse_sigma.hpp"
#include "fumot/mesh.hpp"
#include "fumot/model.hpp"

namespace py = pybind11;
using namespace fumot;

namespace {

py::dict errors_dict(const RelativeErrors& e) {
    py::dict d;
    d["l1"] = e.l1;
    d["l2"] = e.l2;
    d["linf"] = e.linf;
    return d;
}

PipelineMode mode_from_name(const std::string& name) {
    for (PipelineMode m : {PipelineMode::Forward, PipelineMode::ReconstructSigma,
                           PipelineMode::ReconstructEta, PipelineMode::Full}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown pipeline mode '" + name + "'");
}

py::dict record_dict(const NoiseRecord& r) {
    py::dict d;
    d["level"] = r.level;
    d["q_seed"] = r.q_seed;
    d["s_seed"] = r.s_seed;
    d["status"] = r.failed_stage.empty() ? std::string("ok") : r.failed_stage;
    d["failure"] = r.failure;
    if (r.sigma_done) {
        d["scheme"] = std::string(to_string(r.scheme));
        d["psi_iterations"] = r.psi_iterations;
        d["psi_residual"] = r.psi_residual;
        d["psi_monotone"] = r.psi_monotone;
        d["sigma_error"] = errors_dict(r.sigma_error);
    }
    if (r.eta_done) {
        d["gmres_iterations"] = r.gmres_iterations;
        d["gmres_certificate"] = r.gmres_certificate;
        d["eta_error"] = errors_dict(r.eta_error);
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "fUMOT forward synthesis and reconstruction";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    py::enum_<CaseKind>(m, "CaseKind")
        .value("Case11", CaseKind::Case11)
        .value("Case12", CaseKind::Case12)
        .value("Case2", CaseKind::Case2)
        .value("LinearTheta0", CaseKind::LinearTheta0)
        .value("Unsupported", CaseKind::Unsupported);

    py::class_<ElastoOpticalConstants>(m, "ElastoOpticalConstants")
        .def_readonly("n_x", &ElastoOpticalConstants::n_x)
        .def_readonly("n_m", &ElastoOpticalConstants::n_m)
        .def_readonly("n_f", &ElastoOpticalConstants::n_f)
        .def_readonly("gamma_x", &ElastoOpticalConstants::gamma_x)
        .def_readonly("gamma_m", &ElastoOpticalConstants::gamma_m)
        .def_readonly("beta_x", &ElastoOpticalConstants::beta_x)
        .def_readonly("beta_m", &ElastoOpticalConstants::beta_m)
        .def_readonly("beta_f", &ElastoOpticalConstants::beta_f)
        .def_readonly("tau", &ElastoOpticalConstants::tau)
        .def_readonly("mu", &ElastoOpticalConstants::mu)
        .def_readonly("theta", &ElastoOpticalConstants::theta);

    m.def("derive_constants", &derive_constants, py::arg("n_x"), py::arg("n_m"), py::arg("n_f"));
    m.def(
        "classify_case",
        [](double theta, const Vector& b, const Vector& c) {
            const CaseTag tag = classify_case(theta, {b.data(), static_cast<std::size_t>(b.size())},
                                              {c.data(), static_cast<std::size_t>(c.size())});
            return py::make_tuple(tag.kind, tag.reason);
        },
        py::arg("theta"), py::arg("b"), py::arg("c"));

    py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
        .def_static(
            "structured",
            [](double half_width, int n, int order) {
                return std::const_pointer_cast<Mesh>(Mesh::structured(half_width, n, order));
            },
            py::arg("half_width"), py::arg("n"), py::arg("order"))
        .def_property_readonly("half_width", &Mesh::half_width)
        .def_property_readonly("subdivisions", &Mesh::subdivisions)
        .def_property_readonly("order", &Mesh::order)
        .def_property_readonly("element_count", &Mesh::element_count)
        .def_property_readonly("dof_count", &Mesh::dof_count)
        .def_property_readonly("dof_points",
                               [](const Mesh& mesh) {
                                   Eigen::MatrixX2d pts(mesh.dof_count(), 2);
                                   auto p = mesh.dof_points();
                                   for (int i = 0; i < mesh.dof_count(); ++i) {
                                       pts(i, 0) = p[i].x;
                                       pts(i, 1) = p[i].y;
                                   }
                                   return pts;
                               })
        .def_property_readonly("boundary_dofs", [](const Mesh& mesh) {
            auto b = mesh.boundary_dofs();
            return std::vector<int>(b.begin(), b.end());
        });

    py::class_<ScalarField>(m, "ScalarField")
        .def(py::init([](const std::shared_ptr<Mesh>& mesh, const Vector& values) {
                 return ScalarField(mesh, values);
             }),
             py::arg("mesh"), py::arg("values"))
        .def_static(
            "interpolate",
            [](const std::shared_ptr<Mesh>& mesh, const std::function<double(double, double)>& fn) {
                return ScalarField::interpolate(mesh, fn);
            },
            py::arg("mesh"), py::arg("fn"))
        .def_property_readonly("values", [](const ScalarField& f) { return f.values(); })
        .def_property_readonly("mesh",
                               [](const ScalarField& f) { return std::const_pointer_cast<Mesh>(f.mesh()); })
        .def("at", [](const ScalarField& f, double x, double y) { return f.at(Point{x, y}); })
        .def("min", &ScalarField::min)
        .def("max", &ScalarField::max)
        .def("norms", [](const ScalarField& f) {
            const FieldNorms n = norms(f);
            py::dict d;
            d["l1"] = n.l1;
            d["l2"] = n.l2;
            d["h1_seminorm"] = n.h1_seminorm;
            d["linf"] = n.linf;
            return d;
        });

    py::class_<OpticalModel>(m, "OpticalModel")
        .def_readonly("D_x", &OpticalModel::D_x)
        .def_readonly("D_m", &OpticalModel::D_m)
        .def_readonly("sigma_xa", &OpticalModel::sigma_xa)
        .def_readonly("sigma_ma", &OpticalModel::sigma_ma)
        .def_readonly("sigma_xf", &OpticalModel::sigma_xf)
        .def_readonly("eta", &OpticalModel::eta)
        .def_readonly("g", &OpticalModel::g)
        .def_readonly("h", &OpticalModel::h)
        .def("with_sigma_xf", &OpticalModel::with_sigma_xf)
        .def("validate", &OpticalModel::validate, py::arg("K0"), py::arg("K1"));

    py::class_<Config>(m, "Config")
        .def_readwrite("name", &Config::name)
        .def_readwrite("half_width", &Config::half_width)
        .def_readwrite("n", &Config::n)
        .def_readwrite("order", &Config::order)
        .def_readwrite("n_x", &Config::n_x)
        .def_readwrite("n_m", &Config::n_m)
        .def_readwrite("n_f", &Config::n_f)
        .def_readwrite("noise_levels", &Config::noise_levels)
        .def_readwrite("seed", &Config::seed)
        .def_readwrite("synthesis_refinement", &Config::synthesis_refinement)
        .def_readwrite("output_dir", &Config::output_dir)
        .def_readwrite("output_grid", &Config::output_grid)
        .def("constants", &Config::constants)
        .def("check", &Config::check);

    m.def("preset", [](const std::string& name) { return preset(name); }, py::arg("name"));
    m.def("preset_names", &preset_names);
    m.def("parse_config", [](const std::string& text) { return parse_config(text); });
    m.def("load_config", [](const std::string& path) { return load_config(path); });
    m.def("dump_config", &dump_config);

    py::class_<ForwardState>(m, "ForwardState")
        .def_readonly("u0", &ForwardState::u0)
        .def_readonly("w0", &ForwardState::w0)
        .def_readonly("v", &ForwardState::v)
        .def_readonly("p", &ForwardState::p);

    m.def("solve_forward", &solve_forward, py::arg("model"));
    m.def(
        "compute_internal_data",
        [](const ForwardState& state, const OpticalModel& model, const ElastoOpticalConstants& k) {
            InternalData d = compute_internal_data(state, model, k);
            return py::make_tuple(d.Q, d.S);
        },
        py::arg("state"), py::arg("model"), py::arg("constants"));
    m.def(
        "compute_J1",
        [](const ScalarField& Q, double qx, double qy, double phi) {
            return compute_J1(Q, Vec2{qx, qy}, phi);
        },
        py::arg("Q"), py::arg("qx"), py::arg("qy"), py::arg("phi"));
    m.def("add_noise", &add_noise, py::arg("field"), py::arg("level"), py::arg("seed"));

    m.def(
        "synthesize",
        [](const Config& config) {
            Synthesis s = synthesize(config);
            py::dict d;
            d["mesh"] = std::const_pointer_cast<Mesh>(s.mesh);
            d["model"] = s.model;
            d["constants"] = s.constants;
            d["state"] = s.state;
            d["Q"] = s.data.Q;
            d["S"] = s.data.S;
            return d;
        },
        py::arg("config"));

    m.def(
        "reconstruct_sigma",
        [](const ScalarField& Q, const OpticalModel& model, const ElastoOpticalConstants& k,
           double tol, int max_iter) {
            IterationOptions opt;
            opt.tol = tol;
            opt.max_iter = max_iter;
            SigmaReconstruction r = reconstruct_sigma(Q, model, k, opt);
            py::dict d;
            d["sigma_xf"] = r.sigma_xf;
            d["u0"] = r.u0;
            d["psi"] = r.psi.psi;
            d["scheme"] = r.psi.trace.scheme;
            d["iterations"] = r.psi.trace.iterations;
            d["residuals"] = r.psi.trace.residuals;
            d["monotone"] = r.psi.trace.monotone();
            return d;
        },
        py::arg("Q"), py::arg("model"), py::arg("constants"), py::arg("tol") = 1e-8,
        py::arg("max_iter") = 200);

    m.def(
        "reconstruct_eta",
        [](const ScalarField& S, const OpticalModel& model, const ElastoOpticalConstants& k,
           const ScalarField& u0, const ScalarField& v, double tol) {
            const EtaOperator op(model, k, u0, v);
            KrylovOptions opt;
            opt.tol = tol;
            EtaSolution s = solve_eta(S, op, opt);
            py::dict d;
            d["eta"] = s.eta;
            d["iterations"] = s.trace.iterations;
            d["certificate"] = s.trace.certificate;
            d["residuals"] = s.trace.residuals;
            return d;
        },
        py::arg("S"), py::arg("model"), py::arg("constants"), py::arg("u0"), py::arg("v"),
        py::arg("tol") = 1e-10);

    m.def(
        "compare_fields",
        [](const ScalarField& recon, const ScalarField& truth) {
            return errors_dict(compare_fields(recon, truth));
        },
        py::arg("recon"), py::arg("truth"));

    m.def(
        "run_pipeline",
        [](const Config& config, const std::string& mode, bool write_files) {
            ExperimentReport report;
            {
                py::gil_scoped_release release;
                report = run_pipeline(config, {mode_from_name(mode), write_files});
            }
            py::dict d;
            d["case"] = std::string(to_string(report.clean_case.kind));
            d["ok"] = report.ok();
            d["report"] = report.format();
            d["errors_csv"] = report.errors_csv();
            py::list records;
            for (const NoiseRecord& r : report.records) records.append(record_dict(r));
            d["records"] = records;
            d["files"] = report.files;
            return d;
        },
        py::arg("config"), py::arg("mode") = "experiment", py::arg("write_files") = false);
}
