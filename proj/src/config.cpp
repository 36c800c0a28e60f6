#include "fumot/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fumot/error.hpp"

namespace fumot {

namespace {

using nlohmann::json;

constexpr const char* kDx = "0.1";
constexpr const char* kDm = "0.1 + 0.02*cos(2*x)*cos(2*y)";
constexpr const char* kSigmaXa = "0.1";
constexpr const char* kSigmaMa = "0.1 + 0.02*cos(4*x^2 + 4*y^2)";
constexpr const char* kSigmaXf =
    "0.1 + 0.15*exp(-((x+0.2)^2 + (y-0.15)^2)/0.01) + 0.1*exp(-((x-0.2)^2 + (y+0.2)^2)/0.02)";
constexpr const char* kEta =
    "0.5 + 0.3*exp(-((x-0.15)^2 + (y-0.2)^2)/0.015) - 0.25*exp(-((x+0.2)^2 + (y+0.15)^2)/0.02)";
constexpr const char* kG = "exp(2*x) + exp(-2*y)";
constexpr const char* kH = "1";

struct PresetSpec {
    const char* name;
    double n_x, n_m, n_f;
};

constexpr PresetSpec kPresets[] = {
    {"case11", -0.8, -0.7, -0.9},
    {"case12", -0.2, 0.5, -0.3},
    {"case2", 0.6, 0.8, -0.65},
};

void reject_unknown(const json& object, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    if (!object.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& item : object.items()) {
        if (!names.count(item.key())) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& object, const char* key, T& target, const std::string& where) {
    if (!object.contains(key)) return;
    try {
        target = object.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

void read_expression(const json& object, const char* key, Expression& target) {
    if (!object.contains(key)) return;
    const json& value = object.at(key);
    if (value.is_number()) {
        target = Expression::constant(value.get<double>());
    } else if (value.is_string()) {
        try {
            target = Expression::parse(value.get<std::string>());
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("coefficients.") + key + ": " + e.what());
        }
    } else {
        throw ConfigError(std::string("coefficients.") + key + " must be a string or number");
    }
}

std::string solver_name(LinearSolverKind kind) {
    return kind == LinearSolverKind::Direct ? "direct" : "cg";
}

LinearSolverKind solver_from_name(const std::string& name) {
    if (name == "direct") return LinearSolverKind::Direct;
    if (name == "cg") return LinearSolverKind::ConjugateGradient;
    throw ConfigError("solver.linear must be 'direct' or 'cg', got '" + name + "'");
}

}  // namespace

void Config::check() const {
    if (!(half_width > 0.0)) throw ConfigError("domain.half_width must be positive");
    if (n < 2) throw ConfigError("mesh.n must be at least 2");
    if (order < 1 || order > 4) throw ConfigError("mesh.order must lie in [1, 4]");
    if (synthesis_refinement < 1) throw ConfigError("mesh.synthesis_refinement must be >= 1");
    if (!(K0 > 0.0) || !(K1 > K0)) throw ConfigError("bounds must satisfy 0 < K0 < K1");
    for (double level : noise_levels) {
        if (!(level >= 0.0)) throw ConfigError("noise levels must be nonnegative");
    }
    if (output_grid < 2) throw ConfigError("output.grid must be at least 2");
    if (!(solver.psi.tol > 0.0) || solver.psi.max_iter < 1) {
        throw ConfigError("solver.psi_tol and solver.psi_max_iter must be positive");
    }
    if (!(solver.krylov.tol > 0.0) || solver.krylov.restart < 1 || solver.krylov.max_iter < 1) {
        throw ConfigError("solver GMRES settings must be positive");
    }
    (void)constants();
}

Config parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    reject_unknown(root,
                   {"name", "preset", "domain", "mesh", "coefficients", "elasto", "bounds",
                    "solver", "noise", "output"},
                   "config");

    Config config;
    if (root.contains("preset")) config = preset(root.at("preset").get<std::string>());
    read(root, "name", config.name, "config");

    if (root.contains("domain")) {
        const json& d = root.at("domain");
        reject_unknown(d, {"half_width"}, "domain");
        read(d, "half_width", config.half_width, "domain");
    }
    if (root.contains("mesh")) {
        const json& m = root.at("mesh");
        reject_unknown(m, {"n", "order", "synthesis_refinement"}, "mesh");
        read(m, "n", config.n, "mesh");
        read(m, "order", config.order, "mesh");
        read(m, "synthesis_refinement", config.synthesis_refinement, "mesh");
    }
    if (root.contains("coefficients")) {
        const json& c = root.at("coefficients");
        reject_unknown(c, {"D_x", "D_m", "sigma_xa", "sigma_ma", "sigma_xf", "eta", "g", "h"},
                       "coefficients");
        CoefficientExpressions& e = config.coefficients;
        read_expression(c, "D_x", e.D_x);
        read_expression(c, "D_m", e.D_m);
        read_expression(c, "sigma_xa", e.sigma_xa);
        read_expression(c, "sigma_ma", e.sigma_ma);
        read_expression(c, "sigma_xf", e.sigma_xf);
        read_expression(c, "eta", e.eta);
        read_expression(c, "g", e.g);
        read_expression(c, "h", e.h);
    }
    if (root.contains("elasto")) {
        const json& el = root.at("elasto");
        reject_unknown(el, {"n_x", "n_m", "n_f"}, "elasto");
        read(el, "n_x", config.n_x, "elasto");
        read(el, "n_m", config.n_m, "elasto");
        read(el, "n_f", config.n_f, "elasto");
    }
    if (root.contains("bounds")) {
        const json& b = root.at("bounds");
        reject_unknown(b, {"K0", "K1"}, "bounds");
        read(b, "K0", config.K0, "bounds");
        read(b, "K1", config.K1, "bounds");
    }
    if (root.contains("solver")) {
        const json& s = root.at("solver");
        reject_unknown(s,
                       {"psi_tol", "psi_max_iter", "positivity_floor", "sign_violation_limit",
                        "linear", "gmres_tol", "gmres_restart", "gmres_max_iter",
                        "near_singular_threshold"},
                       "solver");
        read(s, "psi_tol", config.solver.psi.tol, "solver");
        read(s, "psi_max_iter", config.solver.psi.max_iter, "solver");
        read(s, "positivity_floor", config.solver.psi.positivity_floor, "solver");
        read(s, "sign_violation_limit", config.solver.semilinear.sign_violation_limit, "solver");
        if (s.contains("linear")) {
            config.solver.psi.linear_solver = solver_from_name(s.at("linear").get<std::string>());
        }
        read(s, "gmres_tol", config.solver.krylov.tol, "solver");
        read(s, "gmres_restart", config.solver.krylov.restart, "solver");
        read(s, "gmres_max_iter", config.solver.krylov.max_iter, "solver");
        read(s, "near_singular_threshold", config.solver.krylov.near_singular_threshold, "solver");
    }
    if (root.contains("noise")) {
        const json& nz = root.at("noise");
        reject_unknown(nz, {"levels", "seed"}, "noise");
        read(nz, "levels", config.noise_levels, "noise");
        read(nz, "seed", config.seed, "noise");
    }
    if (root.contains("output")) {
        const json& o = root.at("output");
        reject_unknown(o, {"directory", "grid"}, "output");
        read(o, "directory", config.output_dir, "output");
        read(o, "grid", config.output_grid, "output");
    }
    config.check();
    return config;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string dump_config(const Config& config) {
    const CoefficientExpressions& e = config.coefficients;
    json root;
    root["name"] = config.name;
    root["domain"] = {{"half_width", config.half_width}};
    root["mesh"] = {{"n", config.n},
                    {"order", config.order},
                    {"synthesis_refinement", config.synthesis_refinement}};
    root["coefficients"] = {{"D_x", e.D_x.source()},         {"D_m", e.D_m.source()},
                            {"sigma_xa", e.sigma_xa.source()}, {"sigma_ma", e.sigma_ma.source()},
                            {"sigma_xf", e.sigma_xf.source()}, {"eta", e.eta.source()},
                            {"g", e.g.source()},               {"h", e.h.source()}};
    root["elasto"] = {{"n_x", config.n_x}, {"n_m", config.n_m}, {"n_f", config.n_f}};
    root["bounds"] = {{"K0", config.K0}, {"K1", config.K1}};
    const SolverSettings& s = config.solver;
    root["solver"] = {{"psi_tol", s.psi.tol},
                      {"psi_max_iter", s.psi.max_iter},
                      {"positivity_floor", s.psi.positivity_floor},
                      {"sign_violation_limit", s.semilinear.sign_violation_limit},
                      {"linear", solver_name(s.psi.linear_solver)},
                      {"gmres_tol", s.krylov.tol},
                      {"gmres_restart", s.krylov.restart},
                      {"gmres_max_iter", s.krylov.max_iter},
                      {"near_singular_threshold", s.krylov.near_singular_threshold}};
    root["noise"] = {{"levels", config.noise_levels}, {"seed", config.seed}};
    root["output"] = {{"directory", config.output_dir}, {"grid", config.output_grid}};
    return root.dump(2);
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const PresetSpec& p : kPresets) names.emplace_back(p.name);
    return names;
}

Config preset(std::string_view name) {
    for (const PresetSpec& p : kPresets) {
        if (name != p.name) continue;
        Config config;
        config.name = p.name;
        config.n_x = p.n_x;
        config.n_m = p.n_m;
        config.n_f = p.n_f;
        CoefficientExpressions& e = config.coefficients;
        e.D_x = Expression::parse(kDx);
        e.D_m = Expression::parse(kDm);
        e.sigma_xa = Expression::parse(kSigmaXa);
        e.sigma_ma = Expression::parse(kSigmaMa);
        e.sigma_xf = Expression::parse(kSigmaXf);
        e.eta = Expression::parse(kEta);
        e.g = Expression::parse(kG);
        e.h = Expression::parse(kH);
        config.output_dir = std::string("fumot_out/") + p.name;
        return config;
    }
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

Config paper_fidelity(Config config) {
    config.n = 136;
    config.order = 4;
    if (config.name.find("paper_fidelity") == std::string::npos) config.name += "_paper_fidelity";
    return config;
}

Config resolve_config(const std::string& name_or_path) {
    for (const auto& n : preset_names()) {
        if (n == name_or_path) return preset(n);
    }
    return load_config(name_or_path);
}

}  // namespace fumot
