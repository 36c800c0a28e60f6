#include "fumot/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fumot/error.hpp"

namespace fumot {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_field_csv(const ScalarField& field, int grid, const std::filesystem::path& path) {
    if (grid < 2) throw ConfigError("output grid must be at least 2");
    const Mesh& mesh = *field.mesh();
    const double hw = mesh.half_width();
    std::ofstream out = open_for_write(path);
    out << "x,y,value\n";
    for (int j = 0; j < grid; ++j) {
        const double y = -hw + 2.0 * hw * j / (grid - 1);
        for (int i = 0; i < grid; ++i) {
            const double x = -hw + 2.0 * hw * i / (grid - 1);
            out << format_double(x) << ',' << format_double(y) << ','
                << format_double(field.at(Point{x, y})) << '\n';
        }
    }
}

void write_psi_trace_csv(const IterationTrace& trace, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << "n,r,psi_min,psi_max,kappa,nu,monotonicity_excess\n";
    for (std::size_t n = 0; n < trace.residuals.size(); ++n) {
        auto at = [n](const std::vector<double>& v) {
            return n < v.size() ? v[n] : std::nan("");
        };
        out << n << ',' << format_double(trace.residuals[n]) << ','
            << format_double(at(trace.psi_min)) << ',' << format_double(at(trace.psi_max)) << ','
            << format_double(at(trace.kappa)) << ',' << format_double(at(trace.nu)) << ','
            << format_double(at(trace.monotonicity_excess)) << '\n';
    }
}

void write_krylov_trace_csv(const KrylovTrace& trace, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << "iteration,residual_estimate\n";
    for (std::size_t i = 0; i < trace.residuals.size(); ++i) {
        out << i + 1 << ',' << format_double(trace.residuals[i]) << '\n';
    }
}

}  // namespace fumot
