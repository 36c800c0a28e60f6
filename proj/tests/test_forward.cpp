#include <doctest.h>

#include <cmath>

#include "fumot/config.hpp"
#include "fumot/error.hpp"
#include "fumot/forward.hpp"
#include "support.hpp"

using namespace fumot;

namespace {

CoefficientExpressions simple_coefficients() {
    CoefficientExpressions c;
    c.D_x = Expression::constant(0.1);
    c.sigma_xa = Expression::constant(0.1);
    c.sigma_xf = Expression::constant(0.2);
    c.g = Expression::constant(1.0);
    return c;
}

// Independent oracle chain for the preset background on a fine uniform grid.
struct FdForward {
    testing::FdGrid u0, w0, v, p;
};

FdForward fd_forward(const Config& cfg, int N) {
    const CoefficientExpressions& c = cfg.coefficients;
    const auto Dx = [&](double x, double y) { return c.D_x(x, y); };
    const auto Dm = [&](double x, double y) { return c.D_m(x, y); };
    const auto rx = [&](double x, double y) { return c.sigma_xa(x, y) + c.sigma_xf(x, y); };
    const auto rm = [&](double x, double y) { return c.sigma_ma(x, y); };
    const auto zero = [](double, double) { return 0.0; };
    const auto g = [&](double x, double y) { return c.g(x, y); };
    const auto h = [&](double x, double y) { return c.h(x, y); };
    const double L = cfg.half_width;
    FdForward out;
    out.u0 = testing::fd_solve(L, N, Dx, rx, [](int, int) { return 0.0; }, g);
    out.v = testing::fd_solve(L, N, Dm, rm, [](int, int) { return 0.0; }, h);
    auto src = [&](const testing::FdGrid& base) {
        return [&, base](int i, int j) {
            const double x = base.x(i), y = base.x(j);
            return c.eta(x, y) * c.sigma_xf(x, y) * base.at(i, j);
        };
    };
    out.w0 = testing::fd_solve(L, N, Dm, rm, src(out.u0), zero);
    out.p = testing::fd_solve(L, N, Dx, rx, src(out.v), zero);
    return out;
}

}  // namespace

TEST_CASE("constant coefficients: bounded positive excitation") {
    auto mesh = Mesh::structured(0.5, 16, 2);
    const OpticalModel model = OpticalModel::sample(mesh, simple_coefficients());
    const ScalarField u0 = solve_excitation(model);
    for (int d : mesh->boundary_dofs()) CHECK(u0[d] == doctest::Approx(1.0));
    for (int d : mesh->interior_dofs()) {
        CHECK(u0[d] > 0.0);
        CHECK(u0[d] < 1.0);
    }
    // Symmetric under the reflections of the square.
    const double a = u0.at(Point{0.2, 0.1}), b = u0.at(Point{-0.2, -0.1}), c = u0.at(Point{0.1, 0.2});
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
    CHECK(a == doctest::Approx(c).epsilon(1e-6));
}

TEST_CASE("zero absorption reproduces constants") {
    auto mesh = Mesh::structured(0.5, 8, 2);
    CoefficientExpressions c = simple_coefficients();
    c.sigma_xa = Expression::constant(0.0);
    c.sigma_xf = Expression::constant(0.0);
    c.sigma_ma = Expression::constant(0.0);
    const OpticalModel model = OpticalModel::sample(mesh, c);
    CHECK((solve_excitation(model).values().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((solve_auxiliary_v(model).values().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("zero eta gives zero emission and zero p") {
    auto mesh = Mesh::structured(0.5, 8, 2);
    CoefficientExpressions c = simple_coefficients();
    c.eta = Expression::constant(0.0);
    const OpticalModel model = OpticalModel::sample(mesh, c);
    const ForwardState s = solve_forward(model);
    CHECK(s.w0.values().cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.p.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nonnegative sources give nonnegative w0 and p") {
    auto mesh = Mesh::structured(0.5, 16, 2);
    const OpticalModel model = OpticalModel::sample(mesh, preset("case11").coefficients);
    const ForwardState s = solve_forward(model);
    CHECK(s.w0.min() >= -1e-14);
    CHECK(s.p.min() >= -1e-14);
    CHECK(s.v.min() > 0.0);
    for (int d : mesh->interior_dofs()) CHECK(s.v[d] < 1.0);
}

TEST_CASE("nonpositive boundary data is a PositivityViolation") {
    auto mesh = Mesh::structured(0.5, 8, 1);
    CoefficientExpressions c = simple_coefficients();
    c.g = Expression::parse("x");
    CHECK_THROWS_AS(solve_excitation(OpticalModel::sample(mesh, c)), PositivityViolation);
    c = simple_coefficients();
    c.h = Expression::constant(-1.0);
    CHECK_THROWS_AS(solve_auxiliary_v(OpticalModel::sample(mesh, c)), PositivityViolation);
}

TEST_CASE("linearity in boundary data and source superposition") {
    auto mesh = Mesh::structured(0.5, 16, 2);
    CoefficientExpressions c = preset("case2").coefficients;
    const OpticalModel m1 = OpticalModel::sample(mesh, c);
    c.g = Expression::parse("2*(exp(2*x) + exp(-2*y))");
    c.h = Expression::constant(2.0);
    const OpticalModel m2 = OpticalModel::sample(mesh, c);
    CHECK(testing::rel_diff(solve_excitation(m2).values(), 2.0 * solve_excitation(m1).values()) < 1e-12);
    CHECK(testing::rel_diff(solve_auxiliary_v(m2).values(), 2.0 * solve_auxiliary_v(m1).values()) < 1e-12);

    const ScalarField ua = solve_excitation(m1);
    const ScalarField ub = ScalarField::interpolate(mesh, [](double x, double y) { return 1 + x * y; });
    const Vector sum = solve_emission(m1, ua).values() + solve_emission(m1, ub).values();
    CHECK(testing::rel_diff(solve_emission(m1, ua + ub).values(), sum) < 1e-12);
}

TEST_CASE("discrete maximum principle for the excitation solve") {
    auto mesh = Mesh::structured(0.5, 32, 2);
    const OpticalModel model = OpticalModel::sample(mesh, preset("case11").coefficients);
    const ScalarField u0 = solve_excitation(model);
    double bmax = -1e300, imax = -1e300;
    for (int d : mesh->boundary_dofs()) bmax = std::max(bmax, u0[d]);
    for (int d : mesh->interior_dofs()) imax = std::max(imax, u0[d]);
    CHECK(imax <= bmax * (1.0 + 1e-10));
}

TEST_CASE("preset forward fields match the finite-difference oracle") {
    const Config cfg = preset("case11");
    auto mesh = Mesh::structured(0.5, 64, 2);
    const OpticalModel model = OpticalModel::sample(mesh, cfg.coefficients);
    const ForwardState s = solve_forward(model);
    const int N = 512;
    const FdForward fd = fd_forward(cfg, N);
    auto grid = [](const testing::FdGrid& g) { return [&g](int i, int j) { return g.at(i, j); }; };
    CHECK(testing::lattice_rel_l2(s.u0, grid(fd.u0), N) < 1e-3);
    CHECK(testing::lattice_rel_l2(s.w0, grid(fd.w0), N) < 1e-3);
    CHECK(testing::lattice_rel_l2(s.v, grid(fd.v), N) < 1e-3);
    CHECK(testing::lattice_rel_l2(s.p, grid(fd.p), N) < 1e-3);
}
