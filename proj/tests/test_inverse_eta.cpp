#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>

#include "fumot/config.hpp"
#include "fumot/error.hpp"
#include "fumot/experiment.hpp"
#include "fumot/inverse_eta.hpp"
#include "support.hpp"

using namespace fumot;

namespace {

Synthesis small(const char* name, int n = 32) {
    Config cfg = preset(name);
    cfg.n = n;
    return synthesize(cfg);
}

EtaOperator make_op(const Synthesis& s) {
    return EtaOperator(s.model, s.constants, s.state.u0, s.state.v);
}

}  // namespace

TEST_SUITE("gmres") {
    TEST_CASE("dense nonsymmetric system against a direct solve") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n01;
        const int n = 60;
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 4.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) += 0.3 * n01(rng) / std::sqrt(n);
        Vector b(n);
        for (auto& v : b) v = n01(rng);
        const Vector exact = A.partialPivLu().solve(b);
        KrylovOptions opt;
        opt.restart = 10;
        auto apply = [&](const Vector& x) -> Vector { return A * x; };
        auto certify = [&](const Vector& x) { return (A * x - b).norm() / b.norm(); };
        const GmresResult r = gmres(apply, b, certify, opt);
        CHECK(r.trace.converged);
        CHECK(r.trace.certificate <= 1e-10);
        CHECK(r.trace.restarts >= 1);
        CHECK(testing::rel_diff(r.x, exact) < 1e-9);
    }

    TEST_CASE("zero right-hand side") {
        auto apply = [](const Vector& x) -> Vector { return 2.0 * x; };
        auto certify = [](const Vector& x) { return x.norm(); };
        const GmresResult r = gmres(apply, Vector::Zero(5), certify, {});
        CHECK(r.x.norm() == 0.0);
        CHECK(r.trace.iterations == 0);
    }

    TEST_CASE("iteration budget exhaustion throws NonConvergence with history") {
        const int n = 50;
        Vector d(n);
        for (int i = 0; i < n; ++i) d[i] = 1.0 + i;
        auto apply = [&](const Vector& x) -> Vector { return d.cwiseProduct(x); };
        const Vector b = Vector::Ones(n);
        auto certify = [&](const Vector& x) { return (d.cwiseProduct(x) - b).norm() / b.norm(); };
        KrylovOptions opt;
        opt.max_iter = 3;
        opt.restart = 2;
        try {
            gmres(apply, b, certify, opt);
            FAIL("expected NonConvergence");
        } catch (const NonConvergence& e) {
            CHECK(e.iterations() == 3);
            CHECK(e.residual() > 1e-10);
        }
    }
}

TEST_SUITE("operators") {
    TEST_CASE("T0 and T1 reproduce the forward fields") {
        const Synthesis s = small("case11");
        const EtaOperator op = make_op(s);
        CHECK(testing::rel_diff(op.apply_T0(s.model.eta).values(), s.state.w0.values()) < 1e-12);
        CHECK(testing::rel_diff(op.apply_T1(s.model.eta).values(), s.state.p.values()) < 1e-12);
        const ScalarField zero = ScalarField::zeros(s.mesh);
        CHECK(op.apply_T0(zero).values().cwiseAbs().maxCoeff() == 0.0);
        CHECK(op.apply_T1(zero).values().cwiseAbs().maxCoeff() == 0.0);
        CHECK(op.apply_A(zero).values().cwiseAbs().maxCoeff() == 0.0);
    }

    TEST_CASE("T0, T1 and A are linear") {
        const Synthesis s = small("case2");
        const EtaOperator op = make_op(s);
        const ScalarField e1 = s.model.eta;
        const ScalarField e2 = ScalarField::interpolate(s.mesh, [](double x, double y) { return 0.3 + x * y; });
        CHECK(testing::rel_diff(op.apply_T0(e1 * 2.0).values(), 2.0 * op.apply_T0(e1).values()) < 1e-12);
        CHECK(testing::rel_diff(op.apply_T1(e1 + e2).values(),
                                op.apply_T1(e1).values() + op.apply_T1(e2).values()) < 1e-12);
        const double alpha = -1.7;
        CHECK(testing::rel_diff(op.apply_A(e1 * alpha + e2).values(),
                                alpha * op.apply_A(e1).values() + op.apply_A(e2).values()) < 1e-11);
    }

    TEST_CASE("A applied to the true eta reproduces S") {
        for (const char* name : {"case11", "case12", "case2"}) {
            const Synthesis s = small(name);
            const EtaOperator op = make_op(s);
            CHECK(compare_fields(op.apply_A(s.model.eta), s.data.S).l2 < 5e-3);
        }
    }

    TEST_CASE("no fluorophores means A vanishes") {
        Config cfg = preset("case11");
        cfg.n = 16;
        auto mesh = Mesh::structured(0.5, 16, 2);
        CoefficientExpressions c = cfg.coefficients;
        c.sigma_xf = Expression::constant(0.0);
        const OpticalModel model = OpticalModel::sample(mesh, c);
        const ForwardState st = solve_forward(model);
        const EtaOperator op(model, cfg.constants(), st.u0, st.v);
        CHECK(op.apply_A(model.eta).values().cwiseAbs().maxCoeff() == 0.0);
        CHECK_THROWS_AS(solve_eta(ScalarField::constant(mesh, 1.0), op), NearSingular);
    }
}

TEST_SUITE("solve_eta") {
    TEST_CASE("zero data gives zero eta") {
        const Synthesis s = small("case11", 16);
        const EtaSolution sol = solve_eta(ScalarField::zeros(s.mesh), make_op(s));
        CHECK(sol.eta.values().cwiseAbs().maxCoeff() == 0.0);
        CHECK(sol.trace.converged);
    }

    TEST_CASE("noiseless round trip at n = 128 with a residual certificate") {
        const Synthesis s = small("case12", 128);
        const EtaOperator op = make_op(s);
        const EtaSolution sol = solve_eta(s.data.S, op);
        CHECK(sol.trace.certificate <= 1e-10);
        CHECK(compare_fields(sol.eta, s.model.eta).l2 < 5e-3);
        const double cert = l2_norm(op.apply_A(sol.eta) - s.data.S) / l2_norm(s.data.S);
        CHECK(cert <= 1e-10);
    }

    TEST_CASE("noise on S raises the error but keeps it bounded") {
        const Synthesis s = small("case12", 64);
        const EtaOperator op = make_op(s);
        const double clean = compare_fields(solve_eta(s.data.S, op).eta, s.model.eta).l2;
        const double err = compare_fields(solve_eta(add_noise(s.data.S, 0.01, 11), op).eta, s.model.eta).l2;
        CHECK(err > clean);
        CHECK(err >= 1e-3);
        CHECK(err <= 0.12);
    }

    TEST_CASE("stability ratio is bounded across perturbation sizes") {
        const Synthesis s = small("case2");
        const EtaOperator op = make_op(s);
        const ScalarField base = solve_eta(s.data.S, op).eta;
        const ScalarField dir = add_noise(s.data.S, 1.0, 3) - s.data.S;
        std::vector<double> ratios;
        for (double delta : {1e-3, 1e-2, 1e-1}) {
            const ScalarField dS = dir * delta;
            const ScalarField eta = solve_eta(s.data.S + dS, op).eta;
            ratios.push_back(l2_norm(eta - base) / l2_norm(dS));
        }
        const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        CHECK(*hi / *lo <= 3.0);
    }

    TEST_CASE("vanishing fluorophore absorption is NearSingular") {
        Config cfg = preset("case11");
        cfg.n = 16;
        cfg.coefficients.sigma_xf = Expression::parse("0.2*(x + 0.5)");
        auto mesh = Mesh::structured(0.5, 16, 2);
        const OpticalModel model = OpticalModel::sample(mesh, cfg.coefficients);
        const ForwardState st = solve_forward(model);
        const EtaOperator op(model, cfg.constants(), st.u0, st.v);
        CHECK_THROWS_AS(solve_eta(ScalarField::constant(mesh, 1.0), op), NearSingular);
    }

    TEST_CASE("mesh mismatch") {
        const Synthesis s = small("case11", 16);
        auto other = Mesh::structured(0.5, 8, 2);
        CHECK_THROWS_AS(solve_eta(ScalarField::constant(other, 1.0), make_op(s)), MeshMismatch);
    }
}
