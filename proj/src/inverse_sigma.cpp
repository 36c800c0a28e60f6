#include "fumot/inverse_sigma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fumot/error.hpp"

namespace fumot {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_above(const char* what, const ScalarField& f, double floor, int iteration) {
    const double lo = f.min();
    if (!(lo > floor)) {
        std::ostringstream msg;
        msg << what << " nodal minimum " << lo << " at iteration " << iteration
            << " is not above the positivity floor " << floor;
        throw PositivityViolation(msg.str(), lo);
    }
}

double boundary_extreme(const ScalarField& f, bool want_max) {
    double out = want_max ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
    for (int d : f.mesh()->boundary_dofs()) out = want_max ? std::max(out, f[d]) : std::min(out, f[d]);
    return out;
}

/// Keeps the bookkeeping shared by the three schemes.
class TraceRecorder {
public:
    TraceRecorder(CaseKind scheme, const ScalarField& psi0, bool nonincreasing)
        : nonincreasing_(nonincreasing), scale_(psi0.values().cwiseAbs().maxCoeff()) {
        trace_.scheme = scheme;
        push(psi0, kNaN, kNaN, kNaN, 0.0);
    }

    /// Returns r_n.
    double step(const ScalarField& prev, const ScalarField& next, double kappa, double nu) {
        const ScalarField diff = next - prev;
        const double denom = l2_norm(next);
        const double r = denom > 0.0 ? l2_norm(diff) / denom : l2_norm(diff);
        const double wrong = nonincreasing_ ? diff.max() : -diff.min();
        push(next, r, kappa, nu, scale_ > 0.0 ? wrong / scale_ : wrong);
        ++trace_.iterations;
        return r;
    }

    IterationTrace& trace() { return trace_; }

private:
    void push(const ScalarField& psi, double r, double kappa, double nu, double excess) {
        trace_.residuals.push_back(r);
        trace_.psi_min.push_back(psi.min());
        trace_.psi_max.push_back(psi.max());
        trace_.kappa.push_back(kappa);
        trace_.nu.push_back(nu);
        trace_.monotonicity_excess.push_back(excess);
    }

    IterationTrace trace_;
    bool nonincreasing_;
    double scale_;
};

[[noreturn]] void fail_to_converge(const char* scheme, const IterationTrace& t) {
    std::ostringstream msg;
    msg << scheme << " did not reach the stopping tolerance in " << t.iterations
        << " iterations (last residual " << t.final_residual() << ")";
    throw NonConvergence(msg.str(), t.iterations, t.final_residual());
}

void require_case(const SemilinearProblem& p, CaseKind expected, const char* scheme) {
    if (p.tag.kind != expected) {
        throw UnsupportedCase(std::string(scheme) + " called for a problem tagged " +
                              std::string(to_string(p.tag.kind)));
    }
}

/// -c (Psi^-theta - nu Psi), nodally.
ScalarField shifted_source(const ScalarField& c, const ScalarField& psi, double theta, double nu) {
    return nodal(psi.mesh(), psi.size(), [&](int i) {
        return -c[i] * (std::pow(psi[i], -theta) - nu * psi[i]);
    });
}

}  // namespace

bool IterationTrace::monotone(double slack) const {
    return std::all_of(monotonicity_excess.begin(), monotonicity_excess.end(),
                       [slack](double e) { return e <= slack; });
}

SemilinearProblem build_problem(const ScalarField& Q, const OpticalModel& model,
                                const ElastoOpticalConstants& k,
                                const SemilinearOptions& options) {
    if (k.beta_f == 0.0 || k.theta == -1.0) {
        throw DegenerateConstants("semilinear problem needs beta_f != 0 and theta != -1");
    }
    const double e = k.psi_exponent();
    SemilinearProblem p;
    p.theta = k.theta;
    p.a = model.D_x;
    p.b = model.sigma_xa * (-e * k.mu);
    p.c = Q * (e / k.beta_f);
    p.boundary = model.g.map([e](double g) { return g > 0.0 ? std::pow(g, e) : 0.0; });
    for (int d : Q.mesh()->boundary_dofs()) {
        if (!(model.g[d] > 0.0)) {
            throw PositivityViolation("excitation boundary data g must be positive", model.g[d]);
        }
    }

    const auto bv = std::span<const double>(p.b.values().data(), p.b.size());
    const auto cv = std::span<const double>(p.c.values().data(), p.c.size());
    p.tag = classify_case(k.theta, bv, cv);

    const SignProfile cs = sign_profile(cv);
    const bool wants_nonnegative_c = k.theta < 0.0;
    if (k.theta != 0.0) {
        p.sign_violation_fraction = wants_nonnegative_c ? cs.negative_fraction : cs.positive_fraction;
    }
    if (!p.tag.supported() && sign_profile(bv).nonnegative && k.theta != -1.0 &&
        p.sign_violation_fraction <= options.sign_violation_limit) {
        // Scattered sign flips in noisy data do not change the scheme.
        p.tag.kind = k.theta > 0.0    ? CaseKind::Case2
                     : k.theta > -1.0 ? CaseKind::Case11
                                      : CaseKind::Case12;
        p.tag.reason.clear();
    }
    if (!p.tag.supported()) {
        throw UnsupportedCase("no monotone scheme applies: " + p.tag.reason);
    }
    return p;
}

PsiSolution solve_psi_case11(const SemilinearProblem& problem, const IterationOptions& opt) {
    require_case(problem, CaseKind::Case11, "case 1.1 iteration");
    const double theta = problem.theta;
    ScalarField psi =
        EllipticOperator(problem.a, problem.b, opt.linear_solver).solve_homogeneous(problem.boundary);
    require_above("Psi", psi, opt.positivity_floor, 0);

    TraceRecorder rec(CaseKind::Case11, psi, /*nonincreasing=*/true);
    rec.trace().sign_violation_fraction = problem.sign_violation_fraction;
    for (int n = 1; n <= opt.max_iter; ++n) {
        const ScalarField reaction =
            problem.b + problem.c * psi.map([theta](double z) { return std::pow(z, -(theta + 1.0)); });
        ScalarField next = EllipticOperator(problem.a, reaction, opt.linear_solver)
                               .solve_homogeneous(problem.boundary);
        require_above("Psi", next, opt.positivity_floor, n);
        const double r = rec.step(psi, next, kNaN, kNaN);
        psi = std::move(next);
        if (r <= opt.tol) {
            rec.trace().converged = true;
            return {std::move(psi), std::move(rec.trace())};
        }
    }
    fail_to_converge("case 1.1 iteration", rec.trace());
}

PsiSolution solve_psi_case12(const SemilinearProblem& problem, const IterationOptions& opt) {
    require_case(problem, CaseKind::Case12, "case 1.2 iteration");
    const double theta = problem.theta;
    const double hbar = boundary_extreme(problem.boundary, /*want_max=*/true);
    const double nu = -theta * std::pow(hbar, -(1.0 + theta));

    const EllipticOperator op(problem.a, problem.b + problem.c * nu, opt.linear_solver);
    ScalarField psi = op.solve_homogeneous(problem.boundary);
    require_above("Psi", psi, opt.positivity_floor, 0);

    TraceRecorder rec(CaseKind::Case12, psi, /*nonincreasing=*/false);
    rec.trace().upper_bound = hbar;
    rec.trace().nu[0] = nu;
    rec.trace().sign_violation_fraction = problem.sign_violation_fraction;
    for (int n = 1; n <= opt.max_iter; ++n) {
        ScalarField next = op.solve(shifted_source(problem.c, psi, theta, nu), problem.boundary);
        require_above("Psi", next, opt.positivity_floor, n);
        const double r = rec.step(psi, next, kNaN, nu);
        psi = std::move(next);
        if (r <= opt.tol) {
            rec.trace().converged = true;
            return {std::move(psi), std::move(rec.trace())};
        }
    }
    fail_to_converge("case 1.2 iteration", rec.trace());
}

PsiSolution solve_psi_case2(const SemilinearProblem& problem, const IterationOptions& opt) {
    if (problem.tag.kind != CaseKind::Case2 && problem.theta != 0.0) {
        require_case(problem, CaseKind::Case2, "case 2 iteration");
    }
    const double theta = problem.theta;
    // The initial kappa is the smallest boundary value of g^(2/(1+theta)).
    double kappa = boundary_extreme(problem.boundary, /*want_max=*/false);
    if (!(kappa > opt.positivity_floor)) {
        throw DegenerateKappa("initial kappa " + std::to_string(kappa) + " is not positive");
    }
    ScalarField psi =
        EllipticOperator(problem.a, problem.b, opt.linear_solver).solve_homogeneous(problem.boundary);
    require_above("Psi", psi, opt.positivity_floor, 0);

    double nu = -theta * std::pow(kappa, -(1.0 + theta));

    TraceRecorder rec(CaseKind::Case2, psi, /*nonincreasing=*/false);
    rec.trace().kappa[0] = kappa;
    rec.trace().nu[0] = nu;
    rec.trace().sign_violation_fraction = problem.sign_violation_fraction;
    for (int n = 1; n <= opt.max_iter; ++n) {
        const EllipticOperator op(problem.a, problem.b + problem.c * nu, opt.linear_solver);
        ScalarField next = op.solve(shifted_source(problem.c, psi, theta, nu), problem.boundary);
        require_above("Psi", next, opt.positivity_floor, n);
        kappa = next.min();
        if (!(kappa > opt.positivity_floor)) {
            throw DegenerateKappa("kappa fell to " + std::to_string(kappa) + " at iteration " +
                                  std::to_string(n));
        }
        nu = -theta * std::pow(kappa, -(1.0 + theta));
        const double r = rec.step(psi, next, kappa, nu);
        psi = std::move(next);
        if (r <= opt.tol) {
            rec.trace().converged = true;
            return {std::move(psi), std::move(rec.trace())};
        }
    }
    fail_to_converge("case 2 iteration", rec.trace());
}

ScalarField solve_psi_linear(const SemilinearProblem& problem, LinearSolverKind kind) {
    try {
        return EllipticOperator(problem.a, problem.b, kind).solve(problem.c * -1.0, problem.boundary);
    } catch (const NonConvergence& e) {
        throw SingularSystem(std::string("linear theta = 0 problem: ") + e.what());
    }
}

PsiSolution solve_psi(const SemilinearProblem& problem, const IterationOptions& options) {
    switch (problem.tag.kind) {
        case CaseKind::Case11: return solve_psi_case11(problem, options);
        case CaseKind::Case12: return solve_psi_case12(problem, options);
        case CaseKind::Case2: return solve_psi_case2(problem, options);
        case CaseKind::LinearTheta0: {
            PsiSolution out{solve_psi_linear(problem, options.linear_solver), {}};
            out.trace.scheme = CaseKind::LinearTheta0;
            out.trace.converged = true;
            out.trace.sign_violation_fraction = problem.sign_violation_fraction;
            out.trace.residuals.push_back(kNaN);
            out.trace.psi_min.push_back(out.psi.min());
            out.trace.psi_max.push_back(out.psi.max());
            out.trace.kappa.push_back(kNaN);
            out.trace.nu.push_back(kNaN);
            out.trace.monotonicity_excess.push_back(0.0);
            return out;
        }
        case CaseKind::Unsupported: break;
    }
    throw UnsupportedCase("no monotone scheme applies: " + problem.tag.reason);
}

ScalarField recover_u0(const ScalarField& psi, double theta) {
    require_above("Psi", psi, 0.0, -1);
    const double e = 0.5 * (1.0 + theta);
    return psi.map([e](double z) { return std::pow(z, e); });
}

ScalarField recover_sigma(const ScalarField& Q, const ScalarField& u0, const OpticalModel& model,
                          const ElastoOpticalConstants& k) {
    require_above("u0", u0, 0.0, -1);
    const GradientField du = recover_gradient(u0);
    return nodal(u0.mesh(), u0.size(), [&](int i) {
        const double u2 = u0[i] * u0[i];
        const double grad2 = du.dx[i] * du.dx[i] + du.dy[i] * du.dy[i];
        return (Q[i] - k.gamma_x * model.D_x[i] * grad2 - k.beta_x * model.sigma_xa[i] * u2) /
               (k.beta_f * u2);
    });
}

SigmaReconstruction reconstruct_sigma(const ScalarField& Q, const OpticalModel& model,
                                      const ElastoOpticalConstants& k,
                                      const IterationOptions& options,
                                      const SemilinearOptions& semilinear) {
    SemilinearProblem problem = build_problem(Q, model, k, semilinear);
    PsiSolution psi = solve_psi(problem, options);
    ScalarField u0 = recover_u0(psi.psi, k.theta);
    ScalarField sigma = recover_sigma(Q, u0, model, k);
    return {std::move(problem), std::move(psi), std::move(u0), std::move(sigma)};
}

}  // namespace fumot
