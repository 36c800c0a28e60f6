#pragma once

#include <vector>

#include "fumot/fem.hpp"
#include "fumot/model.hpp"

namespace fumot {

/// div(a grad Psi) = b Psi + c |Psi|^-(1+theta) Psi in the domain,
/// Psi = g^(2/(1+theta)) on the boundary, with
/// a = D_x, b = -(2/(1+theta)) sigma_xa mu, c = (2/(1+theta)) Q / beta_f.
struct SemilinearProblem {
    ScalarField a;
    ScalarField b;
    ScalarField c;
    double theta = 0.0;
    ScalarField boundary;  ///< g^(2/(1+theta)); only boundary DOFs are meaningful
    CaseTag tag;
    /// Fraction of nodes where c has the sign the case forbids (noisy data).
    double sign_violation_fraction = 0.0;
};

struct SemilinearOptions {
    /// Largest fraction of sign-violating c nodes tolerated before the data
    /// are rejected as UnsupportedCase.
    double sign_violation_limit = 1e-3;
};

/// Throws UnsupportedCase when no monotone scheme applies.
SemilinearProblem build_problem(const ScalarField& Q, const OpticalModel& model,
                                const ElastoOpticalConstants& k,
                                const SemilinearOptions& options = {});

struct IterationOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double positivity_floor = 1e-12;
    LinearSolverKind linear_solver = LinearSolverKind::Direct;
};

/// Per-iteration record of a monotone scheme. Entry 0 describes Psi_0.
struct IterationTrace {
    CaseKind scheme = CaseKind::Unsupported;
    int iterations = 0;                   ///< number of updates Psi_0 -> Psi_n
    std::vector<double> residuals;        ///< r_n, entry 0 is NaN
    std::vector<double> psi_min;
    std::vector<double> psi_max;
    std::vector<double> kappa;            ///< Case 2 only; NaN otherwise
    std::vector<double> nu;               ///< Cases 1.2 and 2; NaN otherwise
    /// Largest nodal step against the expected monotone direction, relative
    /// to max|Psi_0| (<= 0 means exactly monotone), per iteration.
    std::vector<double> monotonicity_excess;
    double upper_bound = 0.0;             ///< h-bar for Case 1.2
    double sign_violation_fraction = 0.0;
    bool converged = false;

    double final_residual() const { return residuals.empty() ? 0.0 : residuals.back(); }
    /// Monotone within slack * max|Psi_0| at every step.
    bool monotone(double slack = 1e-10) const;
};

struct PsiSolution {
    ScalarField psi;
    IterationTrace trace;
};

/// Algorithm for -1 < theta < 0, b >= 0, c >= 0: nonincreasing iterates.
PsiSolution solve_psi_case11(const SemilinearProblem& problem, const IterationOptions& options = {});
/// Algorithm for theta < -1, b >= 0, c >= 0: nondecreasing iterates bounded by h-bar.
PsiSolution solve_psi_case12(const SemilinearProblem& problem, const IterationOptions& options = {});
/// Algorithm for theta >= 0, b >= 0, c <= 0: nondecreasing iterates with kappa updates.
PsiSolution solve_psi_case2(const SemilinearProblem& problem, const IterationOptions& options = {});
/// theta == 0: one linear solve of -div(a grad Psi) + b Psi = -c.
ScalarField solve_psi_linear(const SemilinearProblem& problem,
                             LinearSolverKind kind = LinearSolverKind::Direct);

/// Dispatches on problem.tag.
PsiSolution solve_psi(const SemilinearProblem& problem, const IterationOptions& options = {});

/// u0 = Psi^((1+theta)/2) nodally. Throws PositivityViolation when Psi <= 0.
ScalarField recover_u0(const ScalarField& psi, double theta);

/// sigma_xf = (Q - gamma_x D_x |grad u0|^2 - beta_x sigma_xa u0^2) / (beta_f u0^2).
ScalarField recover_sigma(const ScalarField& Q, const ScalarField& u0, const OpticalModel& model,
                          const ElastoOpticalConstants& k);

struct SigmaReconstruction {
    SemilinearProblem problem;
    PsiSolution psi;
    ScalarField u0;
    ScalarField sigma_xf;
};

/// build_problem -> solve_psi -> recover_u0 -> recover_sigma.
SigmaReconstruction reconstruct_sigma(const ScalarField& Q, const OpticalModel& model,
                                      const ElastoOpticalConstants& k,
                                      const IterationOptions& options = {},
                                      const SemilinearOptions& semilinear = {});

}  // namespace fumot
