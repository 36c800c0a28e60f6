#pragma once

#include <functional>
#include <vector>

#include "fumot/fem.hpp"
#include "fumot/model.hpp"

namespace fumot {

/// Discretization of (A0 + A1 + A2) acting on nodal eta vectors:
///   T0 eta = (-div D_m grad + sigma_ma)^-1 (eta sigma_xf u0)
///   T1 eta = (-div D_x grad + sigma_xa + sigma_xf)^-1 (eta sigma_xf v)
///   A0 eta = -eta beta_f sigma_xf u0 v
///   A1 eta = gamma_m D_m grad v . grad(T0 eta) + beta_m sigma_ma v T0 eta
///   A2 eta = gamma_x D_x grad u0 . grad(T1 eta) + (beta_x sigma_xa + beta_f sigma_xf) u0 T1 eta
/// Both inverses are factorized once at construction.
class EtaOperator {
public:
    EtaOperator(const OpticalModel& model, const ElastoOpticalConstants& k, ScalarField u0,
                ScalarField v, LinearSolverKind kind = LinearSolverKind::Direct);

    const MeshPtr& mesh() const noexcept { return u0_.mesh(); }

    ScalarField apply_T0(const ScalarField& eta) const;
    ScalarField apply_T1(const ScalarField& eta) const;
    ScalarField apply_A(const ScalarField& eta) const;

    /// Multiplier of the A0 term, -beta_f sigma_xf u0 v.
    const ScalarField& a0_multiplier() const noexcept { return a0_; }

private:
    ElastoOpticalConstants k_;
    ScalarField u0_;
    ScalarField v_;
    ScalarField sigma_u0_;
    ScalarField sigma_v_;
    ScalarField a0_;
    // Coefficients of A1 and A2 with the recovered gradients of v and u0 folded in.
    ScalarField a1_grad_x_, a1_grad_y_, a1_value_;
    ScalarField a2_grad_x_, a2_grad_y_, a2_value_;
    EllipticOperator emission_;
    EllipticOperator excitation_;
};

struct KrylovOptions {
    double tol = 1e-10;
    int restart = 30;
    int max_iter = 500;
    /// NearSingular when min |A0 multiplier| <= threshold * max |A0 multiplier|.
    double near_singular_threshold = 1e-8;
};

struct KrylovTrace {
    int iterations = 0;              ///< total Arnoldi steps
    int restarts = 0;
    std::vector<double> residuals;   ///< relative residual estimate after each step
    double certificate = 0.0;        ///< ||A eta - S||_L2 / ||S||_L2 of the returned eta
    bool converged = false;
};

/// Matrix-free restarted GMRES for A x = b with the Euclidean inner product.
/// `certify(x)` returns the true relative residual checked at every restart;
/// iteration stops once it is <= tol.
struct GmresResult {
    Vector x;
    KrylovTrace trace;
};
GmresResult gmres(const std::function<Vector(const Vector&)>& apply, const Vector& b,
                  const std::function<double(const Vector&)>& certify, const KrylovOptions& options);

struct EtaSolution {
    ScalarField eta;
    KrylovTrace trace;
};

/// Solves (A0 + A1 + A2) eta = S. Throws NearSingular when the A0 multiplier
/// nearly vanishes somewhere and NonConvergence when GMRES stalls.
EtaSolution solve_eta(const ScalarField& S, const EtaOperator& op, const KrylovOptions& options = {});

}  // namespace fumot
