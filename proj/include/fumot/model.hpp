#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "fumot/expression.hpp"
#include "fumot/fem.hpp"

namespace fumot {

/// Elasto-optical constants and the reconstruction parameters derived from
/// them. The modulation maps are gamma = 2n - 1 and beta = 2n + 1.
struct ElastoOpticalConstants {
    double n_x = 0.0;
    double n_m = 0.0;
    double n_f = 0.0;
    double gamma_x = 0.0;
    double gamma_m = 0.0;
    double beta_x = 0.0;
    double beta_m = 0.0;
    double beta_f = 0.0;
    double tau = 0.0;    ///< gamma_x / beta_f
    double mu = 0.0;     ///< beta_x / beta_f - 1
    double theta = 0.0;  ///< (beta_f - gamma_x) / (beta_f + gamma_x)

    /// Exponent 2 / (1 + theta) relating Psi = u0^(2/(1+theta)).
    double psi_exponent() const noexcept { return 2.0 / (1.0 + theta); }
};

/// Throws DegenerateConstants when beta_f == 0 or beta_f + gamma_x == 0.
ElastoOpticalConstants derive_constants(double n_x, double n_m, double n_f);

/// (1 - tau) / (1 + tau).
double theta_from_tau(double tau);

enum class CaseKind { Case11, Case12, Case2, LinearTheta0, Unsupported };

struct CaseTag {
    CaseKind kind = CaseKind::Unsupported;
    std::string reason;  ///< set for Unsupported

    bool supported() const noexcept { return kind != CaseKind::Unsupported; }
};

std::string_view to_string(CaseKind kind);
std::optional<CaseKind> case_from_string(std::string_view name);

/// Relative width of the sign band used when classifying b and c.
inline constexpr double kSignTolerance = 1e-12;

/// Sign summary of a nodal coefficient. Values within `band` of zero count
/// as compatible with both signs.
struct SignProfile {
    bool nonnegative = true;
    bool nonpositive = true;
    double band = 0.0;
    double negative_fraction = 0.0;  ///< fraction of nodes below -band
    double positive_fraction = 0.0;  ///< fraction of nodes above +band
};

SignProfile sign_profile(std::span<const double> values, double rel_tol = kSignTolerance);

/// Picks the monotone scheme for (theta, b, c). Total: every input gets
/// exactly one tag; theta == 0 is always LinearTheta0.
CaseTag classify_case(double theta, std::span<const double> b, std::span<const double> c,
                      double rel_tol = kSignTolerance);

/// Closed-form coefficient description; mesh independent.
struct CoefficientExpressions {
    Expression D_x = Expression::constant(0.1);
    Expression D_m = Expression::constant(0.1);
    Expression sigma_xa = Expression::constant(0.1);
    Expression sigma_ma = Expression::constant(0.1);
    Expression sigma_xf = Expression::constant(0.1);
    Expression eta = Expression::constant(0.5);
    Expression g = Expression::constant(1.0);
    Expression h = Expression::constant(1.0);
};

/// Optical coefficients sampled on a mesh. Boundary functions g and h are
/// stored as full fields; only their boundary DOFs are used.
struct OpticalModel {
    ScalarField D_x;
    ScalarField D_m;
    ScalarField sigma_xa;
    ScalarField sigma_ma;
    ScalarField sigma_xf;
    ScalarField eta;
    ScalarField g;
    ScalarField h;

    static OpticalModel sample(const MeshPtr& mesh, const CoefficientExpressions& coeffs);

    const MeshPtr& mesh() const noexcept { return D_x.mesh(); }

    /// Same background with a different fluorophore absorption.
    OpticalModel with_sigma_xf(ScalarField sigma) const;
    OpticalModel with_eta(ScalarField eta_field) const;

    /// Enforces K0 < D_x, D_m, sigma_xa, sigma_ma, sigma_xf < K1 at every DOF,
    /// K0 < g < K1 and h > 0 on the boundary, and 0 <= eta <= 1.
    /// Throws ConfigError naming the first offending coefficient.
    void validate(double K0, double K1) const;
};

}  // namespace fumot
