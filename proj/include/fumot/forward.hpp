#pragma once

#include "fumot/fem.hpp"
#include "fumot/model.hpp"

namespace fumot {

/// Unmodulated photon densities and the two auxiliary fields.
struct ForwardState {
    ScalarField u0;  ///< excitation density
    ScalarField w0;  ///< emission density
    ScalarField v;   ///< auxiliary field with boundary data h
    ScalarField p;   ///< auxiliary field driven by eta * sigma_xf * v
};

/// -div(D_x grad .) + (sigma_xa + sigma_xf), the excitation operator.
EllipticOperator excitation_operator(const OpticalModel& model,
                                     LinearSolverKind kind = LinearSolverKind::Direct);
/// -div(D_m grad .) + sigma_ma, the emission operator.
EllipticOperator emission_operator(const OpticalModel& model,
                                   LinearSolverKind kind = LinearSolverKind::Direct);

/// u0 with Dirichlet data g. Throws PositivityViolation if min nodal u0 <= 0.
ScalarField solve_excitation(const OpticalModel& model);
/// w0 with source eta * sigma_xf * u0 and zero Dirichlet data.
ScalarField solve_emission(const OpticalModel& model, const ScalarField& u0);
/// v with Dirichlet data h. Throws PositivityViolation if min nodal v <= 0.
ScalarField solve_auxiliary_v(const OpticalModel& model);
/// p with source eta * sigma_xf * v and zero Dirichlet data.
ScalarField solve_auxiliary_p(const OpticalModel& model, const ScalarField& v,
                              const ScalarField& eta);

ForwardState solve_forward(const OpticalModel& model);

}  // namespace fumot
