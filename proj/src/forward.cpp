#include "fumot/forward.hpp"

#include <sstream>

#include "fumot/error.hpp"

namespace fumot {

namespace {

void require_positive(const char* name, const ScalarField& f) {
    const double lo = f.min();
    if (!(lo > 0.0)) {
        std::ostringstream msg;
        msg << name << " has nodal minimum " << lo
            << "; the mesh is too coarse or the coefficients are inadmissible";
        throw PositivityViolation(msg.str(), lo);
    }
}

}  // namespace

EllipticOperator excitation_operator(const OpticalModel& model, LinearSolverKind kind) {
    return EllipticOperator(model.D_x, model.sigma_xa + model.sigma_xf, kind);
}

EllipticOperator emission_operator(const OpticalModel& model, LinearSolverKind kind) {
    return EllipticOperator(model.D_m, model.sigma_ma, kind);
}

ScalarField solve_excitation(const OpticalModel& model) {
    ScalarField u0 = excitation_operator(model).solve_homogeneous(model.g);
    require_positive("u0", u0);
    return u0;
}

ScalarField solve_emission(const OpticalModel& model, const ScalarField& u0) {
    return emission_operator(model).solve_zero_dirichlet(model.eta * model.sigma_xf * u0);
}

ScalarField solve_auxiliary_v(const OpticalModel& model) {
    ScalarField v = emission_operator(model).solve_homogeneous(model.h);
    require_positive("v", v);
    return v;
}

ScalarField solve_auxiliary_p(const OpticalModel& model, const ScalarField& v,
                              const ScalarField& eta) {
    return excitation_operator(model).solve_zero_dirichlet(eta * model.sigma_xf * v);
}

ForwardState solve_forward(const OpticalModel& model) {
    // Each operator is factorized once and serves both of its solves.
    const EllipticOperator excitation = excitation_operator(model);
    const EllipticOperator emission = emission_operator(model);

    ScalarField u0 = excitation.solve_homogeneous(model.g);
    require_positive("u0", u0);
    ScalarField v = emission.solve_homogeneous(model.h);
    require_positive("v", v);
    ScalarField w0 = emission.solve_zero_dirichlet(model.eta * model.sigma_xf * u0);
    ScalarField p = excitation.solve_zero_dirichlet(model.eta * model.sigma_xf * v);
    return {std::move(u0), std::move(w0), std::move(v), std::move(p)};
}

}  // namespace fumot
