#pragma once

#include <cstdint>
#include <string>

#include "fumot/fem.hpp"
#include "fumot/forward.hpp"
#include "fumot/model.hpp"

namespace fumot {

struct Provenance {
    bool noised = false;
    double level = 0.0;
    std::uint64_t seed = 0;

    std::string describe() const;
};

struct InternalData {
    ScalarField Q;
    ScalarField S;
    Provenance q_provenance;
    Provenance s_provenance;
};

/// Q = gamma_x D_x |grad u0|^2 + (beta_x sigma_xa + beta_f sigma_xf) u0^2,
/// evaluated nodally with recovered gradients.
ScalarField compute_Q(const ScalarField& u0, const OpticalModel& model,
                      const ElastoOpticalConstants& k);

/// S = gamma_m D_m grad w0 . grad v + beta_m sigma_ma w0 v
///   + gamma_x D_x grad p . grad u0 + (beta_x sigma_xa + beta_f sigma_xf) p u0
///   - eta beta_f sigma_xf u0 v, evaluated nodally with recovered gradients.
ScalarField compute_S(const ForwardState& state, const OpticalModel& model,
                      const ElastoOpticalConstants& k, const ScalarField& eta);

InternalData compute_internal_data(const ForwardState& state, const OpticalModel& model,
                                   const ElastoOpticalConstants& k);

/// First-order boundary functional J1(q, phi) = integral of Q cos(q.x + phi).
double compute_J1(const ScalarField& Q, Vec2 q, double phi);

/// Multiplicative nodal noise value * (1 + level * xi), xi uniform on [-1, 1],
/// drawn from std::mt19937_64 seeded with `seed` in DOF order. level == 0
/// returns the field unchanged.
ScalarField add_noise(const ScalarField& field, double level, std::uint64_t seed);

/// Independent seed for a secondary stream (S noise uses stream 1).
std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace fumot
