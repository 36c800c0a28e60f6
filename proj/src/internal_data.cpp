#include "fumot/internal_data.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace fumot {

std::string Provenance::describe() const {
    if (!noised) return "clean";
    std::ostringstream os;
    os << "noised(level=" << level << ", seed=" << seed << ")";
    return os.str();
}

ScalarField compute_Q(const ScalarField& u0, const OpticalModel& model,
                      const ElastoOpticalConstants& k) {
    const GradientField du = recover_gradient(u0);
    const Vector& u = u0.values();
    const Vector& dx = du.dx.values();
    const Vector& dy = du.dy.values();
    const Vector& D = model.D_x.values();
    const Vector& sa = model.sigma_xa.values();
    const Vector& sf = model.sigma_xf.values();
    return nodal(u0.mesh(), u0.size(), [&](int i) {
        const double grad2 = dx[i] * dx[i] + dy[i] * dy[i];
        return k.gamma_x * D[i] * grad2 + (k.beta_x * sa[i] + k.beta_f * sf[i]) * u[i] * u[i];
    });
}

ScalarField compute_S(const ForwardState& s, const OpticalModel& model,
                      const ElastoOpticalConstants& k, const ScalarField& eta) {
    const GradientField dw = recover_gradient(s.w0);
    const GradientField dv = recover_gradient(s.v);
    const GradientField dp = recover_gradient(s.p);
    const GradientField du = recover_gradient(s.u0);
    const auto& m = model;
    return nodal(s.u0.mesh(), s.u0.size(), [&](int i) {
        const double wv = dw.dx[i] * dv.dx[i] + dw.dy[i] * dv.dy[i];
        const double pu = dp.dx[i] * du.dx[i] + dp.dy[i] * du.dy[i];
        const double u = s.u0[i], v = s.v[i];
        return k.gamma_m * m.D_m[i] * wv + k.beta_m * m.sigma_ma[i] * s.w0[i] * v +
               k.gamma_x * m.D_x[i] * pu +
               (k.beta_x * m.sigma_xa[i] + k.beta_f * m.sigma_xf[i]) * s.p[i] * u -
               eta[i] * k.beta_f * m.sigma_xf[i] * u * v;
    });
}

InternalData compute_internal_data(const ForwardState& state, const OpticalModel& model,
                                   const ElastoOpticalConstants& k) {
    return {compute_Q(state.u0, model, k), compute_S(state, model, k, model.eta), {}, {}};
}

double compute_J1(const ScalarField& Q, Vec2 q, double phi) {
    return integrate(Q, [&](double x, double y) { return std::cos(q.x * x + q.y * y + phi); });
}

ScalarField add_noise(const ScalarField& field, double level, std::uint64_t seed) {
    if (level == 0.0) return field;
    std::mt19937_64 rng(seed);
    Vector v = field.values();
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double xi = 2.0 * static_cast<double>(rng() >> 11) * kScale - 1.0;
        v[i] *= 1.0 + level * xi;
    }
    return ScalarField(field.mesh(), std::move(v));
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace fumot
