#include "fumot/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fumot/error.hpp"

namespace fumot {

ElastoOpticalConstants derive_constants(double n_x, double n_m, double n_f) {
    ElastoOpticalConstants k;
    k.n_x = n_x;
    k.n_m = n_m;
    k.n_f = n_f;
    k.gamma_x = 2.0 * n_x - 1.0;
    k.gamma_m = 2.0 * n_m - 1.0;
    k.beta_x = 2.0 * n_x + 1.0;
    k.beta_m = 2.0 * n_m + 1.0;
    k.beta_f = 2.0 * n_f + 1.0;
    if (k.beta_f == 0.0) {
        throw DegenerateConstants("beta_f = 0: Q carries no sigma_xf term (n_f = -1/2)");
    }
    if (k.beta_f + k.gamma_x == 0.0) {
        throw DegenerateConstants("beta_f + gamma_x = 0: theta is infinite");
    }
    k.tau = k.gamma_x / k.beta_f;
    k.mu = k.beta_x / k.beta_f - 1.0;
    k.theta = (k.beta_f - k.gamma_x) / (k.beta_f + k.gamma_x);
    return k;
}

double theta_from_tau(double tau) { return (1.0 - tau) / (1.0 + tau); }

std::string_view to_string(CaseKind kind) {
    switch (kind) {
        case CaseKind::Case11: return "case11";
        case CaseKind::Case12: return "case12";
        case CaseKind::Case2: return "case2";
        case CaseKind::LinearTheta0: return "linear_theta0";
        case CaseKind::Unsupported: return "unsupported";
    }
    return "unsupported";
}

std::optional<CaseKind> case_from_string(std::string_view name) {
    for (CaseKind k : {CaseKind::Case11, CaseKind::Case12, CaseKind::Case2,
                       CaseKind::LinearTheta0, CaseKind::Unsupported}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

SignProfile sign_profile(std::span<const double> values, double rel_tol) {
    SignProfile p;
    if (values.empty()) return p;
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    p.band = rel_tol * scale;
    std::size_t neg = 0, pos = 0;
    for (double v : values) {
        if (v < -p.band) ++neg;
        if (v > p.band) ++pos;
    }
    p.nonnegative = neg == 0;
    p.nonpositive = pos == 0;
    p.negative_fraction = static_cast<double>(neg) / values.size();
    p.positive_fraction = static_cast<double>(pos) / values.size();
    return p;
}

CaseTag classify_case(double theta, std::span<const double> b, std::span<const double> c,
                      double rel_tol) {
    if (!std::isfinite(theta)) return {CaseKind::Unsupported, "theta is not finite"};
    if (theta == 0.0) return {CaseKind::LinearTheta0, {}};
    if (theta == -1.0) return {CaseKind::Unsupported, "theta = -1 (beta_f = 0)"};

    const SignProfile bs = sign_profile(b, rel_tol);
    const SignProfile cs = sign_profile(c, rel_tol);
    if (!bs.nonnegative) {
        std::ostringstream msg;
        msg << "b is negative at " << 100.0 * bs.negative_fraction << "% of nodes";
        return {CaseKind::Unsupported, msg.str()};
    }
    if (theta < 0.0) {
        if (!cs.nonnegative) {
            return {CaseKind::Unsupported,
                    cs.nonpositive ? "c is negative with theta < 0" : "c changes sign with theta < 0"};
        }
        return {theta > -1.0 ? CaseKind::Case11 : CaseKind::Case12, {}};
    }
    if (!cs.nonpositive) {
        return {CaseKind::Unsupported,
                cs.nonnegative ? "c is positive with theta > 0" : "c changes sign with theta > 0"};
    }
    return {CaseKind::Case2, {}};
}

OpticalModel OpticalModel::sample(const MeshPtr& mesh, const CoefficientExpressions& c) {
    auto field = [&](const Expression& e) {
        return ScalarField::interpolate(mesh, [&e](double x, double y) { return e(x, y); });
    };
    return {field(c.D_x),      field(c.D_m), field(c.sigma_xa), field(c.sigma_ma),
            field(c.sigma_xf), field(c.eta), field(c.g),        field(c.h)};
}

OpticalModel OpticalModel::with_sigma_xf(ScalarField sigma) const {
    OpticalModel m = *this;
    m.sigma_xf = std::move(sigma);
    return m;
}

OpticalModel OpticalModel::with_eta(ScalarField eta_field) const {
    OpticalModel m = *this;
    m.eta = std::move(eta_field);
    return m;
}

namespace {

void check_bounds(const char* name, const ScalarField& f, std::span<const int> dofs, double lo,
                  double hi) {
    for (int d : dofs) {
        const double v = f[d];
        if (!(v > lo && v < hi)) {
            const Point p = f.mesh()->dof_points()[d];
            std::ostringstream msg;
            msg << name << " = " << v << " at (" << p.x << ", " << p.y << ") violates " << lo
                << " < " << name << " < " << hi;
            throw ConfigError(msg.str());
        }
    }
}

}  // namespace

void OpticalModel::validate(double K0, double K1) const {
    const Mesh& m = *mesh();
    std::vector<int> all(m.dof_count());
    for (int i = 0; i < m.dof_count(); ++i) all[i] = i;
    check_bounds("D_x", D_x, all, K0, K1);
    check_bounds("D_m", D_m, all, K0, K1);
    check_bounds("sigma_xa", sigma_xa, all, K0, K1);
    check_bounds("sigma_ma", sigma_ma, all, K0, K1);
    check_bounds("sigma_xf", sigma_xf, all, K0, K1);
    check_bounds("g", g, m.boundary_dofs(), K0, K1);
    check_bounds("h", h, m.boundary_dofs(), 0.0, std::numeric_limits<double>::infinity());
    // eta lives on [0, 1]; the open-interval check is widened to the closed one.
    const double lo = -std::numeric_limits<double>::min();
    check_bounds("eta", eta, all, lo, std::nextafter(1.0, 2.0));
}

}  // namespace fumot
