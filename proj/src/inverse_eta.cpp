#include "fumot/inverse_eta.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "fumot/error.hpp"
#include "fumot/forward.hpp"

namespace fumot {

EtaOperator::EtaOperator(const OpticalModel& model, const ElastoOpticalConstants& k,
                         ScalarField u0, ScalarField v, LinearSolverKind kind)
    : k_(k),
      u0_(std::move(u0)),
      v_(std::move(v)),
      emission_(emission_operator(model, kind)),
      excitation_(excitation_operator(model, kind)) {
    sigma_u0_ = model.sigma_xf * u0_;
    sigma_v_ = model.sigma_xf * v_;
    a0_ = sigma_u0_ * v_ * (-k.beta_f);

    const GradientField dv = recover_gradient(v_);
    const GradientField du = recover_gradient(u0_);
    a1_grad_x_ = model.D_m * dv.dx * k.gamma_m;
    a1_grad_y_ = model.D_m * dv.dy * k.gamma_m;
    a1_value_ = model.sigma_ma * v_ * k.beta_m;
    a2_grad_x_ = model.D_x * du.dx * k.gamma_x;
    a2_grad_y_ = model.D_x * du.dy * k.gamma_x;
    a2_value_ = (model.sigma_xa * k.beta_x + model.sigma_xf * k.beta_f) * u0_;
}

ScalarField EtaOperator::apply_T0(const ScalarField& eta) const {
    return emission_.solve_zero_dirichlet(eta * sigma_u0_);
}

ScalarField EtaOperator::apply_T1(const ScalarField& eta) const {
    return excitation_.solve_zero_dirichlet(eta * sigma_v_);
}

ScalarField EtaOperator::apply_A(const ScalarField& eta) const {
    const ScalarField t0 = apply_T0(eta);
    const ScalarField t1 = apply_T1(eta);
    const GradientField g0 = recover_gradient(t0);
    const GradientField g1 = recover_gradient(t1);
    Vector out = a0_.values().cwiseProduct(eta.values());
    out += a1_grad_x_.values().cwiseProduct(g0.dx.values()) +
           a1_grad_y_.values().cwiseProduct(g0.dy.values()) +
           a1_value_.values().cwiseProduct(t0.values());
    out += a2_grad_x_.values().cwiseProduct(g1.dx.values()) +
           a2_grad_y_.values().cwiseProduct(g1.dy.values()) +
           a2_value_.values().cwiseProduct(t1.values());
    return ScalarField(mesh(), std::move(out));
}

GmresResult gmres(const std::function<Vector(const Vector&)>& apply, const Vector& b,
                  const std::function<double(const Vector&)>& certify,
                  const KrylovOptions& options) {
    GmresResult out;
    out.x = Vector::Zero(b.size());
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.trace.converged = true;
        return out;
    }
    const int m = std::max(1, options.restart);
    double inner_target = 0.1 * options.tol;

    std::vector<Vector> basis(m + 1);
    Eigen::MatrixXd hess(m + 1, m);
    Vector cs(m), sn(m), g(m + 1);

    for (;;) {
        out.trace.certificate = certify(out.x);
        if (out.trace.certificate <= options.tol) {
            out.trace.converged = true;
            return out;
        }
        if (out.trace.iterations >= options.max_iter) break;

        const Vector r = b - apply(out.x);
        const double beta = r.norm();
        if (beta / bnorm <= inner_target) {
            // The Euclidean residual is already small but the L2 certificate is
            // not; tighten the inner target and keep going.
            inner_target = 0.1 * beta / bnorm;
        }
        basis[0] = r / beta;
        hess.setZero();
        g.setZero();
        g[0] = beta;

        int j = 0;
        while (j < m && out.trace.iterations < options.max_iter) {
            Vector w = apply(basis[j]);
            // Modified Gram-Schmidt with one reorthogonalization pass.
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= j; ++i) {
                    const double hij = basis[i].dot(w);
                    hess(i, j) += hij;
                    w -= hij * basis[i];
                }
            }
            const double hnext = w.norm();
            hess(j + 1, j) = hnext;
            if (hnext > 0.0) basis[j + 1] = w / hnext;

            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * hess(i, j) + sn[i] * hess(i + 1, j);
                hess(i + 1, j) = -sn[i] * hess(i, j) + cs[i] * hess(i + 1, j);
                hess(i, j) = t;
            }
            const double denom = std::hypot(hess(j, j), hess(j + 1, j));
            cs[j] = hess(j, j) / denom;
            sn[j] = hess(j + 1, j) / denom;
            hess(j, j) = denom;
            hess(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];

            ++j;
            ++out.trace.iterations;
            const double est = std::abs(g[j]) / bnorm;
            out.trace.residuals.push_back(est);
            if (est <= inner_target || hnext == 0.0) break;
        }

        const Vector y = hess.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        for (int i = 0; i < j; ++i) out.x += y[i] * basis[i];
        ++out.trace.restarts;
    }

    out.trace.certificate = certify(out.x);
    out.trace.converged = out.trace.certificate <= options.tol;
    if (!out.trace.converged) {
        std::ostringstream msg;
        msg << "restarted GMRES stopped after " << out.trace.iterations
            << " iterations with relative residual " << out.trace.certificate;
        throw NonConvergence(msg.str(), out.trace.iterations, out.trace.certificate);
    }
    return out;
}

EtaSolution solve_eta(const ScalarField& S, const EtaOperator& op, const KrylovOptions& options) {
    if (S.mesh() != op.mesh() && !S.mesh()->same_layout(*op.mesh())) {
        throw MeshMismatch("solve_eta: S and the operator live on different meshes");
    }
    const Vector mult = op.a0_multiplier().values().cwiseAbs();
    const double lo = mult.minCoeff();
    const double hi = mult.maxCoeff();
    if (!(lo > options.near_singular_threshold * hi)) {
        std::ostringstream msg;
        msg << "A0 multiplier -beta_f sigma_xf u0 v nearly vanishes (min " << lo << ", max " << hi
            << ")";
        throw NearSingular(msg.str());
    }

    const MeshPtr& mesh = op.mesh();
    const double s_norm = l2_norm(S);
    auto apply = [&](const Vector& x) { return op.apply_A(ScalarField(mesh, x)).values(); };
    auto certify = [&](const Vector& x) {
        const ScalarField res = op.apply_A(ScalarField(mesh, x)) - S;
        return s_norm > 0.0 ? l2_norm(res) / s_norm : l2_norm(res);
    };
    if (s_norm == 0.0) {
        EtaSolution zero{ScalarField::zeros(mesh), {}};
        zero.trace.converged = true;
        return zero;
    }
    GmresResult res = gmres(apply, S.values(), certify, options);
    return {ScalarField(mesh, std::move(res.x)), std::move(res.trace)};
}

}  // namespace fumot
