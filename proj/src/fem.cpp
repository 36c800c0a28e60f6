#include "fumot/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <sstream>
#include <string>

#include "fumot/error.hpp"

namespace fumot {

// ---------------------------------------------------------------------------
// Quadrature

namespace {

// Orbits in barycentric coordinates; reference point is (lambda2, lambda3).
void add_centroid(TriangleRule& r, double w) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.5 * w);
}

void add_s21(TriangleRule& r, double w, double a) {
    const double b = 1.0 - 2.0 * a;
    for (const Point p : {Point{a, a}, Point{b, a}, Point{a, b}}) {
        r.points.push_back(p);
        r.weights.push_back(0.5 * w);
    }
}

void add_s111(TriangleRule& r, double w, double a, double b) {
    const double c = 1.0 - a - b;
    for (const Point p : {Point{a, b}, Point{b, a}, Point{a, c}, Point{c, a}, Point{b, c},
                          Point{c, b}}) {
        r.points.push_back(p);
        r.weights.push_back(0.5 * w);
    }
}

std::vector<TriangleRule> make_rules() {
    std::vector<TriangleRule> rules(5);
    rules[0].degree = 1;
    add_centroid(rules[0], 1.0);

    rules[1].degree = 2;
    add_s21(rules[1], 1.0 / 3.0, 1.0 / 6.0);

    rules[2].degree = 4;
    add_s21(rules[2], 0.223381589678011, 0.445948490915965);
    add_s21(rules[2], 0.109951743655322, 0.091576213509771);

    rules[3].degree = 6;
    add_s21(rules[3], 0.116786275726379, 0.249286745170910);
    add_s21(rules[3], 0.050844906370207, 0.063089014491502);
    add_s111(rules[3], 0.082851075618374, 0.053145049844817, 0.310352451033784);

    rules[4].degree = 8;
    add_centroid(rules[4], 0.144315607677787);
    add_s21(rules[4], 0.095091634267285, 0.459292588292723);
    add_s21(rules[4], 0.103217370534718, 0.170569307751760);
    add_s21(rules[4], 0.032458497623198, 0.050547228317031);
    add_s111(rules[4], 0.027230314174435, 0.008394777409958, 0.263112829634638);
    return rules;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
    static const std::vector<TriangleRule> rules = make_rules();
    for (const auto& r : rules) {
        if (r.degree >= degree) return r;
    }
    return rules.back();
}

// ---------------------------------------------------------------------------
// Lagrange basis

namespace {

// l_m(t) = prod_{s<m} (k t - s) / (s + 1) and its derivative.
void lagrange_factor(int k, int m, double t, double& value, double& deriv) {
    value = 1.0;
    deriv = 0.0;
    for (int s = 0; s < m; ++s) {
        const double f = (k * t - s) / (s + 1);
        const double df = static_cast<double>(k) / (s + 1);
        deriv = deriv * f + value * df;
        value *= f;
    }
}

}  // namespace

LagrangeBasis::LagrangeBasis(int order) : order_(order) {
    for (int b = 0; b <= order; ++b) {
        for (int a = 0; a + b <= order; ++a) {
            nodes_.push_back({static_cast<double>(a) / order, static_cast<double>(b) / order});
            multi_.push_back({order - a - b, a, b});
        }
    }
}

void LagrangeBasis::values(Point ref, std::span<double> out) const {
    const double lam[3] = {1.0 - ref.x - ref.y, ref.x, ref.y};
    for (std::size_t i = 0; i < multi_.size(); ++i) {
        double v = 1.0;
        for (int c = 0; c < 3; ++c) {
            double f, df;
            lagrange_factor(order_, multi_[i][c], lam[c], f, df);
            v *= f;
        }
        out[i] = v;
    }
}

void LagrangeBasis::gradients(Point ref, std::span<double> out) const {
    const double lam[3] = {1.0 - ref.x - ref.y, ref.x, ref.y};
    for (std::size_t i = 0; i < multi_.size(); ++i) {
        double f[3], df[3];
        for (int c = 0; c < 3; ++c) lagrange_factor(order_, multi_[i][c], lam[c], f[c], df[c]);
        const double d1 = df[0] * f[1] * f[2];
        const double d2 = f[0] * df[1] * f[2];
        const double d3 = f[0] * f[1] * df[2];
        out[2 * i] = d2 - d1;
        out[2 * i + 1] = d3 - d1;
    }
}

namespace {

/// Basis values and reference gradients tabulated at a set of points.
struct Tabulation {
    int nb = 0;
    std::vector<double> phi;   // [q * nb + i]
    std::vector<double> dphi;  // [(q * nb + i) * 2 + d]

    Tabulation(const LagrangeBasis& basis, std::span<const Point> pts) : nb(basis.size()) {
        phi.resize(pts.size() * nb);
        dphi.resize(pts.size() * nb * 2);
        for (std::size_t q = 0; q < pts.size(); ++q) {
            basis.values(pts[q], std::span<double>(phi.data() + q * nb, nb));
            basis.gradients(pts[q], std::span<double>(dphi.data() + q * nb * 2, nb * 2));
        }
    }
    double value(std::size_t q, int i) const { return phi[q * nb + i]; }
    double dxi(std::size_t q, int i) const { return dphi[(q * nb + i) * 2]; }
    double deta(std::size_t q, int i) const { return dphi[(q * nb + i) * 2 + 1]; }
};

/// Inverse-transpose Jacobian and |det J| of an affine element.
struct ElementGeometry {
    double det;
    double ixx, ixy, iyx, iyy;  // grad = [[ixx, ixy], [iyx, iyy]] * grad_ref

    explicit ElementGeometry(const std::array<double, 4>& j) {
        det = j[0] * j[3] - j[1] * j[2];
        ixx = j[3] / det;
        ixy = -j[2] / det;
        iyx = -j[1] / det;
        iyy = j[0] / det;
    }
    Vec2 map(double gxi, double geta) const {
        return {ixx * gxi + ixy * geta, iyx * gxi + iyy * geta};
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(MeshPtr mesh, Vector values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_) throw MeshMismatch("field constructed without a mesh");
    if (values_.size() != mesh_->dof_count()) {
        throw MeshMismatch("field has " + std::to_string(values_.size()) +
                           " coefficients but the mesh has " +
                           std::to_string(mesh_->dof_count()) + " DOFs");
    }
}

ScalarField ScalarField::constant(MeshPtr mesh, double value) {
    const int n = mesh->dof_count();
    return ScalarField(std::move(mesh), Vector::Constant(n, value));
}

ScalarField ScalarField::interpolate(MeshPtr mesh,
                                     const std::function<double(double, double)>& fn) {
    const auto pts = mesh->dof_points();
    Vector v(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) v[static_cast<Eigen::Index>(i)] = fn(pts[i].x, pts[i].y);
    return ScalarField(std::move(mesh), std::move(v));
}

double ScalarField::at(Point p) const { return at(mesh_->locate(p)); }

double ScalarField::at(const ElementPoint& loc) const {
    const LagrangeBasis basis(mesh_->order());
    std::vector<double> phi(basis.size());
    basis.values(loc.ref, phi);
    const auto dofs = mesh_->element_dofs(loc.element);
    double s = 0.0;
    for (int i = 0; i < basis.size(); ++i) s += values_[dofs[i]] * phi[i];
    return s;
}

Vec2 ScalarField::gradient_at(int element, Point ref) const {
    const LagrangeBasis basis(mesh_->order());
    std::vector<double> d(2 * basis.size());
    basis.gradients(ref, d);
    const auto dofs = mesh_->element_dofs(element);
    double gxi = 0.0, geta = 0.0;
    for (int i = 0; i < basis.size(); ++i) {
        gxi += values_[dofs[i]] * d[2 * i];
        geta += values_[dofs[i]] * d[2 * i + 1];
    }
    return ElementGeometry(mesh_->jacobian(element)).map(gxi, geta);
}

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
    Vector v = values_;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = fn(v[i]);
    return ScalarField(mesh_, std::move(v));
}

void ScalarField::check_same_mesh(const ScalarField& o) const {
    if (mesh_ != o.mesh_ && !(mesh_ && o.mesh_ && mesh_->same_layout(*o.mesh_))) {
        throw MeshMismatch("fields live on different meshes");
    }
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    check_same_mesh(o);
    values_ += o.values_;
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    check_same_mesh(o);
    values_ -= o.values_;
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    values_ *= s;
    return *this;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    a.check_same_mesh(b);
    return ScalarField(a.mesh_, a.values_.cwiseProduct(b.values_));
}

GradientField recover_gradient(const ScalarField& field) {
    const Mesh& mesh = *field.mesh();
    const LagrangeBasis basis(mesh.order());
    const Tabulation at_nodes(basis, basis.nodes());
    const int nb = basis.size();

    Vector gx = Vector::Zero(mesh.dof_count());
    Vector gy = Vector::Zero(mesh.dof_count());
    Vector weight = Vector::Zero(mesh.dof_count());
    const Vector& u = field.values();

    for (int e = 0; e < mesh.element_count(); ++e) {
        const ElementGeometry geo(mesh.jacobian(e));
        const double area = 0.5 * std::abs(geo.det);
        const auto dofs = mesh.element_dofs(e);
        for (int l = 0; l < nb; ++l) {
            double gxi = 0.0, geta = 0.0;
            for (int i = 0; i < nb; ++i) {
                gxi += u[dofs[i]] * at_nodes.dxi(l, i);
                geta += u[dofs[i]] * at_nodes.deta(l, i);
            }
            const Vec2 g = geo.map(gxi, geta);
            gx[dofs[l]] += area * g.x;
            gy[dofs[l]] += area * g.y;
            weight[dofs[l]] += area;
        }
    }
    gx.array() /= weight.array();
    gy.array() /= weight.array();
    return {ScalarField(field.mesh(), std::move(gx)), ScalarField(field.mesh(), std::move(gy))};
}

ScalarField transfer(const ScalarField& field, const MeshPtr& target) {
    if (field.mesh() == target) return field;
    const auto pts = target->dof_points();
    Vector v(target->dof_count());
    for (int i = 0; i < target->dof_count(); ++i) v[i] = field.at(pts[i]);
    return ScalarField(target, std::move(v));
}

ScalarField nodal(const MeshPtr& mesh, int count, const std::function<double(int)>& fn) {
    if (count != mesh->dof_count()) throw MeshMismatch("nodal: DOF count mismatch");
    Vector v(count);
    for (int i = 0; i < count; ++i) v[i] = fn(i);
    return ScalarField(mesh, std::move(v));
}

// ---------------------------------------------------------------------------
// Integration

namespace {

constexpr int kNormQuadratureDegree = 8;

/// Calls fn(x, y, weight, u, grad u) at every quadrature point.
template <class Fn>
void for_each_quadrature_point(const ScalarField& field, Fn&& fn) {
    const Mesh& mesh = *field.mesh();
    const LagrangeBasis basis(mesh.order());
    const TriangleRule& rule = triangle_rule(kNormQuadratureDegree);
    const Tabulation tab(basis, rule.points);
    const int nb = basis.size();
    const Vector& u = field.values();
    for (int e = 0; e < mesh.element_count(); ++e) {
        const ElementGeometry geo(mesh.jacobian(e));
        const auto dofs = mesh.element_dofs(e);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            double val = 0.0, gxi = 0.0, geta = 0.0;
            for (int i = 0; i < nb; ++i) {
                const double c = u[dofs[i]];
                val += c * tab.value(q, i);
                gxi += c * tab.dxi(q, i);
                geta += c * tab.deta(q, i);
            }
            const Point x = mesh.to_physical(e, rule.points[q]);
            fn(x.x, x.y, rule.weights[q] * std::abs(geo.det), val, geo.map(gxi, geta));
        }
    }
}

}  // namespace

FieldNorms norms(const ScalarField& field) {
    FieldNorms out;
    double l2sq = 0.0, h1sq = 0.0;
    for_each_quadrature_point(field, [&](double, double, double w, double u, Vec2 g) {
        out.l1 += w * std::abs(u);
        l2sq += w * u * u;
        h1sq += w * (g.x * g.x + g.y * g.y);
    });
    out.l2 = std::sqrt(l2sq);
    out.h1_seminorm = std::sqrt(h1sq);
    out.linf = field.values().cwiseAbs().maxCoeff();
    return out;
}

double l2_norm(const ScalarField& field) { return norms(field).l2; }

double h1_norm(const ScalarField& field) {
    const FieldNorms n = norms(field);
    return std::sqrt(n.l2 * n.l2 + n.h1_seminorm * n.h1_seminorm);
}

double integrate(const ScalarField& field) {
    double s = 0.0;
    for_each_quadrature_point(field, [&](double, double, double w, double u, Vec2) { s += w * u; });
    return s;
}

double integrate(const ScalarField& field, const std::function<double(double, double)>& weight) {
    double s = 0.0;
    for_each_quadrature_point(field, [&](double x, double y, double w, double u, Vec2) {
        s += w * weight(x, y) * u;
    });
    return s;
}

double l2_error(const ScalarField& field, const std::function<double(double, double)>& exact) {
    double s = 0.0;
    for_each_quadrature_point(field, [&](double x, double y, double w, double u, Vec2) {
        const double d = u - exact(x, y);
        s += w * d * d;
    });
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

using Triplet = Eigen::Triplet<double>;

/// Blocks of the operator and of the mass matrix, split into free and
/// constrained columns. Element loops only produce local contributions;
/// the global reduction happens in setFromTriplets.
struct AssembledBlocks {
    std::vector<int> free_dofs;
    std::vector<int> reduced;  // global -> free index or -(boundary index) - 1
    SparseMatrix a_ff;         // free x free
    SparseMatrix a_fb;         // free x boundary
    SparseMatrix m_f;          // free x all
    bool reaction_nonnegative = true;
};

AssembledBlocks assemble_blocks(const ScalarField& diffusion, const ScalarField& reaction) {
    if (diffusion.mesh() != reaction.mesh() &&
        !diffusion.mesh()->same_layout(*reaction.mesh())) {
        throw MeshMismatch("assemble: coefficient fields on different meshes");
    }
    const Mesh& mesh = *diffusion.mesh();
    const LagrangeBasis basis(mesh.order());
    const TriangleRule& rule = triangle_rule(2 * mesh.order());
    const Tabulation tab(basis, rule.points);
    const int nb = basis.size();

    AssembledBlocks out;
    out.reduced.assign(mesh.dof_count(), 0);
    const auto boundary = mesh.boundary_dofs();
    for (std::size_t b = 0; b < boundary.size(); ++b) out.reduced[boundary[b]] = -static_cast<int>(b) - 1;
    for (int i = 0; i < mesh.dof_count(); ++i) {
        if (!mesh.is_boundary_dof(i)) {
            out.reduced[i] = static_cast<int>(out.free_dofs.size());
            out.free_dofs.push_back(i);
        }
    }
    out.reaction_nonnegative = reaction.values().minCoeff() >= 0.0;

    const std::size_t est = static_cast<std::size_t>(mesh.element_count()) * nb * nb;
    std::vector<Triplet> tff, tfb, tm;
    tff.reserve(est);
    tfb.reserve(est / 4);
    tm.reserve(est);

    const Vector& a = diffusion.values();
    const Vector& r = reaction.values();
    std::vector<double> ke(nb * nb), me(nb * nb), gx(nb), gy(nb);

    for (int e = 0; e < mesh.element_count(); ++e) {
        const ElementGeometry geo(mesh.jacobian(e));
        const auto dofs = mesh.element_dofs(e);
        std::fill(ke.begin(), ke.end(), 0.0);
        std::fill(me.begin(), me.end(), 0.0);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            double aq = 0.0, rq = 0.0;
            for (int i = 0; i < nb; ++i) {
                aq += a[dofs[i]] * tab.value(q, i);
                rq += r[dofs[i]] * tab.value(q, i);
                const Vec2 g = geo.map(tab.dxi(q, i), tab.deta(q, i));
                gx[i] = g.x;
                gy[i] = g.y;
            }
            const double w = rule.weights[q] * std::abs(geo.det);
            for (int i = 0; i < nb; ++i) {
                const double pi = tab.value(q, i);
                for (int j = 0; j < nb; ++j) {
                    const double pj = tab.value(q, j);
                    const double mass = w * pi * pj;
                    ke[i * nb + j] += w * aq * (gx[i] * gx[j] + gy[i] * gy[j]) + rq * mass;
                    me[i * nb + j] += mass;
                }
            }
        }
        for (int i = 0; i < nb; ++i) {
            const int ri = out.reduced[dofs[i]];
            if (ri < 0) continue;
            for (int j = 0; j < nb; ++j) {
                const int rj = out.reduced[dofs[j]];
                if (rj >= 0) {
                    tff.emplace_back(ri, rj, ke[i * nb + j]);
                } else {
                    tfb.emplace_back(ri, -rj - 1, ke[i * nb + j]);
                }
                tm.emplace_back(ri, dofs[j], me[i * nb + j]);
            }
        }
    }

    const auto nf = static_cast<Eigen::Index>(out.free_dofs.size());
    const auto nbd = static_cast<Eigen::Index>(boundary.size());
    out.a_ff.resize(nf, nf);
    out.a_ff.setFromTriplets(tff.begin(), tff.end());
    out.a_fb.resize(nf, nbd);
    out.a_fb.setFromTriplets(tfb.begin(), tfb.end());
    out.m_f.resize(nf, mesh.dof_count());
    out.m_f.setFromTriplets(tm.begin(), tm.end());
    return out;
}

Vector boundary_values(const Mesh& mesh, const ScalarField& dirichlet) {
    const auto boundary = mesh.boundary_dofs();
    Vector g(static_cast<Eigen::Index>(boundary.size()));
    for (std::size_t b = 0; b < boundary.size(); ++b) g[static_cast<Eigen::Index>(b)] = dirichlet[boundary[b]];
    return g;
}

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
    const double nb = b.norm();
    const double nr = (a * x - b).norm();
    return nb > 0.0 ? nr / nb : nr;
}

}  // namespace

LinearSystem assemble(const ScalarField& diffusion, const ScalarField& reaction,
                      const ScalarField& source, const ScalarField& dirichlet) {
    AssembledBlocks blocks = assemble_blocks(diffusion, reaction);
    const Mesh& mesh = *diffusion.mesh();
    LinearSystem sys;
    sys.mesh = diffusion.mesh();
    sys.rhs = blocks.m_f * source.values() - blocks.a_fb * boundary_values(mesh, dirichlet);
    sys.matrix = std::move(blocks.a_ff);
    sys.free_dofs = std::move(blocks.free_dofs);
    sys.prescribed = Vector::Zero(mesh.dof_count());
    for (int b : mesh.boundary_dofs()) sys.prescribed[b] = dirichlet[b];
    sys.reaction_nonnegative = blocks.reaction_nonnegative;
    return sys;
}

ScalarField solve(const LinearSystem& system) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(system.matrix);
    if (ldlt.info() != Eigen::Success) {
        throw SingularSystem("sparse LDLT factorization failed");
    }
    Vector x = ldlt.solve(system.rhs);
    double res = relative_residual(system.matrix, x, system.rhs);
    for (int step = 0; step < 3 && res > 1e-13; ++step) {
        x += ldlt.solve(system.rhs - system.matrix * x);
        res = relative_residual(system.matrix, x, system.rhs);
    }
    if (!std::isfinite(res) || res > 1e-10) {
        throw NonConvergence("direct solve left relative residual " + std::to_string(res), 1, res);
    }
    Vector full = system.prescribed;
    for (std::size_t i = 0; i < system.free_dofs.size(); ++i) full[system.free_dofs[i]] = x[static_cast<Eigen::Index>(i)];
    return ScalarField(system.mesh, std::move(full));
}

// ---------------------------------------------------------------------------
// EllipticOperator

struct EllipticOperator::Impl {
    AssembledBlocks blocks;
    LinearSolverKind kind;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;

    Vector solve_reduced(const Vector& rhs) const {
        if (rhs.squaredNorm() == 0.0) return Vector::Zero(rhs.size());
        if (kind == LinearSolverKind::Direct) {
            Vector x = ldlt.solve(rhs);
            double res = relative_residual(blocks.a_ff, x, rhs);
            for (int step = 0; step < 3 && res > 1e-13; ++step) {
                x += ldlt.solve(rhs - blocks.a_ff * x);
                res = relative_residual(blocks.a_ff, x, rhs);
            }
            if (!std::isfinite(res) || res > 1e-10) {
                throw NonConvergence("direct solve left relative residual " + std::to_string(res),
                                     1, res);
            }
            return x;
        }
        Vector x = cg.solve(rhs);
        if (cg.info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "conjugate gradient stopped after " << cg.iterations()
                << " iterations with residual " << cg.error();
            throw NonConvergence(msg.str(), static_cast<int>(cg.iterations()), cg.error());
        }
        return x;
    }
};

EllipticOperator::EllipticOperator(const ScalarField& diffusion, const ScalarField& reaction,
                                   LinearSolverKind kind)
    : mesh_(diffusion.mesh()), impl_(std::make_unique<Impl>()) {
    impl_->blocks = assemble_blocks(diffusion, reaction);
    impl_->kind = kind;
    if (kind == LinearSolverKind::Direct) {
        impl_->ldlt.compute(impl_->blocks.a_ff);
        if (impl_->ldlt.info() != Eigen::Success) {
            throw SingularSystem("sparse LDLT factorization failed");
        }
    } else {
        impl_->cg.setTolerance(1e-13);
        impl_->cg.setMaxIterations(20 * static_cast<int>(impl_->blocks.free_dofs.size()) + 100);
        impl_->cg.compute(impl_->blocks.a_ff);
        if (impl_->cg.info() != Eigen::Success) {
            throw SingularSystem("incomplete Cholesky preconditioner failed");
        }
    }
}

EllipticOperator::~EllipticOperator() = default;
EllipticOperator::EllipticOperator(EllipticOperator&&) noexcept = default;
EllipticOperator& EllipticOperator::operator=(EllipticOperator&&) noexcept = default;

ScalarField EllipticOperator::solve(const ScalarField& source, const ScalarField& dirichlet) const {
    const Mesh& mesh = *mesh_;
    const Vector g = boundary_values(mesh, dirichlet);
    const Vector rhs = impl_->blocks.m_f * source.values() - impl_->blocks.a_fb * g;
    const Vector x = impl_->solve_reduced(rhs);
    Vector full(mesh.dof_count());
    const auto boundary = mesh.boundary_dofs();
    for (std::size_t b = 0; b < boundary.size(); ++b) full[boundary[b]] = g[static_cast<Eigen::Index>(b)];
    const auto& free = impl_->blocks.free_dofs;
    for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = x[static_cast<Eigen::Index>(i)];
    return ScalarField(mesh_, std::move(full));
}

ScalarField EllipticOperator::solve_homogeneous(const ScalarField& dirichlet) const {
    return solve(ScalarField::zeros(mesh_), dirichlet);
}

ScalarField EllipticOperator::solve_zero_dirichlet(const ScalarField& source) const {
    return solve(source, ScalarField::zeros(mesh_));
}

Vector EllipticOperator::weak_residual(const ScalarField& u, const ScalarField& source) const {
    const Mesh& mesh = *mesh_;
    const auto& free = impl_->blocks.free_dofs;
    Vector uf(static_cast<Eigen::Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) uf[static_cast<Eigen::Index>(i)] = u[free[i]];
    return impl_->blocks.a_ff * uf + impl_->blocks.a_fb * boundary_values(mesh, u) -
           impl_->blocks.m_f * source.values();
}

SparseMatrix mass_matrix(const MeshPtr& mesh) {
    const Mesh& m = *mesh;
    const LagrangeBasis basis(m.order());
    const TriangleRule& rule = triangle_rule(2 * m.order());
    const Tabulation tab(basis, rule.points);
    const int nb = basis.size();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(m.element_count()) * nb * nb);
    for (int e = 0; e < m.element_count(); ++e) {
        const double det = std::abs(ElementGeometry(m.jacobian(e)).det);
        const auto dofs = m.element_dofs(e);
        for (int i = 0; i < nb; ++i) {
            for (int j = 0; j < nb; ++j) {
                double s = 0.0;
                for (std::size_t q = 0; q < rule.points.size(); ++q) {
                    s += rule.weights[q] * tab.value(q, i) * tab.value(q, j);
                }
                t.emplace_back(dofs[i], dofs[j], s * det);
            }
        }
    }
    SparseMatrix out(m.dof_count(), m.dof_count());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

}  // namespace fumot
