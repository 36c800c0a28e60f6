#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fumot/mesh.hpp"

namespace fumot {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// ---------------------------------------------------------------------------
// Reference-element machinery

/// Symmetric Gaussian rule on the reference triangle (weights sum to 1/2).
struct TriangleRule {
    int degree = 0;
    std::vector<Point> points;
    std::vector<double> weights;
};

/// Smallest tabulated rule exact for polynomials of the requested degree
/// (tabulated up to degree 8; higher requests get the degree-8 rule).
const TriangleRule& triangle_rule(int degree);

/// Degree-k Lagrange basis on equispaced nodes of the reference triangle.
/// Node (a, b), enumerated with b outer and a inner, sits at (a/k, b/k).
class LagrangeBasis {
public:
    explicit LagrangeBasis(int order);

    int order() const noexcept { return order_; }
    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    std::span<const Point> nodes() const noexcept { return nodes_; }

    void values(Point ref, std::span<double> out) const;
    /// Reference gradients, interleaved (d/dxi, d/deta) per basis function.
    void gradients(Point ref, std::span<double> out) const;

private:
    int order_;
    std::vector<Point> nodes_;
    std::vector<std::array<int, 3>> multi_;
};

// ---------------------------------------------------------------------------
// Fields

/// Function on the domain stored as Lagrange coefficients over the mesh DOFs.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(MeshPtr mesh, Vector values);

    static ScalarField constant(MeshPtr mesh, double value);
    static ScalarField zeros(MeshPtr mesh) { return constant(std::move(mesh), 0.0); }
    static ScalarField interpolate(MeshPtr mesh, const std::function<double(double, double)>& fn);

    const MeshPtr& mesh() const noexcept { return mesh_; }
    const Vector& values() const noexcept { return values_; }
    Vector& values() noexcept { return values_; }
    int size() const noexcept { return static_cast<int>(values_.size()); }
    double operator[](int dof) const { return values_[dof]; }

    /// Evaluation at an arbitrary point of the domain.
    double at(Point p) const;
    double at(const ElementPoint& loc) const;
    /// Exact gradient of the piecewise polynomial inside element e.
    Vec2 gradient_at(int element, Point ref) const;

    double min() const { return values_.minCoeff(); }
    double max() const { return values_.maxCoeff(); }

    ScalarField map(const std::function<double(double)>& fn) const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
    /// Nodal (pointwise) product.
    friend ScalarField operator*(const ScalarField& a, const ScalarField& b);

private:
    void check_same_mesh(const ScalarField& o) const;

    MeshPtr mesh_;
    Vector values_;
};

/// Nodal gradient recovered by averaging element gradients over the
/// elements sharing each DOF, weighted by element area.
struct GradientField {
    ScalarField dx;
    ScalarField dy;
};

GradientField recover_gradient(const ScalarField& field);

/// Samples `field` at the DOF points of `target`.
ScalarField transfer(const ScalarField& field, const MeshPtr& target);

/// Lagrange interpolant of a nodal quantity computed from other fields.
ScalarField nodal(const MeshPtr& mesh, int count, const std::function<double(int)>& fn);

// ---------------------------------------------------------------------------
// Integration and norms

struct FieldNorms {
    double l1 = 0.0;
    double l2 = 0.0;
    double h1_seminorm = 0.0;
    double linf = 0.0;  ///< max over DOF nodes
};

FieldNorms norms(const ScalarField& field);
double l2_norm(const ScalarField& field);
double h1_norm(const ScalarField& field);

/// Integral of the field over the domain.
double integrate(const ScalarField& field);
/// Integral of `weight(x, y) * field(x, y)`.
double integrate(const ScalarField& field, const std::function<double(double, double)>& weight);
/// L2 error against a closed-form function.
double l2_error(const ScalarField& field, const std::function<double(double, double)>& exact);

// ---------------------------------------------------------------------------
// Reaction-diffusion operators

/// Stand-alone linear system for -div(a grad u) + r u = f, u = g on the
/// boundary, restricted to the free (interior) DOFs.
struct LinearSystem {
    MeshPtr mesh;
    SparseMatrix matrix;               ///< reduced, interior x interior
    Vector rhs;                        ///< reduced right-hand side
    std::vector<int> free_dofs;        ///< reduced index -> global DOF
    Vector prescribed;                 ///< full-length vector holding Dirichlet values
    bool reaction_nonnegative = true;  ///< false flags a possibly indefinite system
};

LinearSystem assemble(const ScalarField& diffusion, const ScalarField& reaction,
                      const ScalarField& source, const ScalarField& dirichlet);

/// Solves the reduced system and scatters the result together with the
/// Dirichlet values.
ScalarField solve(const LinearSystem& system);

enum class LinearSolverKind { Direct, ConjugateGradient };

/// -div(a grad .) + r with Dirichlet conditions, factorized once and reused
/// for any number of sources and boundary data.
///
/// Sources are nodal fields; their load vector is M f with the consistent
/// mass matrix, i.e. the source enters through its Lagrange interpolant.
class EllipticOperator {
public:
    EllipticOperator(const ScalarField& diffusion, const ScalarField& reaction,
                     LinearSolverKind kind = LinearSolverKind::Direct);
    ~EllipticOperator();
    EllipticOperator(EllipticOperator&&) noexcept;
    EllipticOperator& operator=(EllipticOperator&&) noexcept;

    const MeshPtr& mesh() const noexcept { return mesh_; }

    /// Boundary values are read from `dirichlet` at the boundary DOFs.
    ScalarField solve(const ScalarField& source, const ScalarField& dirichlet) const;
    /// Zero source.
    ScalarField solve_homogeneous(const ScalarField& dirichlet) const;
    /// Zero boundary values.
    ScalarField solve_zero_dirichlet(const ScalarField& source) const;

    /// Weak residual a(u, phi_i) + (r u, phi_i) - (f, phi_i) for every free DOF.
    Vector weak_residual(const ScalarField& u, const ScalarField& source) const;

private:
    struct Impl;
    MeshPtr mesh_;
    std::unique_ptr<Impl> impl_;
};

/// Consistent mass matrix of the mesh's Lagrange space.
SparseMatrix mass_matrix(const MeshPtr& mesh);

}  // namespace fumot
