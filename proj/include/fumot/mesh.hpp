#pragma once

#include <array>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

namespace fumot {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Location of a physical point: the containing element and its reference
/// coordinates (xi, eta) on the unit triangle (0,0), (1,0), (0,1).
struct ElementPoint {
    int element = -1;
    Point ref;
};

/// Conforming triangulation of the square [-L, L]^2 together with the global
/// degree-of-freedom layout of a degree-k Lagrange space on it.
///
/// The triangulation splits each cell of an n x n grid along the diagonal
/// from its lower-left to its upper-right corner. Lagrange nodes of every
/// element then coincide with the points of the uniform (nk+1) x (nk+1)
/// lattice, so global DOF (i, j) sits at (-L + i h/k, -L + j h/k) and is
/// numbered j * (nk+1) + i.
class Mesh {
public:
    /// Throws ConfigError unless n >= 2, 1 <= k <= 4 and half_width > 0.
    static std::shared_ptr<const Mesh> structured(double half_width, int n, int order);

    double half_width() const noexcept { return half_width_; }
    int subdivisions() const noexcept { return n_; }
    int order() const noexcept { return order_; }
    /// Grid spacing 2L/n.
    double cell_size() const noexcept { return 2.0 * half_width_ / n_; }
    double area() const noexcept { return 4.0 * half_width_ * half_width_; }

    std::span<const Point> vertices() const noexcept { return vertices_; }
    std::span<const std::array<int, 3>> triangles() const noexcept { return triangles_; }
    std::span<const std::array<int, 2>> boundary_edges() const noexcept { return boundary_edges_; }

    int element_count() const noexcept { return static_cast<int>(triangles_.size()); }
    int dof_count() const noexcept { return static_cast<int>(dofs_.size()); }
    int nodes_per_element() const noexcept { return (order_ + 1) * (order_ + 2) / 2; }
    /// DOFs per lattice row, nk + 1.
    int lattice_size() const noexcept { return n_ * order_ + 1; }

    std::span<const Point> dof_points() const noexcept { return dofs_; }
    std::span<const int> element_dofs(int e) const noexcept {
        return {element_dofs_.data() + static_cast<std::size_t>(e) * nodes_per_element(),
                static_cast<std::size_t>(nodes_per_element())};
    }
    bool is_boundary_dof(int dof) const noexcept { return boundary_flags_[dof] != 0; }
    std::span<const int> boundary_dofs() const noexcept { return boundary_dofs_; }
    std::span<const int> interior_dofs() const noexcept { return interior_dofs_; }

    /// Signed area of element e (positive for every element of a valid mesh).
    double signed_area(int e) const noexcept;
    /// Columns are the edge vectors v1 - v0 and v2 - v0.
    std::array<double, 4> jacobian(int e) const noexcept;
    Point to_physical(int e, Point ref) const noexcept;

    /// Points outside the square are clamped onto it.
    ElementPoint locate(Point p) const noexcept;

    /// Vertex table (`x,y`) followed by connectivity (`v0,v1,v2`), both CSV.
    void write_vertices_csv(std::ostream& os) const;
    void write_connectivity_csv(std::ostream& os) const;

    bool same_layout(const Mesh& other) const noexcept {
        return half_width_ == other.half_width_ && n_ == other.n_ && order_ == other.order_;
    }

private:
    Mesh() = default;

    double half_width_ = 0.5;
    int n_ = 0;
    int order_ = 1;
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<std::array<int, 2>> boundary_edges_;
    std::vector<Point> dofs_;
    std::vector<int> element_dofs_;
    std::vector<unsigned char> boundary_flags_;
    std::vector<int> boundary_dofs_;
    std::vector<int> interior_dofs_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

}  // namespace fumot
