#include "fumot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>

#include "fumot/error.hpp"

namespace fumot {

std::shared_ptr<const Mesh> Mesh::structured(double half_width, int n, int order) {
    if (n < 2) {
        throw ConfigError("mesh: subdivision count must be >= 2, got " + std::to_string(n));
    }
    if (order < 1 || order > 4) {
        throw ConfigError("mesh: element order must lie in [1, 4], got " + std::to_string(order));
    }
    if (!(half_width > 0.0)) {
        throw ConfigError("mesh: half width must be positive");
    }

    std::shared_ptr<Mesh> mesh(new Mesh());
    mesh->half_width_ = half_width;
    mesh->n_ = n;
    mesh->order_ = order;

    const double h = 2.0 * half_width / n;
    const int nv = n + 1;
    mesh->vertices_.reserve(static_cast<std::size_t>(nv) * nv);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            mesh->vertices_.push_back({-half_width + i * h, -half_width + j * h});
        }
    }
    auto vid = [nv](int i, int j) { return j * nv + i; };

    mesh->triangles_.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            mesh->triangles_.push_back({v00, v10, v11});
            mesh->triangles_.push_back({v00, v11, v01});
        }
    }

    for (int i = 0; i < n; ++i) mesh->boundary_edges_.push_back({vid(i, 0), vid(i + 1, 0)});
    for (int j = 0; j < n; ++j) mesh->boundary_edges_.push_back({vid(n, j), vid(n, j + 1)});
    for (int i = n; i > 0; --i) mesh->boundary_edges_.push_back({vid(i, n), vid(i - 1, n)});
    for (int j = n; j > 0; --j) mesh->boundary_edges_.push_back({vid(0, j), vid(0, j - 1)});

    // DOF lattice with spacing h / k.
    const int m = n * order + 1;
    const double hk = h / order;
    mesh->dofs_.reserve(static_cast<std::size_t>(m) * m);
    mesh->boundary_flags_.assign(static_cast<std::size_t>(m) * m, 0);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            // Snap the last lattice line exactly onto the boundary.
            const double x = (i == m - 1) ? half_width : -half_width + i * hk;
            const double y = (j == m - 1) ? half_width : -half_width + j * hk;
            mesh->dofs_.push_back({x, y});
            const bool on_boundary = i == 0 || j == 0 || i == m - 1 || j == m - 1;
            const int id = j * m + i;
            if (on_boundary) {
                mesh->boundary_flags_[id] = 1;
                mesh->boundary_dofs_.push_back(id);
            } else {
                mesh->interior_dofs_.push_back(id);
            }
        }
    }

    // Local node (a, b) of an element sits at reference point (a/k, b/k).
    const int npe = mesh->nodes_per_element();
    mesh->element_dofs_.reserve(mesh->triangles_.size() * npe);
    for (const auto& tri : mesh->triangles_) {
        std::array<int, 3> li{}, lj{};
        for (int c = 0; c < 3; ++c) {
            li[c] = (tri[c] % nv) * order;
            lj[c] = (tri[c] / nv) * order;
        }
        for (int b = 0; b <= order; ++b) {
            for (int a = 0; a + b <= order; ++a) {
                const int gi = (li[0] * order + a * (li[1] - li[0]) + b * (li[2] - li[0])) / order;
                const int gj = (lj[0] * order + a * (lj[1] - lj[0]) + b * (lj[2] - lj[0])) / order;
                mesh->element_dofs_.push_back(gj * m + gi);
            }
        }
    }
    return mesh;
}

std::array<double, 4> Mesh::jacobian(int e) const noexcept {
    const auto& t = triangles_[e];
    const Point& p0 = vertices_[t[0]];
    const Point& p1 = vertices_[t[1]];
    const Point& p2 = vertices_[t[2]];
    // Row-major [[dx/dxi, dx/deta], [dy/dxi, dy/deta]].
    return {p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y};
}

double Mesh::signed_area(int e) const noexcept {
    const auto j = jacobian(e);
    return 0.5 * (j[0] * j[3] - j[1] * j[2]);
}

Point Mesh::to_physical(int e, Point ref) const noexcept {
    const auto j = jacobian(e);
    const Point& p0 = vertices_[triangles_[e][0]];
    return {p0.x + j[0] * ref.x + j[1] * ref.y, p0.y + j[2] * ref.x + j[3] * ref.y};
}

ElementPoint Mesh::locate(Point p) const noexcept {
    const double h = cell_size();
    const double sx = std::clamp((p.x + half_width_) / h, 0.0, static_cast<double>(n_));
    const double sy = std::clamp((p.y + half_width_) / h, 0.0, static_cast<double>(n_));
    const int i = std::min(static_cast<int>(std::floor(sx)), n_ - 1);
    const int j = std::min(static_cast<int>(std::floor(sy)), n_ - 1);
    const double s = sx - i;
    const double t = sy - j;
    const int cell = j * n_ + i;
    if (t <= s) {
        // Lower triangle (v00, v10, v11): s = xi + eta, t = eta.
        return {2 * cell, {s - t, t}};
    }
    // Upper triangle (v00, v11, v01): s = xi, t = xi + eta.
    return {2 * cell + 1, {s, t - s}};
}

void Mesh::write_vertices_csv(std::ostream& os) const {
    os << "x,y\n" << std::setprecision(17);
    for (const auto& v : vertices_) os << v.x << ',' << v.y << '\n';
}

void Mesh::write_connectivity_csv(std::ostream& os) const {
    os << "v0,v1,v2\n";
    for (const auto& t : triangles_) os << t[0] << ',' << t[1] << ',' << t[2] << '\n';
}

}  // namespace fumot
