#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "fumot/fem.hpp"

namespace fumot::testing {

using Fn = std::function<double(double, double)>;

/// Uniform-grid finite-difference solution of -div(d grad u) + r u = f on
/// [-L, L]^2 with u = g on the boundary. Conservative five-point stencil with
/// d sampled at cell-edge midpoints. Returns the (N+1)^2 nodal values,
/// numbered j * (N+1) + i.
struct FdGrid {
    double L;
    int N;
    Eigen::VectorXd u;

    double h() const { return 2.0 * L / N; }
    double x(int i) const { return -L + i * h(); }
    double at(int i, int j) const { return u[j * (N + 1) + i]; }
};

inline FdGrid fd_solve(double L, int N, const Fn& d, const Fn& r,
                       const std::function<double(int, int)>& f, const Fn& g) {
    FdGrid grid{L, N, Eigen::VectorXd::Zero((N + 1) * (N + 1))};
    const double h = grid.h();
    const int m = N - 1;
    auto idx = [m](int i, int j) { return (j - 1) * m + (i - 1); };
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m * m);
    for (int j = 0; j <= N; ++j) {
        for (int i = 0; i <= N; ++i) {
            if (i == 0 || j == 0 || i == N || j == N) grid.u[j * (N + 1) + i] = g(grid.x(i), grid.x(j));
        }
    }
    for (int j = 1; j < N; ++j) {
        for (int i = 1; i < N; ++i) {
            const double x = grid.x(i), y = grid.x(j);
            const double de = d(x + 0.5 * h, y), dw = d(x - 0.5 * h, y);
            const double dn = d(x, y + 0.5 * h), ds = d(x, y - 0.5 * h);
            const int row = idx(i, j);
            trip.emplace_back(row, row, (de + dw + dn + ds) / (h * h) + r(x, y));
            rhs[row] += f(i, j);
            const int ni[4] = {i + 1, i - 1, i, i};
            const int nj[4] = {j, j, j + 1, j - 1};
            const double coef[4] = {de, dw, dn, ds};
            for (int q = 0; q < 4; ++q) {
                const double c = -coef[q] / (h * h);
                if (ni[q] == 0 || nj[q] == 0 || ni[q] == N || nj[q] == N) {
                    rhs[row] -= c * grid.u[nj[q] * (N + 1) + ni[q]];
                } else {
                    trip.emplace_back(row, idx(ni[q], nj[q]), c);
                }
            }
        }
    }
    Eigen::SparseMatrix<double> A(m * m, m * m);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("oracle factorization failed");
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    for (int j = 1; j < N; ++j) {
        for (int i = 1; i < N; ++i) grid.u[j * (N + 1) + i] = sol[idx(i, j)];
    }
    return grid;
}

/// Discrete relative L2 difference between a FEM field and grid values over
/// the FEM lattice; the grid must refine the lattice by an integer factor.
inline double lattice_rel_l2(const ScalarField& field, const std::function<double(int, int)>& grid_value,
                             int grid_intervals) {
    const int lat = field.mesh()->lattice_size();
    const int stride = grid_intervals / (lat - 1);
    if (stride * (lat - 1) != grid_intervals) throw std::runtime_error("grid does not refine lattice");
    double num = 0.0, den = 0.0;
    for (int j = 0; j < lat; ++j) {
        for (int i = 0; i < lat; ++i) {
            const double ref = grid_value(i * stride, j * stride);
            const double diff = field[j * lat + i] - ref;
            num += diff * diff;
            den += ref * ref;
        }
    }
    return std::sqrt(num / den);
}

inline double rel_diff(const Vector& a, const Vector& b) {
    const double den = b.norm();
    return den > 0.0 ? (a - b).norm() / den : (a - b).norm();
}

}  // namespace fumot::testing
