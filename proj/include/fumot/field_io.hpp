#pragma once

#include <filesystem>
#include <string>

#include "fumot/fem.hpp"
#include "fumot/inverse_eta.hpp"
#include "fumot/inverse_sigma.hpp"

namespace fumot {

/// 17 significant digits, locale independent.
std::string format_double(double value);

/// Samples the field on a uniform grid x grid lattice covering the mesh's
/// square and writes `x,y,value` rows, x varying fastest.
void write_field_csv(const ScalarField& field, int grid, const std::filesystem::path& path);

/// Columns n, r, psi_min, psi_max, kappa, nu, monotonicity_excess.
void write_psi_trace_csv(const IterationTrace& trace, const std::filesystem::path& path);

/// Columns iteration, residual_estimate.
void write_krylov_trace_csv(const KrylovTrace& trace, const std::filesystem::path& path);

}  // namespace fumot
