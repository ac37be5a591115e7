#pragma once

#include <optional>
#include <vector>

#include "bes/geometry.hpp"

namespace bes {

enum class Bc { Dirichlet, Neumann };

enum class DerivMode { Ad, Fd };

// Second-order discretization of -(w f')'/w on a uniform grid, stored in the
// coordinates v = sqrt(m) f in which the matrix is symmetric tridiagonal by
// construction. Weights are handled in log space with a global additive
// offset (the eigenproblem is scale-invariant in w), so Gaussian-type
// weights stay representable on wide intervals.
struct DiscretizedOperator {
    std::vector<double> grid;       // nodes t_0..t_N
    std::vector<double> log_weight; // ln w at the nodes, shifted so max = 0
    std::vector<double> diag;       // symmetric tridiagonal, dimension = #active nodes
    std::vector<double> offdiag;    // size diag.size()-1
    std::vector<double> mass;       // lumped masses of the active nodes
    int first_active = 0;           // first grid node carrying an unknown
    Bc bc_left = Bc::Dirichlet;
    Bc bc_right = Bc::Dirichlet;
    double h = 0.0;
};

DiscretizedOperator discretize(const WarpedModel &model, double lo, double hi,
                               double h, Bc bc_left, Bc bc_right);

struct EigenResult {
    double lambda = 0.0;
    std::vector<double> eigenfunction; // f on the full grid (0 at Dirichlet ends)
    std::vector<double> grid;
    Bc bc_left = Bc::Dirichlet;
    Bc bc_right = Bc::Dirichlet;
    double residual_sup = 0.0;         // max|Av - lambda v| / max|v|, symmetric coords
    double h = 0.0;
    // Entries of the unit-norm symmetric-coordinate eigenvector below this
    // absolute threshold sit under the attainable accuracy (residual over
    // spectral gap); the back-transformed samples there carry no sign
    // information and consumers must not read signs from them.
    double trust_floor = 1e-12;
    std::vector<bool> trusted;         // per-node flag derived from trust_floor
};

/// Smallest `count` eigenpairs: eigenvalues by Sturm-sequence bisection on
/// the symmetric tridiagonal matrix, eigenvectors by inverse iteration with
/// re-orthogonalization. Deterministic: identical inputs give bit-identical
/// results.
std::vector<EigenResult> smallest_eigenpair(const DiscretizedOperator &op, int count = 1);

/// Number of eigenvalues strictly below x (Sturm count).
int eigenvalue_count_below(const DiscretizedOperator &op, double x);

enum class SweepAnchor { Center, LeftEdge, CenterRight };

struct SweepRow {
    double half_width; // T
    double h;
    double lambda;
};

struct ConvergenceTable {
    std::vector<SweepRow> rows;
    double extrapolated = 0.0;   // mesh-Richardson at the largest T, then a
                                 // 1/T^2 domain correction from the last two T
    double extrapolated_h = 0.0; // mesh-Richardson only
    std::optional<double> fitted_rate; // slope of log(lambda(T)-guess) vs log T
};

/// Solve on a nested family of truncations of width 2T (Center anchor) or
/// [lo, lo+T] (LeftEdge anchor) and extrapolate the truncation bias away.
ConvergenceTable domain_sweep(const WarpedModel &model,
                              const std::vector<double> &t_list, double h,
                              Bc bc_left, Bc bc_right,
                              SweepAnchor anchor = SweepAnchor::Center,
                              int eigen_index = 0,
                              std::optional<double> lambda_inf_guess = std::nullopt);

/// Sup over the grid of |f'' + b f' + lambda f| / max|f| for a closed-form
/// candidate eigenfunction. Ad mode differentiates exactly; Fd mode uses
/// central differences on the sampled values (O(h^2), useful to validate the
/// discretization itself).
double residual_of_closed_form(const WarpedModel &model, const ExprAst &f,
                               double lambda, double lo, double hi, int samples,
                               DerivMode mode);

/// Apply the symmetric tridiagonal matrix: y = A x.
void tridiag_apply(const std::vector<double> &diag, const std::vector<double> &off,
                   const std::vector<double> &x, std::vector<double> &y);

} // namespace bes
