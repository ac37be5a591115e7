#include "bes/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bes/errors.hpp"
#include "bes/rng.hpp"

namespace bes {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

double gershgorin_upper(const std::vector<double> &diag, const std::vector<double> &off) {
    const std::size_t m = diag.size();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        double r = diag[i];
        if (i > 0) r += std::abs(off[i - 1]);
        if (i + 1 < m) r += std::abs(off[i]);
        hi = std::max(hi, r);
    }
    return hi;
}

double gershgorin_lower(const std::vector<double> &diag, const std::vector<double> &off) {
    const std::size_t m = diag.size();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        double r = diag[i];
        if (i > 0) r -= std::abs(off[i - 1]);
        if (i + 1 < m) r -= std::abs(off[i]);
        lo = std::min(lo, r);
    }
    return lo;
}

int sturm_count(const std::vector<double> &diag, const std::vector<double> &off, double x) {
    // LDL^T pivots of A - xI; the number of negative pivots equals the
    // number of eigenvalues below x.
    int count = 0;
    double d = diag[0] - x;
    if (d == 0.0) d = -kTiny;
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        d = (diag[i] - x) - off[i - 1] * off[i - 1] / d;
        if (d == 0.0) d = -kTiny;
        if (d < 0.0) ++count;
    }
    return count;
}

/// k-th smallest eigenvalue (0-based) by bisection.
double bisect_eigenvalue(const std::vector<double> &diag, const std::vector<double> &off,
                         int k) {
    double lo = gershgorin_lower(diag, off);
    double hi = gershgorin_upper(diag, off);
    const double span = std::max(1.0, std::abs(lo) + std::abs(hi));
    lo -= 1e-12 * span;
    hi += 1e-12 * span;
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // interval at rounding resolution
        if (sturm_count(diag, off, mid) >= k + 1)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

// Tridiagonal solve with partial pivoting; the matrix is (diag - sigma) with
// off-diagonals `off`. Factors allow fill one band above.
struct TridiagPlu {
    std::vector<double> du0, du1, du2, dl;
    std::vector<int> pivot;
    bool singular = false;

    void factor(const std::vector<double> &diag, const std::vector<double> &off,
                double sigma) {
        const std::size_t m = diag.size();
        du0.assign(m, 0.0);
        du1.assign(m, 0.0);
        du2.assign(m, 0.0);
        dl.assign(m, 0.0);
        pivot.assign(m, 0);
        singular = false;
        std::vector<double> a(m), b(m > 0 ? m - 1 : 0), c(m > 0 ? m - 1 : 0);
        for (std::size_t i = 0; i < m; ++i) a[i] = diag[i] - sigma;
        for (std::size_t i = 0; i + 1 < m; ++i) b[i] = c[i] = off[i];
        for (std::size_t i = 0; i < m; ++i) {
            du0[i] = a[i];
            du1[i] = (i + 1 < m) ? c[i] : 0.0;
        }
        for (std::size_t i = 0; i + 1 < m; ++i) {
            double sub = b[i];
            if (std::abs(sub) > std::abs(du0[i])) {
                pivot[i] = 1; // swap rows i and i+1
                std::swap(du0[i], sub);
                const double t1 = du1[i];
                du1[i] = du0[i + 1];
                du0[i + 1] = t1;
                du2[i] = du1[i + 1];
                du1[i + 1] = 0.0;
            }
            if (du0[i] == 0.0) {
                singular = true;
                du0[i] = kTiny;
            }
            const double mult = sub / du0[i];
            dl[i] = mult;
            du0[i + 1] -= mult * du1[i];
            du1[i + 1] -= mult * du2[i];
        }
        if (du0[m - 1] == 0.0) {
            singular = true;
            du0[m - 1] = kTiny;
        }
    }

    void solve(std::vector<double> &x) const {
        const std::size_t m = du0.size();
        for (std::size_t i = 0; i + 1 < m; ++i) {
            if (pivot[i]) std::swap(x[i], x[i + 1]);
            x[i + 1] -= dl[i] * x[i];
        }
        for (std::size_t ii = m; ii-- > 0;) {
            double s = x[ii];
            if (ii + 1 < m) s -= du1[ii] * x[ii + 1];
            if (ii + 2 < m) s -= du2[ii] * x[ii + 2];
            x[ii] = s / du0[ii];
        }
    }
};

double max_abs(const std::vector<double> &v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void normalize2(std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (s > 0.0)
        for (double &x : v) x /= s;
}

} // namespace

void tridiag_apply(const std::vector<double> &diag, const std::vector<double> &off,
                   const std::vector<double> &x, std::vector<double> &y) {
    const std::size_t m = diag.size();
    y.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += off[i - 1] * x[i - 1];
        if (i + 1 < m) s += off[i] * x[i + 1];
        y[i] = s;
    }
}

DiscretizedOperator discretize(const WarpedModel &model, double lo, double hi,
                               double h, Bc bc_left, Bc bc_right) {
    if (!(h > 0.0)) throw ValidationError("mesh h must be > 0");
    if (!(lo < hi)) throw ValidationError("interval must satisfy lo < hi");
    if (lo < model.t_lo - 1e-12 || hi > model.t_hi + 1e-12)
        throw ValidationError("interval exceeds the model domain");
    const double len = hi - lo;
    if (h > len) throw ValidationError("mesh h exceeds the interval length");
    const int n_cells = static_cast<int>(std::lround(len / h));
    if (n_cells < 4) throw ValidationError("interval too short for the requested mesh");
    const double h_eff = len / n_cells;

    DiscretizedOperator op;
    op.bc_left = bc_left;
    op.bc_right = bc_right;
    op.h = h_eff;
    op.grid.resize(static_cast<std::size_t>(n_cells) + 1);
    for (int i = 0; i <= n_cells; ++i) op.grid[static_cast<std::size_t>(i)] = lo + h_eff * i;
    op.grid.back() = hi;

    // Log-weights at nodes and faces, shifted so the largest node value is 0.
    std::vector<double> logw_node(op.grid.size());
    std::vector<double> logw_face(static_cast<std::size_t>(n_cells));
    double max_logw = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < op.grid.size(); ++i) {
        logw_node[i] = log_weight_jet(model, op.grid[i]).v;
        max_logw = std::max(max_logw, logw_node[i]);
    }
    for (int i = 0; i < n_cells; ++i)
        logw_face[static_cast<std::size_t>(i)] =
            log_weight_jet(model, lo + h_eff * (i + 0.5)).v;
    for (double &w : logw_node) w -= max_logw;
    for (double &w : logw_face) w -= max_logw;
    op.log_weight = logw_node;

    const int i0 = bc_left == Bc::Dirichlet ? 1 : 0;
    const int i1 = bc_right == Bc::Dirichlet ? n_cells - 1 : n_cells;
    op.first_active = i0;
    const std::size_t m = static_cast<std::size_t>(i1 - i0 + 1);

    // Flux coefficients c_(i+1/2) = w(face)/h^2; lumped mass w_i, halved at a
    // Neumann end (the reflected-ghost row in symmetric form).
    const double inv_h2 = 1.0 / (h_eff * h_eff);
    std::vector<double> face(static_cast<std::size_t>(n_cells));
    for (int i = 0; i < n_cells; ++i)
        face[static_cast<std::size_t>(i)] = std::exp(logw_face[static_cast<std::size_t>(i)]) * inv_h2;

    op.mass.resize(m);
    op.diag.assign(m, 0.0);
    op.offdiag.assign(m > 0 ? m - 1 : 0, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        const int i = i0 + static_cast<int>(a);
        double mass = std::exp(logw_node[static_cast<std::size_t>(i)]);
        if ((i == 0 && bc_left == Bc::Neumann) || (i == n_cells && bc_right == Bc::Neumann))
            mass *= 0.5;
        if (!(mass > 0.0)) throw NumericError("vanishing weight in discretization");
        op.mass[a] = mass;
        double d = 0.0;
        if (i > 0) d += face[static_cast<std::size_t>(i - 1)];
        if (i < n_cells) d += face[static_cast<std::size_t>(i)];
        op.diag[a] = d / mass;
    }
    for (std::size_t a = 0; a + 1 < m; ++a) {
        const int i = i0 + static_cast<int>(a);
        op.offdiag[a] = -face[static_cast<std::size_t>(i)] / std::sqrt(op.mass[a] * op.mass[a + 1]);
    }
    return op;
}

int eigenvalue_count_below(const DiscretizedOperator &op, double x) {
    return sturm_count(op.diag, op.offdiag, x);
}

std::vector<EigenResult> smallest_eigenpair(const DiscretizedOperator &op, int count) {
    if (count < 1) throw ValidationError("eigenpair count must be >= 1");
    const std::size_t m = op.diag.size();
    if (m < 3) throw ValidationError("operator too small");
    if (static_cast<std::size_t>(count) > m)
        throw ValidationError("more eigenpairs requested than matrix dimension");

    const double scale = std::max(1.0, std::abs(gershgorin_upper(op.diag, op.offdiag)));
    std::vector<EigenResult> results;
    std::vector<std::vector<double>> found_vectors;

    for (int k = 0; k < count; ++k) {
        double lambda = bisect_eigenvalue(op.diag, op.offdiag, k);
        // The form is positive semidefinite; snap rounding-level negatives.
        if (lambda < 0.0 && lambda > -1e3 * std::numeric_limits<double>::epsilon() * scale)
            lambda = 0.0;
        if (lambda < 0.0)
            throw NumericError("negative eigenvalue from a semidefinite form: " +
                               std::to_string(lambda));

        // Inverse iteration with a deterministic start and re-orthogonalization
        // against previously found vectors.
        std::vector<double> v(m), av(m);
        CounterRng rng(0x0be5u, static_cast<std::uint64_t>(k));
        for (std::size_t i = 0; i < m; ++i) v[i] = rng.next_double() - 0.5;
        normalize2(v);

        double best_res = std::numeric_limits<double>::infinity();
        std::vector<double> best_v;
        bool converged = false;
        for (int attempt = 0; attempt < 4 && !converged; ++attempt) {
            const double shift =
                lambda + attempt * 1e-10 * scale + 1e-14 * scale;
            TridiagPlu plu;
            plu.factor(op.diag, op.offdiag, shift);
            for (int it = 0; it < 5; ++it) {
                plu.solve(v);
                for (const auto &prev : found_vectors) {
                    double dot = 0.0;
                    for (std::size_t i = 0; i < m; ++i) dot += v[i] * prev[i];
                    for (std::size_t i = 0; i < m; ++i) v[i] -= dot * prev[i];
                }
                normalize2(v);
                tridiag_apply(op.diag, op.offdiag, v, av);
                double res = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    res = std::max(res, std::abs(av[i] - lambda * v[i]));
                if (res < best_res) {
                    best_res = res;
                    best_v = v;
                }
                if (res <= 20.0 * std::numeric_limits<double>::epsilon() * scale) {
                    converged = true;
                    break;
                }
            }
            if (!converged) {
                // perturbed restart (clustered eigenvalues)
                CounterRng rng2(0x0be5u, 100u + static_cast<std::uint64_t>(10 * k + attempt));
                for (std::size_t i = 0; i < m; ++i) v[i] = rng2.next_double() - 0.5;
                normalize2(v);
            }
        }
        if (!converged && best_res > 1e-8 * scale)
            throw NumericError("inverse iteration failed to converge (clustered eigenvalues?)");
        v = best_v;
        found_vectors.push_back(v);

        EigenResult r;
        r.lambda = lambda;
        r.grid = op.grid;
        r.bc_left = op.bc_left;
        r.bc_right = op.bc_right;
        r.h = op.h;
        r.residual_sup = best_res / std::max(kTiny, max_abs(v));

        // Entries below the attainable eigenvector accuracy carry no sign
        // information. Perturbation theory bounds the error by the residual
        // over the spectral gap, so probe the neighboring eigenvalues.
        tridiag_apply(op.diag, op.offdiag, v, av);
        double res2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = av[i] - lambda * v[i];
            res2 += d * d;
        }
        res2 = std::sqrt(res2);
        double gap = std::numeric_limits<double>::infinity();
        if (k > 0) gap = std::min(gap, lambda - results.back().lambda);
        if (static_cast<std::size_t>(k) + 1 < m)
            gap = std::min(gap, bisect_eigenvalue(op.diag, op.offdiag, k + 1) - lambda);
        gap = std::max(gap, 1e3 * std::numeric_limits<double>::epsilon() * scale);
        const double floor =
            std::min(0.5, std::max(1e3 * std::numeric_limits<double>::epsilon(),
                                   200.0 * res2 / gap));
        r.trust_floor = floor;

        // Back-transform f_i = v_i / sqrt(mass_i) onto the full grid.
        r.eigenfunction.assign(op.grid.size(), 0.0);
        r.trusted.assign(op.grid.size(), false);
        int sign_ref_idx = -1;
        double f_peak = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            const std::size_t g = static_cast<std::size_t>(op.first_active) + a;
            const double f = v[a] / std::sqrt(op.mass[a]);
            r.eigenfunction[g] = f;
            if (std::abs(v[a]) >= floor) {
                r.trusted[g] = true;
                if (std::abs(f) > std::abs(f_peak)) {
                    f_peak = f;
                    sign_ref_idx = static_cast<int>(g);
                }
            }
        }
        if (sign_ref_idx >= 0 && f_peak != 0.0) {
            const double s = (f_peak > 0.0 ? 1.0 : -1.0) / std::abs(f_peak);
            for (std::size_t g = 0; g < r.eigenfunction.size(); ++g) r.eigenfunction[g] *= s;
        }
        results.push_back(std::move(r));
    }
    return results;
}

ConvergenceTable domain_sweep(const WarpedModel &model,
                              const std::vector<double> &t_list, double h,
                              Bc bc_left, Bc bc_right, SweepAnchor anchor,
                              int eigen_index, std::optional<double> lambda_inf_guess) {
    if (t_list.empty()) throw ValidationError("empty T list");
    for (std::size_t i = 1; i < t_list.size(); ++i)
        if (!(t_list[i] > t_list[i - 1]))
            throw ValidationError("T list must be strictly increasing");

    const double center = 0.5 * (model.t_lo + model.t_hi);
    auto interval = [&](double T) {
        switch (anchor) {
            case SweepAnchor::Center: return std::pair<double, double>{center - T, center + T};
            case SweepAnchor::CenterRight: return std::pair<double, double>{center, center + T};
            case SweepAnchor::LeftEdge: break;
        }
        return std::pair<double, double>{model.t_lo, model.t_lo + T};
    };
    auto solve_one = [&](double T, double mesh) {
        const auto [lo, hi] = interval(T);
        const DiscretizedOperator op = discretize(model, lo, hi, mesh, bc_left, bc_right);
        const auto pairs = smallest_eigenpair(op, eigen_index + 1);
        return pairs[static_cast<std::size_t>(eigen_index)].lambda;
    };

    ConvergenceTable table;
    for (double T : t_list) table.rows.push_back({T, h, solve_one(T, h)});

    // Mesh Richardson (second-order scheme) at the largest T, and at the
    // previous T when a domain correction is possible.
    const double t_last = t_list.back();
    const double rich_last =
        (4.0 * solve_one(t_last, h / 2.0) - table.rows.back().lambda) / 3.0;
    table.extrapolated_h = rich_last;
    table.extrapolated = rich_last;
    if (t_list.size() >= 2) {
        const double t_prev = t_list[t_list.size() - 2];
        const double rich_prev =
            (4.0 * solve_one(t_prev, h / 2.0) - table.rows[t_list.size() - 2].lambda) / 3.0;
        // One Richardson level in the domain parameter: model the truncation
        // bias as c/T^2 (nested Dirichlet domains shrink monotonically).
        if (rich_prev > rich_last) {
            const double r2 = (t_last / t_prev) * (t_last / t_prev);
            table.extrapolated = rich_last - (rich_prev - rich_last) / (r2 - 1.0);
        }
    }

    if (lambda_inf_guess) {
        // Least-squares slope of log(lambda(T) - guess) against log T.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (const auto &row : table.rows) {
            const double gap = row.lambda - *lambda_inf_guess;
            if (gap <= 0.0) continue;
            const double x = std::log(row.half_width), y = std::log(gap);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++cnt;
        }
        if (cnt >= 2 && sxx * cnt - sx * sx > 0.0)
            table.fitted_rate = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    }
    return table;
}

double residual_of_closed_form(const WarpedModel &model, const ExprAst &f,
                               double lambda, double lo, double hi, int samples,
                               DerivMode mode) {
    if (samples < 5) throw ValidationError("residual grid needs at least 5 samples");
    const Params p = bound_params(model);
    const std::vector<double> grid = uniform_grid(lo, hi, samples);
    const double h = grid[1] - grid[0];

    std::vector<double> fv(grid.size());
    double fmax = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fv[i] = eval_value(f, grid[i], p);
        fmax = std::max(fmax, std::abs(fv[i]));
    }
    if (fmax == 0.0) throw ValidationError("candidate eigenfunction vanishes identically");

    double sup = 0.0;
    if (mode == DerivMode::Ad) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Jet2 jf = eval_d2(f, grid[i], p);
            const double b = log_weight_jet(model, grid[i]).d1;
            sup = std::max(sup, std::abs(jf.d2 + b * jf.d1 + lambda * jf.v));
        }
    } else {
        for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
            const double d1 = (fv[i + 1] - fv[i - 1]) / (2.0 * h);
            const double d2 = (fv[i + 1] - 2.0 * fv[i] + fv[i - 1]) / (h * h);
            const double b = log_weight_jet(model, grid[i]).d1;
            sup = std::max(sup, std::abs(d2 + b * d1 + lambda * fv[i]));
        }
    }
    return sup / fmax;
}

} // namespace bes
