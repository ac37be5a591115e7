#pragma once

#include <string>
#include <vector>

#include "bes/solver.hpp"

namespace bes {

struct IdentityAudit {
    std::string name;
    double residual_sup = 0.0;
    bool exact_path = true; // derivatives exact vs grid differencing
    double tolerance = 1e-10;
    bool pass = false;
};

/// Flat Gaussian model with potential rho*r^2/2 (Ricci flat, Hessian rho*g):
/// audits the trace identity R + (Delta phi) = n rho, the normalization
/// |grad phi|^2 = -R + 2 rho phi, and the shifted-potential eigen identity
/// whose eigenvalue 2 rho matches the trace bound with equality.
std::vector<IdentityAudit> gaussian_shrinker_audit(int n, double rho, double r_lo,
                                                   double r_hi, int samples);

struct OuSpectrumReport {
    int n = 1;
    double rho = 1.0;
    double lambda1 = 0.0;          // domain-extrapolated first odd eigenvalue
    double lambda2 = 0.0;          // second odd eigenvalue (diagnostic)
    double classical_value = 0.0;  // rho, attained by the linear eigenfunction
    double trace_bound = 0.0;      // 2 rho
    double closed_form_residual = 0.0; // residual of f = t at lambda = rho
    bool pass = false;
    ConvergenceTable table;
};

/// Linear-drift Gaussian spectrum: solves f'' - rho t f' in the odd sector
/// and compares the first nontrivial eigenvalue against rho and 2 rho.
OuSpectrumReport ou_spectrum_check(int n, double rho);

struct SteadyLinearReport {
    int n = 1;
    double a = 0.0;
    double extrapolated_lambda = 0.0;
    double bound = 0.0;            // a^2/4
    double norm_residual = 0.0;    // R + |grad phi|^2 - a^2, evaluated exactly
    bool pass = false;
    ConvergenceTable table;
};

/// Flat model with linear potential a*t: audits the steady normalization and
/// drives the spectrum bottom to the a^2/4 bound by domain exhaustion.
SteadyLinearReport steady_linear_audit(int n, double a_const);

struct ExpandingGradientReport {
    int n = 2;
    double rho = -1.0;
    double c_lb = 0.0;
    double theta_sq = 0.0;  // gradient bound -n rho + 2 c rho
    double theta = 0.0;
    double eigen_bound = 0.0; // optimized bound from K = -rho/(n-1); NaN for n < 2
    bool chain_ok = false;    // scalar inequality chain verified on samples
    bool pass = false;
};

/// Expanding-case arithmetic: bound chain on sampled (R, phi) data plus the
/// implied gradient constant and the resulting eigenvalue bound.
ExpandingGradientReport expanding_gradient_audit(int n, double rho, double c_lb);

} // namespace bes
