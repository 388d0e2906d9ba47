#pragma once

// Tube factor, perturbed-simplex volume infimum V_L, the gap bound and the
// constructive solver for k(eta, n).
//
// V_L is estimated numerically: multistart Nelder-Mead over the vertex
// perturbations, plus a coarse grid over symmetric radial perturbations as an
// independent second estimate. Certificates are therefore numerical, modulo
// global optimality of the V_L minimizer.

#include "hypvol/hypgeom.hpp"
#include "hypvol/rng.hpp"
#include "hypvol/volume.hpp"

#include <cstdint>
#include <vector>

namespace hypvol {

/// g(t) = 2 * int_0^t cosh^{n-1}(s) ds.
double tube_factor(int n, double t);

struct VLOptions {
    int restarts = 8;
    std::uint64_t seed = kDefaultSeed;
    /// Simplex-size stopping tolerance of the local minimizer.
    double optimizer_tol = 1e-7;
    int max_iterations = 20000;
    /// Points per axis of the symmetric radial oracle grid.
    int oracle_points = 81;
    /// Re-evaluate the winner by Klein quadrature (n = 2, 3).
    bool quadrature_check = true;
    /// Objective quadrature for n >= 4.
    QuadratureSpec quadrature{1e-7, 20000, 5};
};

struct VLEstimate {
    int n = 0;
    double L = 0.0;
    double value = 0.0;
    int restarts = 0;
    std::uint64_t seed = 0;
    /// Tangent perturbation of vertex i, in the basis obtained by boosting
    /// e_1..e_n to the i-th regular vertex. Each has norm <= 1.
    std::vector<Vec> best_perturbation;
    double optimizer_tol = 0.0;
    int best_restart = 0;
    long evaluations = 0;
    /// Signed volume of the unperturbed regular simplex.
    double regular_value = 0.0;
    /// Minimum over the symmetric radial perturbation grid.
    double oracle_value = 0.0;
    /// Quadrature value of the winning configuration (NaN when not checked).
    double quadrature_value = 0.0;
};

/// Signed volume of the regular simplex with vertex i moved to
/// exp_{q_i}(perturbation[i]) (perturbations are projected to the unit ball).
double perturbed_signed_volume(int n, double L, const std::vector<Vec>& perturbation,
                               const QuadratureSpec& q = {});

VLEstimate vl_estimate(int n, double L, const VLOptions& opts = {});

struct L0Options {
    double start = 2.0;
    double step = 0.25;
    double margin = 1e-3;
    double resolution = 1e-2;
    double limit = 64.0;
    VLOptions vl;
};

double l0_estimate(int n, const L0Options& opts = {});

/// (1 - r g(L+3)) / (1 + r g(L)) * V_L, unclamped.
double gap_bound(int n, double L, double r, const VLEstimate& vl);
double gap_bound(int n, double L, double r, double vl_value);

struct GapCertificate {
    int n = 0;
    double eta = 0.0;
    double v_n = 0.0;
    double L0 = 0.0;
    double L1 = 0.0;
    double k = 0.0;
    double c = 0.0;
    VLEstimate vL1;
    double bound_value = 0.0;
};

struct SolveOptions {
    double step = 0.5;
    double limit = 64.0;
    L0Options l0;
    VLOptions vl;
    /// Upper end of the L-grid for the extrapolated v_n (n >= 4).
    double vn_l_top = 20.0;
};

GapCertificate solve_k(int n, double eta, const SolveOptions& opts = {});

struct CertificateCheck {
    bool ok = false;
    double recomputed_bound = 0.0;
    double identity_residual = 0.0;
    std::string message;
};

/// Recomputes the bound from the stored fields and checks the invariants.
CertificateCheck validate_certificate(const GapCertificate& cert, double tol = 1e-12);

/// V_L estimates on an L-grid, reused by the bound curves.
struct VLTable {
    int n = 0;
    std::vector<double> L;
    std::vector<double> value;
};

VLTable vl_table(int n, const std::vector<double>& grid, const VLOptions& opts = {});

struct BestBound {
    double bound = 0.0;
    double L = 0.0;
};

/// Largest gap bound over the table at ratio r (ties: smallest L).
BestBound best_gap_bound(const VLTable& table, double r);

struct GlueRow {
    int i = 0;
    double r = 0.0;
    double bound = 0.0;
    double L_best = 0.0;
};

/// r_i = volB0 / (i volM), with bound_i the best gap bound over the table.
std::vector<GlueRow> gluing_ratio_sequence(double volM, double volB0, int imax,
                                           const VLTable& table);

/// Default table for gluing sequences and curves: L from l0 in steps of 0.5
/// up to l0 + span.
VLTable default_vl_table(int n, double span = 20.0, const VLOptions& opts = {});

}  // namespace hypvol
