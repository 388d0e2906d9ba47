#pragma once

// Volumes of geodesic simplices.
//
// klein_volume integrates the hyperbolic density (1 - |u|^2)^{-(n+1)/2} over
// the Euclidean simplex spanned by the Klein images of the vertices. The
// closed forms here (angle defect, Lobachevsky sums) are the independent
// oracles for it and the only route for ideal simplices.

#include "hypvol/hypgeom.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace hypvol {

struct QuadratureSpec {
    double abs_tol = 1e-9;
    int max_subdivisions = 200000;
    /// Degree of the interior rule; must be odd and >= 3.
    int rule_order = 7;

    void validate() const;
};

struct VolumeResult {
    double value = 0.0;
    double err_estimate = 0.0;
    bool converged = true;
};

enum class VolumeMethod { exact, lobachevsky, extrapolated };

std::string to_string(VolumeMethod m);

struct VolumeConstants {
    int n = 0;
    double v_n = 0.0;
    VolumeMethod method = VolumeMethod::exact;
    /// Zero for exact and Lobachevsky values.
    double extrapolation_error = 0.0;
};

/// Unsigned hyperbolic volume of a top-dimensional geodesic simplex.
/// Ideal vertices are accepted only for n = 2 and for all-ideal n = 3.
VolumeResult klein_volume(const GeodesicSimplex& s, const QuadratureSpec& q = {});

/// klein_volume times the orientation sign of the vertex order.
double signed_volume(const GeodesicSimplex& s, const QuadratureSpec& q = {});

struct TriangleAngles {
    double alpha;
    double beta;
    double gamma;
};

struct TriangleSides {
    double a;
    double b;
    double c;
};

double gauss_bonnet_area(const TriangleAngles& angles);
double gauss_bonnet_area(const TriangleSides& sides);

/// Interior angles of a hyperbolic triangle from its side lengths;
/// alpha is opposite a.
TriangleAngles triangle_angles(const TriangleSides& sides);

/// Exact signed area of the n = 2 triangle with hyperboloid vertices a, b, c
/// (angle defect from side lengths, sign from the vertex determinant).
double signed_triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const Eigen::Vector3d& c);

/// Unsigned volume of a compact tetrahedron in H^3 from its dihedral angles
/// (dilogarithm formula). Used where quadrature is too slow, e.g. inside
/// optimizer loops; klein_volume is its oracle.
double tetrahedron_volume(const GeodesicSimplex& s);

/// Sign-adjusted counterpart of tetrahedron_volume.
double signed_tetrahedron_volume(const GeodesicSimplex& s);

/// Lobachevsky function: pi-periodic, odd, Lambda(theta) = -int_0^theta log|2 sin t| dt.
double lobachevsky(double theta);

/// Vertices (cosh s, sinh s u_i) of the positively oriented regular n-simplex
/// with edgelength L centred at the origin.
GeodesicSimplex regular_simplex(int n, double L);

/// Circumradius s of the regular n-simplex of edgelength L.
double regular_circumradius(int n, double L);

/// Volume of regular_simplex(n, L) integrated over one of its (n+1)!
/// congruent barycentric pieces.
VolumeResult regular_simplex_volume(int n, double L, const QuadratureSpec& q = {});

struct ExtrapolationResult {
    double value = 0.0;
    double error = 0.0;
    std::vector<double> grid;
    std::vector<double> volumes;
};

/// Aitken extrapolation of regular simplex volumes along an equally spaced
/// L-grid (at least 3 points). Throws if the volumes are not strictly
/// increasing with geometrically shrinking increments.
ExtrapolationResult extrapolate_regular_volume(int n, std::span<const double> grid,
                                               const QuadratureSpec& q = {});

/// Default extrapolation grid ending at l_top.
std::vector<double> default_extrapolation_grid(double l_top = 20.0);

/// Volume of the regular ideal n-simplex: exact for n = 2, Lobachevsky for
/// n = 3, extrapolated regular volumes for n >= 4.
VolumeConstants ideal_regular_volume(int n, const QuadratureSpec& q = {},
                                     double l_top = 20.0);

}  // namespace hypvol
