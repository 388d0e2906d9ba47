#pragma once

// Hyperboloid-model geometry of hyperbolic n-space.
//
// Points live on the upper sheet of {x : <x,x> = -1} in R^{n+1} with the
// Minkowski form <x,y> = -x0*y0 + sum_i xi*yi. Ideal points are light-cone
// rays normalized to x0 = 1. The Klein model (x -> x_{1..n}/x0) is only used
// where Euclidean convexity of geodesic simplices matters.

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hypvol {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double minkowski(const Vec& x, const Vec& y);

/// Minkowski form matrix diag(-1, 1, ..., 1) of size n+1.
Mat minkowski_matrix(int n);

class HPoint {
public:
    /// Validates x0 > 0, <x,x> < 0 and re-projects onto the hyperboloid.
    static HPoint from_coords(Vec coords);
    static HPoint origin(int n);
    /// Inverse of to_klein; requires |u| < 1.
    static HPoint from_klein(const Vec& u);
    /// Point at hyperbolic distance r from the origin in the direction of the
    /// Euclidean unit vector dir.
    static HPoint polar(double r, const Vec& dir);

    const Vec& coords() const { return coords_; }
    double operator[](int i) const { return coords_[i]; }
    int dim() const { return static_cast<int>(coords_.size()) - 1; }

private:
    explicit HPoint(Vec c) : coords_(std::move(c)) {}
    Vec coords_;
};

class IdealPoint {
public:
    /// Accepts any future-pointing null vector and rescales it to x0 = 1.
    static IdealPoint from_coords(Vec coords);
    /// Requires |u| = 1 within 1e-12.
    static IdealPoint from_klein(const Vec& u);

    const Vec& coords() const { return coords_; }
    int dim() const { return static_cast<int>(coords_.size()) - 1; }

private:
    explicit IdealPoint(Vec c) : coords_(std::move(c)) {}
    Vec coords_;
};

using Vertex = std::variant<HPoint, IdealPoint>;

const Vec& coords_of(const Vertex& v);
int dim_of(const Vertex& v);

/// Element of Isom(H^n) as a Lorentz matrix preserving the upper sheet.
class Isometry {
public:
    /// Validates M^T J M = J within 1e-10 and M(0,0) > 0.
    static Isometry from_matrix(Mat m);
    static Isometry identity(int n);
    /// Pure boost carrying the origin to p along the connecting geodesic.
    static Isometry boost_to(const HPoint& p);
    /// Rotation by angle in the (x_i, x_j) coordinate plane, i, j >= 1.
    static Isometry rotation(int n, int i, int j, double angle);
    /// Reflection x_k -> -x_k (k >= 1); orientation reversing.
    static Isometry reflection(int n, int k);

    const Mat& matrix() const { return m_; }
    int orientation() const { return orientation_; }
    int dim() const { return static_cast<int>(m_.rows()) - 1; }

    HPoint apply(const HPoint& p) const;
    IdealPoint apply(const IdealPoint& p) const;
    Vertex apply(const Vertex& v) const;
    /// Applies the linear map to an arbitrary vector (tangent or normal).
    Vec apply_vec(const Vec& v) const { return m_ * v; }

    Isometry operator*(const Isometry& other) const;
    /// Exact inverse J M^T J.
    Isometry inverse() const;

private:
    Isometry(Mat m, int orientation) : m_(std::move(m)), orientation_(orientation) {}
    Mat m_;
    int orientation_;
};

/// Base point plus n Minkowski-orthonormal tangent vectors at it.
struct Frame {
    HPoint base;
    std::vector<Vec> tangent;

    /// Reference frame (origin, e_1, ..., e_n).
    static Frame reference(int n);
};

struct BarycentricPoint {
    std::vector<double> weights;

    /// Validates non-negativity and unit sum within 1e-12.
    static BarycentricPoint make(std::vector<double> w);
    static BarycentricPoint vertex(int k, int i);
};

class GeodesicSimplex {
public:
    explicit GeodesicSimplex(std::vector<Vertex> vertices);
    static GeodesicSimplex finite(const std::vector<HPoint>& pts);

    int dim() const { return static_cast<int>(vertices_.size()) - 1; }
    int ambient_dim() const { return dim_of(vertices_.front()); }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    bool all_finite() const;
    bool any_ideal() const { return !all_finite(); }
    /// Requires all vertices finite.
    HPoint finite_vertex(int i) const;

    GeodesicSimplex transformed(const Isometry& g) const;
    /// Vertex order permuted: result[i] = vertices[perm[i]].
    GeodesicSimplex permuted(std::span<const int> perm) const;

private:
    std::vector<Vertex> vertices_;
};

double distance(const HPoint& x, const HPoint& y);

/// Constant-speed geodesic from x (t = 0) to y (t = 1).
HPoint geodesic_point(const HPoint& x, const HPoint& y, double t);

/// Recursive straight-simplex map Delta_k -> H^n.
HPoint straight_eval(const GeodesicSimplex& s, const BarycentricPoint& z);

Vec to_klein(const HPoint& p);
Vec to_klein(const IdealPoint& p);
Vec to_klein(const Vertex& v);

/// Orientation-preserving isometry carrying Frame::reference to f.
Isometry frame_to_isometry(const Frame& f);

/// Sign of det of the (n+1)x(n+1) vertex coordinate matrix (0 if |det| is
/// negligible). Only defined for top-dimensional simplices.
int orientation(const GeodesicSimplex& s);

/// Orthonormal tangent basis at p obtained by boosting e_1..e_n.
std::vector<Vec> tangent_basis(const HPoint& p);

/// Exponential map at p of an ambient tangent vector v (<v,p> = 0).
HPoint exp_map(const HPoint& p, const Vec& v);

/// Minkowski-normalized barycenter of finite points.
HPoint barycenter(std::span<const HPoint> pts);

}  // namespace hypvol
