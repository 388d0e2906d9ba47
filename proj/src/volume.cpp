#include "hypvol/volume.hpp"

#include "hypvol/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace hypvol {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) {
        f *= i;
    }
    return f;
}

// Density of the hyperbolic volume form in Klein coordinates.
struct KleinDensity {
    double exponent;
    double operator()(const Eigen::VectorXd& u) const {
        const double gap = std::max(1.0 - u.squaredNorm(), 1e-300);
        return std::pow(gap, exponent);
    }
};

struct RulePair {
    SimplexRule high;
    SimplexRule low;
};

RulePair rules_for(int n, const QuadratureSpec& q) {
    const int s = (q.rule_order - 1) / 2;
    return {grundmann_moeller(n, s), grundmann_moeller(n, s - 1)};
}

// Angle at finite vertex a between the geodesics towards p and r (either
// finite or ideal), via the tangent projections P + <P,A>A.
double vertex_angle(const Vec& a, const Vec& p, const Vec& r) {
    Vec u = p + minkowski(p, a) * a;
    Vec v = r + minkowski(r, a) * a;
    u /= std::sqrt(minkowski(u, u));
    v /= std::sqrt(minkowski(v, v));
    const Vec d = u - v;
    const Vec s = u + v;
    return 2.0 * std::atan2(std::sqrt(std::max(0.0, minkowski(d, d))),
                            std::sqrt(std::max(0.0, minkowski(s, s))));
}

double triangle_area_with_ideal(const GeodesicSimplex& s) {
    double defect = kPi;
    for (int i = 0; i < 3; ++i) {
        const Vertex& vi = s.vertices()[i];
        if (std::holds_alternative<IdealPoint>(vi)) {
            continue;  // angle 0 at an ideal vertex
        }
        defect -= vertex_angle(coords_of(vi), coords_of(s.vertices()[(i + 1) % 3]),
                               coords_of(s.vertices()[(i + 2) % 3]));
    }
    return std::max(0.0, defect);
}

// Ideal tetrahedron: stereographic projection from the last vertex sends the
// other three to a Euclidean triangle whose angles are the dihedral angles.
double ideal_tetrahedron_volume(const GeodesicSimplex& s) {
    std::array<Eigen::Vector3d, 4> p;
    for (int i = 0; i < 4; ++i) {
        const Vec k = to_klein(s.vertices()[i]);
        p[i] = Eigen::Vector3d(k[0], k[1], k[2]).normalized();
    }
    const Eigen::Vector3d north = p[3];
    std::array<Eigen::Vector3d, 3> q;
    for (int i = 0; i < 3; ++i) {
        const double denom = 1.0 - p[i].dot(north);
        if (denom < 1e-14) {
            return 0.0;  // coincident ideal vertices
        }
        q[i] = (p[i] - p[i].dot(north) * north) / denom;
    }
    double vol = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d u = q[(i + 1) % 3] - q[i];
        const Eigen::Vector3d v = q[(i + 2) % 3] - q[i];
        const double ang = std::atan2(u.cross(v).norm(), u.dot(v));
        vol += lobachevsky(ang);
    }
    return std::max(0.0, vol);
}

VolumeResult integrate_klein(const Eigen::MatrixXd& klein, const QuadratureSpec& q) {
    const int n = static_cast<int>(klein.rows());
    double scale = 0.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            scale = std::max(scale, (klein.col(i) - klein.col(j)).norm());
        }
    }
    const double evol = std::abs(euclidean_simplex_volume(klein));
    if (scale == 0.0 || evol <= 1e-14 * std::pow(scale, n) / factorial(n)) {
        return {0.0, 0.0, true};
    }
    const RulePair rules = rules_for(n, q);
    const CubatureResult r = integrate_simplex(klein, KleinDensity{-(n + 1) / 2.0}, rules.high,
                                               rules.low, q.abs_tol, q.max_subdivisions);
    return {r.value, r.err_estimate, r.converged};
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0)) {
        throw Error("QuadratureSpec: abs_tol must be positive");
    }
    if (max_subdivisions < 1) {
        throw Error("QuadratureSpec: max_subdivisions must be >= 1");
    }
    if (rule_order < 3 || rule_order % 2 == 0) {
        throw Error("QuadratureSpec: rule_order must be odd and >= 3");
    }
}

std::string to_string(VolumeMethod m) {
    switch (m) {
        case VolumeMethod::exact:
            return "exact";
        case VolumeMethod::lobachevsky:
            return "lobachevsky";
        case VolumeMethod::extrapolated:
            return "extrapolated";
    }
    return "unknown";
}

VolumeResult klein_volume(const GeodesicSimplex& s, const QuadratureSpec& q) {
    q.validate();
    const int n = s.ambient_dim();
    if (s.dim() != n) {
        throw Error("klein_volume: simplex must be top-dimensional");
    }
    if (s.any_ideal()) {
        if (n == 2) {
            return {triangle_area_with_ideal(s), 0.0, true};
        }
        const bool all_ideal = std::all_of(s.vertices().begin(), s.vertices().end(), [](const Vertex& v) {
            return std::holds_alternative<IdealPoint>(v);
        });
        if (n == 3 && all_ideal) {
            return {ideal_tetrahedron_volume(s), 0.0, true};
        }
        throw Error("klein_volume: ideal vertices are only supported for n = 2 and all-ideal n = 3");
    }

    // Recentre at the barycentre so the Klein image stays away from the sphere.
    std::vector<HPoint> pts;
    for (int i = 0; i <= n; ++i) {
        pts.push_back(s.finite_vertex(i));
    }
    const Isometry to_center = Isometry::boost_to(barycenter(pts)).inverse();
    Eigen::MatrixXd klein(n, n + 1);
    for (int i = 0; i <= n; ++i) {
        klein.col(i) = to_klein(to_center.apply(pts[i]));
    }
    return integrate_klein(klein, q);
}

double signed_volume(const GeodesicSimplex& s, const QuadratureSpec& q) {
    const int sign = orientation(s);
    if (sign == 0) {
        return 0.0;
    }
    return sign * klein_volume(s, q).value;
}

// ------------------------------------------------------------ triangles

double gauss_bonnet_area(const TriangleAngles& angles) {
    const double sum = angles.alpha + angles.beta + angles.gamma;
    if (angles.alpha < 0.0 || angles.beta < 0.0 || angles.gamma < 0.0) {
        throw Error("gauss_bonnet_area: negative angle");
    }
    if (sum >= kPi) {
        throw Error("gauss_bonnet_area: angle sum must be below pi");
    }
    return kPi - sum;
}

TriangleAngles triangle_angles(const TriangleSides& sides) {
    const double a = sides.a;
    const double b = sides.b;
    const double c = sides.c;
    if (!(a > 0.0 && b > 0.0 && c > 0.0)) {
        throw Error("triangle_angles: side lengths must be positive");
    }
    const double slack = 1e-12 * (a + b + c);
    if (a > b + c + slack || b > a + c + slack || c > a + b + slack) {
        throw Error("triangle_angles: side lengths violate the triangle inequality");
    }
    // half-angle form of the hyperbolic law of cosines
    auto angle = [](double opp, double x, double y) {
        const double num = std::sinh(std::max(0.0, (opp - x + y) / 2.0)) *
                           std::sinh(std::max(0.0, (opp + x - y) / 2.0));
        const double s2 = std::clamp(num / (std::sinh(x) * std::sinh(y)), 0.0, 1.0);
        return 2.0 * std::asin(std::sqrt(s2));
    };
    return {angle(a, b, c), angle(b, c, a), angle(c, a, b)};
}

double gauss_bonnet_area(const TriangleSides& sides) {
    const TriangleAngles t = triangle_angles(sides);
    return std::max(0.0, kPi - t.alpha - t.beta - t.gamma);
}

double signed_triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const Eigen::Vector3d& c) {
    Eigen::Matrix3d m;
    m << a, b, c;
    const double det = m.determinant();
    if (det == 0.0) {
        return 0.0;
    }
    auto dist = [](const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
        const double ip = x[0] * y[0] - x[1] * y[1] - x[2] * y[2];
        return ip <= 1.0 ? 0.0 : std::acosh(ip);
    };
    const double ab = dist(a, b);
    const double bc = dist(b, c);
    const double ca = dist(c, a);
    if (ab == 0.0 || bc == 0.0 || ca == 0.0) {
        return 0.0;
    }
    // Rounding can push a collinear triple slightly across the triangle
    // inequality; such triangles have zero area.
    const double slack = 1e-12 * (ab + bc + ca);
    if (ab > bc + ca + slack || bc > ab + ca + slack || ca > ab + bc + slack) {
        return 0.0;
    }
    const double area = gauss_bonnet_area(TriangleSides{bc, ca, ab});
    return det > 0.0 ? area : -area;
}

// ---------------------------------------------------------- Lobachevsky

double lobachevsky(double theta) {
    // reduce to (-pi/2, pi/2]
    double t = std::remainder(theta, kPi);
    if (t == 0.0) {
        return 0.0;
    }
    const double sign = t < 0.0 ? -1.0 : 1.0;
    t = std::abs(t);

    // log(sin t / t) = -sum_k zeta(2k) t^{2k} / (k pi^{2k}); integrate term by term.
    auto zeta_even = [](int k) {
        if (k == 1) {
            return kPi * kPi / 6.0;
        }
        if (k == 2) {
            return std::pow(kPi, 4) / 90.0;
        }
        double z = 0.0;
        for (int m = 50; m >= 1; --m) {
            z += std::pow(static_cast<double>(m), -2.0 * k);
        }
        return z + std::pow(50.5, 1.0 - 2.0 * k) / (2.0 * k - 1.0);
    };
    const double x2 = (t / kPi) * (t / kPi);
    double sum = 0.0;
    double xp = 1.0;
    for (int k = 1; k <= 60; ++k) {
        xp *= x2;
        const double term = zeta_even(k) * xp / (k * (2.0 * k + 1.0));
        sum += term;
        if (term < 1e-18) {
            break;
        }
    }
    const double value = t - t * std::log(2.0 * t) + t * sum;
    return sign * value;
}

// ----------------------------------------------------- regular simplices

double regular_circumradius(int n, double L) {
    if (n < 2 || !(L > 0.0)) {
        throw Error("regular_circumradius: need n >= 2 and L > 0");
    }
    // cosh L = cosh^2 s + sinh^2 s / n  =>  cosh^2 s = (n cosh L + 1)/(n + 1)
    // written via sinh^2 s = n (cosh L - 1)/(n + 1) for accuracy at small L.
    const double sinh2 = n * 2.0 * std::sinh(L / 2.0) * std::sinh(L / 2.0) / (n + 1.0);
    return std::asinh(std::sqrt(sinh2));
}

namespace {

// Unit vectors u_0..u_n in R^n with u_i . u_j = -1/n, in Helmert coordinates.
Eigen::MatrixXd regular_directions(int n) {
    Eigen::MatrixXd u(n, n + 1);
    for (int i = 0; i <= n; ++i) {
        for (int k = 1; k <= n; ++k) {
            // h_k = (1,..,1 [k times], -k, 0, ..)/sqrt(k(k+1)); centred e_i . h_k
            double hk;
            if (i < k) {
                hk = 1.0;
            } else if (i == k) {
                hk = -static_cast<double>(k);
            } else {
                hk = 0.0;
            }
            u(k - 1, i) = hk / std::sqrt(k * (k + 1.0));
        }
        u.col(i).normalize();
    }
    return u;
}

}  // namespace

GeodesicSimplex regular_simplex(int n, double L) {
    const double s = regular_circumradius(n, L);
    Eigen::MatrixXd u = regular_directions(n);
    Eigen::MatrixXd m(n + 1, n + 1);
    auto fill = [&] {
        for (int i = 0; i <= n; ++i) {
            m(0, i) = std::cosh(s);
            m.block(1, i, n, 1) = std::sinh(s) * u.col(i);
        }
    };
    fill();
    if (m.determinant() < 0.0) {
        u.row(n - 1) *= -1.0;
        fill();
    }
    std::vector<Vertex> verts;
    for (int i = 0; i <= n; ++i) {
        verts.emplace_back(HPoint::from_coords(m.col(i)));
    }
    return GeodesicSimplex(std::move(verts));
}

VolumeResult regular_simplex_volume(int n, double L, const QuadratureSpec& q) {
    q.validate();
    const double s = regular_circumradius(n, L);
    const Eigen::MatrixXd u = std::tanh(s) * regular_directions(n);
    // chain of Euclidean barycentres: vertex, edge midpoint, ..., centre
    Eigen::MatrixXd piece(n, n + 1);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int k = 0; k <= n; ++k) {
        acc += u.col(k);
        piece.col(k) = acc / (k + 1.0);
    }
    const double copies = factorial(n + 1);
    QuadratureSpec qp = q;
    qp.abs_tol = q.abs_tol / copies;
    const VolumeResult r = integrate_klein(piece, qp);
    return {copies * r.value, copies * r.err_estimate, r.converged};
}

ExtrapolationResult extrapolate_regular_volume(int n, std::span<const double> grid,
                                               const QuadratureSpec& q) {
    if (grid.size() < 3) {
        throw Error("extrapolate_regular_volume: need at least 3 grid points");
    }
    ExtrapolationResult out;
    out.grid.assign(grid.begin(), grid.end());
    for (double L : grid) {
        out.volumes.push_back(regular_simplex_volume(n, L, q).value);
    }
    std::vector<double> estimates;
    for (std::size_t i = 0; i + 1 < out.volumes.size(); ++i) {
        if (!(out.volumes[i + 1] > out.volumes[i])) {
            throw Error("extrapolate_regular_volume: volumes not increasing along the grid "
                        "(quadrature too coarse)");
        }
    }
    for (std::size_t i = 2; i < out.volumes.size(); ++i) {
        const double d0 = out.volumes[i - 1] - out.volumes[i - 2];
        const double d1 = out.volumes[i] - out.volumes[i - 1];
        const double ratio = d1 / d0;
        if (!(ratio > 0.0 && ratio < 1.0)) {
            throw Error("extrapolate_regular_volume: increments do not shrink geometrically "
                        "(quadrature too coarse)");
        }
        estimates.push_back(out.volumes[i] + d1 * ratio / (1.0 - ratio));
    }
    out.value = estimates.back();
    if (estimates.size() >= 2) {
        out.error = std::abs(estimates.back() - estimates[estimates.size() - 2]);
    } else {
        out.error = std::abs(out.value - out.volumes.back());
    }
    return out;
}

std::vector<double> default_extrapolation_grid(double l_top) {
    return {l_top - 6.0, l_top - 4.0, l_top - 2.0, l_top};
}

VolumeConstants ideal_regular_volume(int n, const QuadratureSpec& q, double l_top) {
    if (n < 2) {
        throw Error("ideal_regular_volume: need n >= 2");
    }
    if (n == 2) {
        return {2, kPi, VolumeMethod::exact, 0.0};
    }
    if (n == 3) {
        return {3, 3.0 * lobachevsky(kPi / 3.0), VolumeMethod::lobachevsky, 0.0};
    }
    const auto grid = default_extrapolation_grid(l_top);
    const ExtrapolationResult r = extrapolate_regular_volume(n, grid, q);
    return {n, r.value, VolumeMethod::extrapolated, r.error};
}

}  // namespace hypvol

// ------------------------------------------------------- tetrahedra (n = 3)

namespace hypvol {

namespace {

using cplx = std::complex<double>;

// Principal branch of the dilogarithm.
cplx dilog(cplx z) {
    constexpr double zeta2 = kPi * kPi / 6.0;
    if (z == cplx(0.0, 0.0)) {
        return 0.0;
    }
    if (z == cplx(1.0, 0.0)) {
        return zeta2;
    }
    if (std::abs(z) > 1.0) {
        const cplx l = std::log(-z);
        return -zeta2 - 0.5 * l * l - dilog(1.0 / z);
    }
    if (z.real() > 0.5) {
        return zeta2 - std::log(z) * std::log(1.0 - z) - dilog(1.0 - z);
    }
    // Bernoulli series in u = -log(1 - z), |u| stays below ~1.1 here.
    static constexpr std::array<double, 12> bern = {
        1.0 / 6.0,        -1.0 / 30.0,         1.0 / 42.0,         -1.0 / 30.0,
        5.0 / 66.0,       -691.0 / 2730.0,     7.0 / 6.0,          -3617.0 / 510.0,
        43867.0 / 798.0,  -174611.0 / 330.0,   854513.0 / 138.0,   -236364091.0 / 2730.0};
    const cplx u = -std::log(1.0 - z);
    const cplx u2 = u * u;
    cplx sum = u - 0.25 * u2;
    cplx p = u;
    double fact = 1.0;
    for (std::size_t k = 1; k <= bern.size(); ++k) {
        p *= u2;
        fact *= static_cast<double>((2 * k) * (2 * k + 1));
        sum += bern[k - 1] * p / fact;
    }
    return sum;
}

// Spacelike unit normal to the face through a, b, c, pointing towards d.
Eigen::Vector4d face_normal(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
    Eigen::Matrix<double, 3, 4> rows;
    for (int k = 0; k < 4; ++k) {
        const double jk = k == 0 ? -1.0 : 1.0;
        rows(0, k) = jk * a[k];
        rows(1, k) = jk * b[k];
        rows(2, k) = jk * c[k];
    }
    // kernel of rows via signed 3x3 minors
    Eigen::Vector4d n;
    for (int k = 0; k < 4; ++k) {
        Eigen::Matrix3d minor;
        int col = 0;
        for (int j = 0; j < 4; ++j) {
            if (j == k) {
                continue;
            }
            minor.col(col++) = rows.col(j);
        }
        n[k] = ((k % 2 == 0) ? 1.0 : -1.0) * minor.determinant();
    }
    auto mink = [](const Eigen::Vector4d& x, const Vec& y) {
        return -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
    };
    const double nn = -n[0] * n[0] + n.tail<3>().squaredNorm();
    if (!(nn > 0.0)) {
        throw Error("tetrahedron_volume: degenerate face");
    }
    n /= std::sqrt(nn);
    if (mink(n, d) < 0.0) {
        n = -n;
    }
    return n;
}

}  // namespace

double tetrahedron_volume(const GeodesicSimplex& s) {
    if (s.ambient_dim() != 3 || s.dim() != 3 || !s.all_finite()) {
        throw Error("tetrahedron_volume: need a finite tetrahedron in H^3");
    }
    if (orientation(s) == 0) {
        return 0.0;
    }
    std::array<Vec, 4> v;
    for (int i = 0; i < 4; ++i) {
        v[i] = s.finite_vertex(i).coords();
    }
    // normals[i]: inward normal of the face opposite vertex i
    std::array<Eigen::Vector4d, 4> nrm;
    for (int i = 0; i < 4; ++i) {
        std::array<int, 3> idx{};
        int c = 0;
        for (int j = 0; j < 4; ++j) {
            if (j != i) {
                idx[c++] = j;
            }
        }
        nrm[i] = face_normal(v[idx[0]], v[idx[1]], v[idx[2]], v[i]);
    }
    Eigen::Matrix4d gram;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            gram(i, j) = -nrm[i][0] * nrm[j][0] + nrm[i].tail<3>().dot(nrm[j].tail<3>());
        }
    }
    // dihedral angle along the edge through vertices p, q lies between the
    // faces opposite the remaining two vertices
    auto dihedral = [&](int p, int q) {
        int f[2];
        int c = 0;
        for (int j = 0; j < 4; ++j) {
            if (j != p && j != q) {
                f[c++] = j;
            }
        }
        return std::acos(std::clamp(-gram(f[0], f[1]), -1.0, 1.0));
    };
    const double A = dihedral(0, 1);
    const double B = dihedral(0, 2);
    const double C = dihedral(0, 3);
    const double D = dihedral(2, 3);
    const double E = dihedral(1, 3);
    const double F = dihedral(1, 2);

    Eigen::Matrix4d g;
    g << 1, -std::cos(A), -std::cos(B), -std::cos(F),
        -std::cos(A), 1, -std::cos(C), -std::cos(E),
        -std::cos(B), -std::cos(C), 1, -std::cos(D),
        -std::cos(F), -std::cos(E), -std::cos(D), 1;
    const double det = g.determinant();
    if (!(det < 0.0)) {
        return 0.0;  // numerically flat
    }
    const cplx a = std::polar(1.0, A);
    const cplx b = std::polar(1.0, B);
    const cplx c = std::polar(1.0, C);
    const cplx d = std::polar(1.0, D);
    const cplx e = std::polar(1.0, E);
    const cplx f = std::polar(1.0, F);
    const cplx sq(0.0, std::sqrt(-det));
    const double sines = std::sin(A) * std::sin(D) + std::sin(B) * std::sin(E) +
                         std::sin(C) * std::sin(F);
    const cplx denom = a * d + b * e + c * f + a * b * f + a * c * e + b * c * d + d * e * f +
                       a * b * c * d * e * f;
    const cplx zm = -2.0 * (sines + sq) / denom;
    const cplx zp = -2.0 * (sines - sq) / denom;
    auto U = [&](cplx z) {
        return 0.5 * (dilog(z) + dilog(a * b * d * e * z) + dilog(a * c * d * f * z) +
                      dilog(b * c * e * f * z) - dilog(-a * b * c * z) - dilog(-a * e * f * z) -
                      dilog(-b * d * f * z) - dilog(-c * d * e * z));
    };
    const double vol = 0.5 * (U(zm) - U(zp)).imag();
    return std::abs(vol);
}

double signed_tetrahedron_volume(const GeodesicSimplex& s) {
    const int sign = orientation(s);
    return sign == 0 ? 0.0 : sign * tetrahedron_volume(s);
}

}  // namespace hypvol
