#include "hypvol/hypgeom.hpp"

#include <algorithm>
#include <cmath>

namespace hypvol {

namespace {

void require_same_dim(const Vec& x, const Vec& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error("minkowski: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
    }
}

// sinh(a*l)/sinh(l), stable for small l.
double sinh_ratio(double a, double l) {
    if (l < 1e-6) {
        return a * (1.0 + l * l * (a * a - 1.0) / 6.0);
    }
    return std::sinh(a * l) / std::sinh(l);
}

}  // namespace

double minkowski(const Vec& x, const Vec& y) {
    require_same_dim(x, y);
    return -x[0] * y[0] + x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
}

Mat minkowski_matrix(int n) {
    Mat j = Mat::Identity(n + 1, n + 1);
    j(0, 0) = -1.0;
    return j;
}

// ---------------------------------------------------------------- HPoint

HPoint HPoint::from_coords(Vec coords) {
    if (coords.size() < 3) {
        throw Error("HPoint: need at least 3 coordinates (n >= 2)");
    }
    const double q = minkowski(coords, coords);
    if (!(coords[0] > 0.0) || !(q < 0.0)) {
        throw Error("HPoint: coordinates are not on the upper sheet of the hyperboloid");
    }
    coords /= std::sqrt(-q);
    return HPoint(std::move(coords));
}

HPoint HPoint::origin(int n) {
    Vec c = Vec::Zero(n + 1);
    c[0] = 1.0;
    return HPoint(std::move(c));
}

HPoint HPoint::from_klein(const Vec& u) {
    const double s = u.squaredNorm();
    if (!(s < 1.0)) {
        throw Error("HPoint::from_klein: point outside the open unit ball");
    }
    Vec c(u.size() + 1);
    const double x0 = 1.0 / std::sqrt(1.0 - s);
    c[0] = x0;
    c.tail(u.size()) = x0 * u;
    return HPoint(std::move(c));
}

HPoint HPoint::polar(double r, const Vec& dir) {
    const double nrm = dir.norm();
    if (!(nrm > 0.0)) {
        throw Error("HPoint::polar: zero direction");
    }
    Vec c(dir.size() + 1);
    c[0] = std::cosh(r);
    c.tail(dir.size()) = (std::sinh(r) / nrm) * dir;
    return HPoint(std::move(c));
}

// ------------------------------------------------------------ IdealPoint

IdealPoint IdealPoint::from_coords(Vec coords) {
    if (coords.size() < 3 || !(coords[0] > 0.0)) {
        throw Error("IdealPoint: need a future-pointing vector with n >= 2");
    }
    coords /= coords[0];
    const double q = minkowski(coords, coords);
    if (std::abs(q) > 1e-12) {
        throw Error("IdealPoint: vector is not light-like");
    }
    return IdealPoint(std::move(coords));
}

IdealPoint IdealPoint::from_klein(const Vec& u) {
    if (std::abs(u.norm() - 1.0) > 1e-12) {
        throw Error("IdealPoint::from_klein: point not on the unit sphere");
    }
    Vec c(u.size() + 1);
    c[0] = 1.0;
    c.tail(u.size()) = u / u.norm();
    return IdealPoint(std::move(c));
}

const Vec& coords_of(const Vertex& v) {
    return std::visit([](const auto& p) -> const Vec& { return p.coords(); }, v);
}

int dim_of(const Vertex& v) {
    return static_cast<int>(coords_of(v).size()) - 1;
}

// -------------------------------------------------------------- Isometry

Isometry Isometry::from_matrix(Mat m) {
    if (m.rows() != m.cols() || m.rows() < 3) {
        throw Error("Isometry: matrix must be square of size >= 3");
    }
    const int n = static_cast<int>(m.rows()) - 1;
    const Mat j = minkowski_matrix(n);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m.transpose() * j * m - j).cwiseAbs().maxCoeff() > 1e-10 * scale * scale) {
        throw Error("Isometry: matrix does not preserve the Minkowski form");
    }
    if (!(m(0, 0) > 0.0)) {
        throw Error("Isometry: matrix swaps the sheets of the hyperboloid");
    }
    const int orient = m.determinant() > 0.0 ? 1 : -1;
    return Isometry(std::move(m), orient);
}

Isometry Isometry::identity(int n) {
    return Isometry(Mat::Identity(n + 1, n + 1), 1);
}

Isometry Isometry::boost_to(const HPoint& p) {
    const int n = p.dim();
    const Vec& c = p.coords();
    const Vec x = c.tail(n);
    Mat b(n + 1, n + 1);
    b(0, 0) = c[0];
    b.block(0, 1, 1, n) = x.transpose();
    b.block(1, 0, n, 1) = x;
    b.block(1, 1, n, n) = Mat::Identity(n, n) + x * x.transpose() / (1.0 + c[0]);
    return Isometry(std::move(b), 1);
}

Isometry Isometry::rotation(int n, int i, int j, double angle) {
    if (i < 1 || j < 1 || i > n || j > n || i == j) {
        throw Error("Isometry::rotation: invalid coordinate plane");
    }
    Mat r = Mat::Identity(n + 1, n + 1);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    r(i, i) = c;
    r(i, j) = -s;
    r(j, i) = s;
    r(j, j) = c;
    return Isometry(std::move(r), 1);
}

Isometry Isometry::reflection(int n, int k) {
    if (k < 1 || k > n) {
        throw Error("Isometry::reflection: invalid coordinate");
    }
    Mat r = Mat::Identity(n + 1, n + 1);
    r(k, k) = -1.0;
    return Isometry(std::move(r), -1);
}

HPoint Isometry::apply(const HPoint& p) const {
    return HPoint::from_coords(m_ * p.coords());
}

IdealPoint Isometry::apply(const IdealPoint& p) const {
    Vec c = m_ * p.coords();
    c /= c[0];
    // re-project onto the light cone
    const double r = c.tail(c.size() - 1).norm();
    c.tail(c.size() - 1) /= r;
    return IdealPoint::from_coords(std::move(c));
}

Vertex Isometry::apply(const Vertex& v) const {
    return std::visit([this](const auto& p) -> Vertex { return apply(p); }, v);
}

Isometry Isometry::operator*(const Isometry& other) const {
    return Isometry(m_ * other.m_, orientation_ * other.orientation_);
}

Isometry Isometry::inverse() const {
    const Mat j = minkowski_matrix(dim());
    return Isometry(j * m_.transpose() * j, orientation_);
}

// ----------------------------------------------------- Frame, simplices

Frame Frame::reference(int n) {
    Frame f{HPoint::origin(n), {}};
    for (int i = 1; i <= n; ++i) {
        f.tangent.push_back(Vec::Unit(n + 1, i));
    }
    return f;
}

BarycentricPoint BarycentricPoint::make(std::vector<double> w) {
    if (w.empty()) {
        throw Error("BarycentricPoint: empty weight vector");
    }
    double sum = 0.0;
    for (double x : w) {
        if (x < 0.0) {
            throw Error("BarycentricPoint: negative weight");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw Error("BarycentricPoint: weights do not sum to 1");
    }
    return BarycentricPoint{std::move(w)};
}

BarycentricPoint BarycentricPoint::vertex(int k, int i) {
    std::vector<double> w(k + 1, 0.0);
    w.at(i) = 1.0;
    return BarycentricPoint{std::move(w)};
}

GeodesicSimplex::GeodesicSimplex(std::vector<Vertex> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.empty()) {
        throw Error("GeodesicSimplex: no vertices");
    }
    const int n = dim_of(vertices_.front());
    for (const auto& v : vertices_) {
        if (dim_of(v) != n) {
            throw Error("GeodesicSimplex: vertices of mixed dimension");
        }
    }
}

GeodesicSimplex GeodesicSimplex::finite(const std::vector<HPoint>& pts) {
    return GeodesicSimplex(std::vector<Vertex>(pts.begin(), pts.end()));
}

bool GeodesicSimplex::all_finite() const {
    return std::all_of(vertices_.begin(), vertices_.end(),
                       [](const Vertex& v) { return std::holds_alternative<HPoint>(v); });
}

HPoint GeodesicSimplex::finite_vertex(int i) const {
    const auto* p = std::get_if<HPoint>(&vertices_.at(i));
    if (p == nullptr) {
        throw Error("GeodesicSimplex: vertex " + std::to_string(i) + " is ideal");
    }
    return *p;
}

GeodesicSimplex GeodesicSimplex::transformed(const Isometry& g) const {
    std::vector<Vertex> out;
    out.reserve(vertices_.size());
    for (const auto& v : vertices_) {
        out.push_back(g.apply(v));
    }
    return GeodesicSimplex(std::move(out));
}

GeodesicSimplex GeodesicSimplex::permuted(std::span<const int> perm) const {
    if (perm.size() != vertices_.size()) {
        throw Error("GeodesicSimplex::permuted: wrong permutation length");
    }
    std::vector<Vertex> out;
    out.reserve(perm.size());
    for (int i : perm) {
        out.push_back(vertices_.at(i));
    }
    return GeodesicSimplex(std::move(out));
}

// ------------------------------------------------------------ operations

double distance(const HPoint& x, const HPoint& y) {
    const double c = -minkowski(x.coords(), y.coords());
    const double slack = 1e-9 * std::max(1.0, x[0] * y[0]);
    if (c < 1.0 - slack) {
        throw Error("distance: invalid points (-<x,y> < 1)");
    }
    if (c <= 1.0) {
        return 0.0;
    }
    if (c < 2.0) {
        // acosh is ill-conditioned near 1; use the Minkowski chord length
        const Vec d = x.coords() - y.coords();
        return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, minkowski(d, d))));
    }
    return std::acosh(c);
}

HPoint geodesic_point(const HPoint& x, const HPoint& y, double t) {
    if (t == 0.0) {
        return x;
    }
    if (t == 1.0) {
        return y;
    }
    const double l = distance(x, y);
    Vec c = sinh_ratio(1.0 - t, l) * x.coords() + sinh_ratio(t, l) * y.coords();
    return HPoint::from_coords(std::move(c));
}

HPoint straight_eval(const GeodesicSimplex& s, const BarycentricPoint& z) {
    if (!s.all_finite()) {
        throw Error("straight_eval: simplex has ideal vertices");
    }
    if (static_cast<int>(z.weights.size()) != s.dim() + 1) {
        throw Error("straight_eval: barycentric point has the wrong length");
    }
    // Iterative form of the recursion: the value on Delta_k is the geodesic
    // from the value on the first k vertices to vertex k.
    const auto& w = z.weights;
    HPoint current = s.finite_vertex(0);
    double mass = w[0];
    for (int k = 1; k <= s.dim(); ++k) {
        const double next = mass + w[k];
        if (next <= 0.0) {
            current = s.finite_vertex(k);
            mass = 0.0;
            continue;
        }
        const double t = w[k] / next;
        current = geodesic_point(current, s.finite_vertex(k), t);
        mass = next;
    }
    return current;
}

Vec to_klein(const HPoint& p) {
    const Vec& c = p.coords();
    return c.tail(c.size() - 1) / c[0];
}

Vec to_klein(const IdealPoint& p) {
    const Vec& c = p.coords();
    return c.tail(c.size() - 1) / c[0];
}

Vec to_klein(const Vertex& v) {
    return std::visit([](const auto& p) { return to_klein(p); }, v);
}

Isometry frame_to_isometry(const Frame& f) {
    const int n = f.base.dim();
    if (static_cast<int>(f.tangent.size()) != n) {
        throw Error("frame_to_isometry: frame needs n tangent vectors");
    }
    Mat m(n + 1, n + 1);
    m.col(0) = f.base.coords();
    for (int i = 0; i < n; ++i) {
        if (f.tangent[i].size() != n + 1) {
            throw Error("frame_to_isometry: tangent vector has the wrong length");
        }
        m.col(i + 1) = f.tangent[i];
    }
    const Mat j = minkowski_matrix(n);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m.transpose() * j * m - j).cwiseAbs().maxCoeff() > 1e-10 * scale * scale) {
        throw Error("frame_to_isometry: degenerate (non-orthonormal) frame");
    }
    if (m.determinant() < 0.0) {
        throw Error("frame_to_isometry: frame is negatively oriented");
    }
    return Isometry::from_matrix(std::move(m));
}

int orientation(const GeodesicSimplex& s) {
    const int n = s.ambient_dim();
    if (s.dim() != n) {
        throw Error("orientation: simplex is not top-dimensional");
    }
    Mat m(n + 1, n + 1);
    double scale = 1.0;
    for (int i = 0; i <= n; ++i) {
        const Vec& c = coords_of(s.vertices()[i]);
        m.col(i) = c;
        scale *= c.norm();
    }
    const double d = m.determinant();
    if (std::abs(d) <= 1e-14 * scale) {
        return 0;
    }
    return d > 0.0 ? 1 : -1;
}

std::vector<Vec> tangent_basis(const HPoint& p) {
    const Isometry b = Isometry::boost_to(p);
    std::vector<Vec> out;
    for (int i = 1; i <= p.dim(); ++i) {
        out.push_back(b.matrix().col(i));
    }
    return out;
}

HPoint exp_map(const HPoint& p, const Vec& v) {
    const double nv2 = minkowski(v, v);
    const double nv = std::sqrt(std::max(0.0, nv2));
    if (nv < 1e-300) {
        return p;
    }
    return HPoint::from_coords(std::cosh(nv) * p.coords() + (std::sinh(nv) / nv) * v);
}

HPoint barycenter(std::span<const HPoint> pts) {
    if (pts.empty()) {
        throw Error("barycenter: no points");
    }
    Vec sum = Vec::Zero(pts.front().coords().size());
    for (const auto& p : pts) {
        sum += p.coords();
    }
    return HPoint::from_coords(std::move(sum));
}

}  // namespace hypvol
