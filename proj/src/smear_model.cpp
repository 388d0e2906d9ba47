#include "hypvol/smear.hpp"

#include "hypvol/volume.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace hypvol::smear {

namespace {

constexpr double kPi = std::numbers::pi;

const M3& J3() {
    static const M3 j = V3(-1.0, 1.0, 1.0).asDiagonal();
    return j;
}

double max_abs(const M3& m) { return m.cwiseAbs().maxCoeff(); }

bool same_point(const V3& a, const V3& b, double tol) {
    return (a - b).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

}  // namespace

double mink(const V3& x, const V3& y) { return -x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

double dist(const V3& x, const V3& y) {
    const double c = -mink(x, y);
    if (c < 2.0) {
        const V3 d = x - y;
        return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, mink(d, d))));
    }
    return std::acosh(c);
}

V3 renormalize(const V3& x) {
    const double q = -mink(x, x);
    if (q > 0.0) {
        return x / std::sqrt(q);
    }
    // far from the origin the form cancels completely; lift the spatial part
    return V3(std::sqrt(1.0 + x[1] * x[1] + x[2] * x[2]), x[1], x[2]);
}

M3 lorentz_inverse(const M3& m) { return J3() * m.transpose() * J3(); }

M3 translation_x(double d) {
    M3 t;
    t << std::cosh(d), std::sinh(d), 0.0,
         std::sinh(d), std::cosh(d), 0.0,
         0.0, 0.0, 1.0;
    return t;
}

M3 rotation(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    M3 r;
    r << 1.0, 0.0, 0.0,
         0.0, c, -s,
         0.0, s, c;
    return r;
}

M3 boost_to(const V3& p) {
    M3 b;
    const Eigen::Vector2d x = p.tail<2>();
    b(0, 0) = p[0];
    b.block<1, 2>(0, 1) = x.transpose();
    b.block<2, 1>(1, 0) = x;
    b.block<2, 2>(1, 1) = Eigen::Matrix2d::Identity() + x * x.transpose() / (1.0 + p[0]);
    return b;
}

V3 origin() { return V3(1.0, 0.0, 0.0); }

V3 geodesic_normal(const V3& a, const V3& b) {
    V3 n = J3() * a.cross(b);
    const double q = mink(n, n);
    if (!(q > 0.0)) {
        throw Error("geodesic_normal: points do not span a geodesic");
    }
    return n / std::sqrt(q);
}

Frame SurfaceModel::base_frame() const {
    const HPoint b = HPoint::from_coords(Vec(base));
    return Frame{b, tangent_basis(b)};
}

double polygon_area(const SurfaceModel& m) {
    double area = 0.0;
    for (std::size_t k = 1; k + 1 < m.polygon.size(); ++k) {
        area += std::abs(signed_triangle_area(m.polygon[0], m.polygon[k], m.polygon[k + 1]));
    }
    return area;
}

bool in_domain(const V3& x, const SurfaceModel& m, double tol) {
    return std::all_of(m.walls.begin(), m.walls.end(),
                       [&](const V3& w) { return mink(x, w) <= tol; });
}

bool in_polygon(const V3& x, const SurfaceModel& m, double tol) {
    return std::all_of(m.sides.begin(), m.sides.end(),
                       [&](const V3& s) { return mink(x, s) >= -tol; });
}

M3 word_matrix(const SurfaceModel& m, const Word& w) {
    M3 g = M3::Identity();
    for (std::uint8_t k : w) {
        g = g * m.generators[k];
    }
    return g;
}

Reduction reduce_to_domain(const V3& x, const SurfaceModel& m, int max_steps) {
    Reduction r{x, M3::Identity(), {}, 0};
    const std::size_t ng = m.generators.size();
    for (;;) {
        const double here = -mink(r.point, m.base);
        double best = here;
        int arg = -1;
        for (std::size_t k = 0; k < ng; ++k) {
            const double v = -mink(r.point, m.base_images[k]);
            if (v < best) {
                best = v;
                arg = static_cast<int>(k);
            }
        }
        if (arg < 0 || here - best <= 1e-12 * here) {
            return r;
        }
        if (r.steps >= max_steps) {
            throw Error("reduce_to_domain: step budget exceeded");
        }
        const auto k = static_cast<std::size_t>(arg);
        r.point = renormalize(m.generators[static_cast<std::size_t>(m.inverse[k])] * r.point);
        r.gamma = r.gamma * m.generators[k];
        r.word.push_back(static_cast<std::uint8_t>(k));
        ++r.steps;
    }
}

double boundary_signed_distance(const V3& x, const SurfaceModel& m, int* which) {
    if (which) {
        *which = -1;
    }
    if (m.closed()) {
        return std::numeric_limits<double>::infinity();
    }
    double most_outside = 0.0;
    for (std::size_t j = 0; j < m.boundary.size(); ++j) {
        const double s = mink(x, m.boundary[j]);
        if (s < most_outside) {
            most_outside = s;
            if (which) {
                *which = static_cast<int>(j);
            }
        }
    }
    if (most_outside < 0.0) {
        return std::asinh(most_outside);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const V3& n : m.lift_normals) {
        best = std::min(best, std::asinh(mink(x, n)));
    }
    return best;
}

// ----------------------------------------------------------- validation

namespace {

std::vector<Word> words_up_to(std::size_t ngen, const std::vector<int>& inverse, int len) {
    std::vector<Word> out{Word{}};
    std::size_t begin = 0;
    for (int l = 1; l <= len; ++l) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = 0; k < ngen; ++k) {
                const Word& w = out[i];
                if (!w.empty() && inverse[w.back()] == static_cast<int>(k)) {
                    continue;
                }
                Word nw = w;
                nw.push_back(static_cast<std::uint8_t>(k));
                out.push_back(std::move(nw));
            }
        }
        begin = end;
    }
    return out;
}

}  // namespace

SurfaceModel finalize(SurfaceModel m) {
    const std::size_t ng = m.generators.size();
    if (ng == 0) {
        throw Error("model: no generators");
    }
    if (ng > 250) {
        throw Error("model: too many generators");
    }
    for (std::size_t k = 0; k < ng; ++k) {
        const M3& g = m.generators[k];
        const M3 defect = g.transpose() * J3() * g - J3();
        if (max_abs(defect) > 1e-10 * std::max(1.0, max_abs(g) * max_abs(g))) {
            throw Error("model: generator " + std::to_string(k) + " does not preserve the Minkowski form");
        }
        if (!(g(0, 0) > 0.0) || !(g.determinant() > 0.0)) {
            throw Error("model: generator " + std::to_string(k) +
                        " is not an orientation-preserving isometry");
        }
    }
    m.inverse.assign(ng, -1);
    for (std::size_t k = 0; k < ng; ++k) {
        for (std::size_t j = 0; j < ng; ++j) {
            if (max_abs(m.generators[k] * m.generators[j] - M3::Identity()) <= 1e-8) {
                m.inverse[k] = static_cast<int>(j);
                break;
            }
        }
        if (m.inverse[k] < 0) {
            throw Error("model: generators not closed under inverses (generator " +
                        std::to_string(k) + ")");
        }
    }
    if (std::abs(mink(m.base, m.base) + 1.0) > 1e-10 || !(m.base[0] > 0.0)) {
        throw Error("model: base point is not on the hyperboloid");
    }
    m.base = renormalize(m.base);
    m.walls.clear();
    m.base_images.clear();
    for (const M3& g : m.generators) {
        const V3 go = renormalize(g * m.base);
        const V3 v = go - m.base;
        m.base_images.push_back(go);
        m.walls.push_back(v / std::sqrt(mink(v, v)));
    }
    if (m.chi >= 0) {
        throw Error("model: Euler characteristic must be negative");
    }
    m.exact_area = 2.0 * kPi * std::abs(m.chi);

    if (m.polygon.size() < 3) {
        throw Error("model: polygon needs at least 3 vertices");
    }
    for (V3& v : m.polygon) {
        if (std::abs(mink(v, v) + 1.0) > 1e-9 * std::max(1.0, v[0] * v[0]) || !(v[0] > 0.0)) {
            throw Error("model: polygon vertex not on the hyperboloid");
        }
        v = renormalize(v);
    }
    for (V3& n : m.boundary) {
        const double q = mink(n, n);
        if (!(q > 0.0)) {
            throw Error("model: boundary normal is not spacelike");
        }
        n /= std::sqrt(q);
        if (!(mink(m.base, n) > 0.0)) {
            throw Error("model: base point must lie on the core side of every boundary lift");
        }
    }

    const std::size_t nv = m.polygon.size();
    m.sides.clear();
    for (std::size_t k = 0; k < nv; ++k) {
        V3 s = geodesic_normal(m.polygon[k], m.polygon[(k + 1) % nv]);
        if (mink(m.base, s) < 0.0) {
            s = -s;
        }
        m.sides.push_back(s);
    }
    for (std::size_t k = 0; k < nv; ++k) {
        for (std::size_t j = 0; j < nv; ++j) {
            if (mink(m.polygon[j], m.sides[k]) < -1e-9 * std::max(1.0, m.polygon[j][0])) {
                throw Error("model: polygon is not convex around the base point");
            }
        }
    }

    // side pairing: every side not on a boundary lift maps onto another side
    auto on_boundary = [&](const V3& a, const V3& b) {
        return std::any_of(m.boundary.begin(), m.boundary.end(), [&](const V3& n) {
            return std::abs(mink(a, n)) <= 1e-8 * a[0] && std::abs(mink(b, n)) <= 1e-8 * b[0];
        });
    };
    m.boundary_length = 0.0;
    for (std::size_t k = 0; k < nv; ++k) {
        const V3& a = m.polygon[k];
        const V3& b = m.polygon[(k + 1) % nv];
        if (on_boundary(a, b)) {
            m.boundary_length += dist(a, b);
            continue;
        }
        bool paired = false;
        for (std::size_t g = 0; g < ng && !paired; ++g) {
            const V3 ga = m.generators[g] * a;
            const V3 gb = m.generators[g] * b;
            for (std::size_t j = 0; j < nv && !paired; ++j) {
                if (j == k) {
                    continue;
                }
                const V3& c = m.polygon[j];
                const V3& d = m.polygon[(j + 1) % nv];
                paired = (same_point(ga, c, 1e-8) && same_point(gb, d, 1e-8)) ||
                         (same_point(ga, d, 1e-8) && same_point(gb, c, 1e-8));
            }
        }
        if (!paired) {
            throw Error("model: side-pairing check failed for polygon side " + std::to_string(k));
        }
    }
    if (!m.boundary.empty() && !(m.boundary_length > 0.0)) {
        throw Error("model: boundary lifts do not contain polygon sides");
    }

    const double area = polygon_area(m);
    if (std::abs(area - m.exact_area) > 1e-6) {
        throw Error("model: polygon area " + std::to_string(area) +
                    " differs from 2*pi*|chi| = " + std::to_string(m.exact_area));
    }
    m.polygon_radius = 0.0;
    for (const V3& v : m.polygon) {
        m.polygon_radius = std::max(m.polygon_radius, dist(v, m.base));
    }

    m.lift_normals.clear();
    if (!m.boundary.empty()) {
        for (const Word& w : words_up_to(ng, m.inverse, 3)) {
            const M3 g = word_matrix(m, w);
            for (const V3& n : m.boundary) {
                const V3 gn = g * n;
                const bool seen = std::any_of(m.lift_normals.begin(), m.lift_normals.end(),
                                              [&](const V3& o) { return same_point(o, gn, 1e-7); });
                if (!seen) {
                    m.lift_normals.push_back(gn);
                }
            }
        }
    }
    return m;
}

std::vector<Word> reduced_words(const SurfaceModel& m, int max_len) {
    return words_up_to(m.generators.size(), m.inverse, max_len);
}

V3 apply_word(const SurfaceModel& m, const Word& w, const V3& x) {
    V3 y = x;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        y = m.generators[*it] * y;
        const double q = mink(y, y);
        if (q < 0.0) {
            y /= std::sqrt(-q);
        } else if (q > 0.0) {
            y /= std::sqrt(q);
        }
    }
    return y;
}

Word inverse_word(const SurfaceModel& m, const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (std::uint8_t& l : out) {
        l = static_cast<std::uint8_t>(m.inverse[l]);
    }
    return out;
}

Word concat_words(const SurfaceModel& m, const Word& a, const Word& b) {
    Word out = a;
    for (std::uint8_t l : b) {
        if (!out.empty() && m.inverse[out.back()] == static_cast<int>(l)) {
            out.pop_back();
        } else {
            out.push_back(l);
        }
    }
    return out;
}

// ------------------------------------------------------------------ json

namespace {

using nlohmann::json;

V3 vec3(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) {
        throw Error(std::string("model: ") + what + " must be an array of 3 reals");
    }
    return V3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

SurfaceModel model_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("model: invalid JSON: ") + e.what());
    }
    try {
        if (j.value("dim", 2) != 2) {
            throw Error("model: only dim = 2 is supported");
        }
        SurfaceModel m;
        m.name = j.value("name", std::string("unnamed"));
        for (const json& g : j.at("generators")) {
            if (!g.is_array() || g.size() != 9) {
                throw Error("model: generators must be row-major 3x3 arrays");
            }
            M3 mat;
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) {
                    mat(r, c) = g[static_cast<std::size_t>(3 * r + c)].get<double>();
                }
            }
            m.generators.push_back(mat);
        }
        for (const json& p : j.at("polygon")) {
            m.polygon.push_back(vec3(p, "polygon vertex"));
        }
        if (j.contains("boundary")) {
            for (const json& b : j.at("boundary")) {
                m.boundary.push_back(vec3(b, "boundary normal"));
            }
        }
        m.base = j.contains("base") ? vec3(j.at("base"), "base") : origin();
        m.chi = j.at("chi").get<int>();
        return finalize(std::move(m));
    } catch (const json::exception& e) {
        throw Error(std::string("model: malformed document: ") + e.what());
    }
}

SurfaceModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("model: cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json_text(ss.str());
}

std::string model_to_json_text(const SurfaceModel& m) {
    json j;
    j["name"] = m.name;
    j["dim"] = 2;
    j["chi"] = m.chi;
    j["base"] = {m.base[0], m.base[1], m.base[2]};
    j["generators"] = json::array();
    for (const M3& g : m.generators) {
        json row = json::array();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                row.push_back(g(r, c));
            }
        }
        j["generators"].push_back(row);
    }
    j["polygon"] = json::array();
    for (const V3& p : m.polygon) {
        j["polygon"].push_back({p[0], p[1], p[2]});
    }
    j["boundary"] = json::array();
    for (const V3& b : m.boundary) {
        j["boundary"].push_back({b[0], b[1], b[2]});
    }
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- models

SurfaceModel genus2_model() {
    SurfaceModel m;
    m.name = "genus2";
    m.chi = -2;
    const double d = std::acosh(1.0 + std::sqrt(2.0));  // centre to side midpoint
    const double R = std::acosh(3.0 + 2.0 * std::sqrt(2.0));  // centre to vertex
    for (int k = 0; k < 8; ++k) {
        const double a = k * kPi / 4.0;
        m.generators.push_back(rotation(a) * translation_x(2.0 * d) * rotation(-a));
    }
    for (int k = 0; k < 8; ++k) {
        const double a = (k + 0.5) * kPi / 4.0;
        m.polygon.emplace_back(std::cosh(R), std::sinh(R) * std::cos(a), std::sinh(R) * std::sin(a));
    }
    return finalize(std::move(m));
}

SurfaceModel one_holed_torus_model(double boundary_length) {
    if (!(boundary_length > 0.0)) {
        throw Error("one_holed_torus_model: boundary length must be positive");
    }
    SurfaceModel m;
    m.name = "one_holed_torus";
    m.chi = -1;
    // Equal translations of length t along perpendicular axes; with
    // c = cosh^2(t/2) the commutator has SL(2) trace 8c - 4c^2 - 2, which
    // equals -2 cosh(l/2) for boundary length l.
    const double c = 1.0 + std::sqrt(1.0 + (std::cosh(boundary_length / 2.0) - 1.0) / 2.0);
    const double t = 2.0 * std::acosh(std::sqrt(c));
    const M3 A = translation_x(t);
    const M3 B = rotation(kPi / 2.0) * translation_x(t) * rotation(-kPi / 2.0);
    m.generators = {A, B, lorentz_inverse(A), lorentz_inverse(B)};
    // walls only, to locate the boundary lifts crossing D
    SurfaceModel probe = m;
    probe.inverse = {2, 3, 0, 1};
    for (const M3& g : probe.generators) {
        const V3 go = g * probe.base;
        const V3 v = go - probe.base;
        probe.base_images.push_back(go);
        probe.walls.push_back(v / std::sqrt(mink(v, v)));
    }

    // axis of the commutator: eigenvector for eigenvalue 1
    const M3 C = A * B * lorentz_inverse(A) * lorentz_inverse(B);
    Eigen::EigenSolver<M3> es(C);
    int idx = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const double g = std::abs(es.eigenvalues()[i] - 1.0);
        if (g < gap) {
            gap = g;
            idx = i;
        }
    }
    V3 axis = es.eigenvectors().col(idx).real();
    axis /= std::sqrt(mink(axis, axis));
    if (mink(probe.base, axis) < 0.0) {
        axis = -axis;
    }

    auto crosses_domain = [&](const V3& n) {
        const V3 foot = renormalize(probe.base - mink(probe.base, n) * n);
        V3 u = J3() * foot.cross(n);
        u /= std::sqrt(mink(u, u));
        for (double a = -30.0; a <= 30.0; a += 0.002) {
            const V3 x = std::cosh(a) * foot + std::sinh(a) * u;
            if (in_domain(x, probe, -1e-9)) {
                return true;
            }
        }
        return false;
    };
    for (const Word& w : words_up_to(4, probe.inverse, 3)) {
        V3 n = word_matrix(probe, w) * axis;
        if (mink(probe.base, n) < 0.0) {
            n = -n;
        }
        const bool seen = std::any_of(m.boundary.begin(), m.boundary.end(),
                                      [&](const V3& o) { return same_point(o, n, 1e-7); });
        if (!seen && crosses_domain(n)) {
            m.boundary.push_back(n);
        }
    }
    if (m.boundary.size() != 4) {
        throw Error("one_holed_torus_model: expected 4 boundary lifts crossing D, found " +
                    std::to_string(m.boundary.size()));
    }

    // polygon = D cut by the lifts: wall/lift intersection points
    for (const V3& n : m.boundary) {
        for (const V3& w : probe.walls) {
            V3 x = J3() * n.cross(w);
            const double q = -mink(x, x);
            if (!(q > 0.0)) {
                continue;
            }
            x /= std::sqrt(q);
            if (x[0] < 0.0) {
                x = -x;
            }
            const bool inside = in_domain(x, probe, 1e-9) &&
                                std::all_of(m.boundary.begin(), m.boundary.end(), [&](const V3& o) {
                                    return mink(x, o) >= -1e-9;
                                });
            if (inside) {
                m.polygon.push_back(x);
            }
        }
    }
    std::sort(m.polygon.begin(), m.polygon.end(), [](const V3& a, const V3& b) {
        return std::atan2(a[2], a[1]) < std::atan2(b[2], b[1]);
    });
    std::sort(m.boundary.begin(), m.boundary.end(), [](const V3& a, const V3& b) {
        return std::atan2(-a[2], -a[1]) < std::atan2(-b[2], -b[1]);
    });
    return finalize(std::move(m));
}

}  // namespace hypvol::smear
