#include "hypvol/hypgeom.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypvol;

namespace {

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

}  // namespace

TEST_SUITE("hypgeom") {

TEST_CASE("minkowski form values and invariance") {
    CHECK(minkowski(v3(1, 0, 0), v3(1, 0, 0)) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(minkowski(v3(1, 0, 0), v3(std::cosh(1.0), std::sinh(1.0), 0)) ==
          doctest::Approx(-std::cosh(1.0)).epsilon(1e-14));
    CHECK(minkowski(v3(1, 0, 0), v3(std::cosh(1.0), std::sinh(1.0), 0)) ==
          doctest::Approx(-1.54308).epsilon(1e-5));

    Rng rng(1);
    for (int k = 0; k < 20; ++k) {
        const Isometry g = testutil::random_isometry(rng, 2);
        const HPoint x = testutil::random_point(rng, 2, 3.0);
        const HPoint y = testutil::random_point(rng, 2, 3.0);
        const double before = minkowski(x.coords(), y.coords());
        const double after = minkowski(g.apply_vec(x.coords()), g.apply_vec(y.coords()));
        CHECK(after == doctest::Approx(before).epsilon(1e-10));
    }
}

TEST_CASE("distance") {
    const HPoint o = HPoint::origin(2);
    CHECK(distance(o, o) == 0.0);
    const HPoint p = HPoint::from_coords(v3(std::cosh(2.0), std::sinh(2.0), 0));
    CHECK(distance(o, p) == doctest::Approx(2.0).epsilon(1e-13));

    Rng rng(2);
    for (int k = 0; k < 50; ++k) {
        const Isometry g = testutil::random_isometry(rng, 3);
        const HPoint x = testutil::random_point(rng, 3, 4.0);
        const HPoint y = testutil::random_point(rng, 3, 4.0);
        CHECK(distance(g.apply(x), g.apply(y)) == doctest::Approx(distance(x, y)).epsilon(1e-9));
    }
    // tiny separations must not be swallowed by acosh near 1
    const HPoint q = HPoint::polar(1e-9, v3(0, 1, 0).tail(2));
    CHECK(distance(o, q) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("geodesic_point") {
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        const HPoint x = testutil::random_point(rng, 2, 3.0);
        const HPoint y = testutil::random_point(rng, 2, 3.0);
        CHECK(distance(geodesic_point(x, y, 0.0), x) < 1e-10);
        CHECK(distance(geodesic_point(x, y, 1.0), y) < 1e-10);
        const double t = uniform01(rng);
        const HPoint z = geodesic_point(x, y, t);
        CHECK(distance(x, z) == doctest::Approx(t * distance(x, y)).epsilon(1e-9));
    }
    // midpoint from the normalized sum, computed without the library
    const HPoint a = HPoint::polar(1.0, v3(0, 1, 0).tail(2));
    const HPoint b = HPoint::polar(1.0, v3(0, -0.6, 0.8).tail(2));
    Vec s = a.coords() + b.coords();
    s /= std::sqrt(-minkowski(s, s));
    const HPoint m = geodesic_point(a, b, 0.5);
    CHECK((m.coords() - s).norm() < 1e-12);
    const HPoint p = HPoint::origin(2);
    const HPoint q = HPoint::polar(2.0, v3(0, 1, 0).tail(2));
    const HPoint mid = geodesic_point(p, q, 0.5);
    CHECK(distance(mid, p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(distance(mid, q) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("straight_eval vertices, edges and convexity in the Klein model") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<HPoint> pts;
        for (int i = 0; i < 3; ++i) {
            pts.push_back(testutil::random_point(rng, 2, 3.0));
        }
        const GeodesicSimplex s = GeodesicSimplex::finite(pts);
        double w0 = uniform01(rng);
        double w1 = uniform01(rng);
        if (w0 + w1 > 1.0) {
            w0 = 1.0 - w0;
            w1 = 1.0 - w1;
        }
        const HPoint p = straight_eval(s, BarycentricPoint::make({w0, w1, 1.0 - w0 - w1}));
        // Euclidean barycentric coordinates of the Klein image
        Eigen::Matrix3d a;
        for (int i = 0; i < 3; ++i) {
            const Vec u = to_klein(pts[static_cast<std::size_t>(i)]);
            a(0, i) = u[0];
            a(1, i) = u[1];
            a(2, i) = 1.0;
        }
        const Vec u = to_klein(p);
        const Eigen::Vector3d lam = a.fullPivLu().solve(Eigen::Vector3d(u[0], u[1], 1.0));
        CHECK(lam.minCoeff() >= -1e-9);
    }
    std::vector<HPoint> pts{HPoint::origin(2), HPoint::polar(1.0, v3(0, 1, 0).tail(2)),
                            HPoint::polar(2.0, v3(0, 0, 1).tail(2))};
    const GeodesicSimplex s = GeodesicSimplex::finite(pts);
    for (int i = 0; i < 3; ++i) {
        CHECK(distance(straight_eval(s, BarycentricPoint::vertex(2, i)), pts[static_cast<std::size_t>(i)]) < 1e-12);
    }
    const GeodesicSimplex edge = GeodesicSimplex::finite({pts[0], pts[2]});
    const HPoint e = straight_eval(edge, BarycentricPoint::make({0.3, 0.7}));
    CHECK(distance(e, geodesic_point(pts[0], pts[2], 0.7)) < 1e-12);
}

TEST_CASE("Klein coordinates") {
    CHECK(to_klein(HPoint::origin(2)).norm() == 0.0);
    const Vec u = to_klein(HPoint::from_coords(v3(std::cosh(1.0), std::sinh(1.0), 0)));
    CHECK(u[0] == doctest::Approx(std::tanh(1.0)).epsilon(1e-14));
    CHECK(u[0] == doctest::Approx(0.76159).epsilon(1e-5));
    CHECK(u[1] == 0.0);
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
        const HPoint p = testutil::random_point(rng, 3, 5.0);
        const HPoint back = HPoint::from_klein(to_klein(p));
        CHECK((back.coords() - p.coords()).norm() < 1e-9 * p[0]);
    }
    CHECK_THROWS_AS(HPoint::from_klein(v3(1.0, 0.0, 0.0).head(2)), Error);
}

TEST_CASE("frame_to_isometry") {
    const Isometry id = frame_to_isometry(Frame::reference(3));
    CHECK((id.matrix() - Mat::Identity(4, 4)).norm() < 1e-14);

    Rng rng(6);
    for (int k = 0; k < 10; ++k) {
        const Isometry g = testutil::random_isometry(rng, 2);
        const Isometry h = testutil::random_isometry(rng, 2);
        Frame f{h.apply(HPoint::origin(2)), {}};
        for (int i = 1; i <= 2; ++i) {
            f.tangent.push_back(h.matrix().col(i));
        }
        const Isometry fh = frame_to_isometry(f);
        CHECK((fh.apply(HPoint::origin(2)).coords() - f.base.coords()).norm() < 1e-10 * f.base[0]);
        Frame gf{g.apply(f.base), {}};
        for (const Vec& t : f.tangent) {
            gf.tangent.push_back(g.apply_vec(t));
        }
        const Mat lhs = frame_to_isometry(gf).matrix();
        const Mat rhs = (g * fh).matrix();
        CHECK((lhs - rhs).norm() < 1e-9 * rhs.norm());
    }
}

TEST_CASE("orientation and isometry validation") {
    std::vector<HPoint> pts{HPoint::origin(2), HPoint::polar(1.0, v3(0, 1, 0).tail(2)),
                            HPoint::polar(1.0, v3(0, 0, 1).tail(2))};
    const GeodesicSimplex s = GeodesicSimplex::finite(pts);
    const int o = orientation(s);
    CHECK(std::abs(o) == 1);
    const std::vector<int> swap{1, 0, 2};
    const std::vector<int> cyc{1, 2, 0};
    CHECK(orientation(s.permuted(swap)) == -o);
    CHECK(orientation(s.permuted(cyc)) == o);
    CHECK(orientation(s.transformed(Isometry::reflection(2, 2))) == -o);
    CHECK(Isometry::reflection(2, 1).orientation() == -1);

    Mat bad = Mat::Identity(3, 3);
    bad(0, 1) = 0.5;
    CHECK_THROWS_AS(Isometry::from_matrix(bad), Error);
    CHECK_THROWS_AS(HPoint::from_coords(v3(-2.0, 0.0, 0.0)), Error);
    CHECK_THROWS_AS(HPoint::from_coords(v3(1.0, 2.0, 0.0)), Error);

    const Isometry g = Isometry::boost_to(HPoint::polar(1.5, v3(0, 0.6, 0.8).tail(2)));
    CHECK(((g * g.inverse()).matrix() - Mat::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("exp_map is radially isometric") {
    Rng rng(7);
    for (int k = 0; k < 20; ++k) {
        const HPoint p = testutil::random_point(rng, 3, 3.0);
        const std::vector<Vec> basis = tangent_basis(p);
        Vec v = Vec::Zero(4);
        const Vec d = testutil::unit_dir(rng, 3);
        for (int i = 0; i < 3; ++i) {
            v += d[i] * basis[static_cast<std::size_t>(i)];
        }
        const double r = 2.0 * uniform01(rng);
        CHECK(distance(p, exp_map(p, r * v)) == doctest::Approx(r).epsilon(1e-9));
    }
}

}  // TEST_SUITE
