#include "hypvol/bounds.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hypvol;

namespace {

constexpr double pi = std::numbers::pi;

// Composite Simpson rule for 2 * int_0^t cosh^{n-1}; the step count is chosen
// so the fourth-derivative error term stays far below 1e-10 relative.
double tube_simpson(int n, double t) {
    if (t == 0.0) {
        return 0.0;
    }
    const int m = 20000;
    const double h = t / m;
    const auto f = [&](double s) { return std::pow(std::cosh(s), n - 1); };
    double acc = f(0.0) + f(t);
    for (int i = 1; i < m; ++i) {
        acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
    }
    return 2.0 * acc * h / 3.0;
}

// Equilateral triangle area from its circumradius r: side from the law of
// cosines, then the angle defect.
double equilateral_area_from_circumradius(double r) {
    const double ca = std::cosh(r) * std::cosh(r) + 0.5 * std::sinh(r) * std::sinh(r);
    const double a = std::acosh(ca);
    const double alpha = std::acos(std::cosh(a) / (1.0 + std::cosh(a)));
    return pi - 3.0 * alpha;
}

double side(const Vec& x, const Vec& y) {
    return std::acosh(std::max(1.0, -minkowski(x, y)));
}

// Area of the perturbed regular triangle, by hand: exp map in closed form,
// sides from the Minkowski form, angles from the law of cosines.
double perturbed_area_by_hand(double L, const std::vector<Vec>& pert) {
    const GeodesicSimplex s = regular_simplex(2, L);
    std::vector<Vec> p;
    for (int i = 0; i < 3; ++i) {
        const HPoint q = s.finite_vertex(i);
        const std::vector<Vec> basis = tangent_basis(q);
        Vec v = pert[static_cast<std::size_t>(i)][0] * basis[0] + pert[static_cast<std::size_t>(i)][1] * basis[1];
        const double r = std::sqrt(std::max(0.0, minkowski(v, v)));
        p.push_back(r == 0.0 ? q.coords() : Vec(std::cosh(r) * q.coords() + std::sinh(r) / r * v));
    }
    const double a = side(p[1], p[2]);
    const double b = side(p[0], p[2]);
    const double c = side(p[0], p[1]);
    const auto angle = [](double opp, double x, double y) {
        return std::acos(std::clamp((std::cosh(x) * std::cosh(y) - std::cosh(opp)) / (std::sinh(x) * std::sinh(y)), -1.0, 1.0));
    };
    const double area = pi - angle(a, b, c) - angle(b, a, c) - angle(c, a, b);
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
        m.col(i) = p[static_cast<std::size_t>(i)];
    }
    return m.determinant() >= 0.0 ? area : -area;
}

VLOptions quick(int restarts = 8, std::uint64_t seed = kDefaultSeed) {
    VLOptions o;
    o.restarts = restarts;
    o.seed = seed;
    return o;
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("tube_factor closed forms and quadrature") {
    CHECK(tube_factor(2, 0.0) == 0.0);
    CHECK(tube_factor(5, 0.0) == 0.0);
    CHECK(tube_factor(2, 1.0) == doctest::Approx(2.0 * std::sinh(1.0)).epsilon(1e-15));
    CHECK(tube_factor(2, 1.0) == doctest::Approx(2.35040).epsilon(1e-5));
    for (double t = 0.5; t <= 10.0; t += 0.5) {
        CHECK(tube_factor(3, t) == doctest::Approx(t + std::sinh(t) * std::cosh(t)).epsilon(1e-13));
        for (int n = 2; n <= 8; ++n) {
            CHECK(tube_factor(n, t) == doctest::Approx(tube_simpson(n, t)).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(tube_factor(2, -1.0), Error);
}

TEST_CASE("perturbed_signed_volume matches a hand computation") {
    Rng rng(21);
    for (int k = 0; k < 20; ++k) {
        std::vector<Vec> pert;
        for (int i = 0; i < 3; ++i) {
            pert.push_back(uniform01(rng) * testutil::unit_dir(rng, 2));
        }
        const double lib = perturbed_signed_volume(2, 6.0, pert);
        CHECK(lib == doctest::Approx(perturbed_area_by_hand(6.0, pert)).epsilon(1e-9));
    }
}

TEST_CASE("vl_estimate for n = 2") {
    const VLEstimate e6 = vl_estimate(2, 6.0, quick());
    CHECK(e6.value <= e6.regular_value);
    CHECK(e6.value > 0.0);
    CHECK(e6.value < pi);
    for (const Vec& v : e6.best_perturbation) {
        CHECK(v.norm() <= 1.0 + 1e-12);
    }
    CHECK(perturbed_signed_volume(2, 6.0, e6.best_perturbation) == doctest::Approx(e6.value).epsilon(1e-9));

    // pulling every vertex straight inwards by 1 is feasible
    const double inward = equilateral_area_from_circumradius(regular_circumradius(2, 6.0) - 1.0);
    CHECK(e6.value <= inward + 1e-9);

    // random search cannot beat the optimizer
    Rng rng(22);
    double best = 1e9;
    for (int k = 0; k < 20000; ++k) {
        std::vector<Vec> pert;
        for (int i = 0; i < 3; ++i) {
            pert.push_back(std::sqrt(uniform01(rng)) * testutil::unit_dir(rng, 2));
        }
        best = std::min(best, perturbed_area_by_hand(6.0, pert));
    }
    CHECK(e6.value <= best + 1e-9);

    const VLEstimate e12 = vl_estimate(2, 12.0, quick());
    CHECK(e12.value >= 3.08);
    CHECK(e12.value <= equilateral_area_from_circumradius(regular_circumradius(2, 12.0) - 1.0) + 1e-9);
    CHECK(e12.value >= e6.value);

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        CHECK(std::abs(vl_estimate(2, 6.0, quick(4, seed)).value - e6.value) <= 0.25);
    }
}

TEST_CASE("vl_estimate is deterministic for a fixed seed") {
    const VLEstimate a = vl_estimate(2, 5.0, quick(3, 77));
    const VLEstimate b = vl_estimate(2, 5.0, quick(3, 77));
    CHECK(a.value == b.value);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("l0_estimate") {
    L0Options o;
    o.vl = quick(4);
    const double l0 = l0_estimate(2, o);
    CHECK(l0 > 2.0);
    CHECK(vl_estimate(2, l0 + 1.0, quick(4)).value > 0.0);
}

TEST_CASE("gap_bound") {
    const VLEstimate e = vl_estimate(2, 8.0, quick());
    CHECK(gap_bound(2, 8.0, 0.0, e) == e.value);
    double prev = gap_bound(2, 8.0, 0.0, e);
    for (double r : {1e-6, 1e-5, 1e-4, 1e-3}) {
        const double b = gap_bound(2, 8.0, r, e);
        CHECK(b < prev);
        prev = b;
    }
    const double r = 1e-4;
    const double direct = (1.0 - r * 2.0 * std::sinh(11.0)) / (1.0 + r * 2.0 * std::sinh(8.0)) * e.value;
    CHECK(gap_bound(2, 8.0, r, e) == doctest::Approx(direct).epsilon(1e-13));
    CHECK_THROWS_AS(gap_bound(2, 8.0, -1.0, e), Error);
}

TEST_CASE("solve_k certificates") {
    SolveOptions o;
    o.vl = quick();
    o.l0.vl = o.vl;
    const GapCertificate c1 = solve_k(2, 0.1, o);
    const GapCertificate c2 = solve_k(2, 0.01, o);
    for (const GapCertificate& c : {c1, c2}) {
        CHECK(c.bound_value >= c.v_n - c.eta);
        const double lhs = (1.0 - c.k * tube_factor(2, c.L1 + 3.0)) / (1.0 + c.k * tube_factor(2, c.L1));
        CHECK(std::abs(lhs - c.c) <= 1e-10);
        CHECK(std::abs(c.c - (c.v_n - c.eta) / (c.v_n - c.eta / 2.0)) <= 1e-12);
        CHECK(validate_certificate(c).ok);
    }
    CHECK(c2.k < c1.k);

    GapCertificate bad = c1;
    bad.bound_value += 1e-6;
    CHECK_FALSE(validate_certificate(bad).ok);
    bad = c1;
    bad.k *= 2.0;
    CHECK_FALSE(validate_certificate(bad).ok);
    CHECK_THROWS_AS(solve_k(2, 4.0, o), Error);
}

TEST_CASE("bound tables and gluing sequences") {
    const VLTable t = vl_table(2, {3.0, 4.0, 5.0, 6.0, 7.0, 8.0}, quick(4));
    double best_vl = 0.0;
    for (double v : t.value) {
        best_vl = std::max(best_vl, v);
    }
    CHECK(best_gap_bound(t, 0.0).bound == best_vl);

    const std::vector<GlueRow> rows = gluing_ratio_sequence(20.0, 0.01, 16, t);
    REQUIRE(rows.size() == 16);
    CHECK(rows[0].r == doctest::Approx(0.01 / 20.0).epsilon(1e-15));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].i == static_cast<int>(i) + 1);
        CHECK(rows[i].r == doctest::Approx(rows[0].r / rows[i].i).epsilon(1e-14));
        if (2 * i + 1 < rows.size()) {
            CHECK(rows[2 * i + 1].r == doctest::Approx(rows[i].r / 2.0).epsilon(1e-14));
        }
        if (i > 0) {
            CHECK(rows[i].bound >= rows[i - 1].bound);
        }
        CHECK(rows[i].bound ==
              doctest::Approx(best_gap_bound(t, rows[i].r).bound).epsilon(1e-15));
    }
}

}  // TEST_SUITE
