#include "hypvol/bounds.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace hypvol {

double tube_factor(int n, double t) {
    if (n < 1) {
        throw Error("tube_factor: need n >= 1");
    }
    if (!(t >= 0.0)) {
        throw Error("tube_factor: need t >= 0");
    }
    const int m = n - 1;
    const double ch = std::cosh(t);
    const double sh = std::sinh(t);
    // I_j = int_0^t cosh^j, from I_0 = t or I_1 = sinh t upwards
    double I = (m % 2 == 0) ? t : sh;
    double chp = (m % 2 == 0) ? 1.0 / ch : 1.0;  // cosh^{j-1} for the current j
    for (int j = (m % 2 == 0) ? 2 : 3; j <= m; j += 2) {
        chp *= ch * ch;
        I = chp * sh / j + (j - 1.0) / j * I;
    }
    return 2.0 * I;
}

namespace {

Vec project_ball(const Vec& v) {
    const double nv = v.norm();
    return nv > 1.0 ? Vec(v / nv) : v;
}

struct PerturbedRegular {
    int n;
    double L;
    std::vector<HPoint> base;
    std::vector<std::vector<Vec>> basis;
    QuadratureSpec q;

    PerturbedRegular(int n_, double L_, const QuadratureSpec& q_) : n(n_), L(L_), q(q_) {
        const GeodesicSimplex reg = regular_simplex(n, L);
        for (int i = 0; i <= n; ++i) {
            base.push_back(reg.finite_vertex(i));
            basis.push_back(tangent_basis(base.back()));
        }
    }

    GeodesicSimplex realize(const double* x) const {
        std::vector<HPoint> pts;
        pts.reserve(static_cast<std::size_t>(n + 1));
        for (int i = 0; i <= n; ++i) {
            Vec v = Eigen::Map<const Vec>(x + static_cast<std::ptrdiff_t>(i) * n, n);
            v = project_ball(v);
            Vec w = Vec::Zero(n + 1);
            for (int k = 0; k < n; ++k) {
                w += v[k] * basis[i][k];
            }
            pts.push_back(exp_map(base[i], w));
        }
        return GeodesicSimplex::finite(pts);
    }

    double signed_value(const GeodesicSimplex& s) const {
        if (n == 2) {
            const Eigen::Vector3d a = s.finite_vertex(0).coords();
            const Eigen::Vector3d b = s.finite_vertex(1).coords();
            const Eigen::Vector3d c = s.finite_vertex(2).coords();
            return signed_triangle_area(a, b, c);
        }
        if (n == 3) {
            return signed_tetrahedron_volume(s);
        }
        return signed_volume(s, q);
    }

    double operator()(const double* x) const { return signed_value(realize(x)); }
};

struct NMContext {
    const PerturbedRegular* obj;
    long evaluations = 0;
};

double nm_objective(const gsl_vector* x, void* params) {
    auto* ctx = static_cast<NMContext*>(params);
    ++ctx->evaluations;
    std::vector<double> buf(x->size);
    for (std::size_t i = 0; i < x->size; ++i) {
        buf[i] = gsl_vector_get(x, i);
    }
    return (*ctx->obj)(buf.data());
}

struct GslMinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct GslVectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

struct LocalResult {
    std::vector<double> x;
    double value;
};

// Nelder-Mead from x0, restarted from its own optimum until the value stops
// improving (guards against a collapsed simplex).
LocalResult local_minimize(NMContext& ctx, std::vector<double> x0, const VLOptions& opts) {
    const std::size_t dim = x0.size();
    std::unique_ptr<gsl_multimin_fminimizer, GslMinimizerDeleter> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
    std::unique_ptr<gsl_vector, GslVectorDeleter> x(gsl_vector_alloc(dim));
    std::unique_ptr<gsl_vector, GslVectorDeleter> step(gsl_vector_alloc(dim));
    gsl_multimin_function fn{&nm_objective, dim, &ctx};

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_x = x0;
    double step_size = 0.25;
    for (int round = 0; round < 4; ++round) {
        for (std::size_t i = 0; i < dim; ++i) {
            gsl_vector_set(x.get(), i, best_x[i]);
        }
        gsl_vector_set_all(step.get(), step_size);
        gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
        int iter = 0;
        int status = GSL_CONTINUE;
        while (status == GSL_CONTINUE && iter < opts.max_iterations) {
            ++iter;
            if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) {
                break;
            }
            status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()),
                                            opts.optimizer_tol);
        }
        const double val = gsl_multimin_fminimizer_minimum(m.get());
        if (!std::isfinite(val)) {
            throw Error("vl_estimate: optimizer produced a non-finite value");
        }
        const bool improved = val < best - 1e-12;
        if (val < best) {
            best = val;
            const gsl_vector* xm = gsl_multimin_fminimizer_x(m.get());
            for (std::size_t i = 0; i < dim; ++i) {
                best_x[i] = gsl_vector_get(xm, i);
            }
        }
        if (!improved && round > 0) {
            break;
        }
        step_size *= 0.5;
    }
    // store the projected point so the reported perturbation is feasible
    const int n = ctx.obj->n;
    for (int i = 0; i <= n; ++i) {
        Vec v = Eigen::Map<Vec>(best_x.data() + static_cast<std::ptrdiff_t>(i) * n, n);
        v = project_ball(v);
        for (int k = 0; k < n; ++k) {
            best_x[static_cast<std::size_t>(i * n + k)] = v[k];
        }
    }
    return {best_x, (*ctx.obj)(best_x.data())};
}

// Inward radial unit vector at regular vertex i, in its boosted basis. The
// boost of e_1..e_n maps the radial direction u_i to u_i itself.
std::vector<double> symmetric_radial(const PerturbedRegular& obj, double t) {
    const int n = obj.n;
    std::vector<double> x(static_cast<std::size_t>(n * (n + 1)));
    for (int i = 0; i <= n; ++i) {
        Vec u = obj.base[i].coords().tail(n);
        u.normalize();
        for (int k = 0; k < n; ++k) {
            x[static_cast<std::size_t>(i * n + k)] = -t * u[k];
        }
    }
    return x;
}

std::vector<double> random_ball_point(int n, Rng& rng) {
    std::normal_distribution<double> gauss;
    std::vector<double> x(static_cast<std::size_t>(n * (n + 1)));
    for (int i = 0; i <= n; ++i) {
        Vec d(n);
        for (int k = 0; k < n; ++k) {
            d[k] = gauss(rng);
        }
        d.normalize();
        const double r = std::pow(uniform01(rng), 1.0 / n);
        for (int k = 0; k < n; ++k) {
            x[static_cast<std::size_t>(i * n + k)] = r * d[k];
        }
    }
    return x;
}

const bool gsl_handler_off = [] {
    gsl_set_error_handler_off();
    return true;
}();

}  // namespace

double perturbed_signed_volume(int n, double L, const std::vector<Vec>& perturbation,
                               const QuadratureSpec& q) {
    if (static_cast<int>(perturbation.size()) != n + 1) {
        throw Error("perturbed_signed_volume: need n + 1 perturbation vectors");
    }
    PerturbedRegular obj(n, L, q);
    std::vector<double> x;
    for (const Vec& v : perturbation) {
        if (v.size() != n) {
            throw Error("perturbed_signed_volume: perturbation vectors must have length n");
        }
        x.insert(x.end(), v.data(), v.data() + n);
    }
    return obj(x.data());
}

VLEstimate vl_estimate(int n, double L, const VLOptions& opts) {
    (void)gsl_handler_off;
    if (n < 2) {
        throw Error("vl_estimate: need n >= 2");
    }
    if (!(L > 0.0)) {
        throw Error("vl_estimate: need L > 0");
    }
    if (opts.restarts < 1) {
        throw Error("vl_estimate: need restarts >= 1");
    }
    const PerturbedRegular obj(n, L, opts.quadrature);
    NMContext ctx{&obj};

    VLEstimate out;
    out.n = n;
    out.L = L;
    out.restarts = opts.restarts;
    out.seed = opts.seed;
    out.optimizer_tol = opts.optimizer_tol;

    const std::vector<double> zero(static_cast<std::size_t>(n * (n + 1)), 0.0);
    out.regular_value = obj(zero.data());

    double oracle = out.regular_value;
    const int g = std::max(opts.oracle_points, 2);
    for (int k = 0; k < g; ++k) {
        const double t = -1.0 + 2.0 * k / (g - 1.0);
        const std::vector<double> x = symmetric_radial(obj, t);
        oracle = std::min(oracle, obj(x.data()));
    }
    out.oracle_value = oracle;

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_x = zero;
    for (int r = 0; r < opts.restarts; ++r) {
        std::vector<double> x0;
        if (r == 0) {
            x0 = zero;
        } else if (r == 1) {
            x0 = symmetric_radial(obj, 1.0);
        } else {
            Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
            x0 = random_ball_point(n, rng);
        }
        const LocalResult lr = local_minimize(ctx, std::move(x0), opts);
        if (lr.value < best) {  // strict: earlier restart wins ties
            best = lr.value;
            best_x = lr.x;
            out.best_restart = r;
        }
    }
    out.value = best;
    out.evaluations = ctx.evaluations;
    for (int i = 0; i <= n; ++i) {
        out.best_perturbation.emplace_back(
            Eigen::Map<Vec>(best_x.data() + static_cast<std::ptrdiff_t>(i) * n, n));
    }
    out.quadrature_value = std::numeric_limits<double>::quiet_NaN();
    if (opts.quadrature_check && n <= 3) {
        const GeodesicSimplex s = obj.realize(best_x.data());
        out.quadrature_value = signed_volume(s, QuadratureSpec{1e-9, 200000, 5});
        if (std::abs(out.quadrature_value - out.value) > 1e-6) {
            throw Error("vl_estimate: closed-form objective disagrees with quadrature at the "
                        "minimizer (" + std::to_string(out.value) + " vs " +
                        std::to_string(out.quadrature_value) + ")");
        }
    }
    return out;
}

double l0_estimate(int n, const L0Options& opts) {
    VLOptions vlo = opts.vl;
    vlo.quadrature_check = false;
    auto positive = [&](double L) { return vl_estimate(n, L, vlo).value > opts.margin; };
    double prev = opts.start - opts.step;
    for (double L = opts.start; L <= opts.limit + 1e-12; L += opts.step) {
        if (positive(L)) {
            if (L == opts.start) {
                return L;
            }
            double lo = prev;
            double hi = L;
            while (hi - lo > opts.resolution) {
                const double mid = 0.5 * (lo + hi);
                (positive(mid) ? hi : lo) = mid;
            }
            return hi;
        }
        prev = L;
    }
    throw Error("l0_estimate: no L below " + std::to_string(opts.limit) +
                " with positive V_L");
}

double gap_bound(int n, double L, double r, double vl_value) {
    if (!(r >= 0.0)) {
        throw Error("gap_bound: need r >= 0");
    }
    if (r == 0.0) {
        return vl_value;
    }
    return (1.0 - r * tube_factor(n, L + 3.0)) / (1.0 + r * tube_factor(n, L)) * vl_value;
}

double gap_bound(int n, double L, double r, const VLEstimate& vl) {
    return gap_bound(n, L, r, vl.value);
}

namespace {

// Volume of the unperturbed regular simplex; an upper bound for V_L.
double regular_upper(int n, double L, const VLOptions& opts) {
    if (n == 2) {
        return gauss_bonnet_area(TriangleSides{L, L, L});
    }
    if (n == 3) {
        return tetrahedron_volume(regular_simplex(3, L));
    }
    return regular_simplex_volume(n, L, opts.quadrature).value;
}

}  // namespace

GapCertificate solve_k(int n, double eta, const SolveOptions& opts) {
    const VolumeConstants vc = ideal_regular_volume(n, QuadratureSpec{}, opts.vn_l_top);
    if (!(eta > 0.0 && eta < vc.v_n)) {
        throw Error("solve_k: need 0 < eta < v_n");
    }
    GapCertificate cert;
    cert.n = n;
    cert.eta = eta;
    cert.v_n = vc.v_n;
    L0Options l0o = opts.l0;
    l0o.vl = opts.vl;
    cert.L0 = l0_estimate(n, l0o);
    const double target = vc.v_n - eta / 2.0;
    for (double L = cert.L0; L <= opts.limit + 1e-12; L += opts.step) {
        if (regular_upper(n, L, opts.vl) <= target) {
            continue;
        }
        VLEstimate vl = vl_estimate(n, L, opts.vl);
        if (vl.value > target) {
            cert.L1 = L;
            cert.vL1 = std::move(vl);
            cert.c = (vc.v_n - eta) / (vc.v_n - eta / 2.0);
            cert.k = (1.0 - cert.c) /
                     (tube_factor(n, L + 3.0) + cert.c * tube_factor(n, L));
            cert.bound_value = gap_bound(n, L, cert.k, cert.vL1);
            return cert;
        }
    }
    throw Error("solve_k: no L_1 below " + std::to_string(opts.limit) +
                " reaches v_n - eta/2 (quadrature/optimizer accuracy insufficient)");
}

CertificateCheck validate_certificate(const GapCertificate& cert, double tol) {
    CertificateCheck out;
    out.recomputed_bound = gap_bound(cert.n, cert.L1, cert.k, cert.vL1.value);
    const double c = (cert.v_n - cert.eta) / (cert.v_n - cert.eta / 2.0);
    const double lhs = (1.0 - cert.k * tube_factor(cert.n, cert.L1 + 3.0)) /
                       (1.0 + cert.k * tube_factor(cert.n, cert.L1));
    out.identity_residual = std::abs(lhs - c);
    if (std::abs(out.recomputed_bound - cert.bound_value) > tol) {
        out.message = "bound_value does not reproduce";
    } else if (!(cert.bound_value >= cert.v_n - cert.eta)) {
        out.message = "bound_value below v_n - eta";
    } else if (!(cert.k > 0.0)) {
        out.message = "k not positive";
    } else if (!(cert.vL1.value > cert.v_n - cert.eta / 2.0)) {
        out.message = "V_L1 not above v_n - eta/2";
    } else if (out.identity_residual > 1e-10) {
        out.message = "k does not invert the gap factor";
    } else {
        out.ok = true;
    }
    return out;
}

VLTable vl_table(int n, const std::vector<double>& grid, const VLOptions& opts) {
    VLTable t;
    t.n = n;
    for (double L : grid) {
        t.L.push_back(L);
        t.value.push_back(vl_estimate(n, L, opts).value);
    }
    return t;
}

VLTable default_vl_table(int n, double span, const VLOptions& opts) {
    L0Options l0o;
    l0o.vl = opts;
    const double l0 = l0_estimate(n, l0o);
    std::vector<double> grid;
    for (double L = l0; L <= l0 + span + 1e-12; L += 0.5) {
        grid.push_back(L);
    }
    return vl_table(n, grid, opts);
}

BestBound best_gap_bound(const VLTable& table, double r) {
    if (table.L.empty()) {
        throw Error("best_gap_bound: empty table");
    }
    BestBound best{-std::numeric_limits<double>::infinity(), table.L.front()};
    for (std::size_t i = 0; i < table.L.size(); ++i) {
        const double b = gap_bound(table.n, table.L[i], r, table.value[i]);
        if (b > best.bound) {
            best = {b, table.L[i]};
        }
    }
    return best;
}

std::vector<GlueRow> gluing_ratio_sequence(double volM, double volB0, int imax,
                                           const VLTable& table) {
    if (!(volM > 0.0 && volB0 > 0.0)) {
        throw Error("gluing_ratio_sequence: need volM > 0 and volB0 > 0");
    }
    if (imax < 1) {
        throw Error("gluing_ratio_sequence: need imax >= 1");
    }
    std::vector<GlueRow> rows;
    for (int i = 1; i <= imax; ++i) {
        // vol(M_i) = 2i vol(M), vol(boundary M_i) = 2 vol(B_0)
        const double r = (2.0 * volB0) / (2.0 * i * volM);
        const BestBound b = best_gap_bound(table, r);
        rows.push_back({i, r, b.bound, b.L});
    }
    return rows;
}

}  // namespace hypvol
