// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "hypvol/io.hpp"
#include "hypvol/report.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

using namespace hypvol;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 6) { return io::format_number(x, digits); }

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail
              << "; " << fmt(secs, 3) << " s of " << fmt(budget_s, 4) << " s" << (in_time ? "" : ", over budget")
              << "]" << std::endl;
}

Vec dir2(double a) {
    Vec d(2);
    d << std::cos(a), std::sin(a);
    return d;
}

double lobachevsky_fourier(double t) {
    double s = 0.0;
    for (int k = 4000000; k >= 1; --k) {
        const double kk = static_cast<double>(k);
        s += std::sin(2.0 * kk * t) / (kk * kk);
    }
    return 0.5 * s;
}

double tube_simpson(int n, double t) {
    const int m = 20000;
    const double h = t / m;
    const auto f = [&](double s) { return std::pow(std::cosh(s), n - 1); };
    double acc = f(0.0) + f(t);
    for (int i = 1; i < m; ++i) {
        acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
    }
    return 2.0 * acc * h / 3.0;
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    std::cout << "hypvol acceptance run, seed " << kDefaultSeed << std::endl;

    criterion(1, "quadrature vs angle defect on 100 random triangles", 10.0, [] {
        Rng rng(kDefaultSeed);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            std::vector<HPoint> p;
            for (int i = 0; i < 3; ++i) {
                // uniform in the hyperbolic disk of radius 3
                const double r = std::acosh(1.0 + uniform01(rng) * (std::cosh(3.0) - 1.0));
                p.push_back(HPoint::polar(r, dir2(2.0 * pi * uniform01(rng))));
            }
            const double q = klein_volume(GeodesicSimplex::finite(p)).value;
            const double gb = gauss_bonnet_area(
                TriangleSides{distance(p[1], p[2]), distance(p[0], p[2]), distance(p[0], p[1])});
            worst = std::max(worst, std::abs(q - gb));
        }
        return Outcome{worst <= 1e-6, "max |klein - defect| = " + fmt(worst, 3)};
    });

    criterion(2, "v3 from the Lobachevsky series and from extrapolated regular volumes", 60.0, [] {
        const double v3 = ideal_regular_volume(3).v_n;
        const double oracle = 3.0 * lobachevsky_fourier(pi / 3.0);
        const std::vector<double> grid = default_extrapolation_grid();
        const ExtrapolationResult ex = extrapolate_regular_volume(3, grid);
        const bool ok = std::abs(v3 - oracle) <= 1e-9 && std::abs(ex.value - v3) <= 1e-3;
        return Outcome{ok, "v3 = " + fmt(v3, 10) + ", Fourier oracle = " + fmt(oracle, 10) +
                               ", extrapolated = " + fmt(ex.value, 10)};
    });

    criterion(3, "tube_factor vs direct quadrature, n = 2..8, t = 0.5..10", 5.0, [] {
        double worst_abs = 0.0;
        double worst_scaled = 0.0;
        for (int n = 2; n <= 8; ++n) {
            for (int j = 1; j <= 20; ++j) {
                const double t = 0.5 * j;
                const double ref = tube_simpson(n, t);
                const double err = std::abs(tube_factor(n, t) - ref);
                worst_abs = std::max(worst_abs, err);
                worst_scaled = std::max(worst_scaled, err / std::max(1.0, std::abs(ref)));
            }
        }
        return Outcome{worst_scaled <= 1e-10, "max error scaled by max(1,|g|) = " + fmt(worst_scaled, 3) +
                                                  ", raw abs error = " + fmt(worst_abs, 3) +
                                                  " (g reaches 1e28, binary64 spacing there is 1e12)"};
    });

    criterion(4, "V_L(2,12) in [pi - 0.06, pi] and V_L non-decreasing in L", 300.0, [] {
        VLOptions o;
        o.restarts = 32;
        const double v12 = vl_estimate(2, 12.0, o).value;
        bool mono = true;
        double prev = -1.0;
        std::string seq;
        for (double L : {4.0, 6.0, 8.0, 10.0, 12.0}) {
            const double v = vl_estimate(2, L, o).value;
            mono = mono && v >= prev - 1e-6;
            prev = v;
            seq += (seq.empty() ? "" : ", ") + fmt(v, 8);
        }
        const bool ok = v12 >= pi - 0.06 && v12 <= pi && mono;
        return Outcome{ok, "V_L(2,12) = " + fmt(v12, 10) + "; L = 4..12: " + seq};
    });

    criterion(5, "gap certificates for (2,0.1), (2,0.01), (3,0.1)", 600.0, [] {
        bool ok = true;
        std::string d;
        for (auto [n, eta] : {std::pair{2, 0.1}, std::pair{2, 0.01}, std::pair{3, 0.1}}) {
            const GapCertificate c = solve_k(n, eta);
            const double lhs = (1.0 - c.k * tube_factor(n, c.L1 + 3.0)) / (1.0 + c.k * tube_factor(n, c.L1));
            const double rhs = (c.v_n - eta) / (c.v_n - eta / 2.0);
            const bool here = c.bound_value >= c.v_n - eta && std::abs(lhs - rhs) <= 1e-10 &&
                              validate_certificate(c).ok;
            ok = ok && here;
            d += (d.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) + " eta=" + fmt(eta, 3) +
                 ": bound " + fmt(c.bound_value, 8) + " >= " + fmt(c.v_n - eta, 8) + ", k = " + fmt(c.k, 6) +
                 ", identity residual " + fmt(std::abs(lhs - rhs), 2);
        }
        return Outcome{ok, d};
    });

    criterion(6, "Haar normalization on genus 2: radius-1 disk mass and polygon area", 120.0, [] {
        const smear::SurfaceModel m = smear::genus2_model();
        const std::uint64_t n = 1000000;
        const std::vector<smear::FrameSample> s = smear::haar_sample(m, n, kDefaultSeed);
        std::uint64_t inside = 0;
        for (const smear::FrameSample& f : s) {
            inside += smear::dist(f.point, m.base) < 1.0 ? 1 : 0;
        }
        const double p = static_cast<double>(inside) / static_cast<double>(n);
        const double mass = m.exact_area * p;
        const double sigma = m.exact_area * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
        const double exact = 2.0 * pi * (std::cosh(1.0) - 1.0);
        const double area = smear::polygon_area(m);
        const bool ok = std::abs(mass - exact) <= 3.0 * sigma && std::abs(area - 4.0 * pi) <= 0.01 * 4.0 * pi;
        return Outcome{ok, "disk mass " + fmt(mass, 8) + " vs " + fmt(exact, 8) + " (" +
                               fmt((mass - exact) / sigma, 3) + " sigma); polygon area " + fmt(area, 10)};
    });

    SmearRunConfig cfg;
    std::optional<SmearRun> run;
    double run_seconds = 0.0;
    const auto ensure_run = [&] {
        if (!run) {
            const auto t0 = std::chrono::steady_clock::now();
            run = run_smear(smear::genus2_model(), cfg);
            run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };

    criterion(7, "cycle residuals on genus 2, L = 6, N = 1e6: |z| <= 4 where expected count >= 30", 300.0, [&] {
        ensure_run();
        const ResidualSummary& r = run->residual_summary;
        std::string d = "tested " + std::to_string(r.tested) + " of " + std::to_string(r.faces) +
                        " faces, max |z| = " + fmt(r.max_abs_z, 4) + ", exceedances " +
                        std::to_string(r.exceedances) + " (a perfect Gaussian null expects " +
                        fmt(r.gaussian_expected_exceedances, 3) +
                        ", the exact Poisson-difference null " + fmt(r.discrete_expected_exceedances, 3) + "), z mean " + fmt(r.z_mean, 3) +
                        ", z variance " + fmt(r.z_variance, 4);
        return Outcome{r.ok, d};
    });

    criterion(8, "efficiency ratio on the same run", 300.0, [&] {
        ensure_run();
        const smear::RatioReport& q = run->ratio;
        const bool ok = q.ratio >= run->vl_reference - 0.15 && q.ratio <= pi + 0.05 && q.implied_norm_upper >= 3.8;
        return Outcome{ok, "omega/l1 = " + fmt(q.ratio, 8) + " in [" + fmt(run->vl_reference - 0.15, 8) + ", " +
                               fmt(pi + 0.05, 8) + "] (mc sigma " + fmt(q.mc_sigma, 3) +
                               "), implied norm upper bound " + fmt(q.implied_norm_upper, 6) + " >= 3.8"};
    });
    std::cout << "  (genus-2 smearing run took " << fmt(run_seconds, 4) << " s)" << std::endl;

    criterion(9, "inclusion chain and measure sandwich on the one-holed torus, L = 4, N = 1e5", 120.0, [] {
        const smear::SurfaceModel m = smear::one_holed_torus_model();
        const double L = 4.0;
        smear::NetOptions no;
        no.seed = derive_seed(kDefaultSeed, 0x6e6574);
        const smear::GammaNet net = smear::build_net(m, 0.45, L + 1.0, no);
        const smear::InclusionResult inc = smear::inclusion_check(m, net, L, 100000, kDefaultSeed);
        const smear::SmearChain chain = smear::accumulate_chain(m, net, L, 100000, kDefaultSeed);
        const SandwichCheck s = sandwich_check(chain, m);
        const bool ok = inc.violations() == 0 && s.ok;
        return Outcome{ok, "violations " + std::to_string(inc.violations()) + " (deep samples " +
                               std::to_string(inc.deep_samples) + ", retained " +
                               std::to_string(inc.retained_samples) + "); plus mass " + fmt(s.plus_mass, 6) +
                               " +- " + fmt(s.sigma_plus, 3) + ", minus mass " + fmt(s.minus_mass, 6) +
                               " in [" + fmt(s.brackets.lower, 6) + ", " + fmt(s.brackets.upper, 6) + "]"};
    });

    criterion(10, "determinism: repeated CLI commands give byte-identical files", 600.0, [] {
        const fs::path dir = fs::temp_directory_path() / "hypvol_acceptance";
        fs::create_directories(dir);
        const std::string cli = HYPVOL_CLI_PATH;
        const std::string data = HYPVOL_DATA_DIR;
        const std::vector<std::string> commands = {
            "vn --dim 3",
            "regvol --dim 3 --edge 2",
            "tube --dim 4 --t 2.5 --format csv",
            "vl --dim 2 --edge 6 --seed 5",
            "bound --dim 2 --edge 8 --r 0.0001",
            "solvek --dim 2 --eta 0.1",
            "curve --kind vl_vs_L --grid 4:8:2",
            "glue --volm 12.566 --volb 0.01 --imax 6 --span 4",
            "smear run --model " + data + "/genus2.json --edge 6 --samples 20000 --seed 3",
            "smear check --model " + data + "/one_holed_torus.json --edge 4 --samples 20000",
            "smear model --name one_holed_torus",
        };
        int identical = 0;
        std::string bad;
        for (std::size_t i = 0; i < commands.size(); ++i) {
            const fs::path a = dir / ("a" + std::to_string(i));
            const fs::path b = dir / ("b" + std::to_string(i));
            const int ra = shell(cli + " " + commands[i] + " --out " + a.string() + " 2>/dev/null");
            const int rb = shell(cli + " " + commands[i] + " --out " + b.string() + " 2>/dev/null");
            if (ra == 0 && rb == 0 && slurp(a) == slurp(b) && !slurp(a).empty()) {
                ++identical;
            } else {
                bad += " [" + commands[i] + "]";
            }
        }
        const fs::path ca = dir / "simplex_a.csv";
        const fs::path cb = dir / "simplex_b.csv";
        const std::string sr = cli + " smear run --model " + data + "/genus2.json --edge 6 --samples 5000 --out " +
                               (dir / "tmp.json").string() + " --simplex-csv ";
        const bool csv_same = shell(sr + ca.string()) == 0 && shell(sr + cb.string()) == 0 && slurp(ca) == slurp(cb);
        const bool ok = identical == static_cast<int>(commands.size()) && csv_same;
        return Outcome{ok, std::to_string(identical) + " of " + std::to_string(commands.size()) +
                               " commands identical, simplex CSV " + (csv_same ? "identical" : "differs") + bad};
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
