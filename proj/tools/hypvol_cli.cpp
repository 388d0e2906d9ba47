// hypvol command-line tool. Exit codes: 0 success, 1 computation error,
// 2 usage error.

#include "hypvol/io.hpp"
#include "hypvol/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

namespace {

using hypvol::io::CsvTable;
using hypvol::io::Json;
namespace io = hypvol::io;
namespace sm = hypvol::smear;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string out;
    std::string format = "json";
    std::optional<double> tol;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format = "json") {
    c.format = default_format;
    cmd->add_option("--out", c.out, "Output file (default: standard output)");
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--tol", c.tol, "Tolerance override (quadrature or optimizer)")
        ->check(CLI::PositiveNumber);
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) {
        throw hypvol::Error("cannot open output file " + c.out);
    }
    f << text;
    if (!f) {
        throw hypvol::Error("failed writing " + c.out);
    }
}

std::string seed_line(std::uint64_t seed) { return "# seed=" + std::to_string(seed) + "\n"; }

// One-row CSV of the scalar top-level fields of a JSON object.
std::string scalar_csv(const Json& j) {
    std::vector<std::string> header;
    std::vector<std::string> row;
    for (const auto& [k, v] : j.items()) {
        if (v.is_structured()) {
            continue;
        }
        header.push_back(k);
        if (v.is_number_float()) {
            row.push_back(io::format_number(v.get<double>()));
        } else if (v.is_string()) {
            row.push_back(v.get<std::string>());
        } else if (v.is_null()) {
            row.push_back("nan");
        } else {
            row.push_back(v.dump());
        }
    }
    CsvTable t(header);
    t.add_text_row(row);
    return t.str();
}

void emit_object(const Common& c, const Json& j, std::optional<std::uint64_t> seed = std::nullopt) {
    if (c.format == "csv") {
        emit(c, (seed ? seed_line(*seed) : std::string()) + scalar_csv(j));
    } else {
        emit(c, io::dump(j));
    }
}

void emit_table(const Common& c, const CsvTable& t, const Json& as_json,
                std::optional<std::uint64_t> seed = std::nullopt) {
    if (c.format == "csv") {
        emit(c, (seed ? seed_line(*seed) : std::string()) + t.str());
    } else {
        emit(c, io::dump(as_json));
    }
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("--grid: '" + item + "' is not a number");
        }
        if (used != item.size() || !std::isfinite(v)) {
            throw UsageError("--grid: '" + item + "' is not a number");
        }
        parts.push_back(v);
    }
    if (parts.size() != 3) {
        throw UsageError("--grid expects A:B:STEP");
    }
    const double a = parts[0];
    const double b = parts[1];
    const double step = parts[2];
    if (!(step > 0.0)) {
        throw UsageError("--grid: STEP must be positive");
    }
    std::vector<double> grid;
    for (long i = 0;; ++i) {
        const double x = a + static_cast<double>(i) * step;
        if (x > b + 1e-9 * step) {
            break;
        }
        grid.push_back(x);
        if (grid.size() > 100000) {
            throw UsageError("--grid: more than 100000 points");
        }
    }
    if (grid.empty()) {
        throw UsageError("--grid is empty");
    }
    return grid;
}

void require_dim(int n) {
    if (n < 2) {
        throw UsageError("--dim must be at least 2");
    }
}

hypvol::VLOptions vl_options(int restarts, std::uint64_t seed, const Common& c) {
    hypvol::VLOptions o;
    o.restarts = restarts;
    o.seed = seed;
    if (c.tol) {
        o.optimizer_tol = *c.tol;
    }
    return o;
}

hypvol::QuadratureSpec quadrature(const Common& c) {
    hypvol::QuadratureSpec q;
    if (c.tol) {
        q.abs_tol = *c.tol;
    }
    return q;
}

Json num(double x) { return std::isfinite(x) ? Json(io::round_sig(x)) : Json(nullptr); }

Json rows_json(const CsvTable& t, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    (void)t;
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json o;
        for (std::size_t i = 0; i < header.size(); ++i) {
            o[header[i]] = num(r[i]);
        }
        arr.push_back(o);
    }
    return arr;
}

int run(int argc, char** argv) {
    CLI::App app{"Hyperbolic simplex volumes, simplicial-volume bounds and smearing experiments"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");
    std::function<void()> action;

    // vn
    Common c_vn;
    int vn_dim = 0;
    double vn_ltop = 20.0;
    auto* vn = app.add_subcommand("vn", "Volume of the regular ideal simplex");
    vn->add_option("--dim", vn_dim, "Dimension n")->required();
    vn->add_option("--l-top", vn_ltop, "Top of the extrapolation grid (n >= 4)")->check(CLI::PositiveNumber);
    add_common(vn, c_vn);
    vn->callback([&] {
        action = [&] {
            require_dim(vn_dim);
            emit_object(c_vn, io::to_json(hypvol::ideal_regular_volume(vn_dim, quadrature(c_vn), vn_ltop)));
        };
    });

    // regvol
    Common c_rv;
    int rv_dim = 0;
    double rv_edge = 0.0;
    auto* rv = app.add_subcommand("regvol", "Volume of the regular simplex with edgelength L");
    rv->add_option("--dim", rv_dim, "Dimension n")->required();
    rv->add_option("--edge", rv_edge, "Edgelength L")->required()->check(CLI::PositiveNumber);
    add_common(rv, c_rv);
    rv->callback([&] {
        action = [&] {
            require_dim(rv_dim);
            const hypvol::VolumeResult r = hypvol::regular_simplex_volume(rv_dim, rv_edge, quadrature(c_rv));
            Json j;
            j["n"] = rv_dim;
            j["L"] = num(rv_edge);
            j["volume"] = num(r.value);
            j["err_estimate"] = num(r.err_estimate);
            j["converged"] = r.converged;
            j["circumradius"] = num(hypvol::regular_circumradius(rv_dim, rv_edge));
            emit_object(c_rv, j);
        };
    });

    // tube
    Common c_tb;
    int tb_dim = 0;
    double tb_t = 0.0;
    auto* tb = app.add_subcommand("tube", "Tube factor g(t) = 2 int_0^t cosh^{n-1}");
    tb->add_option("--dim", tb_dim, "Dimension n")->required();
    tb->add_option("--t", tb_t, "Tube radius t >= 0")->required()->check(CLI::NonNegativeNumber);
    add_common(tb, c_tb);
    tb->callback([&] {
        action = [&] {
            require_dim(tb_dim);
            Json j;
            j["n"] = tb_dim;
            j["t"] = num(tb_t);
            j["g"] = num(hypvol::tube_factor(tb_dim, tb_t));
            emit_object(c_tb, j);
        };
    });

    // vl
    Common c_vl;
    int vl_dim = 0;
    double vl_edge = 0.0;
    int vl_restarts = 8;
    std::uint64_t vl_seed = hypvol::kDefaultSeed;
    auto* vl = app.add_subcommand("vl", "Estimate V_L, the infimum of perturbed signed volumes");
    vl->add_option("--dim", vl_dim, "Dimension n")->required();
    vl->add_option("--edge", vl_edge, "Edgelength L")->required()->check(CLI::PositiveNumber);
    vl->add_option("--restarts", vl_restarts, "Optimizer restarts")->check(CLI::PositiveNumber);
    vl->add_option("--seed", vl_seed, "Random seed");
    add_common(vl, c_vl);
    vl->callback([&] {
        action = [&] {
            require_dim(vl_dim);
            const hypvol::VLEstimate e = hypvol::vl_estimate(vl_dim, vl_edge, vl_options(vl_restarts, vl_seed, c_vl));
            Json j;
            j["seed"] = vl_seed;
            const Json ej = io::to_json(e);
            for (const auto& [k, v] : ej.items()) {
                if (k != "seed") {
                    j[k] = v;
                }
            }
            emit_object(c_vl, j, vl_seed);
        };
    });

    // bound
    Common c_bd;
    int bd_dim = 0;
    double bd_edge = 0.0;
    double bd_r = 0.0;
    int bd_restarts = 8;
    std::uint64_t bd_seed = hypvol::kDefaultSeed;
    auto* bd = app.add_subcommand("bound", "Gap bound (1 - r g(L+3)) / (1 + r g(L)) V_L");
    bd->add_option("--dim", bd_dim, "Dimension n")->required();
    bd->add_option("--edge", bd_edge, "Edgelength L")->required()->check(CLI::PositiveNumber);
    bd->add_option("--r", bd_r, "Boundary ratio vol(dM)/vol(M)")->required()->check(CLI::NonNegativeNumber);
    bd->add_option("--restarts", bd_restarts, "Optimizer restarts")->check(CLI::PositiveNumber);
    bd->add_option("--seed", bd_seed, "Random seed");
    add_common(bd, c_bd);
    bd->callback([&] {
        action = [&] {
            require_dim(bd_dim);
            const hypvol::VLEstimate e = hypvol::vl_estimate(bd_dim, bd_edge, vl_options(bd_restarts, bd_seed, c_bd));
            Json j;
            j["seed"] = bd_seed;
            j["n"] = bd_dim;
            j["L"] = num(bd_edge);
            j["r"] = num(bd_r);
            j["vl"] = num(e.value);
            j["g_L"] = num(hypvol::tube_factor(bd_dim, bd_edge));
            j["g_L_plus_3"] = num(hypvol::tube_factor(bd_dim, bd_edge + 3.0));
            j["bound"] = num(hypvol::gap_bound(bd_dim, bd_edge, bd_r, e));
            emit_object(c_bd, j, bd_seed);
        };
    });

    // solvek
    Common c_sk;
    int sk_dim = 0;
    double sk_eta = 0.0;
    int sk_restarts = 8;
    std::uint64_t sk_seed = hypvol::kDefaultSeed;
    auto* sk = app.add_subcommand("solvek", "Constructive k(eta, n) with a gap certificate");
    sk->add_option("--dim", sk_dim, "Dimension n")->required();
    sk->add_option("--eta", sk_eta, "Gap eta in (0, v_n)")->required()->check(CLI::PositiveNumber);
    sk->add_option("--restarts", sk_restarts, "Optimizer restarts")->check(CLI::PositiveNumber);
    sk->add_option("--seed", sk_seed, "Random seed");
    add_common(sk, c_sk);
    sk->callback([&] {
        action = [&] {
            require_dim(sk_dim);
            hypvol::SolveOptions o;
            o.vl = vl_options(sk_restarts, sk_seed, c_sk);
            o.l0.vl = o.vl;
            const hypvol::GapCertificate cert = hypvol::solve_k(sk_dim, sk_eta, o);
            Json j;
            j["seed"] = sk_seed;
            const Json cj = io::to_json(cert);
            for (const auto& [k, v] : cj.items()) {
                j[k] = v;
            }
            emit_object(c_sk, j, sk_seed);
        };
    });

    // validate
    Common c_va;
    std::string va_path;
    auto* va = app.add_subcommand("validate", "Re-validate a certificate file written by solvek");
    va->add_option("--cert", va_path, "Certificate JSON")->required();
    add_common(va, c_va);
    va->callback([&] {
        action = [&] {
            std::ifstream f(va_path);
            if (!f) {
                throw hypvol::Error("cannot open " + va_path);
            }
            Json doc;
            try {
                doc = Json::parse(f);
            } catch (const Json::exception& e) {
                throw hypvol::Error(std::string("certificate: invalid JSON: ") + e.what());
            }
            const hypvol::GapCertificate cert = io::certificate_from_json(doc);
            const hypvol::CertificateCheck chk = hypvol::validate_certificate(cert);
            Json j;
            j["ok"] = chk.ok;
            j["bound_value"] = num(cert.bound_value);
            j["recomputed_bound"] = num(chk.recomputed_bound);
            j["difference"] = num(std::abs(chk.recomputed_bound - cert.bound_value));
            j["identity_residual"] = num(chk.identity_residual);
            j["message"] = chk.ok ? "ok" : chk.message;
            emit_object(c_va, j);
            if (!chk.ok) {
                throw hypvol::Error("certificate invalid: " + chk.message);
            }
        };
    });

    // curve
    Common c_cv;
    std::string cv_kind;
    std::string cv_grid;
    int cv_dim = 2;
    double cv_r = 0.0;
    double cv_volm = 0.0;
    double cv_volb = 0.0;
    double cv_span = 20.0;
    int cv_restarts = 8;
    std::uint64_t cv_seed = hypvol::kDefaultSeed;
    auto* cv = app.add_subcommand("curve", "Tabulate a bound curve");
    cv->add_option("--kind", cv_kind, "Curve kind")
        ->required()
        ->check(CLI::IsMember({"bound_vs_r", "bound_vs_L", "vl_vs_L", "glue_sequence"}));
    cv->add_option("--grid", cv_grid, "Grid A:B:STEP (r, L or i depending on the kind)")->required();
    cv->add_option("--dim", cv_dim, "Dimension n");
    cv->add_option("--r", cv_r, "Boundary ratio for bound_vs_L")->check(CLI::NonNegativeNumber);
    cv->add_option("--volm", cv_volm, "vol(M) for glue_sequence")->check(CLI::PositiveNumber);
    cv->add_option("--volb", cv_volb, "vol(B0) for glue_sequence")->check(CLI::PositiveNumber);
    cv->add_option("--span", cv_span, "L-range above l0 searched for the best bound")->check(CLI::PositiveNumber);
    cv->add_option("--restarts", cv_restarts, "Optimizer restarts")->check(CLI::PositiveNumber);
    cv->add_option("--seed", cv_seed, "Random seed");
    add_common(cv, c_cv, "csv");
    cv->callback([&] {
        action = [&] {
            require_dim(cv_dim);
            const std::vector<double> grid = parse_grid(cv_grid);
            const hypvol::VLOptions o = vl_options(cv_restarts, cv_seed, c_cv);
            std::vector<std::string> header;
            std::vector<std::vector<double>> rows;
            if (cv_kind == "bound_vs_r") {
                header = {"r", "L_best", "bound"};
                const hypvol::VLTable t = hypvol::default_vl_table(cv_dim, cv_span, o);
                for (double r : grid) {
                    const hypvol::BestBound b = hypvol::best_gap_bound(t, r);
                    rows.push_back({r, b.L, b.bound});
                }
            } else if (cv_kind == "bound_vs_L") {
                header = {"L", "vl", "bound"};
                const hypvol::VLTable t = hypvol::vl_table(cv_dim, grid, o);
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    rows.push_back({grid[i], t.value[i], hypvol::gap_bound(cv_dim, grid[i], cv_r, t.value[i])});
                }
            } else if (cv_kind == "vl_vs_L") {
                header = {"L", "vl", "oracle", "regular"};
                for (double L : grid) {
                    const hypvol::VLEstimate e = hypvol::vl_estimate(cv_dim, L, o);
                    rows.push_back({L, e.value, e.oracle_value, e.regular_value});
                }
            } else {
                if (!(cv_volm > 0.0) || !(cv_volb > 0.0)) {
                    throw UsageError("glue_sequence needs --volm and --volb");
                }
                header = {"i", "r", "L_best", "bound"};
                for (double x : grid) {
                    if (x < 1.0 || std::abs(x - std::round(x)) > 1e-9) {
                        throw UsageError("glue_sequence grid must contain integers >= 1");
                    }
                }
                const hypvol::VLTable t = hypvol::default_vl_table(cv_dim, cv_span, o);
                for (double x : grid) {
                    const int i = static_cast<int>(std::lround(x));
                    const double r = cv_volb / (i * cv_volm);
                    const hypvol::BestBound b = hypvol::best_gap_bound(t, r);
                    rows.push_back({static_cast<double>(i), r, b.L, b.bound});
                }
            }
            CsvTable table(header);
            for (const auto& r : rows) {
                table.add_row(r);
            }
            Json j;
            j["seed"] = cv_seed;
            j["kind"] = cv_kind;
            j["n"] = cv_dim;
            j["rows"] = rows_json(table, header, rows);
            emit_table(c_cv, table, j, cv_seed);
        };
    });

    // glue
    Common c_gl;
    double gl_volm = 0.0;
    double gl_volb = 0.0;
    int gl_imax = 0;
    int gl_dim = 2;
    double gl_span = 20.0;
    int gl_restarts = 8;
    std::uint64_t gl_seed = hypvol::kDefaultSeed;
    auto* gl = app.add_subcommand("glue", "Gluing-ratio sequence r_i = volB0 / (i volM) and its bounds");
    gl->add_option("--volm", gl_volm, "vol(M)")->required()->check(CLI::PositiveNumber);
    gl->add_option("--volb", gl_volb, "vol(B0)")->required()->check(CLI::PositiveNumber);
    gl->add_option("--imax", gl_imax, "Largest i")->required()->check(CLI::PositiveNumber);
    gl->add_option("--dim", gl_dim, "Dimension n");
    gl->add_option("--span", gl_span, "L-range above l0 searched for the best bound")->check(CLI::PositiveNumber);
    gl->add_option("--restarts", gl_restarts, "Optimizer restarts")->check(CLI::PositiveNumber);
    gl->add_option("--seed", gl_seed, "Random seed");
    add_common(gl, c_gl);
    gl->callback([&] {
        action = [&] {
            require_dim(gl_dim);
            const hypvol::VLTable t = hypvol::default_vl_table(gl_dim, gl_span, vl_options(gl_restarts, gl_seed, c_gl));
            const std::vector<hypvol::GlueRow> rows = hypvol::gluing_ratio_sequence(gl_volm, gl_volb, gl_imax, t);
            CsvTable table({"i", "r", "L_best", "bound"});
            Json arr = Json::array();
            for (const hypvol::GlueRow& r : rows) {
                table.add_row({static_cast<double>(r.i), r.r, r.L_best, r.bound});
                Json o;
                o["i"] = r.i;
                o["r"] = num(r.r);
                o["L_best"] = num(r.L_best);
                o["bound"] = num(r.bound);
                arr.push_back(o);
            }
            Json j;
            j["seed"] = gl_seed;
            j["n"] = gl_dim;
            j["volM"] = num(gl_volm);
            j["volB0"] = num(gl_volb);
            j["rows"] = arr;
            emit_table(c_gl, table, j, gl_seed);
        };
    });

    // smear
    auto* smear = app.add_subcommand("smear", "Smearing experiments on surface models");
    smear->require_subcommand(1);

    Common c_sr;
    std::string sr_model;
    double sr_edge = 0.0;
    std::uint64_t sr_samples = 0;
    std::uint64_t sr_seed = hypvol::kDefaultSeed;
    double sr_radius = 0.45;
    std::string sr_csv;
    auto* sr = smear->add_subcommand("run", "Accumulate the smeared chain and report the checks");
    sr->add_option("--model", sr_model, "Surface model JSON")->required();
    sr->add_option("--edge", sr_edge, "Edgelength L")->required()->check(CLI::Range(1.0, 30.0));
    sr->add_option("--samples", sr_samples, "Number of Haar samples N")->required()->check(CLI::PositiveNumber);
    sr->add_option("--seed", sr_seed, "Random seed");
    sr->add_option("--target-radius", sr_radius, "Net covering radius")->check(CLI::Range(0.05, 0.5));
    sr->add_option("--simplex-csv", sr_csv, "Optional per-simplex CSV");
    add_common(sr, c_sr);
    sr->callback([&] {
        action = [&] {
            const sm::SurfaceModel m = sm::load_model(sr_model);
            hypvol::SmearRunConfig cfg;
            cfg.L = sr_edge;
            cfg.samples = sr_samples;
            cfg.seed = sr_seed;
            cfg.target_radius = sr_radius;
            const hypvol::SmearRun run = hypvol::run_smear(m, cfg);
            const Json j = hypvol::to_json(run, cfg);
            emit_object(c_sr, j, sr_seed);
            if (!sr_csv.empty()) {
                Common side;
                side.out = sr_csv;
                emit(side, seed_line(sr_seed) + hypvol::simplex_table(run).str());
            }
        };
    });

    Common c_sc;
    std::string sc_model;
    double sc_edge = 0.0;
    std::uint64_t sc_samples = 0;
    std::uint64_t sc_seed = hypvol::kDefaultSeed;
    double sc_radius = 0.45;
    auto* sc = smear->add_subcommand("check", "Count violations of the inclusion chain");
    sc->add_option("--model", sc_model, "Surface model JSON")->required();
    sc->add_option("--edge", sc_edge, "Edgelength L")->required()->check(CLI::Range(1.0, 30.0));
    sc->add_option("--samples", sc_samples, "Number of Haar samples N")->required()->check(CLI::PositiveNumber);
    sc->add_option("--seed", sc_seed, "Random seed");
    sc->add_option("--target-radius", sc_radius, "Net covering radius")->check(CLI::Range(0.05, 0.5));
    add_common(sc, c_sc);
    sc->callback([&] {
        action = [&] {
            const sm::SurfaceModel m = sm::load_model(sc_model);
            sm::NetOptions no;
            no.seed = hypvol::derive_seed(sc_seed, 0x6e6574);
            const sm::GammaNet net = sm::build_net(m, sc_radius, m.closed() ? 0.0 : sc_edge + 1.0, no);
            const sm::InclusionResult r = sm::inclusion_check(m, net, sc_edge, sc_samples, sc_seed);
            Json j;
            j["seed"] = sc_seed;
            j["model"] = m.name;
            j["L"] = num(sc_edge);
            const Json rj = hypvol::to_json(r);
            for (const auto& [k, v] : rj.items()) {
                j[k] = v;
            }
            emit_object(c_sc, j, sc_seed);
        };
    });

    Common c_sm;
    std::string sm_name;
    double sm_length = 2.0;
    auto* smm = smear->add_subcommand("model", "Write a bundled surface model as JSON");
    smm->add_option("--name", sm_name, "Model name")
        ->required()
        ->check(CLI::IsMember({"genus2", "one_holed_torus"}));
    smm->add_option("--boundary-length", sm_length, "Boundary length (one_holed_torus)")
        ->check(CLI::PositiveNumber);
    add_common(smm, c_sm);
    smm->callback([&] {
        action = [&] {
            const sm::SurfaceModel m = sm_name == "genus2" ? sm::genus2_model() : sm::one_holed_torus_model(sm_length);
            emit(c_sm, sm::model_to_json_text(m));
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) {
            return 0;
        }
        std::cerr << app.help();
        return 2;
    }
    try {
        if (action) {
            action();
        }
    } catch (const UsageError& e) {
        const CLI::App* chosen = &app;
        while (!chosen->get_subcommands().empty()) {
            chosen = chosen->get_subcommands().front();
        }
        std::cerr << "usage error: " << e.what() << "\n" << chosen->help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
