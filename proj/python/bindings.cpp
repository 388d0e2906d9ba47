#include "hypvol/io.hpp"
#include "hypvol/report.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hypvol;

namespace {

VLOptions vl_options(int restarts, std::uint64_t seed) {
    VLOptions o;
    o.restarts = restarts;
    o.seed = seed;
    return o;
}

smear::SurfaceModel model_named(const std::string& name_or_path) {
    if (name_or_path == "genus2") {
        return smear::genus2_model();
    }
    if (name_or_path == "one_holed_torus") {
        return smear::one_holed_torus_model();
    }
    return smear::load_model(name_or_path);
}

}  // namespace

PYBIND11_MODULE(_hypvol, m) {
    m.doc() = "Native core of hypvol; JSON-returning functions are wrapped in hypvol/__init__.py";
    py::register_exception<Error>(m, "HypvolError", PyExc_RuntimeError);

    m.attr("DEFAULT_SEED") = kDefaultSeed;

    m.def("tube_factor", &tube_factor, py::arg("n"), py::arg("t"));
    m.def("lobachevsky", &lobachevsky, py::arg("theta"));
    m.def(
        "gauss_bonnet_area", [](double a, double b, double c) { return gauss_bonnet_area(TriangleSides{a, b, c}); },
        py::arg("a"), py::arg("b"), py::arg("c"));
    m.def(
        "regular_simplex_volume", [](int n, double L) { return regular_simplex_volume(n, L).value; }, py::arg("n"),
        py::arg("L"));
    m.def(
        "ideal_regular_volume_json", [](int n) { return io::dump(io::to_json(ideal_regular_volume(n))); },
        py::arg("n"));
    m.def(
        "vl_estimate_json",
        [](int n, double L, int restarts, std::uint64_t seed) {
            py::gil_scoped_release release;
            return io::dump(io::to_json(vl_estimate(n, L, vl_options(restarts, seed))));
        },
        py::arg("n"), py::arg("L"), py::arg("restarts") = 8, py::arg("seed") = kDefaultSeed);
    m.def(
        "gap_bound", [](int n, double L, double r, double vl) { return gap_bound(n, L, r, vl); }, py::arg("n"),
        py::arg("L"), py::arg("r"), py::arg("vl"));
    m.def(
        "solve_k_json",
        [](int n, double eta, int restarts, std::uint64_t seed) {
            py::gil_scoped_release release;
            SolveOptions o;
            o.vl = vl_options(restarts, seed);
            o.l0.vl = o.vl;
            return io::dump(io::to_json(solve_k(n, eta, o)));
        },
        py::arg("n"), py::arg("eta"), py::arg("restarts") = 8, py::arg("seed") = kDefaultSeed);
    m.def(
        "validate_certificate_json",
        [](const std::string& text) {
            const CertificateCheck c = validate_certificate(io::certificate_from_json(io::Json::parse(text)));
            io::Json j;
            j["ok"] = c.ok;
            j["recomputed_bound"] = c.recomputed_bound;
            j["identity_residual"] = c.identity_residual;
            j["message"] = c.message;
            return io::dump(j);
        },
        py::arg("text"));
    m.def(
        "model_json", [](const std::string& name) { return smear::model_to_json_text(model_named(name)); },
        py::arg("name_or_path"));
    m.def(
        "smear_run_json",
        [](const std::string& model, double L, std::uint64_t samples, std::uint64_t seed) {
            py::gil_scoped_release release;
            SmearRunConfig cfg;
            cfg.L = L;
            cfg.samples = samples;
            cfg.seed = seed;
            return io::dump(to_json(run_smear(model_named(model), cfg), cfg));
        },
        py::arg("model"), py::arg("L"), py::arg("samples"), py::arg("seed") = kDefaultSeed);
    m.def(
        "inclusion_check_json",
        [](const std::string& model, double L, std::uint64_t samples, std::uint64_t seed) {
            py::gil_scoped_release release;
            const smear::SurfaceModel sm = model_named(model);
            smear::NetOptions no;
            no.seed = derive_seed(seed, 0x6e6574);
            const smear::GammaNet net = smear::build_net(sm, 0.45, sm.closed() ? 0.0 : L + 1.0, no);
            return io::dump(to_json(smear::inclusion_check(sm, net, L, samples, seed)));
        },
        py::arg("model"), py::arg("L"), py::arg("samples"), py::arg("seed") = kDefaultSeed);
}
