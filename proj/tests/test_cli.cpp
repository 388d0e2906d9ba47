#include "hypvol/io.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using hypvol::io::Json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "hypvol_cli_test";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Run cli(const std::string& args) {
    const fs::path err = scratch() / "stderr.txt";
    const std::string cmd = std::string(HYPVOL_CLI_PATH) + " " + args + " 2>" + err.string();
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) {
        out.append(buf, n);
    }
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, slurp(err)};
}

std::string data(const std::string& name) { return std::string(HYPVOL_DATA_DIR) + "/" + name; }

// CSV body without the leading seed comment.
std::vector<std::vector<double>> csv_rows(const std::string& text, std::vector<std::string>* header = nullptr) {
    std::stringstream ss(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    bool seen_header = false;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::stringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!seen_header) {
            seen_header = true;
            if (header) {
                *header = cells;
            }
            continue;
        }
        std::vector<double> r;
        for (const std::string& c : cells) {
            r.push_back(std::stod(c));
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit-code contract on malformed invocations") {
    struct Case {
        const char* args;
        int code;
    };
    const Case table[] = {
        {"", 2},
        {"frobnicate", 2},
        {"vn", 2},
        {"vn --dim", 2},
        {"vn --dim two", 2},
        {"vn --dim 1", 2},
        {"regvol --dim 2", 2},
        {"regvol --dim 2 --edge -1", 2},
        {"tube --dim 2 --t -1", 2},
        {"vn --dim 2 --format xml", 2},
        {"vn --dim 2 --bogus 1", 2},
        {"curve --kind nonsense --grid 0:1:0.5", 2},
        {"curve --kind vl_vs_L --grid 4:3:1", 2},
        {"curve --kind vl_vs_L --grid 4:6:0", 2},
        {"curve --kind vl_vs_L --grid a:b:c", 2},
        {"glue --volm 1 --volb 1", 2},
        {"smear", 2},
        {"smear run --edge 6 --samples 10", 2},
        {"solvek --dim 2 --eta 5", 1},
        {"validate --cert /nonexistent/cert.json", 1},
        {"smear run --model /nonexistent/model.json --edge 6 --samples 10", 1},
        {"vn --dim 2 --out /nonexistent/dir/x.json", 1},
        {"vn --dim 2", 0},
        {"--help", 0},
    };
    for (const Case& c : table) {
        const Run r = cli(c.args);
        INFO("args: " << std::string(c.args) << "\nstderr: " << r.err);
        CHECK(r.code == c.code);
        if (c.code == 2) {
            CHECK(r.err.find("Usage") != std::string::npos);
        }
        if (c.code == 1) {
            CHECK(r.err.find("error") != std::string::npos);
        }
    }
}

TEST_CASE("documented example outputs") {
    CHECK(cli("vn --dim 2").out == "{\"n\":2,\"v_n\":3.14159265359,\"method\":\"exact\"}\n");
    const Json t = Json::parse(cli("tube --dim 2 --t 0").out);
    CHECK(t["g"].get<double>() == 0.0);
    const Json v3 = Json::parse(cli("vn --dim 3").out);
    CHECK(v3["v_n"].get<double>() == doctest::Approx(1.0149416).epsilon(1e-7));
    const Run csv = cli("regvol --dim 2 --edge 1 --format csv");
    CHECK(csv.code == 0);
    CHECK(csv.out.rfind("n,L,volume,", 0) == 0);
}

TEST_CASE("solvek writes a certificate that re-validates") {
    const fs::path cert = scratch() / "cert.json";
    const Run r = cli("solvek --dim 2 --eta 0.1 --restarts 4 --out " + cert.string());
    REQUIRE(r.code == 0);
    const Json j = Json::parse(slurp(cert));
    CHECK(j["seed"].get<std::uint64_t>() == hypvol::kDefaultSeed);
    CHECK(j["bound_value"].get<double>() >= std::acos(-1.0) - 0.1);
    const Run v = cli("validate --cert " + cert.string());
    CHECK(v.code == 0);
    const Json vj = Json::parse(v.out);
    CHECK(vj["ok"].get<bool>());
    CHECK(vj["difference"].get<double>() <= 1e-12);

    Json tampered = j;
    tampered["exact"]["bound_value"] = j["exact"]["bound_value"].get<double>() + 1e-3;
    const fs::path bad = scratch() / "bad_cert.json";
    std::ofstream(bad) << tampered.dump();
    CHECK(cli("validate --cert " + bad.string()).code == 1);
}

TEST_CASE("curves") {
    std::vector<std::string> header;
    const Run vl = cli("curve --kind vl_vs_L --grid 4:12:2 --restarts 4");
    REQUIRE(vl.code == 0);
    CHECK(vl.out.rfind("# seed=", 0) == 0);
    const auto rows = csv_rows(vl.out, &header);
    CHECK(header == std::vector<std::string>{"L", "vl", "oracle", "regular"});
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][1] >= rows[i - 1][1] - 1e-7);
    }

    const Run br = cli("curve --kind bound_vs_r --grid 0:0.001:0.0005 --span 4 --restarts 4");
    REQUIRE(br.code == 0);
    const auto brow = csv_rows(br.out, &header);
    CHECK(header == std::vector<std::string>{"r", "L_best", "bound"});
    REQUIRE(brow.size() == 3);
    CHECK(brow[0][0] == 0.0);
    const Run vlb = cli("vl --dim 2 --edge " + hypvol::io::format_number(brow[0][1]) + " --restarts 4");
    CHECK(Json::parse(vlb.out)["value"].get<double>() == doctest::Approx(brow[0][2]).epsilon(1e-11));
    CHECK(brow[1][2] < brow[0][2]);

    const Run gl = cli("curve --kind glue_sequence --grid 1:8:1 --volm 12.566 --volb 0.01 --span 4 --restarts 4");
    REQUIRE(gl.code == 0);
    const auto grow = csv_rows(gl.out, &header);
    CHECK(header == std::vector<std::string>{"i", "r", "L_best", "bound"});
    REQUIRE(grow.size() == 8);
    for (const auto& row : grow) {
        CHECK(row[1] == doctest::Approx(grow[0][1] / row[0]).epsilon(1e-11));
    }
    const Run glj = cli("glue --volm 12.566 --volb 0.01 --imax 8 --span 4 --restarts 4");
    REQUIRE(glj.code == 0);
    const Json g = Json::parse(glj.out);
    REQUIRE(g["rows"].size() == 8);
    CHECK(g["rows"][7]["bound"].get<double>() == doctest::Approx(grow[7][3]).epsilon(1e-11));
}

TEST_CASE("smear commands and byte-identical reruns") {
    const fs::path a = scratch() / "run_a.json";
    const fs::path b = scratch() / "run_b.json";
    const fs::path ca = scratch() / "run_a.csv";
    const fs::path cb = scratch() / "run_b.csv";
    const std::string base = "smear run --model " + data("genus2.json") + " --edge 6 --samples 5000 --seed 99";
    REQUIRE(cli(base + " --out " + a.string() + " --simplex-csv " + ca.string()).code == 0);
    REQUIRE(cli(base + " --out " + b.string() + " --simplex-csv " + cb.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(ca) == slurp(cb));
    const Json j = Json::parse(slurp(a));
    CHECK(j["seed"].get<std::uint64_t>() == 99);
    CHECK(j["ratio"]["ext_mass"].get<double>() == 0.0);
    CHECK(j["chain"]["exterior_entries"].get<int>() == 0);
    CHECK(slurp(ca).rfind("# seed=99\nkey,", 0) == 0);

    const Run chk = cli("smear check --model " + data("one_holed_torus.json") + " --edge 4 --samples 5000");
    REQUIRE(chk.code == 0);
    CHECK(Json::parse(chk.out)["violations"].get<int>() == 0);

    const fs::path broken = scratch() / "broken.json";
    Json m = Json::parse(slurp(data("genus2.json")));
    m["generators"].erase(m["generators"].size() - 1);
    std::ofstream(broken) << m.dump();
    const Run bad = cli("smear run --model " + broken.string() + " --edge 6 --samples 10");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("error:") != std::string::npos);
}

TEST_CASE("repeated commands are byte-identical") {
    for (const char* args : {"vl --dim 2 --edge 6 --restarts 3", "bound --dim 2 --edge 6 --r 0.001 --restarts 3",
                             "vn --dim 3", "smear model --name one_holed_torus"}) {
        CHECK(cli(args).out == cli(args).out);
    }
}

}  // TEST_SUITE
