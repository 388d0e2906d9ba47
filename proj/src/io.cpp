#include "hypvol/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace hypvol::io {

double round_sig(double x, int digits) {
    if (!std::isfinite(x) || x == 0.0) {
        return x;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

std::string format_number(double x, int digits) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x == 0.0 ? 0.0 : x);
    return buf;
}

std::string dump(const Json& j) { return j.dump() + "\n"; }

namespace {

// NaN and infinities have no JSON literal; they are written as null.
Json number(double x) {
    if (!std::isfinite(x)) {
        return nullptr;
    }
    return round_sig(x);
}

Json exact(double x) {
    if (!std::isfinite(x)) {
        return nullptr;
    }
    return x;
}

double read(const Json& j, const char* key) {
    if (!j.contains(key)) {
        throw Error(std::string("certificate: missing field '") + key + "'");
    }
    const Json& v = j.at(key);
    if (v.is_null()) {
        return std::nan("");
    }
    if (!v.is_number()) {
        throw Error(std::string("certificate: field '") + key + "' is not a number");
    }
    return v.get<double>();
}

}  // namespace

Json to_json(const VolumeConstants& v) {
    Json j;
    j["n"] = v.n;
    j["v_n"] = number(v.v_n);
    j["method"] = to_string(v.method);
    if (v.method == VolumeMethod::extrapolated) {
        j["extrapolation_error"] = number(v.extrapolation_error);
    }
    return j;
}

Json to_json(const VLEstimate& e) {
    Json j;
    j["n"] = e.n;
    j["L"] = number(e.L);
    j["value"] = number(e.value);
    j["restarts"] = e.restarts;
    j["seed"] = e.seed;
    j["optimizer_tol"] = number(e.optimizer_tol);
    j["best_restart"] = e.best_restart;
    j["evaluations"] = e.evaluations;
    j["regular_value"] = number(e.regular_value);
    j["oracle_value"] = number(e.oracle_value);
    j["quadrature_value"] = number(e.quadrature_value);
    Json pert = Json::array();
    for (const Vec& v : e.best_perturbation) {
        Json row = Json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            row.push_back(number(v[i]));
        }
        pert.push_back(row);
    }
    j["best_perturbation"] = pert;
    return j;
}

Json to_json(const GapCertificate& c) {
    Json j;
    j["n"] = c.n;
    j["eta"] = number(c.eta);
    j["v_n"] = number(c.v_n);
    j["L0"] = number(c.L0);
    j["L1"] = number(c.L1);
    j["k"] = number(c.k);
    j["c"] = number(c.c);
    j["bound_value"] = number(c.bound_value);
    j["vL1"] = to_json(c.vL1);
    Json x;
    x["eta"] = exact(c.eta);
    x["v_n"] = exact(c.v_n);
    x["L0"] = exact(c.L0);
    x["L1"] = exact(c.L1);
    x["k"] = exact(c.k);
    x["c"] = exact(c.c);
    x["vL1"] = exact(c.vL1.value);
    x["bound_value"] = exact(c.bound_value);
    j["exact"] = x;
    return j;
}

GapCertificate certificate_from_json(const Json& j) {
    if (!j.is_object()) {
        throw Error("certificate: document is not a JSON object");
    }
    GapCertificate c;
    if (!j.contains("n") || !j.at("n").is_number_integer()) {
        throw Error("certificate: missing integer field 'n'");
    }
    c.n = j.at("n").get<int>();
    const Json& src = j.contains("exact") ? j.at("exact") : j;
    c.eta = read(src, "eta");
    c.v_n = read(src, "v_n");
    c.L0 = read(src, "L0");
    c.L1 = read(src, "L1");
    c.k = read(src, "k");
    c.c = read(src, "c");
    c.bound_value = read(src, "bound_value");
    if (src.contains("vL1") && src.at("vL1").is_number()) {
        c.vL1.value = src.at("vL1").get<double>();
    } else if (j.contains("vL1") && j.at("vL1").is_object()) {
        c.vL1.value = read(j.at("vL1"), "value");
    } else {
        throw Error("certificate: missing field 'vL1'");
    }
    c.vL1.n = c.n;
    c.vL1.L = c.L1;
    return c;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) {
        cells.push_back(format_number(v));
    }
    add_text_row(cells);
}

void CsvTable::add_text_row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) {
        throw Error("CsvTable: row width does not match the header");
    }
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) {
            line += ',';
        }
        line += cells[i];
    }
    rows_.push_back(std::move(line));
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) {
            out += ',';
        }
        out += header_[i];
    }
    out += '\n';
    for (const std::string& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

}  // namespace hypvol::io
