#include "hypvol/io.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hypvol;

TEST_SUITE("io") {

TEST_CASE("twelve significant digits") {
    CHECK(io::format_number(std::numbers::pi) == "3.14159265359");
    CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(io::format_number(1234567.0) == "1234567");
    CHECK(io::format_number(-0.0) == "0");
    CHECK(io::format_number(std::nan("")) == "nan");
    CHECK(io::round_sig(std::numbers::pi) == 3.14159265359);
    CHECK(io::dump(io::Json(io::round_sig(std::numbers::pi))) == "3.14159265359\n");
}

TEST_CASE("volume constants JSON") {
    const io::Json j = io::to_json(ideal_regular_volume(2));
    CHECK(io::dump(j) == "{\"n\":2,\"v_n\":3.14159265359,\"method\":\"exact\"}\n");
}

TEST_CASE("CSV table") {
    io::CsvTable t({"a", "b"});
    t.add_row({1.5, 1e-20});
    t.add_text_row({"x", "y"});
    CHECK(t.rows() == 2);
    CHECK(t.str() == "a,b\n1.5,1e-20\nx,y\n");
    CHECK_THROWS_AS(t.add_row({1.0}), Error);
}

TEST_CASE("certificate round trip through JSON text") {
    SolveOptions o;
    o.vl.restarts = 4;
    o.l0.vl = o.vl;
    const GapCertificate c = solve_k(2, 0.1, o);
    const std::string text = io::dump(io::to_json(c));
    const GapCertificate back = io::certificate_from_json(io::Json::parse(text));
    CHECK(back.k == c.k);
    CHECK(back.L1 == c.L1);
    const CertificateCheck chk = validate_certificate(back);
    CHECK(chk.ok);
    CHECK(std::abs(chk.recomputed_bound - c.bound_value) <= 1e-12);

    io::Json j = io::Json::parse(text);
    j.erase("exact");
    j.erase("k");
    CHECK_THROWS_AS(io::certificate_from_json(j), Error);
    CHECK_THROWS_AS(io::certificate_from_json(io::Json::array()), Error);
}

}  // TEST_SUITE
