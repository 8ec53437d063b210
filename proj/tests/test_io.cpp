#include "pencilnorm/io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

using namespace pn;
using io::Json;

TEST_CASE("matrix json round-trip") {
    std::mt19937_64 rng(41);
    CMat A = testutil::random_cmat(3, 4, rng);
    CMat B = io::matrix_from_json(io::matrix_to_json(A));
    CHECK((A - B).norm() == 0.0);
    // plain numbers parse as real entries
    Json j = Json::parse("[[1, 2], [3, 4.5]]");
    CMat M = io::matrix_from_json(j);
    CHECK(M(1, 1) == Complex(4.5, 0.0));
    CHECK_THROWS(io::matrix_from_json(Json::parse("[[1], [2, 3]]")));
    CHECK_THROWS(io::matrix_from_json(Json::parse("[]")));
}

TEST_CASE("vector json round-trip") {
    RVec v(3);
    v << 1.0, -2.5, 3.25;
    RVec w = io::vector_from_json(io::vector_to_json(v));
    CHECK((v - w).norm() == 0.0);
}

TEST_CASE("curve json") {
    Json j;
    j["kind"] = "unit_circle_arc";
    j["a"] = 0.0;
    j["b"] = M_PI / 6;
    region::CurveSpec c = io::curve_from_json(j);
    region::CurveSpec ref = region::unit_circle_arc(0.0, M_PI / 6);
    CHECK((c.phi - ref.phi).norm() <= 1e-15);
    CHECK((c.psi - ref.psi).norm() <= 1e-15);
    // raw round-trip preserves the forms
    region::CurveSpec c2 = io::curve_from_json(io::curve_to_json(ref));
    CHECK((c2.phi - ref.phi).norm() <= 1e-15);
    CHECK_THROWS(io::curve_from_json(Json::parse("{\"kind\": \"nope\"}")));
}

TEST_CASE("pencil json families and raw") {
    Json j;
    j["family"] = "toeplitz";
    j["n"] = 5;
    j["E"] = "normalized";
    pencil::PencilSpec pen = io::pencil_from_json(j);
    CHECK(pen.n() == 5);
    CHECK((pen.E - CMat::Identity(5, 5) / std::sqrt(5.0)).norm() <= 1e-15);

    Json raw;
    raw["F"] = io::matrix_to_json(pen.F);
    raw["G"] = io::matrix_to_json(pen.G);
    pencil::PencilSpec pen2 = io::pencil_from_json(raw);
    CHECK((pen2.F - pen.F).norm() == 0.0);
    CHECK((pen2.G - pen.G).norm() == 0.0);

    CHECK_THROWS(io::pencil_from_json(Json::parse("{\"family\": \"nope\", \"n\": 3}")));
}

TEST_CASE("certificate json round-trip") {
    std::mt19937_64 rng(43);
    gauge::DualCertificate c;
    c.Z = testutil::random_cmat(4, 4, rng);
    c.P = testutil::random_hermitian(3, rng);
    c.Q = testutil::random_hermitian(3, rng);
    gauge::DualCertificate d = io::certificate_from_json(io::certificate_to_json(c));
    CHECK((c.Z - d.Z).norm() == 0.0);
    CHECK((c.P - d.P).norm() == 0.0);
    CHECK((c.Q - d.Q).norm() == 0.0);
}

TEST_CASE("json file round-trip and csv format") {
    const std::string dir = "/tmp/pn_io_test";
    std::system(("mkdir -p " + dir).c_str());
    Json j;
    j["a"] = 1;
    j["b"] = Json::array({1.5, 2.5});
    io::save_json(dir + "/x.json", j);
    Json k = io::load_json(dir + "/x.json");
    CHECK(j == k);
    CHECK_THROWS(io::load_json(dir + "/missing.json"));

    io::write_csv(dir + "/x.csv", "omega_or_theta,magnitude", {{0.5, 1.25}, {-1.0, 3.0}});
    std::ifstream in(dir + "/x.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "omega_or_theta,magnitude\n0.5,1.25\n-1,3\n");
}
