#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "msubdiv/io.hpp"

using namespace msubdiv;
namespace fs = std::filesystem;

namespace {

const char* kFixtures[] = {
    "refine1d_basic.json",    "refine1d_negative_dilation.json", "gap_mask_1d.json",
    "multi_anisotropic_2d.json", "lonely_vertex_2d.json",        "sample_hold_1d.json",
};

SchemeSet fixture(const std::string& name) {
    return load_scheme_file(std::string(MSUBDIV_SCHEME_DIR) + "/" + name);
}

fs::path work_dir() {
    fs::path p = fs::temp_directory_path() / "msubdiv_io_tests";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args, const fs::path& out) {
    std::string cmd = std::string(MSUBDIV_CLI_PATH) + " " + args + " >" + out.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("scheme files round-trip exactly") {
    for (const char* name : kFixtures) {
        SchemeSet s = fixture(name);
        Json j = scheme_to_json(s);
        SchemeSet back = parse_scheme_json(j);
        CHECK(back == s);
        CHECK(scheme_to_json(back) == j);
    }
}

TEST_CASE("parse errors carry the offending JSON path") {
    auto expect_path = [](const char* text, const char* needle) {
        Json j = Json::parse(text);
        try {
            parse_scheme_json(j);
            FAIL_CHECK("expected a parse error for ", text);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_path(R"({"operators": []})", "$.dimension");
    expect_path(R"({"dimension": 1, "operators": []})", "$.operators");
    expect_path(R"({"dimension": 1, "operators": [{"dilation": [[2]], "mask": []}]})",
                "$.operators[0].mask");
    expect_path(
        R"({"dimension": 1, "operators": [{"dilation": [[2]], "mask": [{"point": [0], "value": "x/y"}]}]})",
        "$.operators[0].mask[0].value");
    expect_path(
        R"({"dimension": 1, "operators": [{"dilation": [[2]], "mask": [{"point": [0, 1], "value": 1}]}]})",
        "$.operators[0].mask[0].point");
    expect_path(
        R"({"dimension": 1, "operators": [{"dilation": [[2]], "mask": [{"point": [0], "value": 1}, {"point": [0], "value": 1}]}]})",
        "duplicate mask point");
    expect_path(
        R"({"dimension": 1, "operators": [{"dilation": [[2]], "digits": [[0], [2]], "mask": [{"point": [0], "value": 1}]}]})",
        "$.operators[0]");
}

TEST_CASE("rational values accept strings, integers and dyadic floats") {
    Json j = Json::parse(
        R"({"dimension": 1, "operators": [{"dilation": [[2]],
            "mask": [{"point": [0], "value": "1/3"}, {"point": [1], "value": 1},
                     {"point": [2], "value": 0.5}, {"point": [3], "value": "0.25"}]}]})");
    SchemeSet s = parse_scheme_json(j);
    const Mask& m = s.ops[0].mask;
    CHECK(m.at({0}) == Rational(1, 3));
    CHECK(m.at({1}) == Rational(1));
    CHECK(m.at({2}) == Rational(1, 2));
    CHECK(m.at({3}) == Rational(1, 4));
}

TEST_CASE("omega csv and pgm formats") {
    LatticeSet omega(2, {{0, 0}, {1, -2}, {-1, 3}});
    CHECK(omega_to_csv(omega) == "-1,3\n0,0\n1,-2\n");

    PointCloud pc;
    pc.dim = 2;
    pc.points = {{0.0, 0.0}, {0.9, 0.9}};
    RasterSpec spec;
    spec.width = 4;
    spec.height = 4;
    spec.xmin = -1;
    spec.xmax = 1;
    spec.ymin = -1;
    spec.ymax = 1;
    std::string pgm = rasterize_pgm(pc, spec);
    CHECK(pgm.substr(0, 11) == "P5\n4 4\n255\n");
    CHECK(pgm.size() == 11 + 16);
}

TEST_CASE("cli exit codes over the corpus") {
    fs::path dir = work_dir();
    fs::path out = dir / "out.txt";
    std::string schemes = MSUBDIV_SCHEME_DIR;

    CHECK(run_cli("validate " + schemes + "/multi_anisotropic_2d.json", out) == 0);
    CHECK(run_cli("validate " + schemes + "/lonely_vertex_2d.json", out) == 0);

    fs::path broken = dir / "broken.json";
    {
        std::ofstream f(broken);
        f << R"({"dimension": 1, "operators": [{"dilation": [[2]],
              "mask": [{"point": [0], "value": 2}, {"point": [1], "value": 1}]}]})";
    }
    CHECK(run_cli("validate " + broken.string(), out) == 1);

    fs::path malformed = dir / "malformed.json";
    {
        std::ofstream f(malformed);
        f << "{ not json";
    }
    CHECK(run_cli("validate " + malformed.string(), out) == 2);
    CHECK(run_cli("validate " + (dir / "missing.json").string(), out) == 2);

    CHECK(run_cli("convergence " + schemes + "/sample_hold_1d.json", out) == 0);
    CHECK(run_cli("convergence " + schemes + "/gap_mask_1d.json", out) == 3);
    int tiny = run_cli("convergence " + schemes + "/multi_anisotropic_2d.json --max-depth 1 "
                       "--method bracket --threads 2",
                       out);
    CHECK((tiny == 0 || tiny == 4));
}

TEST_CASE("cli omega seeding and byte stability") {
    fs::path dir = work_dir();
    fs::path log = dir / "log.txt";
    std::string schemes = MSUBDIV_SCHEME_DIR;

    fs::path csv1 = dir / "omega1.csv";
    fs::path csv2 = dir / "omega2.csv";
    CHECK(run_cli("omega " + schemes + "/refine1d_basic.json --out " + csv1.string(), log) == 0);
    CHECK(slurp(csv1) == "0\n1\n");

    CHECK(run_cli("omega " + schemes + "/refine1d_basic.json --seed \"(5)\" --out " +
                      csv2.string(),
                  log) == 0);
    std::string seeded = slurp(csv2);
    CHECK(seeded.find("5\n") != std::string::npos);
    CHECK(seeded.find("0\n") != std::string::npos);

    // identical flags give identical bytes
    fs::path r1 = dir / "rep1.json", r2 = dir / "rep2.json";
    CHECK(run_cli("convergence " + schemes + "/gap_mask_1d.json --out " + r1.string(), log) == 3);
    CHECK(run_cli("convergence " + schemes + "/gap_mask_1d.json --out " + r2.string(), log) == 3);
    CHECK(slurp(r1) == slurp(r2));

    fs::path t1 = dir / "trans.json";
    CHECK(run_cli("transition " + schemes + "/gap_mask_1d.json --out " + t1.string(), log) == 0);
    std::string trans = slurp(t1);
    CHECK(trans.find("\"1/2\"") != std::string::npos);

    fs::path blf = dir / "blf.csv";
    fs::path pgm = dir / "blf.pgm";
    CHECK(run_cli("blf " + schemes + "/multi_anisotropic_2d.json --sequence \"1,2,2\" --tail 2 "
                  "--iterations 5 --out " + blf.string() +
                  " --raster 64x64 --bbox \"-3,3,-3.5,3.5\" --raster-out " + pgm.string(),
              log) == 0);
    CHECK(slurp(pgm).substr(0, 3) == "P5\n");

    fs::path decay = dir / "decay.csv";
    CHECK(run_cli("decay " + schemes + "/gap_mask_1d.json --sequence 1 -n 6 --out " +
                      decay.string(),
                  log) == 0);
    std::string table = slurp(decay);
    CHECK(table.find("n,m_n,m_n^(1/n)") == 0);
    CHECK(table.find("6,1,1") != std::string::npos);

    fs::path attr = dir / "attr.csv";
    CHECK(run_cli("attractor " + schemes + "/sample_hold_1d.json --sequence 1 --depth 10 --out " +
                      attr.string(),
                  log) == 0);
    CHECK(slurp(attr).find("0.0009765625\n") != std::string::npos);

    // out-of-range sequence index
    CHECK(run_cli("decay " + schemes + "/gap_mask_1d.json --sequence 3 -n 4 --out " +
                      (dir / "x.csv").string(),
                  log) == 1);
}
