#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cxls/cli.hpp"
#include "cxls/io.hpp"

namespace fs = std::filesystem;
using cxls::io::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "cxls");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cxls::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path dir() {
    const auto d = fs::temp_directory_path() / "cxls_test_cli";
    fs::create_directories(d);
    return d;
}

std::string write(const std::string& name, const std::string& content) {
    const auto p = dir() / name;
    std::ofstream(p) << content;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json report(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_CASE("evaluate prints the TVaR of the two-point example") {
    const auto f = write("F.json", R"({"points": [-1, 1], "probs": [0.25, 0.75]})");
    const auto out = (dir() / "eval.json").string();
    const auto r = run({"evaluate", "--utility", "tvar", "--alpha", "0.5", "--dist", f, "--output", out});
    CHECK(r.code == 0);
    CHECK(r.out.find("value    0\n") != std::string::npos);
    const auto j = report(out);
    CHECK(j["results"]["value"] == 0.0);
    CHECK(j["tool"] == "cxls");
    CHECK(j["version"] == cxls::cli::kToolVersion);
    CHECK(j["config"]["alpha"] == 0.5);
    CHECK(j.contains("seed"));
}

TEST_CASE("reconstruct the mean") {
    const auto out = (dir() / "rec.json").string();
    const auto r = run({"reconstruct", "--utility", "mean", "--grid", "-5:5:0.5", "--output", out});
    REQUIRE(r.code == 0);
    const auto j = report(out);
    CHECK(j["results"]["K_hat"] == "-inf");
    CHECK(j["results"]["phi_grid"].size() == 21);
    for (const auto& s : j["results"]["phi_grid"]) {
        CHECK(std::abs(s[1].get<double>() - s[0].get<double>()) <= 1e-6);
    }
    CHECK(j["results"]["acceptance_agreement_rate"] == 1.0);
    CHECK(j["results"]["cxls_precheck"]["violating_trials"] == 0);
}

TEST_CASE("diagnose the truncated mean") {
    const auto out = (dir() / "diag.json").string();
    const auto r = run({"diagnose", "--utility", "truncated-mean", "--output", out});
    REQUIRE(r.code == 0);
    const auto j = report(out);
    CHECK(j["results"]["verdict"] == "intermediate");
    bool found = false;
    for (const auto& rb : j["results"]["robustness"]) {
        if (rb["x"] == -3.0 && rb["y"] == 1.0) {
            found = true;
            CHECK(rb["continuous_at_zero"] == false);
            CHECK(std::abs(rb["limit_estimate"].get<double>() + 2.0) <= 1e-9);
        }
    }
    CHECK(found);
}

TEST_CASE("reports are byte-identical across runs and embed the seed") {
    const auto a = (dir() / "cx_a.json").string();
    const auto b = (dir() / "cx_b.json").string();
    REQUIRE(run({"check-cxls", "--utility", "tvar", "--alpha", "0.5", "--trials", "300", "--seed", "17", "--output", a}).code == 0);
    REQUIRE(run({"check-cxls", "--utility", "tvar", "--alpha", "0.5", "--trials", "300", "--seed", "17", "--output", b}).code == 0);
    CHECK(slurp(a) == slurp(b));
    const auto j = report(a);
    CHECK(j["seed"] == 17);
    CHECK(j["results"]["seed"] == 17);
    CHECK(j["results"]["violating_trials"].get<int>() > 0);

    const auto c = (dir() / "rc_a.json").string();
    const auto d = (dir() / "rc_b.json").string();
    run({"reconstruct", "--utility", "expectile", "--alpha", "0.25", "--seed", "4", "--output", c});
    run({"reconstruct", "--utility", "expectile", "--alpha", "0.25", "--seed", "4", "--output", d});
    CHECK(slurp(c) == slurp(d));
}

TEST_CASE("CXLS_SEED overrides the default seed only") {
    const auto out = (dir() / "seed.json").string();
    setenv("CXLS_SEED", "99", 1);
    REQUIRE(run({"check-cxls", "--utility", "mean", "--trials", "10", "--output", out}).code == 0);
    CHECK(report(out)["seed"] == 99);
    REQUIRE(run({"check-cxls", "--utility", "mean", "--trials", "10", "--seed", "5", "--output", out}).code == 0);
    CHECK(report(out)["seed"] == 5);
    unsetenv("CXLS_SEED");
    REQUIRE(run({"check-cxls", "--utility", "mean", "--trials", "10", "--output", out}).code == 0);
    CHECK(report(out)["seed"] == cxls::cli::kDefaultSeed);
}

TEST_CASE("curve writes a plot-ready table") {
    const auto f = write("Fm.json", R"({"points": [-1], "probs": [1]})");
    const auto g = write("Gm.json", R"({"points": [1], "probs": [1]})");
    const auto table = (dir() / "curve.tsv").string();
    const auto out = (dir() / "curve.json").string();
    const auto r = run({"curve", "--utility", "tvar", "--alpha", "0.5", "--dist-f", f, "--dist-g", g, "--lambdas", "5",
                        "--table", table, "--output", out});
    REQUIRE(r.code == 0);
    CHECK(slurp(table) == "0\t1\n0.25\t0\n0.5\t-1\n0.75\t-1\n1\t-1\n");
    CHECK(report(out)["results"]["points"].size() == 5);
}

TEST_CASE("shortfall and kusuoka utilities from files") {
    const auto f = write("F2.json", R"({"points": [0, 1], "probs": [0.5, 0.5]})");
    const auto loss = write("loss.json", R"({"kind": "expectile", "alpha": 0.25})");
    const auto r = run({"evaluate", "--utility", "shortfall", "--loss", loss, "--dist", f});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out.substr(r.out.find('{')));
    CHECK(std::abs(j["results"]["value"].get<double>() - 0.25) <= 1e-9);

    const auto ku = write("ku.json", R"({"components": [{"levels": [1], "weights": [1], "penalty": 0}]})");
    const auto k = run({"evaluate", "--utility", "kusuoka", "--kusuoka", ku, "--dist", f});
    CHECK(k.code == 0);
    CHECK(k.out.find("value    0.5\n") != std::string::npos);
}

TEST_CASE("dual-check, elicit and compare") {
    const auto space = write("space.json", R"({"probs": [0.25, 0.25, 0.5], "variables": {"xi": [0, 2, 4], "eta": [3, -1, 0.5]}})");
    const auto dens = write("dens.json", R"([[1, 1, 1], [2, 2, 0]])");
    const auto out = (dir() / "dual.json").string();
    const auto r = run({"dual-check", "--space", space, "--variable", "xi", "--alpha", "0.5", "--densities", dens,
                        "--partition", "0,1;2", "--eta", "eta", "--utility", "tvar", "--output", out});
    REQUIRE(r.code == 0);
    const auto j = report(out)["results"];
    CHECK(std::abs(j["tvar"]["gap"].get<double>()) <= 1e-12);
    CHECK(j["conditioning"]["holds"] == true);
    CHECK(j["concavity"]["violations"].empty());
    CHECK(j["truncated_mean_family"]["gap"].get<double>() >= -1e-12);

    const auto f = write("F3.json", R"({"points": [0, 1], "probs": [0.5, 0.5]})");
    const auto e = run({"elicit", "--score", "expectile", "--alpha", "0.25", "--dist", f});
    CHECK(e.code == 0);
    const auto ej = json::parse(e.out.substr(e.out.find('{')));
    CHECK(std::abs(ej["results"]["elicited"].get<double>() - 0.25) <= 1e-7);

    const auto ya = write("a.txt", "1\n2\n3\n");
    const auto yb = write("b.txt", "0\n0\n0\n");
    const auto c = run({"compare", "--forecasts-a", ya, "--forecasts-b", yb, "--outcomes", ya});
    CHECK(c.code == 0);
    CHECK(c.out.find("winner        A") != std::string::npos);
}

TEST_CASE("exit codes partition failure classes") {
    const auto f = write("F4.json", R"({"points": [-1, 1], "probs": [0.25, 0.75]})");
    const auto bad_json = write("bad.json", R"({"points": [-1, 1], "probs": )");
    const auto unsorted = write("unsorted.json", R"({"points": [1, -1], "probs": [0.5, 0.5]})");

    auto r = run({"frobnicate"});
    CHECK(r.code == 1);
    r = run({"evaluate", "--utility", "tvar", "--alpha", "0.5", "--dist", bad_json});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("cxls: error: ", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    r = run({"evaluate", "--utility", "tvar", "--dist", f});
    CHECK(r.code == 1);
    CHECK(r.err.find("alpha") != std::string::npos);
    r = run({"evaluate", "--utility", "tvar", "--alpha", "0.5"});
    CHECK(r.code == 1);
    CHECK(r.err.find("dist") != std::string::npos);

    r = run({"evaluate", "--utility", "tvar", "--alpha", "0.5", "--dist", unsorted});
    CHECK(r.code == 2);
    CHECK(r.err.find("points") != std::string::npos);
    r = run({"evaluate", "--utility", "expectile", "--alpha", "0.7", "--dist", f});
    CHECK(r.code == 2);

    const auto wild = write("wild.json", R"({"points": [0, 1], "probs": [0.5, 0.5]})");
    r = run({"elicit", "--score", "apq", "--w-over", "1", "--dist", wild});
    CHECK(r.code == 1);

    r = run({"reconstruct", "--utility", "essinf"});
    CHECK(r.code == 4);
    r = run({"reconstruct", "--utility", "tvar", "--alpha", "0.5", "--trials", "50"});
    CHECK(r.code == 4);
    CHECK(r.err.find("CxLS") != std::string::npos);

    r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--utility") != std::string::npos);
}
