#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        static std::atomic<int> counter{0};
        dir = fs::temp_directory_path() /
              ("fkwave_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    // Runs the CLI inside the sandbox with the given cache directory; returns the exit status.
    int run(const std::string& args, const std::string& cache = "cache") const {
        std::string cmd = "cd '" + dir.string() + "' && FKWAVE_CACHE_DIR='" + (dir / cache).string() + "' '" +
                          FKWAVE_CLI_PATH + "' " + args + " > stdout.txt 2> stderr.txt";
        int st = std::system(cmd.c_str());
        return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    }
    std::string read(const fs::path& rel) const {
        std::ifstream is(dir / rel, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }
    json read_json(const fs::path& rel) const { return json::parse(read(rel)); }
};

}  // namespace

TEST_CASE("cli: dispersion roots", "[cli]") {
    Sandbox sb;
    REQUIRE(sb.run("dispersion") == 0);
    std::istringstream roots(sb.read("fkwave_out/roots.csv"));
    std::string line;
    std::getline(roots, line);
    CHECK(line == "root");
    std::vector<double> r;
    while (std::getline(roots, line))
        if (!line.empty()) r.push_back(std::stod(line));
    REQUIRE(r.size() == 2);
    CHECK(std::abs(r[0] + M_PI / 2) <= 1e-12);
    CHECK(std::abs(r[1] - M_PI / 2) <= 1e-12);
    CHECK(fs::exists(sb.dir / "fkwave_out/dispersion.csv"));
}

TEST_CASE("cli: configuration errors exit with 2", "[cli]") {
    Sandbox sb;
    CHECK(sb.run("dispersion --set c=0.5") == 2);
    CHECK(sb.run("dispersion --set bogus=1") == 2);
    CHECK(sb.run("dispersion --set grid.bogus=1") == 2);
    CHECK(sb.run("dispersion --set epsilon=abc") == 2);
    CHECK(sb.run("dispersion --set epsilon") == 2);
    CHECK(sb.run("solve --set corrector.mode=newton") == 2);
    CHECK(sb.run("solve --set nu=-3") == 2);
    CHECK(sb.run("solve --set evolve.dt=0.05") == 2);
    CHECK(sb.run("dispersion --config missing.json") == 2);
    CHECK(sb.run("") == 2);
    CHECK(sb.run("frobnicate") == 2);
    CHECK(sb.read("stderr.txt").size() > 0);
}

TEST_CASE("cli: numerical failure exits with 3", "[cli]") {
    Sandbox sb;
    CHECK(sb.run("solve --set epsilon=0.001 --set corrector.max_iter=1") == 3);
    CHECK(sb.read("stderr.txt").find("max_iter exceeded") != std::string::npos);
}

TEST_CASE("cli: solve without smoothing", "[cli]") {
    Sandbox sb;
    REQUIRE(sb.run("solve --set epsilon=0") == 0);
    json j = sb.read_json("fkwave_out/solve.json");
    CHECK(std::abs(j["beta"].get<double>()) <= 1e-10);
    CHECK(j["residual_final"].get<double>() <= 1e-6);
    CHECK(j["iterations"].get<int>() == 0);
    CHECK(std::abs(j["lambda_star"].get<double>() - 0.5213011509) <= 1e-10);
    for (const char* k : {"c", "epsilon", "beta", "iterations", "residual_final", "K0", "r_norm", "lambda_star"})
        CHECK(j.contains(k));
    CHECK(j["invariants"]["pass"].get<bool>());
}

TEST_CASE("cli: nested config file and overrides", "[cli]") {
    Sandbox sb;
    {
        std::ofstream os(sb.dir / "run.json");
        os << R"({"epsilon": 0.001, "corrector": {"tol": 1e-9}, "output_dir": "nested"})";
    }
    REQUIRE(sb.run("solve --config run.json --set corrector.mode=semi_implicit") == 0);
    json j = sb.read_json("nested/solve.json");
    CHECK(j["epsilon"].get<double>() == 0.001);
    CHECK(j["residual_final"].get<double>() <= 1e-9);
    {
        std::ofstream os(sb.dir / "bad.json");
        os << R"({"corrector": {"tolerance": 1e-9}})";
    }
    CHECK(sb.run("solve --config bad.json") == 2);
}

TEST_CASE("cli: output is deterministic with cold and warm caches", "[cli]") {
    Sandbox sb;
    const std::string args = "solve --set epsilon=0.001 --set output_dir=";
    REQUIRE(sb.run(args + "a", "cache1") == 0);
    REQUIRE(sb.run(args + "b", "cache1") == 0);
    REQUIRE(sb.run(args + "c", "cache2") == 0);
    CHECK(fs::exists(sb.dir / "cache1"));
    std::string a = sb.read("a/solution.csv"), b = sb.read("b/solution.csv"), c = sb.read("c/solution.csv");
    REQUIRE(!a.empty());
    CHECK(a == b);
    CHECK(a == c);
    CHECK(sb.read("a/solve.json") == sb.read("b/solve.json"));
}

TEST_CASE("cli: remaining subcommands", "[cli]") {
    Sandbox sb;
    REQUIRE(sb.run("potential-certify --set epsilon=0.01") == 0);
    json cert = sb.read_json("fkwave_out/certify.json");
    CHECK(cert.is_object());
    REQUIRE(sb.run("exact") == 0);
    CHECK(fs::exists(sb.dir / "fkwave_out/up.csv"));
    REQUIRE(sb.run("wavetrain --set epsilon=0.01") == 0);
    CHECK(fs::exists(sb.dir / "fkwave_out/period.csv"));
    REQUIRE(sb.run("family --set epsilon=0.001") == 0);
    CHECK(std::abs(sb.read_json("fkwave_out/family.json")["K0"].get<double>() - 0.05707) <= 0.1 * 0.05707);
    REQUIRE(sb.run("verify --set epsilon=0.001") == 0);
    CHECK(sb.read_json("fkwave_out/verify.json")["invariants"]["pass"].get<bool>());
    REQUIRE(sb.run("evolve --set epsilon=0.001 --set evolve.T=2 --set evolve.J=40") == 0);
    json ev = sb.read_json("fkwave_out/evolve.json");
    CHECK(ev["propagation_error"].get<double>() <= 1e-3);
    CHECK(sb.read("fkwave_out/evolve_history.csv").rfind("t,j,v\n", 0) == 0);
}
