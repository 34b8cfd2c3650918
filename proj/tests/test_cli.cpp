#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bct/margins.hpp"

using nlohmann::json;

namespace {

struct run_result {
    std::string out;
    int code = -1;
};

// runs the packaged CLI, capturing stdout; stderr (the manifest) is dropped
run_result run(const std::string& args) {
    const std::string cmd = std::string(BCT_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    run_result res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), got);
    const int status = pclose(pipe);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

}  // namespace

TEST_CASE("count-exact on the minimal instance", "[cli]") {
    const auto res = run("count-exact --r \"1 1\" --c \"1 1\"");
    CHECK(res.code == 0);
    const json j = json::parse(res.out);
    CHECK(j["count"] == "2");
    CHECK(j["acceptance_num"] == "1");
    CHECK(j["acceptance_den"] == "1");
}

TEST_CASE("infeasible margins exit 3", "[cli]") {
    CHECK(run("sample --r \"3 1\" --c \"2 2\" --seed 7").code == 3);
    CHECK(run("estimate --r \"3 1\" --c \"2 2\" --seed 7").code == 3);
}

TEST_CASE("validation errors exit 2, usage errors exit 1", "[cli]") {
    CHECK(run("sample --r \"2 2\" --c \"1 1 1\" --seed 1").code == 2);  // sum mismatch
    CHECK(run("sample --seed 1").code == 2);                            // margins missing
    CHECK(run("no-such-subcommand").code == 1);
    CHECK(run("sample --r \"1 1\" --c \"1 1\" --format nope").code == 1);
}

TEST_CASE("budget overflow exits 4", "[cli]") {
    CHECK(run("count-exact --r \"6 6 6 6 6 6 6 6 6 6 6 6\" --c \"6 6 6 6 6 6 6 6 6 6 6 6\" "
              "--budget 10")
              .code == 4);
}

TEST_CASE("seeded subcommands are byte-deterministic", "[cli]") {
    const std::string cmd = "estimate --r \"3 2 1 1\" --c \"2 2 1 1 1\" --seed 5 --epsilon 0.2";
    const auto a = run(cmd);
    const auto b = run(cmd);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const json j = json::parse(a.out);
    CHECK(j["seed"] == 5);
    CHECK(j["p_hat"].get<double>() > 0.5);
}

TEST_CASE("edge output round-trips the declared margins", "[cli]") {
    // unsorted on purpose: labels must follow the input order
    const auto res = run("sample --r \"1 3 2 1\" --c \"1 2 1 2 1\" --seed 9 --format edges");
    REQUIRE(res.code == 0);
    std::map<std::uint32_t, std::uint32_t> row_sum, col_sum;
    std::istringstream is(res.out);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::uint32_t i, j, v;
        REQUIRE(sscanf(line.c_str(), "%u,%u,%u", &i, &j, &v) == 3);
        row_sum[i] += v;
        col_sum[j] += v;
    }
    const std::vector<std::uint32_t> declared_r{1, 3, 2, 1}, declared_c{1, 2, 1, 2, 1};
    for (std::uint32_t i = 0; i < declared_r.size(); ++i) CHECK(row_sum[i] == declared_r[i]);
    for (std::uint32_t j = 0; j < declared_c.size(); ++j) CHECK(col_sum[j] == declared_c[j]);
}

TEST_CASE("csv output is a dense table with the declared margins", "[cli]") {
    const auto res = run("sample --r \"3 2 1 1\" --c \"2 2 1 1 1\" --seed 4 --count 2");
    REQUIRE(res.code == 0);
    int tables = 0;
    std::istringstream is(res.out);
    std::string line;
    std::vector<std::uint32_t> row_sums;
    while (std::getline(is, line)) {
        if (line.rfind("# sample", 0) == 0) {
            ++tables;
            continue;
        }
        std::uint32_t a, b, c, d, e;
        REQUIRE(sscanf(line.c_str(), "%u,%u,%u,%u,%u", &a, &b, &c, &d, &e) == 5);
        row_sums.push_back(a + b + c + d + e);
    }
    CHECK(tables == 2);
    REQUIRE(row_sums.size() == 8);
    CHECK(row_sums[0] == 3);
    CHECK(row_sums[4] == 3);
    CHECK(row_sums[3] == 1);
}

TEST_CASE("check-conditions reports the unit family optimal", "[cli]") {
    const auto res =
        run("check-conditions --family unit-margins --grid 1e3 3e3 1e4 3e4 1e5");
    REQUIRE(res.code == 0);
    const json j = json::parse(res.out);
    CHECK(j["overall"] == "optimal");
    CHECK(j["cond1_verdict"] == "bounded");
    CHECK(j["cond2_verdict"] == "holds");
    CHECK(j["kappa"] == 1);
}

TEST_CASE("strict mode turns inconclusive into exit 5", "[cli]") {
    // c_1 oscillates between 2 and 8 across decades; not monotone, so the
    // checker must refuse to guess
    const std::string family = R"json({
        "name": "wobble",
        "monotone": false,
        "rows": [ {"expr": "floor(N/2)", "count": "1"} ],
        "cols": [ {"expr": "5 + 3 * pow(-1, floor(log2(N)))", "count": "1"} ],
        "pad": "unit"
    })json";
    const std::string path = "/tmp/bct_test_wobble_family.json";
    std::ofstream(path) << family;
    const std::string base = "check-conditions --family " + path;
    const auto relaxed = run(base);
    REQUIRE(relaxed.code == 0);
    const json j = json::parse(relaxed.out);
    CHECK(j["cond2_verdict"] == "inconclusive");
    CHECK(j["overall"] == "inconclusive");
    CHECK(run("--strict " + base).code == 5);
}

TEST_CASE("diagnose emits the split statistics", "[cli]") {
    const auto res = run("diagnose --r \"2 2\" --c \"2 2\" --epsilon 0.1");
    REQUIRE(res.code == 0);
    const json j = json::parse(res.out);
    CHECK(j["large_set_size"] == 4);
    CHECK(j["gamma"].get<double>() == 4.0);
    CHECK(j["lambda"].get<double>() == 0.0);
    CHECK(j["feasible"] == true);
}

TEST_CASE("test-uniformity runs end to end", "[cli]") {
    const auto res = run("test-uniformity --r \"1 1\" --c \"1 1\" --samples 1000 --seed 2");
    REQUIRE(res.code == 0);
    const json j = json::parse(res.out);
    CHECK(j["table_count"] == 2);
    CHECK(j["p_value"].get<double>() > 0.001);
}

TEST_CASE("property-transfer runs end to end", "[cli]") {
    const auto res = run("property-transfer --r \"3 2 1 1\" --c \"2 2 1 1 1\" "
                         "--property has-giant-component --samples 4000 --seed 3");
    REQUIRE(res.code == 0);
    const json j = json::parse(res.out);
    CHECK(j["bound_check"] == true);
    CHECK(j["rho"].get<double>() > 0.5);
}

TEST_CASE("bench reports per-N medians", "[cli]") {
    const auto res = run("bench --family unit-margins --grid 1e3 1e5 --reps 3");
    REQUIRE(res.code == 0);
    const json j = json::parse(res.out);
    REQUIRE(j.size() == 2);
    CHECK(j[0]["N"] == 1000);
    CHECK(j[1]["N"] == 100000);
    CHECK(j[0]["times_ms"].size() == 3);
}

TEST_CASE("manifest lands in the requested file", "[cli]") {
    const std::string path = "/tmp/bct_test_manifest.json";
    std::remove(path.c_str());
    const auto res = run("--manifest " + path + " count-exact --r \"1 1\" --c \"1 1\"");
    CHECK(res.code == 0);
    std::ifstream f(path);
    REQUIRE(f.good());
    json manifest;
    f >> manifest;
    CHECK(manifest["subcommand"] == "count-exact");
    CHECK(manifest["version"] == "0.1.0");
    CHECK(manifest["exit_code"] == 0);
}

TEST_CASE("BCT_SEED is the seed fallback", "[cli]") {
    // --seed 42 and BCT_SEED=42 without --seed must agree byte for byte
    const auto direct = run("estimate --r \"2 2\" --c \"2 2\" --seed 42");
    std::array<char, 4096> buf{};
    std::string env_out;
    FILE* pipe = popen((std::string("BCT_SEED=42 ") + BCT_CLI_PATH +
                        " estimate --r \"2 2\" --c \"2 2\" 2>/dev/null")
                           .c_str(),
                       "r");
    REQUIRE(pipe != nullptr);
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) env_out.append(buf.data(), got);
    pclose(pipe);
    CHECK(direct.out == env_out);
}
