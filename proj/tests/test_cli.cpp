#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fiberlab/catalog.hpp"
#include "fiberlab/cli.hpp"
#include "fiberlab/serialize.hpp"
#include "schema_validate.hpp"

namespace fs = std::filesystem;
using fiberlab::cli::run;

namespace {

const std::string kConfigDir = std::string(FIBERLAB_SOURCE_DIR) + "/configs/";
const std::string kSchemaPath = std::string(FIBERLAB_SOURCE_DIR) + "/schema/summary.schema.json";

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_file(const std::string& name) {
    auto dir = fs::temp_directory_path() / "fiberlab_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

nlohmann::json schema() { return nlohmann::json::parse(slurp(kSchemaPath)); }

void check_summary_schema(const nlohmann::json& summary) {
    std::string why;
    bool ok = schema_check(schema(), summary, why);
    INFO(why);
    CHECK(ok);
}

}  // namespace

TEST_CASE("wk-dist prints the flat distance") {
    auto r = invoke({"wk-dist", "--a", "0:1", "--b", "0.5:1"});
    CHECK(r.code == 0);
    CHECK(r.out == "0.5\n");
}

TEST_CASE("constants on the dyadic config") {
    auto jsonf = temp_file("constants.json");
    auto csvf = temp_file("constants.csv");
    auto r = invoke({"constants", "--config", kConfigDir + "dyadic.cfg", "--json",
                     jsonf.string(), "--csv", csvf.string()});
    CHECK(r.code == 0);
    auto summary = nlohmann::json::parse(slurp(jsonf));
    check_summary_schema(summary);
    CHECK(summary["results"]["C1"].get<double>() == doctest::Approx(2.0));
    CHECK(summary["results"]["lip_bound"].get<double>() == doctest::Approx(4.0));
    CHECK(summary["pass"]["basis_contracting"].get<bool>());
    CHECK_FALSE(summary.contains("wall_time_ms"));  // only with --timing

    std::string csv = slurp(csvf);
    CHECK(csv.rfind("name,value\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);  // LF endings
}

TEST_CASE("invariant writes checkpoint and summary") {
    auto jsonf = temp_file("invariant.json");
    auto ckpt = temp_file("invariant.ckpt");
    auto r = invoke({"invariant", "--config", kConfigDir + "dyadic.cfg", "--depth", "3",
                     "--steps", "8", "--json", jsonf.string(), "--checkpoint", ckpt.string()});
    CHECK(r.code == 0);
    auto summary = nlohmann::json::parse(slurp(jsonf));
    check_summary_schema(summary);
    CHECK(summary["pass"]["residual_within_bound"].get<bool>());
    CHECK(summary["results"]["weak_norm"].get<double>() == doctest::Approx(1.0));
    CHECK(fs::file_size(ckpt) > 8);
}

TEST_CASE("checkpoint round-trip") {
    using namespace fiberlab;
    auto sys = catalog::dyadic();
    auto mu0 = invariant_measure(sys, 3, 6, 1.0 / 1024.0, dirac(sys.space, 0.0)).measure;
    auto path = temp_file("roundtrip.ckpt");
    write_checkpoint(mu0, path.string());
    auto back = read_checkpoint(sys.base, sys.space, path.string());
    REQUIRE(back.depth == mu0.depth);
    REQUIRE(back.entries.size() == mu0.entries.size());
    for (std::size_t r = 0; r < back.entries.size(); ++r) {
        REQUIRE(back.entries[r].size() == mu0.entries[r].size());
        for (std::size_t i = 0; i < back.entries[r].size(); ++i) {
            CHECK(back.entries[r][i].position == mu0.entries[r][i].position);
            CHECK(back.entries[r][i].weight == mu0.entries[r][i].weight);
        }
    }
}

TEST_CASE("determinism: byte-identical outputs for the same config and seed") {
    for (int round = 0; round < 2; ++round) {
        auto jsonf = temp_file("decay" + std::to_string(round) + ".json");
        auto csvf = temp_file("decay" + std::to_string(round) + ".csv");
        auto r = invoke({"decay", "--config", kConfigDir + "dyadic.cfg", "--nmax", "6",
                         "--steps", "8", "--seed", "7", "--f", "z", "--g", "z", "--json",
                         jsonf.string(), "--csv", csvf.string()});
        CHECK(r.code == 0);
    }
    CHECK(slurp(temp_file("decay0.json")) == slurp(temp_file("decay1.json")));
    CHECK(slurp(temp_file("decay0.csv")) == slurp(temp_file("decay1.csv")));
}

TEST_CASE("decay CSV has the documented columns") {
    auto csvf = temp_file("decay_cols.csv");
    auto r = invoke({"decay", "--config", kConfigDir + "dyadic.cfg", "--nmax", "4", "--steps",
                     "8", "--seed", "3", "--csv", csvf.string()});
    CHECK(r.code == 0);
    std::string csv = slurp(csvf);
    CHECK(csv.rfind("n,C_n,bound_value,margin\n", 0) == 0);
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 6);  // header + n = 0..4
}

TEST_CASE("config parse errors carry line numbers and exit 65") {
    auto bad = temp_file("bad.cfg");
    {
        std::ofstream out(bad);
        out << "[system]\nalphabet = 2\nthis line is wrong\n";
    }
    auto r = invoke({"constants", "--config", bad.string()});
    CHECK(r.code == 65);
    CHECK(r.err.find(":3:") != std::string::npos);
}

TEST_CASE("usage errors exit 64") {
    auto r = invoke({"frobnicate"});
    CHECK(r.code == 64);
    auto r2 = invoke({});
    CHECK(r2.code == 64);
}

TEST_CASE("missing seed is a config error") {
    auto cfg = temp_file("noseed.cfg");
    {
        std::ofstream out(cfg);
        std::ifstream in(kConfigDir + "dyadic.cfg");
        std::string line;
        while (std::getline(in, line))
            if (line.find("seed") == std::string::npos) out << line << "\n";
    }
    auto r = invoke({"gap", "--config", cfg.string()});
    CHECK(r.code == 65);
    CHECK(r.err.find("seed") != std::string::npos);
}

TEST_CASE("certify catches a lying declaration with exit 2") {
    auto cfg = temp_file("liar.cfg");
    {
        std::ofstream out(cfg);
        std::ifstream in(kConfigDir + "dyadic.cfg");
        std::string line;
        while (std::getline(in, line)) {
            out << line << "\n";
            if (line.rfind("kind", 0) == 0) out << "alpha = 0.4\n";
        }
    }
    auto r = invoke({"certify", "--config", cfg.string(), "--seed", "11"});
    CHECK(r.code == 2);

    auto honest = invoke({"certify", "--config", kConfigDir + "dyadic.cfg", "--seed", "11"});
    CHECK(honest.code == 0);
}

TEST_CASE("lift command") {
    auto jsonf = temp_file("lift.json");
    auto csvf = temp_file("lift.csv");
    auto r = invoke({"lift", "--config", kConfigDir + "dyadic.cfg", "--psi", "z", "--nmax", "8",
                     "--depth", "12", "--json", jsonf.string(), "--csv", csvf.string()});
    CHECK(r.code == 0);
    auto summary = nlohmann::json::parse(slurp(jsonf));
    check_summary_schema(summary);
    CHECK(summary["results"]["lifted_value"].get<double>() == doctest::Approx(0.5).epsilon(0.01));
    CHECK(summary["pass"]["invariance"].get<bool>());
    CHECK(slurp(csvf).rfind("n,lower,upper,gap,bound\n", 0) == 0);
}

TEST_CASE("timing flag controls wall_time_ms") {
    auto jsonf = temp_file("timed.json");
    auto r = invoke({"wk-dist", "--a", "0:1", "--b", "0.25:1", "--json", jsonf.string(),
                     "--timing"});
    CHECK(r.code == 0);
    auto summary = nlohmann::json::parse(slurp(jsonf));
    CHECK(summary.contains("wall_time_ms"));
    check_summary_schema(summary);
}
