#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "analytics_fixture.hpp"
#include "cli.hpp"
#include "lendsim/run_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("lendsim_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = lendsim::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_json(const fs::path& p, const json& j) {
    std::ofstream(p) << j.dump(2);
    return p;
}

json empty_scenario() {
    return {{"schema_version", 1},
            {"seed", 3},
            {"horizon_blocks", 1},
            {"tokens", {{{"symbol", "DAI"}, {"stablecoin", true}}}},
            {"pools", {{{"token", "DAI"}}}},
            {"agents", json::array()}};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("cli exit codes") {
    TempDir tmp;
    CHECK(cli({}).code == lendsim::cli::kExitValidation);
    CHECK(cli({"frobnicate"}).code == lendsim::cli::kExitValidation);

    const Result missing = cli({"simulate", "--scenario", (tmp.path / "nope.json").string()});
    CHECK(missing.code == lendsim::cli::kExitValidation);
    CHECK(json::parse(missing.err).contains("diagnostics"));

    json bad = empty_scenario();
    bad["horizon_blocks"] = -4;
    const Result invalid = cli({"simulate", "--scenario", write_json(tmp.path / "bad.json", bad).string()});
    CHECK(invalid.code == lendsim::cli::kExitValidation);
    const json e = json::parse(invalid.err);
    CHECK(e["exit_code"] == 1);
    CHECK(e["diagnostics"][0]["field"] == "horizon_blocks");

    CHECK(cli({"analyze", (tmp.path / "no_run").string()}).code == lendsim::cli::kExitIo);

    const auto ok = write_json(tmp.path / "ok.json", empty_scenario());
    const std::string run_dir = (tmp.path / "run").string();
    CHECK(cli({"simulate", "--scenario", ok.string(), "--out", run_dir}).code == lendsim::cli::kExitOk);
    CHECK(cli({"simulate", "--scenario", ok.string(), "--out", run_dir}).code != lendsim::cli::kExitOk);
    CHECK(cli({"simulate", "--scenario", ok.string(), "--out", run_dir, "--force"}).code == lendsim::cli::kExitOk);
    CHECK(cli({"analyze", run_dir, "--report", "bogus"}).code == lendsim::cli::kExitValidation);
    CHECK(cli({"analyze", run_dir, "--top", "0"}).code == lendsim::cli::kExitValidation);
    CHECK(cli({"sweep", "--scenario", ok.string(), "--param", "seed", "--values", "1,2", "--parallel", "0",
               "--out", (tmp.path / "sw0").string()})
              .code == lendsim::cli::kExitValidation);
}

TEST_CASE("analyze on an empty ledger writes well-formed reports") {
    TempDir tmp;
    const auto scen = write_json(tmp.path / "s.json", empty_scenario());
    const std::string run_dir = (tmp.path / "run").string();
    REQUIRE(cli({"simulate", "--scenario", scen.string(), "--out", run_dir}).code == 0);
    const fs::path out = tmp.path / "analysis";
    const Result r = cli({"analyze", run_dir, "--report", "all", "--out", out.string()});
    REQUIRE(r.code == 0);
    for (const std::string f : {"closed_loans.csv", "open_loans.csv", "loan_days.csv", "micro_addresses.csv",
                          "concentration.csv", "flow_network.csv", "liquidation_matrix.csv",
                          "daily_net_deposits_summary.csv", "loan_summary.csv", "regress_eq4_DAI.csv",
                          "regress_logit.csv"}) {
        CAPTURE(f);
        const std::string text = afix::slurp((out / f).string());
        REQUIRE_FALSE(text.empty());
        CHECK(lines(text) >= 1);
        CHECK(text.back() == '\n');
    }
    CHECK(lines(afix::slurp((out / "closed_loans.csv").string())) == 1);
    const json report = json::parse(afix::slurp((out / "report.json").string()));
    CHECK(report["loans"]["closed"] == 0);
    CHECK(report["concentration"]["deposits"].is_null());
}

TEST_CASE("simulate is byte-deterministic and the manifest hashes its files") {
    TempDir tmp;
    json doc;
    {
        std::ifstream in(std::string(LENDSIM_SOURCE_DIR) + "/scenarios/crash.json");
        doc = json::parse(in);
    }
    const auto scen = write_json(tmp.path / "crash.json", doc);
    const fs::path a = tmp.path / "a", b = tmp.path / "b";
    REQUIRE(cli({"simulate", "--scenario", scen.string(), "--out", a.string()}).code == 0);
    REQUIRE(cli({"simulate", "--scenario", scen.string(), "--out", b.string()}).code == 0);
    for (const auto& f : lendsim::io::run_files()) {
        CAPTURE(f);
        CHECK(afix::slurp((a / f).string()) == afix::slurp((b / f).string()));
    }
    const json manifest = json::parse(afix::slurp((a / "manifest.json").string()));
    CHECK(manifest["files"]["ledger.jsonl"] == lendsim::io::sha256_file(a / "ledger.jsonl"));

    const fs::path c = tmp.path / "c";
    REQUIRE(cli({"simulate", "--scenario", scen.string(), "--seed", "99", "--out", c.string()}).code == 0);
    CHECK(afix::slurp((a / "ledger.jsonl").string()) != afix::slurp((c / "ledger.jsonl").string()));
}

TEST_CASE("sweep summaries do not depend on the thread count") {
    TempDir tmp;
    std::ifstream in(std::string(LENDSIM_SOURCE_DIR) + "/scenarios/crash.json");
    const auto scen = write_json(tmp.path / "crash.json", json::parse(in));
    const std::vector<std::string> common = {"sweep", "--scenario", scen.string(), "--param", "shocks.0.multiplier",
                                             "--values", "0.9,0.7,0.5"};
    auto one = common, eight = common;
    one.insert(one.end(), {"--parallel", "1", "--out", (tmp.path / "p1").string()});
    eight.insert(eight.end(), {"--parallel", "8", "--out", (tmp.path / "p8").string()});
    REQUIRE(cli(one).code == 0);
    REQUIRE(cli(eight).code == 0);
    const std::string s1 = afix::slurp((tmp.path / "p1" / "sweep_summary.csv").string());
    CHECK(lines(s1) == 4);
    CHECK(s1 == afix::slurp((tmp.path / "p8" / "sweep_summary.csv").string()));
}
