#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <map>
#include <sstream>

#include "config.hpp"
#include "pipeline.hpp"

using namespace trajseq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() / ("trajseq_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// A small two-block scenario so the whole pipeline runs in well under a second.
fs::path write_fixture(const fs::path& dir, const std::string& extra = "") {
    std::ofstream(dir / "scenario.json") << R"({
      "grid": {"cell_size": 1, "n_cols": 10, "n_rows": 6},
      "span": [2001, 2016],
      "regions": [
        {"name": "west", "cells": [0, 0, 5, 6],
         "chain": {"NC": {"NC": 0.7, "CH": 0.3}, "CH": {"NC": 0.4, "CH": 0.6}}},
        {"name": "east", "cells": [5, 0, 10, 6],
         "chain": {"NC": {"NC": 0.7, "DL": 0.3}, "DL": {"NC": 0.2, "DL": 0.8}}}
      ]
    })";
    std::ofstream(dir / "config.json") << R"({
      "input": {"scenario": "scenario.json"},
      "cluster": {"k": 2},
      "joins": {"permutations": 199},
      "seed": 5)" << extra << "\n}\n";
    return dir / "config.json";
}

std::map<std::string, std::string> artifacts(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        if (name.ends_with(".manifest.json") || name == "config.json" || name == "scenario.json") continue;
        out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    }
    return out;
}

int run_cli(const std::string& args, std::string* err = nullptr) {
    const auto log = fs::temp_directory_path() / "trajseq_cli_stderr.txt";
    const std::string cmd = std::string("\"") + TRAJSEQ_CLI_PATH + "\" " + args + " 2>\"" + log.string() + "\"";
    const int rc = std::system(cmd.c_str());
    if (err) *err = slurp(log);
    return rc;
}

}  // namespace

TEST(Cli, RerunIsByteIdentical) {
    TempDir a("rerun_a"), b("rerun_b");
    auto ca = cli::load_config(write_fixture(a.path()));
    auto cb = cli::load_config(write_fixture(b.path()));
    std::ostringstream log;
    cli::run_all(ca, log);
    cb.workers = 3;
    cli::run_all(cb, log);
    const auto x = artifacts(a.path()), y = artifacts(b.path());
    ASSERT_GE(x.size(), 25u);
    EXPECT_EQ(x, y);
}

TEST(Cli, SeparateStagesEqualOneInvocation) {
    TempDir one("one"), sep("sep");
    ASSERT_EQ(run_cli("run --config " + write_fixture(one.path()).string()), 0);
    const auto cfg = write_fixture(sep.path()).string();
    for (const char* stage :
         {"synth", "ingest", "classify", "sequences", "distances", "cluster", "stats", "joins", "report"}) {
        ASSERT_EQ(run_cli(std::string(stage) + " --config " + cfg + " --workers 2"), 0) << stage;
    }
    EXPECT_EQ(artifacts(one.path()), artifacts(sep.path()));
    EXPECT_TRUE(fs::exists(sep.path() / "out" / "report" / "trajectories.geojson"));
}

TEST(Cli, MissingUpstreamArtifactNamesTheStage) {
    TempDir d("missing");
    std::string err;
    EXPECT_NE(run_cli("distances --config " + write_fixture(d.path()).string(), &err), 0);
    EXPECT_NE(err.find("'sequences'"), std::string::npos) << err;

    const auto cfg = cli::load_config(write_fixture(d.path()));
    std::ostringstream log;
    EXPECT_THROW(cli::run_stage(cli::Stage::classify, cfg, log), Error);
    try {
        cli::run_stage(cli::Stage::classify, cfg, log);
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("'ingest'"), std::string::npos);
    }
}

TEST(Cli, ConfigValidationEnumeratesProblems) {
    try {
        cli::parse_config(R"({"cluster": {"k": 0}, "joins": {"contiguity": "bishop", "permutations": 5},
                              "grid": {"cell_size": -1}, "colour": 1})",
                          fs::temp_directory_path());
        FAIL() << "expected an error";
    } catch (const Error& e) {
        const std::string msg = e.what();
        for (const char* part : {"input:", "cluster.k", "joins.contiguity", "joins.permutations", "grid.cell_size",
                                 "unknown key 'colour'"}) {
            EXPECT_NE(msg.find(part), std::string::npos) << part << "\n" << msg;
        }
    }
}

TEST(Cli, ClusterCountIsRequired) {
    try {
        cli::parse_config(R"({"input": {"scenario": "s.json"}})", fs::temp_directory_path());
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("cluster.k: required"), std::string::npos) << e.what();
    }
}

TEST(Cli, ManifestsAndHeadersCarryHashAndSeed) {
    TempDir d("manifest");
    const auto cfg = cli::load_config(write_fixture(d.path()));
    std::ostringstream log;
    cli::run_all(cfg, log);
    const auto out = d.path() / "out";
    const auto m = nlohmann::json::parse(slurp(out / "sequences.manifest.json"));
    EXPECT_EQ(m["stage"], "sequences");
    EXPECT_EQ(m["config_hash"], cfg.hash());
    EXPECT_EQ(m["seed"], 5u);
    ASSERT_EQ(m["inputs"].size(), 1u);
    EXPECT_EQ(m["inputs"][0]["sha256"].get<std::string>().size(), 64u);
    EXPECT_GE(m["outputs"].size(), 4u);
    EXPECT_TRUE(m.contains("created_utc"));

    const auto states = slurp(out / "states.csv");
    EXPECT_NE(states.find("config_hash=" + cfg.hash()), std::string::npos);
    EXPECT_NE(states.find("seed=5"), std::string::npos);

    // Worker count and output directory do not change the hash.
    auto other = cfg;
    other.workers = 7;
    other.output_dir = "/elsewhere";
    EXPECT_EQ(other.hash(), cfg.hash());
    other.seed = 6;
    EXPECT_NE(other.hash(), cfg.hash());
}

TEST(Cli, SeedFlagChangesSyntheticData) {
    TempDir a("seed_a"), b("seed_b");
    ASSERT_EQ(run_cli("synth --config " + write_fixture(a.path()).string()), 0);
    ASSERT_EQ(run_cli("synth --seed 6 --config " + write_fixture(b.path()).string()), 0);
    EXPECT_NE(slurp(a.path() / "out" / "synthetic_events.csv"), slurp(b.path() / "out" / "synthetic_events.csv"));
}

TEST(Cli, AcledExportIngest) {
    TempDir d("acled");
    fs::copy_file(TRAJSEQ_TEST_DATA "/acled_sample.csv", d.path() / "acled.csv");
    std::ofstream(d.path() / "config.json") << R"({
      "input": {"events": "acled.csv"},
      "grid": {"bbox": [2.5, 4.0, 15.0, 14.0], "cell_size": 0.5},
      "cluster": {"k": 6},
      "seed": 1
    })";
    const auto cfg = cli::load_config(d.path() / "config.json");
    std::ostringstream log;
    cli::run_stage(cli::Stage::ingest, cfg, log);
    cli::run_stage(cli::Stage::classify, cfg, log);
    const auto events = slurp(d.path() / "out" / "events.csv");
    EXPECT_NE(events.find("NGA1001"), std::string::npos);
    EXPECT_NE(events.find("NGA1005"), std::string::npos);
    EXPECT_EQ(events.find("NGA1004"), std::string::npos);  // riot
    const auto rejects = slurp(d.path() / "out" / "rejects.csv");
    for (const char* kind : {"excluded_type", "malformed", "outside_span"})
        EXPECT_NE(rejects.find(kind), std::string::npos) << kind;
    EXPECT_NE(log.str().find("rows=10 kept=4"), std::string::npos) << log.str();
}
