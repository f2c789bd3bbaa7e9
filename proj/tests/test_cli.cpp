#include "doctest.h"

#include "gnet/cli.hpp"
#include "gnet/io.hpp"
#include "support/temp_dir.hpp"

using namespace gnet;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "gnet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  return cli_main(static_cast<int>(args.size()), argv.data());
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

void write_small_input(const std::filesystem::path& dir) {
  io::write_file_atomic(dir / "nodes.csv",
                        "id,month,asset,liability,loan,credit_line,listed\n"
                        "a,2008-01,100,50,10,20,0\n"
                        "b,2008-01,200,80,5,0,1\n"
                        "c,2008-01,150,120,0,0,0\n"
                        "a,2008-02,100,55,10,20,0\n"
                        "b,2008-02,200,90,5,0,1\n");
  io::write_file_atomic(dir / "edges.csv",
                        "guarantor_id,debtor_id,amount,month\n"
                        "a,b,5,2008-01\n"
                        "c,b,2,2008-01\n"
                        "b,a,3,2008-02\n");
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with code 2") {
    CHECK(run({"frobnicate"}) == kExitUsage);
    CHECK(run({}) == kExitUsage);
    test::TempDir dir;
    CHECK(run({"simulate", "--out", dir.path().string()}) == kExitUsage);
    CHECK(run({"generate", "--preset", "phase7", "--out", dir.path().string()}) == kExitUsage);
    CHECK(run({"metrics", "--preset", "phase1"}) == kExitUsage);
    CHECK(run({"--help"}) == kExitOk);
  }

  TEST_CASE("ingest, validate and metrics on CSV input") {
    test::TempDir in, store, out;
    write_small_input(in.path());
    CHECK(run({"validate", "--in", in.path().string()}) == kExitOk);
    CHECK(run({"ingest", "--in", in.path().string(), "--out", store.path().string()}) == kExitOk);
    CHECK(io::read_file(store / "snapshots.csv") == "month,nodes,edges\n2008-01,3,2\n2008-02,2,1\n");
    CHECK(run({"metrics", "--in", store.path().string(), "--out", out.path().string()}) == kExitOk);
    const auto monthly = io::read_file(out / "metrics_monthly.csv");
    CHECK(line_count(monthly) == 3);
    // both months fall in the first canonical phase
    const auto summary = io::read_file(out / "phase_summary.csv");
    CHECK(summary.substr(0, summary.find('\n')) == "metric,phase1_mean,phase1_sd");
  }

  TEST_CASE("validate reports bad rows") {
    test::TempDir in;
    io::write_file_atomic(in / "nodes.csv",
                          "id,month,asset,liability,loan,credit_line,listed\n"
                          "a,2008-01,0,50,10,20,0\n"
                          "b,2008-01,200,80,5,0,1\n");
    io::write_file_atomic(in / "edges.csv",
                          "guarantor_id,debtor_id,amount,month\n"
                          "b,b,5,2008-01\n");
    CHECK(run({"validate", "--in", in.path().string()}) == kExitInvalid);
    test::TempDir out;
    CHECK(run({"ingest", "--in", in.path().string(), "--out", out.path().string()}) == kExitInvalid);
    CHECK_FALSE(std::filesystem::exists(out / "nodes.csv"));
  }

  TEST_CASE("generate a phase preset and summarise it") {
    test::TempDir gen, m1, m2;
    REQUIRE(run({"generate", "--preset", "phase1", "--seed", "3", "--out", gen.path().string()}) == kExitOk);
    REQUIRE(run({"metrics", "--in", gen.path().string(), "--seed", "3", "--out", m1.path().string()}) == kExitOk);
    const auto summary = io::read_file(m1 / "phase_summary.csv");
    CHECK(summary.substr(0, summary.find('\n')) == "metric,phase1_mean,phase1_sd");
    CHECK(line_count(io::read_file(m1 / "metrics_monthly.csv")) == 2);

    // reruns are byte-identical, whether from the files or straight from the preset
    REQUIRE(run({"metrics", "--preset", "phase1", "--seed", "3", "--out", m2.path().string()}) == kExitOk);
    CHECK(io::read_file(m1 / "metrics_monthly.csv") == io::read_file(m2 / "metrics_monthly.csv"));
    CHECK(io::read_file(m1 / "phase_summary.csv") == io::read_file(m2 / "phase_summary.csv"));
  }

  TEST_CASE("simulate and report") {
    test::TempDir in, sim, sim2, metrics, report;
    write_small_input(in.path());
    const std::vector<std::string> args{"simulate", "--in",       in.path().string(), "--runs", "20",
                                        "--p",      "0.5",        "--scenario",       "random", "--scenario",
                                        "top_loan", "--threads",  "2"};
    auto with_out = [&](const test::TempDir& d) {
      auto a = args;
      a.push_back("--out");
      a.push_back(d.path().string());
      return a;
    };
    REQUIRE(run(with_out(sim)) == kExitOk);
    REQUIRE(run(with_out(sim2)) == kExitOk);
    const auto csv = io::read_file(sim / "sim_summary.csv");
    CHECK(line_count(csv) == 1 + 2 * 2);
    CHECK(csv == io::read_file(sim2 / "sim_summary.csv"));
    CHECK(io::read_file(sim / "sim_summary.json") == io::read_file(sim2 / "sim_summary.json"));

    REQUIRE(run({"metrics", "--in", in.path().string(), "--out", metrics.path().string()}) == kExitOk);
    REQUIRE(run({"report", "--metrics", metrics.path().string(), "--sim", sim.path().string(), "--out",
                 report.path().string()}) == kExitOk);
    const auto overview = io::read_file(report / "monthly_overview.csv");
    const auto header = overview.substr(0, overview.find('\n'));
    CHECK(header.find("failure_random_p0.5") != std::string::npos);
    CHECK(header.find("failure_top_loan_p0.5") != std::string::npos);
    CHECK(line_count(overview) == 3);
    CHECK(std::filesystem::exists(report / "sim_summary.csv"));
    CHECK(run({"report", "--metrics", metrics.path().string(), "--out", report.path().string()}) == kExitUsage);
  }

  TEST_CASE("config files") {
    test::TempDir dir, out;
    io::write_file_atomic(dir / "run.json", R"({"preset": "phase2", "seed": 5,
        "contagion": {"runs": 10, "scenarios": ["top_in_degree"], "seed_fractions": [0.05]}})");
    CHECK(run({"simulate", "--config", (dir / "run.json").string(), "--out", out.path().string()}) == kExitOk);
    CHECK(line_count(io::read_file(out / "sim_summary.csv")) == 2);

    io::write_file_atomic(dir / "bad.json", R"({"contagion": {"k": -1}, "preset": "phase2"})");
    CHECK(run({"simulate", "--config", (dir / "bad.json").string(), "--out", out.path().string()}) == kExitUsage);
    io::write_file_atomic(dir / "broken.json", "{");
    CHECK(run({"metrics", "--config", (dir / "broken.json").string(), "--out", out.path().string()}) == kExitUsage);
  }
}
