#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include "support/proc.hpp"

// Exercises the installed command-line binary end to end. SOS_CLI_PATH is
// injected by the build so the tests run the freshly built executable.

namespace fs = std::filesystem;
using testsupport::make_temp_dir;
using testsupport::run_command;
using testsupport::slurp;
using testsupport::spit;

namespace {

std::string cli() { return SOS_CLI_PATH; }

std::string invoke(const std::string& args) { return cli() + " " + args; }

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

const char* kSmallModel =
    "[model]\n"
    "kbar = 2\n"
    "sigma_delta = 0.6\n"
    "[sim]\n"
    "t = 250\n"
    "[filter]\n"
    "n_particles = 300\n"
    "seed = 11\n";

}  // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
  CHECK(run_command(invoke("--help")).exit_code == 0);

  const auto help = run_command(invoke("--help"));
  for (const char* sub :
       {"simulate", "filter", "estimate-fi", "estimate-ii", "estimate-smm",
        "mc-accuracy", "var-backtest", "vuong"}) {
    CHECK(contains(help.output, sub));
  }

  CHECK(run_command(cli()).exit_code == 2);                   // no subcommand
  CHECK(run_command(invoke("frobnicate")).exit_code == 2);    // unknown
  CHECK(run_command(invoke("simulate")).exit_code == 2);      // no --config
  CHECK(run_command(invoke("simulate --config /absent.ini")).exit_code == 2);
}

TEST_CASE("config errors name the offending file and line") {
  const fs::path dir = make_temp_dir("cli_cfg");
  const fs::path cfg = dir / "bad.ini";
  spit(cfg, "[filter]\nn_particles = chicken\n");
  const auto res =
      run_command(invoke("simulate --config " + cfg.string()));
  CHECK(res.exit_code == 2);
  CHECK(contains(res.output, "bad.ini:2"));
  fs::remove_all(dir);
}

TEST_CASE("filter requires a returns file and flags unreadable data") {
  const fs::path dir = make_temp_dir("cli_fr");

  const fs::path no_io = dir / "noio.ini";
  spit(no_io, kSmallModel);
  CHECK(run_command(invoke("filter --config " + no_io.string())).exit_code ==
        2);

  const fs::path missing = dir / "missing.ini";
  spit(missing, std::string(kSmallModel) + "[io]\nreturns = " +
                    (dir / "absent.csv").string() + "\n");
  CHECK(run_command(invoke("filter --config " + missing.string()))
            .exit_code == 4);

  const fs::path broken_csv = dir / "broken.csv";
  spit(broken_csv, "date,excess_log_return\n2000-01-03,zero\n");
  const fs::path broken = dir / "broken.ini";
  spit(broken, std::string(kSmallModel) + "[io]\nreturns = " +
                   broken_csv.string() + "\n");
  const auto res = run_command(invoke("filter --config " + broken.string()));
  CHECK(res.exit_code == 4);
  CHECK(contains(res.output, "broken.csv:2"));
  fs::remove_all(dir);
}

TEST_CASE("simulate then filter produces stamped deterministic artifacts") {
  const fs::path dir = make_temp_dir("cli_chain");
  const fs::path cfg = dir / "run.ini";
  spit(cfg, kSmallModel);

  const fs::path sim_out = dir / "sim";
  const auto sim = run_command(invoke("simulate --config " + cfg.string() +
                                      " --out-dir " + sim_out.string()));
  REQUIRE(sim.exit_code == 0);
  REQUIRE(fs::exists(sim_out / "returns.csv"));
  REQUIRE(fs::exists(sim_out / "simulate.json"));

  const std::string returns_csv = slurp(sim_out / "returns.csv");
  CHECK(contains(returns_csv, "# config_hash = 0x"));
  CHECK(contains(returns_csv, "# seed = 11"));
  CHECK(contains(returns_csv, "# sos_version = "));
  CHECK(contains(returns_csv, "date,excess_log_return"));
  CHECK(contains(returns_csv, "2000-01-03,"));

  // Filter the simulated path.
  const fs::path fcfg = dir / "filt.ini";
  spit(fcfg, std::string(kSmallModel) + "[io]\nreturns = " +
                 (sim_out / "returns.csv").string() + "\n");

  const fs::path f1 = dir / "f1";
  const fs::path f2 = dir / "f2";
  const fs::path f3 = dir / "f3";
  REQUIRE(run_command(invoke("filter --config " + fcfg.string() +
                             " --out-dir " + f1.string()))
              .exit_code == 0);
  REQUIRE(run_command(invoke("filter --config " + fcfg.string() +
                             " --out-dir " + f2.string()))
              .exit_code == 0);
  REQUIRE(run_command(invoke("filter --config " + fcfg.string() +
                             " --workers 3 --out-dir " + f3.string()))
              .exit_code == 0);

  const std::string steps1 = slurp(f1 / "filter_steps.csv");
  CHECK(contains(steps1, "t,increment,ess,bandwidth,escalations"));
  CHECK(steps1 == slurp(f2 / "filter_steps.csv"));  // re-run stability
  CHECK(steps1 == slurp(f3 / "filter_steps.csv"));  // worker independence
  CHECK(slurp(f1 / "filter.json") == slurp(f3 / "filter.json"));
  CHECK(contains(slurp(f1 / "filter.json"), "\"loglik\""));

  // A different seed changes the artifact; the stamp reflects the override.
  const fs::path f4 = dir / "f4";
  REQUIRE(run_command(invoke("filter --config " + fcfg.string() +
                             " --seed 123 --out-dir " + f4.string()))
              .exit_code == 0);
  const std::string steps4 = slurp(f4 / "filter_steps.csv");
  CHECK(steps4 != steps1);
  CHECK(contains(steps4, "# seed = 123"));
  fs::remove_all(dir);
}

TEST_CASE("model comparison runs off increment files") {
  const fs::path dir = make_temp_dir("cli_vuong");
  std::string a = "t,increment\n";
  std::string b = "t,increment\n";
  for (int i = 0; i < 16; ++i) {
    a += std::to_string(i) + "," + std::to_string(0.5 + 0.01 * (i % 5)) + "\n";
    b += std::to_string(i) + "," + std::to_string(0.4 + 0.02 * (i % 3)) + "\n";
  }
  spit(dir / "a.csv", a);
  spit(dir / "b.csv", b);

  const std::string base = std::string("[estimation]\nnw_lags = 2\n[io]\n");
  const fs::path cfg = dir / "v.ini";
  spit(cfg, base + "increments_a = " + (dir / "a.csv").string() +
                "\nincrements_b = " + (dir / "b.csv").string() + "\n");
  const auto ok = run_command(invoke("vuong --config " + cfg.string() +
                                     " --out-dir " + dir.string()));
  CHECK(ok.exit_code == 0);
  CHECK(contains(slurp(dir / "vuong.json"), "\"statistic\""));

  // Identical inputs have a degenerate difference: numeric failure, code 3.
  const fs::path same = dir / "same.ini";
  spit(same, base + "increments_a = " + (dir / "a.csv").string() +
                 "\nincrements_b = " + (dir / "a.csv").string() + "\n");
  CHECK(run_command(invoke("vuong --config " + same.string() + " --out-dir " +
                           dir.string()))
            .exit_code == 3);

  // Non-positive increments cannot be log-transformed: data failure, code 4.
  spit(dir / "neg.csv", "t,increment\n0,-0.5\n1,0.5\n");
  const fs::path neg = dir / "neg.ini";
  spit(neg, base + "increments_a = " + (dir / "neg.csv").string() +
                "\nincrements_b = " + (dir / "b.csv").string() + "\n");
  CHECK(run_command(invoke("vuong --config " + neg.string() + " --out-dir " +
                           dir.string()))
            .exit_code == 4);
  fs::remove_all(dir);
}
