#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "schreg/artifacts.hpp"
#include "schreg/run.hpp"
#include "schreg/scenario.hpp"

using namespace schreg;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"({
  "name": "small",
  "plant": {"q": 1.0, "h": {"kind": "constant", "value": 0.5},
            "g": {"kind": "constant", "value": 1.0}},
  "exosystem": {
    "S_d": [[0, 0, 0], [0, 0, 2], [0, -2, 0]],
    "S_r": [[0, 1], [-1, 0]],
    "q_d1": [1, 1, 0], "q_d2": [0.5, 0, 1], "q_r": [1, 0],
    "w0": [1, 1, 0, 1, 0]
  },
  "observation": {"theta": 1.0, "x0": 0.3, "c": {"kind": "constant", "value": 0.5}},
  "tuning": {"c_s": 1.0, "c_o": 2.0, "poles_r": [-1, -2], "poles_d": [-1.5, -2.5, -3.5]},
  "numerics": {"n_cells": 48, "dt": 0.001, "horizon": 0.5, "record_every": 50},
  "initial": {"z0": [{"kind": "sinusoid", "freq_pi": 1.0},
                     {"kind": "sinusoid", "amplitude": 0.4, "freq_pi": 2.0}]}
})";

fs::path temp_dir(const char* leaf) {
  fs::path p = fs::temp_directory_path() / "schreg_tests" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("scenario parsing") {
  SUBCASE("a complete config round-trips into a validated scenario") {
    Scenario sc = parse_scenario(kSmallConfig);
    CHECK_NOTHROW(sc.validate());
    CHECK(sc.grid.n_cells == 48);
    CHECK(sc.exosystem.n_w() == 5);
    CHECK(sc.z0[0].real() == doctest::Approx(1.4));  // cos(0) + 0.4 cos(0)
  }
  SUBCASE("numeric overrides win") {
    ScenarioOverrides ov;
    ov.n_cells = 64;
    ov.dt = 5e-4;
    Scenario sc = parse_scenario(kSmallConfig, ov);
    CHECK(sc.grid.n_cells == 64);
    CHECK(sc.dt == 5e-4);
  }
  SUBCASE("broken JSON and missing sections are config errors") {
    CHECK_THROWS_AS(parse_scenario("{ nope"), Error);
    CHECK_THROWS_AS(parse_scenario("{}"), Error);
  }
  SUBCASE("unobservable reference pair fails validation with the named reason") {
    std::string bad = kSmallConfig;
    const auto at = bad.find("\"q_r\": [1, 0]");
    bad.replace(at, std::string("\"q_r\": [1, 0]").size(), "\"q_r\": [0, 0]");
    Scenario sc = parse_scenario(bad);
    try {
      sc.validate();
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.exit_code() == 2);
      CHECK(std::string(e.what()).find("observable") != std::string::npos);
    }
  }
}

TEST_CASE("mode runs produce their artifacts") {
  const fs::path cfg = temp_dir("cfg") / "small.json";
  {
    std::ofstream out(cfg);
    out << kSmallConfig;
  }

  SUBCASE("kernels mode") {
    const fs::path out = temp_dir("kernels");
    CHECK(run(cfg, RunMode::kernels, out) == 0);
    CHECK(fs::exists(out / "control_kernel.csv"));
    CHECK(fs::exists(out / "observer_kernel_reciprocal.csv"));
    CHECK(fs::exists(out / "residuals.json"));
  }

  SUBCASE("spectrum mode") {
    const fs::path out = temp_dir("spectrum");
    CHECK(run(cfg, RunMode::spectrum, out) == 0);
    CHECK(fs::exists(out / "spectrum.csv"));
    CHECK(fs::exists(out / "properness.csv"));
    const std::string head = slurp(out / "spectrum.csv").substr(0, 60);
    CHECK(head.find("n,re_lambda,im_lambda") == 0);
  }

  SUBCASE("regulate mode emits deterministic artifacts") {
    const fs::path out1 = temp_dir("reg1");
    const fs::path out2 = temp_dir("reg2");
    CHECK(run(cfg, RunMode::regulate, out1) == 0);
    CHECK(run(cfg, RunMode::regulate, out2) == 0);
    CHECK(slurp(out1 / "timeseries.csv") == slurp(out2 / "timeseries.csv"));
    CHECK(slurp(out1 / "ey_log.svg") == slurp(out2 / "ey_log.svg"));
    CHECK(slurp(out1 / "gains.json") == slurp(out2 / "gains.json"));
  }

  SUBCASE("closedloop mode") {
    const fs::path out = temp_dir("cl");
    CHECK(run(cfg, RunMode::closedloop, out) == 0);
    CHECK(fs::exists(out / "closedloop_report.json"));
    CHECK(fs::exists(out / "ey_log.svg"));
  }

  SUBCASE("invalid config exits 2") {
    std::string bad = kSmallConfig;
    const auto at = bad.find("\"q_r\": [1, 0]");
    bad.replace(at, std::string("\"q_r\": [1, 0]").size(), "\"q_r\": [0, 0]");
    const fs::path bad_cfg = temp_dir("badcfg") / "bad.json";
    {
      std::ofstream out(bad_cfg);
      out << bad;
    }
    CHECK(run(bad_cfg, RunMode::regulate, temp_dir("badrun")) == 2);
  }

  SUBCASE("missing config file exits 2") {
    CHECK(run(temp_dir("nope") / "missing.json", RunMode::kernels, temp_dir("noout")) == 2);
  }
}

TEST_CASE("gain set round-trips through its JSON document") {
  Scenario sc = parse_scenario(kSmallConfig);
  GainSet gains = assemble_gains(sc.plant(), sc.exosystem, sc.observation(), sc.c_s, sc.c_o,
                                 sc.poles_r, sc.poles_d, sc.grid);
  const fs::path path = temp_dir("gains") / "gains.json";
  save_gains_json(gains, path);
  GainSet back = load_gains_json(path);

  CHECK(back.kernels.c_s == gains.kernels.c_s);
  CHECK(sup_diff(back.l_profile, gains.l_profile) == 0.0);
  CHECK(back.l0 == gains.l0);
  CHECK((back.m_w - gains.m_w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.l_d - gains.l_d).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.A_d - gains.A_d).cwiseAbs().maxCoeff() == 0.0);
  for (size_t k = 0; k < gains.m.size(); ++k)
    CHECK(sup_diff(back.m[k], gains.m[k]) == 0.0);
  const int n = sc.grid.n_cells;
  CHECK(back.kernels.control(n / 2, n / 3) == gains.kernels.control(n / 2, n / 3));
  CHECK(back.kernels.observer_reciprocal(n / 3, n / 2) ==
        gains.kernels.observer_reciprocal(n / 3, n / 2));
}

TEST_CASE("plots") {
  Scenario sc = parse_scenario(kSmallConfig);
  GainSet gains = assemble_gains(sc.plant(), sc.exosystem, sc.observation(), sc.c_s, sc.c_o,
                                 sc.poles_r, sc.poles_d, sc.grid);
  TimeSeries ts = simulate_state_feedback(sc.plant(), sc.exosystem, gains, sc.observation(),
                                          sc.z0, sc.sim_config());
  const fs::path dir = temp_dir("plots");

  SUBCASE("two-column overlay contains both polylines") {
    emit_plot(ts, {"norm_z", "abs_ey"}, dir / "two.svg", true);
    const std::string svg = slurp(dir / "two.svg");
    CHECK(svg.find("norm_z") != std::string::npos);
    CHECK(svg.find("abs_ey") != std::string::npos);
    size_t count = 0, at = 0;
    while ((at = svg.find("<polyline", at)) != std::string::npos) {
      ++count;
      at += 9;
    }
    CHECK(count == 2);
  }

  SUBCASE("empty series still yields a well-formed chart") {
    TimeSeries empty;
    emit_plot(empty, {}, dir / "empty.svg");
    const std::string svg = slurp(dir / "empty.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
  }

  SUBCASE("unknown column is an error") {
    CHECK_THROWS_AS(emit_plot(ts, {"no_such_channel"}, dir / "x.svg"), Error);
  }
}
