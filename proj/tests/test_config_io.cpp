#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "nvmag/app.hpp"
#include "nvmag/config.hpp"
#include "nvmag/csv.hpp"
#include "nvmag/errors.hpp"

using namespace nvmag;

namespace {

const char* minimal_ini = R"(
[run]
seed = 7

[spin_model]
k_r_mhz = 65.9
k_isc0_mhz = 7.9
k_isc1_mhz = 53.3
k_s0_mhz = 0.98
k_s1_mhz = 0.73
t1_spin_ms = 5.5
t2_star_us = 0.4

[drive]
gamma_p_mhz = 2.0
omega_rabi_mhz = 1.0
omega_c_mhz = 2870
omega_0_mhz = 2870
v0_volts = 1.0

[grid]
span_mhz = 12
points = 101
)";

std::filesystem::path temp_file(const std::string& name,
                                const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("minimal ini parses with defaults applied") {
  const auto cfg = parse_config(minimal_ini, false);
  CHECK(cfg.run.seed == 7);
  CHECK(cfg.run.out_dir == "out");
  REQUIRE(cfg.spin_model.has_value());
  CHECK(cfg.spin_model->a_par_mhz == doctest::Approx(2.16));
  REQUIRE(cfg.drive.has_value());
  CHECK(cfg.drive->three_tone == true);
  CHECK(!cfg.modulation.has_value());
  CHECK_THROWS_AS(cfg.need_modulation(), ValidationError);
}

TEST_CASE("unknown keys and sections are rejected by name") {
  const std::string with_unknown = std::string(minimal_ini) +
                                   "\n[modulation]\nnu_khz = 30\nbogus = 1\n";
  try {
    parse_config(with_unknown, false);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config("[nonsense]\nx = 1\n", false), ValidationError);
}

TEST_CASE("missing required keys are reported by name") {
  const char* missing = R"(
[spin_model]
k_r_mhz = 65.9
k_isc0_mhz = 7.9
k_isc1_mhz = 53.3
k_s0_mhz = 0.98
k_s1_mhz = 0.73
t1_spin_ms = 5.5
)";
  try {
    parse_config(missing, false);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("t2_star_us") != std::string::npos);
  }
}

TEST_CASE("duplicate keys and malformed numbers are rejected") {
  CHECK_THROWS_AS(parse_config("[run]\nseed = 1\nseed = 2\n", false),
                  ValidationError);
  CHECK_THROWS_AS(parse_config("[grid]\nspan_mhz = abc\n", false),
                  ValidationError);
  CHECK_THROWS_AS(parse_config("[run\nseed = 1\n", false),
                  ValidationError);
  CHECK_THROWS_AS(parse_config("seed = 1\n", false), ValidationError);
}

TEST_CASE("json mirror parses to the same configuration") {
  const char* json = R"({
    "run": {"seed": 7},
    "spin_model": {
      "k_r_mhz": 65.9, "k_isc0_mhz": 7.9, "k_isc1_mhz": 53.3,
      "k_s0_mhz": 0.98, "k_s1_mhz": 0.73,
      "t1_spin_ms": 5.5, "t2_star_us": 0.4
    },
    "drive": {
      "gamma_p_mhz": 2.0, "omega_rabi_mhz": 1.0,
      "omega_c_mhz": 2870, "omega_0_mhz": 2870, "v0_volts": 1.0
    },
    "grid": {"span_mhz": 12, "points": 101},
    "scenario": {
      "tone_freqs_hz": [60.0, 120.0],
      "tone_amps_t": [1e-9, 2e-9]
    }
  })";
  const auto cfg = parse_config(json, true);
  const auto ini = parse_config(minimal_ini, false);
  CHECK(cfg.run.seed == ini.run.seed);
  CHECK(cfg.spin_model->k_r_mhz == ini.spin_model->k_r_mhz);
  CHECK(cfg.drive->gamma_p_mhz == ini.drive->gamma_p_mhz);
  REQUIRE(cfg.scenario.has_value());
  REQUIRE(cfg.scenario->scenario.tones.size() == 2);
  CHECK(cfg.scenario->scenario.tones[1].freq_hz == doctest::Approx(120.0));
  CHECK(cfg.scenario->scenario.tones[1].amplitude_t == doctest::Approx(2e-9));

  CHECK_THROWS_AS(parse_config("[1, 2]", true), ValidationError);
  CHECK_THROWS_AS(parse_config("{ not json", true), ValidationError);
}

TEST_CASE("config hash is stable and content sensitive") {
  CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
  CHECK(fnv1a_hex("abc") != fnv1a_hex("abd"));
  CHECK(fnv1a_hex("").size() == 16);
}

TEST_CASE("trace csv round trip") {
  TimeTrace t;
  t.sample_rate_hz = 2000.0;
  t.units = TraceUnits::tesla;
  t.seed = 99;
  for (int i = 0; i < 500; ++i) t.samples.push_back(std::sin(0.01 * i) * 1e-9);

  const auto path = std::filesystem::temp_directory_path() / "nvmag_trace.csv";
  write_trace_csv(path.string(), {"nvmag test"}, t);
  const auto back = read_trace_csv(path.string());

  CHECK(back.sample_rate_hz == doctest::Approx(2000.0));
  CHECK(back.units == TraceUnits::tesla);
  CHECK(back.seed.value() == 99);
  REQUIRE(back.samples.size() == t.samples.size());
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    CHECK(back.samples[i] ==
          doctest::Approx(t.samples[i]).epsilon(1e-12));
  }
  std::filesystem::remove(path);
}

TEST_CASE("cli maps errors to exit codes") {
  // No config file.
  CHECK(app::run_cli({"spectrum", "--config", "/nonexistent.ini"}) == 1);

  // Valid minimal config: spectrum runs, sweep lacks its sections.
  const auto cfg_path = temp_file("nvmag_minimal.ini", minimal_ini);
  const auto out_dir =
      std::filesystem::temp_directory_path() / "nvmag_cli_test_out";
  std::filesystem::remove_all(out_dir);
  CHECK(app::run_cli({"spectrum", "--config", cfg_path.string(), "--out-dir",
                      out_dir.string()}) == 0);
  CHECK(std::filesystem::exists(out_dir / "cw_spectrum.csv"));

  // Every output leads with the version/hash/seed comment block.
  {
    std::ifstream f(out_dir / "cw_spectrum.csv");
    std::string first, second;
    std::getline(f, first);
    std::getline(f, second);
    CHECK(first.rfind("# nvmag ", 0) == 0);
    CHECK(second.find("config_hash=") != std::string::npos);
    CHECK(second.find("seed=") != std::string::npos);
  }
  CHECK(app::run_cli({"sweep", "--config", cfg_path.string(), "--out-dir",
                      out_dir.string()}) == 1);

  // Unknown flag and missing subcommand are usage errors.
  CHECK(app::run_cli({"spectrum", "--config", cfg_path.string(),
                      "--frobnicate"}) == 1);
  CHECK(app::run_cli({}) == 1);

  // Numerical failures exit with 2: an undriven model has zero slope.
  std::string undriven(minimal_ini);
  const auto pos = undriven.find("omega_rabi_mhz = 1.0");
  undriven.replace(pos, 20, "omega_rabi_mhz = 0.0");
  undriven +=
      "\n[modulation]\nnu_khz = 30\n\n[lockin]\ngain_g = 5000\n\n[noise]\n";
  const auto undriven_path = temp_file("nvmag_undriven.ini", undriven);
  CHECK(app::run_cli({"sensitivity", "--config", undriven_path.string(),
                      "--out-dir", out_dir.string()}) == 2);
  std::filesystem::remove(undriven_path);

  std::filesystem::remove_all(out_dir);
  std::filesystem::remove(cfg_path);
}

TEST_CASE("number formatting is locale-independent and terse") {
  CHECK(format_number(1.5) == "1.5");
  CHECK(format_number(0.25) == "0.25");
  CHECK(format_number(1e-12) == "1e-12");
}
