#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "quenchotoc/config.hpp"

using namespace quenchotoc;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(QUENCHOTOC_SOURCE_DIR) / "configs";

fs::path write_temp(const std::string& name, const std::string& body) {
  const fs::path dir = fs::temp_directory_path() / "quenchotoc_config_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << body;
  return p;
}

int error_line(const std::string& body) {
  const fs::path p = write_temp("bad.ini", body);
  try {
    load_config(p.string());
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.file(), p.string());
    EXPECT_NE(std::string(e.what()).find(p.string() + ":" + std::to_string(e.line()) + ": "),
              std::string::npos);
    return e.line();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << body;
  return -1;
}

}  // namespace

TEST(Angles, PiFractionsAreCanonical) {
  EXPECT_EQ(parse_angle("pi/16").text, "pi/16");
  EXPECT_EQ(parse_angle("2pi/32").text, "pi/16");
  EXPECT_EQ(parse_angle(" PI / 4 ").text, "pi/4");
  EXPECT_EQ(parse_angle("16pi").text, "16pi");
  EXPECT_EQ(parse_angle("pi").text, "pi");
  EXPECT_EQ(parse_angle("-pi/4").text, "-pi/4");
  EXPECT_DOUBLE_EQ(parse_angle("pi/16").value, kPi / 16);
  EXPECT_DOUBLE_EQ(parse_angle("8pi").value, 8 * kPi);
  EXPECT_DOUBLE_EQ(parse_angle("pi/6").value, kPi / 6);
}

TEST(Angles, DecimalsKeepShortestText) {
  const Angle a = parse_angle("0.19");
  EXPECT_EQ(a.text, "0.19");
  EXPECT_DOUBLE_EQ(a.value, 0.19);
  EXPECT_EQ(parse_angle("0.190").text, "0.19");
}

TEST(Angles, RejectsMalformedText) {
  for (const char* bad : {"", "pi/0", "foo", "pi/x", "3..1", "pi pi"}) {
    EXPECT_THROW(parse_angle(bad), ConfigError) << bad;
  }
}

TEST(Scalars, ParsingAndLists) {
  EXPECT_EQ(parse_integer(" 12 "), 12);
  EXPECT_THROW(parse_integer("12.5"), ConfigError);
  EXPECT_DOUBLE_EQ(parse_real("0.1"), 0.1);
  EXPECT_THROW(parse_real("abc"), ConfigError);
  EXPECT_TRUE(parse_bool("Yes"));
  EXPECT_FALSE(parse_bool("off"));
  EXPECT_THROW(parse_bool("maybe"), ConfigError);
  EXPECT_EQ(split_list("1, 5,10"), (std::vector<std::string>{"1", "5", "10"}));
  EXPECT_EQ(parse_kicks("20, 1, 5, 5"), (std::vector<long>{1, 5, 20}));
  EXPECT_EQ(format_shortest(0.1), "0.1");
  EXPECT_EQ(format_shortest(-0.0), "0");
}

TEST(RunConfig, Defaults) {
  RunConfig c;
  EXPECT_EQ(c.n_sites, 12);
  EXPECT_EQ(c.tau.text, "pi/4");
  EXPECT_EQ(c.protocol, ProtocolTag::Linear);
  EXPECT_EQ(c.hz0, 1.0);
  EXPECT_EQ(c.gamma, 0.1);
  EXPECT_EQ(c.t_max.text, "16pi");
  EXPECT_EQ(c.convention, HeisenbergConvention::UWUdag);
  EXPECT_EQ(c.resolved_n_max(), 400);
  c.tau = parse_angle("pi/16");
  EXPECT_EQ(c.resolved_n_max(), 1000);
  c.protocol = ProtocolTag::Periodic;
  EXPECT_EQ(c.resolved_n_max(), 256);
  c.tau = parse_angle("pi/4");
  c.t_max = parse_angle("8pi");
  EXPECT_EQ(c.resolved_n_max(), 32);
  c.n_max = 77;
  EXPECT_EQ(c.resolved_n_max(), 77);
}

TEST(RunConfig, KeysAreCanonicalAndIgnoreKickCount) {
  RunConfig a, b;
  a.tau = parse_angle("pi/16");
  b.tau = parse_angle("2pi/32");
  b.n_max = 50;
  EXPECT_EQ(a.evolution_text(), b.evolution_text());
  b.hx0 = 0.1;
  EXPECT_NE(a.evolution_text(), b.evolution_text());
  EXPECT_EQ(a.evolution_text().find("n_max"), std::string::npos);
  EXPECT_EQ(RunConfig{}.run_key(), "linear;N=12;tau=pi/4;hx0=0;hz0=1;gamma=0.1;obs=block-x");
  RunConfig local;
  local.protocol = ProtocolTag::Periodic;
  local.hz0 = 4;
  local.observable.family = ObservableFamily::LocalPauliZ;
  EXPECT_EQ(local.run_key(), "periodic;N=12;tau=pi/4;hx0=0;hz0=4;tmax=16pi;obs=local-z;sites=1-6");
}

TEST(RunConfig, UnitarySpectraShareKeysAcrossObservables) {
  RunConfig a, b;
  b.observable.family = ObservableFamily::LocalPauliX;
  b.convention = HeisenbergConvention::UdagWU;
  EXPECT_EQ(a.evolution_text(false), b.evolution_text(false));
  EXPECT_NE(a.evolution_text(true), b.evolution_text(true));
}

TEST(Validation, Messages) {
  RunConfig c;
  c.n_sites = 3;
  try {
    validate_config(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("N must be even"), std::string::npos);
  }
  c = RunConfig{};
  c.analysis.nnsd_kicks = {0, 5};
  try {
    validate_config(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("kicks start at 1"), std::string::npos);
  }
  c.analysis.nnsd_kicks = {5, 500};
  EXPECT_THROW(validate_config(c), ConfigError);
  c = RunConfig{};
  c.observable.family = ObservableFamily::LocalPauliX;
  c.observable.site_w = 6;
  EXPECT_THROW(validate_config(c), ConfigError);
  c = RunConfig{};
  c.tau = parse_angle("-pi/4");
  EXPECT_THROW(validate_config(c), ConfigError);
  c = RunConfig{};
  c.gamma = -0.1;
  EXPECT_THROW(validate_config(c), ConfigError);
  EXPECT_NO_THROW(validate_config(RunConfig{}));
}

TEST(LoadConfig, SampleFiles) {
  const ConfigFile growth = load_config((kConfigs / "growth_linear.ini").string());
  EXPECT_TRUE(growth.grid.empty());
  EXPECT_EQ(growth.base.tau.text, "pi/16");
  EXPECT_EQ(growth.base.n_max, 200);
  EXPECT_FALSE(growth.base.analysis.saturation);

  const ConfigFile nnsd = load_config((kConfigs / "nnsd_linear.ini").string());
  EXPECT_EQ(nnsd.base.analysis.nnsd_kicks, (std::vector<long>{1, 5, 10, 20, 50, 100}));
  EXPECT_EQ(nnsd.base.hx0, 1.0);

  const ConfigFile periodic = load_config((kConfigs / "periodic_block_x.ini").string());
  EXPECT_EQ(periodic.base.protocol, ProtocolTag::Periodic);
  EXPECT_EQ(periodic.base.t_max.text, "8pi");
  EXPECT_EQ(periodic.base.hz0, 4.0);

  const ConfigFile grid = load_config((kConfigs / "grid_saturation.ini").string());
  const auto runs = expand_grid(grid.base, grid.grid);
  ASSERT_EQ(runs.size(), 33u);
  EXPECT_EQ(runs.front().tau.text, "pi/16");
  EXPECT_EQ(runs[1].hx0, 0.1);  // last axis fastest
  EXPECT_EQ(runs.back().tau.text, "pi/4");
  EXPECT_EQ(runs.back().hx0, 1.0);
  EXPECT_EQ(runs.front().analysis.saturation_fraction, 0.4);
  for (const auto& c : runs) EXPECT_NO_THROW(validate_config(c));

  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
  }
}

TEST(LoadConfig, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[evolution]\nN = 12\n\ntau = banana\n"), 4);
  EXPECT_EQ(error_line("; comment\n[schedules]\nprotocol = spiral\n"), 3);
  EXPECT_EQ(error_line("[otoc]\nobservable = block-x\ncolour = red\n"), 3);
  EXPECT_EQ(error_line("[analysis]\nfit = perhaps\n"), 2);
  EXPECT_EQ(error_line("[grid]\nschedules.hx0 = 0, x\n"), 2);
  EXPECT_EQ(error_line("[grid]\nhx0 = 0, 1\n"), 2);
  EXPECT_EQ(error_line("[evolution]\nN = 12\nthis line is not a setting\n"), 3);
  EXPECT_THROW(load_config("/nonexistent/file.ini"), ConfigError);
}
