#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_io.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace ebcli;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ebstates_cli_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string key_of(auto&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("key = value parsing") {
  const auto map = parse_config_text("# comment\n\n  B = 3\nL=50\r\nmode = real  \n");
  CHECK(map.size() == 3);
  CHECK(map.at("B") == "3");
  CHECK(map.at("L") == "50");
  CHECK(map.at("mode") == "real");

  CHECK(key_of([] { parse_config_text("B = 3\nB = 4\n"); }) == "B");
  CHECK_THROWS_AS(parse_config_text("just text\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(" = 3\n"), ConfigError);
}

TEST_CASE("applying a map") {
  const auto cfg = apply_config({}, {{"B", "5"}, {"a0", "0.25"}, {"seed", "18446744073709551615"},
                                     {"perturb_diagonal", "true"}, {"out", "results"}});
  CHECK(cfg.B == 5);
  CHECK(cfg.a0 == 0.25);
  CHECK(cfg.seed == 18446744073709551615ULL);
  CHECK(cfg.perturb_diagonal);
  CHECK(cfg.out == "results");

  CHECK(key_of([] { apply_config({}, {{"colour", "red"}}); }) == "colour");
  CHECK(key_of([] { apply_config({}, {{"B", "three"}}); }) == "B");
  CHECK(key_of([] { apply_config({}, {{"L", "5.5"}}); }) == "L");
  CHECK(key_of([] { apply_config({}, {{"a0", "nan"}}); }) == "a0");
  CHECK(key_of([] { apply_config({}, {{"seed", "-1"}}); }) == "seed");
  CHECK(key_of([] { apply_config({}, {{"perturb_diagonal", "maybe"}}); }) == "perturb_diagonal");
}

TEST_CASE("validation names the offending key") {
  CHECK_NOTHROW(RunConfig{}.validate());
  auto with = [](auto mutate) {
    RunConfig c;
    mutate(c);
    return key_of([&] { c.validate(); });
  };
  CHECK(with([](RunConfig& c) { c.a0 = 0; }) == "a0");
  CHECK(with([](RunConfig& c) { c.x_cut = 99; }) == "x_cut");
  CHECK(with([](RunConfig& c) { c.delta = 2; }) == "delta");
  CHECK(with([](RunConfig& c) { c.mode = "gaussian"; }) == "mode");
  CHECK(with([](RunConfig& c) { c.f_max = c.f_min; }) == "f_max");
  CHECK(with([](RunConfig& c) { c.drive = 7; }) == "drive");
  CHECK(with([](RunConfig& c) { c.esr = -1; }) == "esr");
  CHECK(with([](RunConfig& c) { c.subcommand = "plot"; }) == "subcommand");
  CHECK(with([](RunConfig& c) { c.doublings = 1; }) == "doublings");
}

TEST_CASE("dump-config round trip") {
  RunConfig c;
  c.subcommand = "circuit-sweep";
  c.a0 = 0.1 + 0.2;  // not exactly representable in short decimal
  c.esr = 0.2;
  c.seed = 987654321987654321ULL;
  c.mode = "imaginary";
  c.plot = "out/sweep.svg";
  c.perturb_diagonal = true;
  const auto text = dump_config(c);
  const auto back = apply_config({}, parse_config_text(text));
  CHECK(back == c);
  CHECK(config_keys().size() == to_map(c).size());
}

TEST_CASE("double formatting is lossless") {
  for (const double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 334360.24953452084}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("CSV writer") {
  const auto path = scratch("t.csv");
  {
    CsvWriter w(path, {"x_cut", "re_p", "im_p", "is_eb"});
    w.add(3).add(0.1).add(-2.5e-17).add(true).end_row();
    w.add(std::size_t{4}).add(1.0).add(0.0).add(false).end_row();
    w.close();
  }
  CHECK(slurp(path) == "x_cut,re_p,im_p,is_eb\n3,0.10000000000000001,-2.4999999999999999e-17,1\n4,1,0,0\n");

  CsvWriter short_row(scratch("u.csv"), {"a", "b"});
  short_row.add(1.0);
  CHECK_THROWS_AS(short_row.end_row(), IoError);

  CHECK_THROWS_AS(CsvWriter("/nonexistent-dir/x.csv", {"a"}), IoError);
}

TEST_CASE("SVG output") {
  Plot p{"Flow <test>", "x_cut (cells)", "Re p", {}};
  p.series.push_back({"EB", {1, 2, 3}, {5, 6, 7}, true, "#d62728"});
  p.series.push_back({"line", {1, 3}, {0, 1}, false, "#1f77b4"});
  const auto svg = render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("Flow &lt;test&gt;") != std::string::npos);
  CHECK(svg.find("x_cut (cells)") != std::string::npos);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(render_svg(p) == svg);  // deterministic

  // Degenerate data still renders.
  Plot empty{"empty", "x", "y", {}};
  CHECK(render_svg(empty).find("</svg>") != std::string::npos);
}
