#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ebcli {

/// A bad configuration value. `key()` names the offending key so the CLI
/// can point at it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what) : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> kSubcommands = {"flow",    "disorder",      "twopoint",
                                                      "scaling", "circuit-sweep", "circuit-reconstruct"};

struct RunConfig {
  std::string subcommand = "flow";

  // lattice model
  double a0 = 1.0;
  int B = 3;
  int L = 50;
  int x_cut = 0;  // 0 means L / 2 where a single cut is needed
  int x_min = 1;
  int x_max = 0;  // 0 means L
  double threshold = 0.1;
  int doublings = 2;

  // disorder
  double delta = 0.05;
  std::string mode = "complex";
  int instances = 50;
  std::uint64_t seed = 0;
  bool perturb_diagonal = false;

  // circuit
  double c0 = 1.0;
  double c1 = 4.55;
  double c2 = 2.87;
  double c3 = 4.3;
  double c4 = 3.04;
  double c5 = 0.50;
  double inductance = 10.0;
  double esr = 0.0;
  double f_min = 310e3;
  double f_max = 400e3;
  int points = 2000;
  int drive = 2;
  double peak_threshold = 3.0;
  double frequency = 350e3;
  double noise = 0.0;

  // output
  std::string out = ".";
  std::string plot;  // SVG path; empty means no plot

  bool operator==(const RunConfig&) const = default;

  /// Domain checks; throws ConfigError naming the first bad key.
  void validate() const;
};

using ConfigMap = std::map<std::string, std::string>;

/// Every key RunConfig understands, in a stable order.
const std::vector<std::string>& config_keys();

/// Parses line-oriented `key = value` text. Blank lines and lines starting
/// with '#' are skipped. Duplicate or malformed lines are errors.
ConfigMap parse_config_text(std::string_view text);
ConfigMap read_config_file(const std::filesystem::path& path);

/// Applies `map` on top of `base`. Unknown keys and unparsable values throw
/// ConfigError.
RunConfig apply_config(RunConfig base, const ConfigMap& map);

ConfigMap to_map(const RunConfig& cfg);
std::string dump_config(const RunConfig& cfg);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Comma-separated output with a header row and 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& add(double v);
  CsvWriter& add(long long v);
  CsvWriter& add(int v) { return add(static_cast<long long>(v)); }
  CsvWriter& add(std::size_t v) { return add(static_cast<long long>(v)); }
  CsvWriter& add(bool v) { return add(static_cast<long long>(v ? 1 : 0)); }
  CsvWriter& add(std::string_view v);
  void end_row();
  void close();

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

void write_text_file(const std::filesystem::path& path, std::string_view content);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool scatter = false;
  std::string color = "#1f77b4";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 720;
  int height = 480;
};

/// Static SVG with linear axes, ticks and a legend.
std::string render_svg(const Plot& plot);

}  // namespace ebcli
