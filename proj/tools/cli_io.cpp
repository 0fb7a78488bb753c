#include "cli_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <variant>

namespace ebcli {

namespace {

using Field = std::variant<double RunConfig::*, int RunConfig::*, std::uint64_t RunConfig::*, bool RunConfig::*,
                           std::string RunConfig::*>;

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"subcommand", &RunConfig::subcommand},
      {"a0", &RunConfig::a0},
      {"B", &RunConfig::B},
      {"L", &RunConfig::L},
      {"x_cut", &RunConfig::x_cut},
      {"x_min", &RunConfig::x_min},
      {"x_max", &RunConfig::x_max},
      {"threshold", &RunConfig::threshold},
      {"doublings", &RunConfig::doublings},
      {"delta", &RunConfig::delta},
      {"mode", &RunConfig::mode},
      {"instances", &RunConfig::instances},
      {"seed", &RunConfig::seed},
      {"perturb_diagonal", &RunConfig::perturb_diagonal},
      {"c0", &RunConfig::c0},
      {"c1", &RunConfig::c1},
      {"c2", &RunConfig::c2},
      {"c3", &RunConfig::c3},
      {"c4", &RunConfig::c4},
      {"c5", &RunConfig::c5},
      {"inductance", &RunConfig::inductance},
      {"esr", &RunConfig::esr},
      {"f_min", &RunConfig::f_min},
      {"f_max", &RunConfig::f_max},
      {"points", &RunConfig::points},
      {"drive", &RunConfig::drive},
      {"peak_threshold", &RunConfig::peak_threshold},
      {"frequency", &RunConfig::frequency},
      {"noise", &RunConfig::noise},
      {"out", &RunConfig::out},
      {"plot", &RunConfig::plot},
  };
  return table;
}

template <class M>
struct member_type;
template <class T>
struct member_type<T RunConfig::*> {
  using type = T;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d))
    throw ConfigError(key, "config key '" + key + "': '" + v + "' is not a finite number");
  return d;
}

long long parse_integer(const std::string& key, const std::string& v, long long lo, long long hi) {
  errno = 0;
  char* end = nullptr;
  const long long n = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE || n < lo || n > hi)
    throw ConfigError(key, "config key '" + key + "': '" + v + "' is not an integer in range");
  return n;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  if (v.empty() || v[0] == '-') throw ConfigError(key, "config key '" + key + "': '" + v + "' is not unsigned");
  const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE)
    throw ConfigError(key, "config key '" + key + "': '" + v + "' is not a 64-bit unsigned integer");
  return n;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "config key '" + key + "': '" + v + "' is not a boolean");
}

void check(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, std::string("config key '") + key + "': " + what);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1-2-5 tick spacing covering [lo, hi] with roughly `target` ticks.
std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  check(std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) != kSubcommands.end(), "subcommand",
        "unknown subcommand '" + subcommand + "'");
  check(a0 > 0.0, "a0", "must be positive");
  check(B >= 1, "B", "must be at least 1");
  check(L >= 2, "L", "must be at least 2");
  check(x_cut >= 0 && x_cut <= L, "x_cut", "must lie in [1, L] (0 selects L/2)");
  check(x_min >= 1 && x_min <= L, "x_min", "must lie in [1, L]");
  check(x_max >= 0 && x_max <= L, "x_max", "must lie in [1, L] (0 selects L)");
  check(x_max == 0 || x_max >= x_min, "x_max", "must not be below x_min");
  check(threshold > 0.0, "threshold", "must be positive");
  check(doublings >= 2 && doublings <= 6, "doublings", "must lie in [2, 6] (at least three sizes)");
  check(delta >= 0.0 && delta <= 1.0, "delta", "must lie in [0, 1]");
  check(mode == "real" || mode == "imaginary" || mode == "complex", "mode", "must be real, imaginary or complex");
  check(instances >= 1, "instances", "must be at least 1");
  check(c0 > 0.0, "c0", "must be positive");
  check(c1 > 0.0, "c1", "must be positive");
  check(c2 > 0.0, "c2", "must be positive");
  check(c3 > 0.0, "c3", "must be positive");
  check(c4 > 0.0, "c4", "must be positive");
  check(c5 > 0.0, "c5", "must be positive");
  check(inductance > 0.0, "inductance", "must be positive");
  check(esr >= 0.0, "esr", "must be non-negative");
  check(f_min > 0.0, "f_min", "must be positive");
  check(f_max > f_min, "f_max", "must exceed f_min");
  check(points >= 3, "points", "must be at least 3");
  check(drive >= 1 && drive <= 6, "drive", "must be a node in [1, 6]");
  check(peak_threshold > 0.0, "peak_threshold", "must be positive");
  check(frequency > 0.0, "frequency", "must be positive");
  check(noise >= 0.0 && noise < 1.0, "noise", "must lie in [0, 1)");
  check(!out.empty(), "out", "must not be empty");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.first);
    return k;
  }();
  return keys;
}

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap map;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "config line " + std::to_string(line_no) + ": empty key");
    if (!map.emplace(key, value).second)
      throw ConfigError(key, "config key '" + key + "' given twice (line " + std::to_string(line_no) + ")");
  }
  return map;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig apply_config(RunConfig cfg, const ConfigMap& map) {
  for (const auto& [key, value] : map) {
    const auto it = std::find_if(fields().begin(), fields().end(), [&](const auto& f) { return f.first == key; });
    if (it == fields().end()) throw ConfigError(key, "unknown config key '" + key + "'");
    std::visit(
        [&](auto member) {
          using T = typename member_type<decltype(member)>::type;
          if constexpr (std::is_same_v<T, double>)
            cfg.*member = parse_double(key, value);
          else if constexpr (std::is_same_v<T, int>)
            cfg.*member = static_cast<int>(parse_integer(key, value, std::numeric_limits<int>::min(),
                                                         std::numeric_limits<int>::max()));
          else if constexpr (std::is_same_v<T, std::uint64_t>)
            cfg.*member = parse_unsigned(key, value);
          else if constexpr (std::is_same_v<T, bool>)
            cfg.*member = parse_bool(key, value);
          else
            cfg.*member = value;
        },
        it->second);
  }
  return cfg;
}

ConfigMap to_map(const RunConfig& cfg) {
  ConfigMap map;
  for (const auto& [key, field] : fields()) {
    std::visit(
        [&](auto member) {
          using T = typename member_type<decltype(member)>::type;
          if constexpr (std::is_same_v<T, double>)
            map[key] = format_double(cfg.*member);
          else if constexpr (std::is_same_v<T, bool>)
            map[key] = cfg.*member ? "true" : "false";
          else if constexpr (std::is_same_v<T, std::string>)
            map[key] = cfg.*member;
          else
            map[key] = std::to_string(cfg.*member);
        },
        field);
  }
  return map;
}

std::string dump_config(const RunConfig& cfg) {
  const auto map = to_map(cfg);
  std::string out;
  for (const auto& key : config_keys()) out += key + " = " + map.at(key) + "\n";
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  file_ = std::fopen(path.c_str(), "wb");
  if (!file_) throw IoError("cannot open " + path.string() + " for writing: " + std::strerror(errno));
  for (std::size_t i = 0; i < header.size(); ++i) std::fprintf(file_, i ? ",%s" : "%s", header[i].c_str());
  std::fputc('\n', file_);
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

CsvWriter& CsvWriter::add(double v) {
  std::fprintf(file_, in_row_++ ? ",%.17g" : "%.17g", v);
  return *this;
}

CsvWriter& CsvWriter::add(long long v) {
  std::fprintf(file_, in_row_++ ? ",%lld" : "%lld", v);
  return *this;
}

CsvWriter& CsvWriter::add(std::string_view v) {
  if (in_row_++) std::fputc(',', file_);
  std::fwrite(v.data(), 1, v.size(), file_);
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_)
    throw IoError(path_.string() + ": row has " + std::to_string(in_row_) + " fields, header has " +
                  std::to_string(columns_));
  std::fputc('\n', file_);
  in_row_ = 0;
}

void CsvWriter::close() {
  if (!file_) return;
  const bool bad = std::ferror(file_) != 0;
  const bool close_failed = std::fclose(file_) != 0;
  file_ = nullptr;
  if (bad || close_failed) throw IoError("error while writing " + path_.string());
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("error while writing " + path.string());
}

std::string render_svg(const Plot& plot) {
  const double left = 80, right = 20, top = 40, bottom = 60;
  const double w = plot.width - left - right;
  const double h = plot.height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin <= 0) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin <= 0) ymin -= 0.5, ymax += 0.5;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * w; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * h; };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\"" << plot.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << plot.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << xml_escape(plot.title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (const double t : nice_ticks(xmin, xmax, 6)) {
    os << "<line x1=\"" << px(t) << "\" y1=\"" << top + h << "\" x2=\"" << px(t) << "\" y2=\"" << top + h + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(t) << "\" y=\"" << top + h + 18 << "\" text-anchor=\"middle\">" << tick_label(t)
       << "</text>\n";
  }
  for (const double t : nice_ticks(ymin, ymax, 6)) {
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << tick_label(t)
       << "</text>\n";
  }
  os << "<text x=\"" << left + w / 2 << "\" y=\"" << plot.height - 15 << "\" text-anchor=\"middle\">"
     << xml_escape(plot.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << top + h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << xml_escape(plot.y_label) << "</text>\n";

  for (const auto& s : plot.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.scatter) {
      os << "<g fill=\"" << s.color << "\" fill-opacity=\"0.7\">\n";
      for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\"/>\n";
      os << "</g>\n";
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      os << "\"/>\n";
    }
  }

  double ly = top + 16;
  for (const auto& s : plot.series) {
    if (s.label.empty()) continue;
    os << "<rect x=\"" << left + w - 150 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
       << "\"/>\n";
    os << "<text x=\"" << left + w - 135 << "\" y=\"" << ly << "\">" << xml_escape(s.label) << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ebcli
