// ebstates command-line frontend. Talks to the library through the C API only.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numbers>
#include <vector>

#include "CLI11.hpp"
#include "cli_io.hpp"
#include "ebstates.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(eb_status s) {
  if (s != EB_OK) throw NumericError(std::string(eb_status_name(s)) + ": " + eb_last_error());
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using Model = std::unique_ptr<eb_model, Deleter<eb_model, eb_model_destroy>>;
using Matrix = std::unique_ptr<eb_matrix, Deleter<eb_matrix, eb_matrix_destroy>>;
using Flow = std::unique_ptr<eb_flow, Deleter<eb_flow, eb_flow_destroy>>;
using Ensemble = std::unique_ptr<eb_ensemble, Deleter<eb_ensemble, eb_ensemble_destroy>>;
using Sweep = std::unique_ptr<eb_sweep, Deleter<eb_sweep, eb_sweep_destroy>>;

Model make_model(const ebcli::RunConfig& c, int L) {
  eb_model* m = nullptr;
  check(eb_model_create(c.a0, c.B, L, &m));
  return Model(m);
}

int resolve_cut(const ebcli::RunConfig& c) { return c.x_cut > 0 ? c.x_cut : c.L / 2; }

json complex_json(eb_complex z) { return json::array({z.re, z.im}); }

eb_circuit_spec circuit_of(const ebcli::RunConfig& c) {
  return {c.c0, c.c1, c.c2, c.c3, c.c4, c.c5, c.inductance, c.esr};
}

std::vector<eb_complex> matrix_entries(const eb_matrix* m) {
  const size_t n = eb_matrix_dim(m);
  std::vector<eb_complex> v(n * n);
  check(eb_matrix_copy(m, v.data(), v.size()));
  return v;
}

void write_json(const fs::path& path, const json& j) { ebcli::write_text_file(path, j.dump(2) + "\n"); }

void maybe_plot(const ebcli::RunConfig& c, const ebcli::Plot& plot) {
  if (!c.plot.empty()) ebcli::write_text_file(c.plot, ebcli::render_svg(plot));
}

json config_header(const ebcli::RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["entropy_convention"] = "principal-branch logarithm, imaginary remnant reported separately";
  return j;
}

// ---- subcommands

void run_flow(const ebcli::RunConfig& c, const fs::path& dir) {
  const auto model = make_model(c, c.L);
  const int x_max = c.x_max > 0 ? c.x_max : c.L;
  eb_flow* raw = nullptr;
  check(eb_flow_compute(model.get(), c.x_min, x_max, c.threshold, &raw));
  const Flow flow(raw);

  ebcli::CsvWriter csv(dir / "flow.csv", {"x_cut", "re_p", "im_p", "is_eb"});
  json rows = json::array();
  ebcli::Series normal{"non-EB", {}, {}, true, "#999999"};
  ebcli::Series eb{"EB", {}, {}, true, "#d62728"};
  std::size_t failed_rows = 0, max_pairs = 0;
  for (size_t r = 0; r < eb_flow_row_count(flow.get()); ++r) {
    int x_cut = 0, failed = 0;
    size_t count = 0;
    check(eb_flow_row(flow.get(), r, &x_cut, &count, &failed));
    json row{{"x_cut", x_cut}};
    if (failed) {
      ++failed_rows;
      row["failed"] = true;
      row["error"] = eb_flow_row_error(flow.get(), r);
      rows.push_back(row);
      continue;
    }
    std::vector<eb_complex> values(count);
    std::vector<int> is_eb(count);
    check(eb_flow_row_values(flow.get(), r, values.data(), is_eb.data(), count));
    json ebs = json::array();
    for (size_t i = 0; i < count; ++i) {
      csv.add(x_cut).add(values[i].re).add(values[i].im).add(is_eb[i] != 0).end_row();
      auto& s = is_eb[i] ? eb : normal;
      s.x.push_back(x_cut);
      s.y.push_back(values[i].re);
      if (is_eb[i]) ebs.push_back(complex_json(values[i]));
    }
    max_pairs = std::max(max_pairs, ebs.size() / 2);
    row["eb_values"] = ebs;
    rows.push_back(row);
  }
  csv.close();

  json summary = config_header(c);
  summary["model"] = {{"a0", c.a0}, {"B", c.B}, {"L", c.L}};
  summary["failed_rows"] = failed_rows;
  summary["max_eb_pairs"] = max_pairs;
  summary["rows"] = rows;
  write_json(dir / "summary.json", summary);

  maybe_plot(c, {"Occupation eigenvalue flow (B=" + std::to_string(c.B) + ", L=" + std::to_string(c.L) + ")",
                 "x_cut (unit cells)", "Re p (occupation probability)", {normal, eb}});
}

void run_disorder(const ebcli::RunConfig& c, const fs::path& dir) {
  const auto model = make_model(c, c.L);
  const int x_cut = resolve_cut(c);
  const eb_disorder_mode mode = c.mode == "real"        ? EB_DISORDER_REAL
                                : c.mode == "imaginary" ? EB_DISORDER_IMAGINARY
                                                        : EB_DISORDER_COMPLEX;
  const eb_disorder_config cfg{c.delta, mode, c.instances, c.seed, c.perturb_diagonal ? 1 : 0};
  eb_ensemble* raw = nullptr;
  check(eb_ensemble_run(model.get(), x_cut, &cfg, c.threshold, &raw));
  const Ensemble ens(raw);

  eb_ensemble_summary s{};
  check(eb_ensemble_summary_get(ens.get(), &s));
  std::vector<eb_complex> reference(s.reference_eb_count), centroids(s.reference_eb_count);
  check(eb_ensemble_reference(ens.get(), reference.data(), centroids.data(), reference.size()));

  ebcli::CsvWriter csv(dir / "ensemble.csv", {"instance", "re_p", "im_p", "is_eb"});
  ebcli::Series normal{"non-EB", {}, {}, true, "#1f77b4"};
  ebcli::Series eb{"EB", {}, {}, true, "#d62728"};
  json failures = json::array();
  for (size_t inst = 0; inst < s.instances; ++inst) {
    size_t count = 0;
    check(eb_ensemble_instance(ens.get(), inst, nullptr, nullptr, 0, &count));
    if (count == 0) {
      failures.push_back({{"instance", inst}, {"error", eb_ensemble_instance_error(ens.get(), inst)}});
      continue;
    }
    std::vector<eb_complex> values(count);
    std::vector<int> is_eb(count);
    check(eb_ensemble_instance(ens.get(), inst, values.data(), is_eb.data(), count, &count));
    for (size_t i = 0; i < count; ++i) {
      csv.add(inst).add(values[i].re).add(values[i].im).add(is_eb[i] != 0).end_row();
      auto& series = is_eb[i] ? eb : normal;
      series.x.push_back(values[i].re);
      series.y.push_back(values[i].im);
    }
  }
  csv.close();

  json summary = config_header(c);
  summary["model"] = {{"a0", c.a0}, {"B", c.B}, {"L", c.L}, {"x_cut", x_cut}};
  summary["disorder"] = {{"delta", c.delta},   {"mode", c.mode},
                         {"instances", c.instances}, {"seed", c.seed},
                         {"perturb_diagonal", c.perturb_diagonal}};
  json refs = json::array(), cents = json::array();
  for (size_t i = 0; i < reference.size(); ++i) {
    refs.push_back(complex_json(reference[i]));
    cents.push_back(complex_json(centroids[i]));
  }
  summary["reference_eb"] = refs;
  summary["eb_cluster_centroids"] = cents;
  summary["eb_fractional_spread"] = s.eb_fractional_spread;
  summary["min_cluster_gap"] = s.min_cluster_gap;
  summary["non_eb_cloud_radius"] = s.non_eb_cloud_radius;
  summary["non_eb_clouds_resolved"] = s.non_eb_clouds_resolved != 0;
  summary["failed_instances"] = failures;
  write_json(dir / "summary.json", summary);

  maybe_plot(c, {"Disordered spectra (delta=" + ebcli::format_double(c.delta) + ", " + c.mode + ")", "Re p",
                 "Im p", {normal, eb}});
}

void run_twopoint(const ebcli::RunConfig& c, const fs::path& dir) {
  const auto model = make_model(c, c.L);
  std::vector<double> u(static_cast<size_t>(c.L)), d(u.size());
  check(eb_two_point(model.get(), u.data(), d.data(), u.size()));

  ebcli::CsvWriter csv(dir / "twopoint.csv", {"x", "u", "d"});
  ebcli::Series su{"U_x", {}, u, false, "#1f77b4"};
  ebcli::Series sd{"D_x", {}, d, false, "#ff7f0e"};
  for (size_t x = 0; x < u.size(); ++x) {
    csv.add(x).add(u[x]).add(d[x]).end_row();
    su.x.push_back(static_cast<double>(x));
    sd.x.push_back(static_cast<double>(x));
  }
  csv.close();

  json summary = config_header(c);
  summary["model"] = {{"a0", c.a0}, {"B", c.B}, {"L", c.L}};
  summary["u0"] = u[0];
  summary["d0"] = d[0];
  write_json(dir / "summary.json", summary);

  maybe_plot(c, {"Two-point functions (B=" + std::to_string(c.B) + ", L=" + std::to_string(c.L) + ")",
                 "separation x (unit cells)", "coefficient (dimensionless)", {su, sd}});
}

void run_scaling(const ebcli::RunConfig& c, const fs::path& dir) {
  std::vector<double> sizes, values;
  for (int k = 0; k <= c.doublings; ++k) {
    const int L = c.L << k;
    const auto model = make_model(c, L);
    eb_matrix* raw = nullptr;
    check(eb_truncated_projector(model.get(), L / 2, &raw));
    const Matrix p(raw);
    std::vector<eb_complex> spec(eb_matrix_dim(p.get()));
    check(eb_matrix_eigenvalues(p.get(), spec.data(), spec.size()));
    double best = -1.0;
    for (const auto z : spec) {
      int eb = 0;
      check(eb_is_eb(z, c.threshold, &eb));
      if (eb && z.re > 0.5) best = std::max(best, z.re);
    }
    if (best < 0.0) throw NumericError("scaling: no EB eigenvalue at L = " + std::to_string(L));
    sizes.push_back(L);
    values.push_back(best);
  }
  eb_scaling_fit fit{};
  check(eb_fit_scaling(sizes.data(), values.data(), sizes.size(), &fit));

  ebcli::CsvWriter csv(dir / "scaling.csv", {"L", "p_eb"});
  ebcli::Series pts{"samples", {}, {}, true, "#d62728"};
  ebcli::Series line{"fit", {}, {}, false, "#1f77b4"};
  for (size_t i = 0; i < sizes.size(); ++i) {
    csv.add(sizes[i]).add(values[i]).end_row();
    pts.x.push_back(std::log(sizes[i]));
    pts.y.push_back(std::log(values[i] - 0.5));
    line.x.push_back(std::log(sizes[i]));
    line.y.push_back(std::log(fit.prefactor) + fit.exponent * std::log(sizes[i]));
  }
  csv.close();

  json summary = config_header(c);
  summary["model"] = {{"a0", c.a0}, {"B", c.B}};
  summary["sizes"] = sizes;
  summary["p_eb"] = values;
  summary["exponent"] = fit.exponent;
  summary["prefactor"] = fit.prefactor;
  summary["r_squared"] = fit.r_squared;
  summary["expected_exponent"] = (c.B - 1) / 2.0;
  write_json(dir / "summary.json", summary);

  maybe_plot(c, {"EB scaling at x_cut = L/2 (B=" + std::to_string(c.B) + ")", "ln L", "ln(p_EB - 1/2)", {pts, line}});
}

void run_sweep(const ebcli::RunConfig& c, const fs::path& dir) {
  const auto spec = circuit_of(c);
  eb_sweep* raw = nullptr;
  check(eb_circuit_sweep(&spec, c.f_min, c.f_max, c.points, c.drive, c.peak_threshold, &raw));
  const Sweep sw(raw);

  ebcli::CsvWriter csv(dir / "sweep.csv",
                       {"f_hz", "v1_abs", "v2_abs", "v3_abs", "v4_abs", "v5_abs", "v6_abs", "z_re", "z_im"});
  ebcli::Series total{"sum |V|", {}, {}, false, "#1f77b4"};
  for (size_t r = 0; r < eb_sweep_row_count(sw.get()); ++r) {
    double f = 0.0;
    eb_complex v[EB_CIRCUIT_NODES];
    eb_complex z{};
    check(eb_sweep_row(sw.get(), r, &f, v, &z));
    csv.add(f);
    double sum = 0.0;
    for (const auto& vi : v) {
      const double a = std::hypot(vi.re, vi.im);
      csv.add(a);
      sum += a;
    }
    csv.add(z.re).add(z.im).end_row();
    total.x.push_back(f / 1e3);
    total.y.push_back(sum);
  }
  csv.close();

  json peaks = json::array();
  for (size_t k = 0; k < eb_sweep_peak_count(sw.get()); ++k) {
    double f = 0, p = 0, a = 0;
    check(eb_sweep_peak(sw.get(), k, &f, &p, &a));
    peaks.push_back({{"frequency_hz", f}, {"mapped_eigenvalue", p}, {"amplitude", a}});
  }

  eb_matrix* praw = nullptr;
  check(eb_circuit_projector(&spec, &praw));
  const Matrix proj(praw);
  std::vector<eb_complex> ev(eb_matrix_dim(proj.get()));
  check(eb_matrix_eigenvalues(proj.get(), ev.data(), ev.size()));
  std::sort(ev.begin(), ev.end(), [](eb_complex a, eb_complex b) { return a.re > b.re; });
  json theory = json::array();
  for (const auto z : ev) {
    double f = 0.0;
    check(eb_circuit_freq_of_eigenvalue(&spec, z.re, &f));
    theory.push_back({{"eigenvalue", complex_json(z)}, {"frequency_hz", f}});
  }

  json out = config_header(c);
  out["drive_node"] = c.drive;
  out["esr_ohm"] = c.esr;
  out["median_amplitude"] = eb_sweep_median_amplitude(sw.get());
  out["peak_threshold"] = c.peak_threshold;
  out["peaks"] = peaks;
  out["projector_resonances"] = theory;
  write_json(dir / "peaks.json", out);

  maybe_plot(c, {"Frequency sweep, drive node " + std::to_string(c.drive), "frequency (kHz)",
                 "sum of node voltage magnitudes (V per A)", {total}});
}

void run_reconstruct(const ebcli::RunConfig& c, const fs::path& dir) {
  const auto spec = circuit_of(c);
  const double omega = 2.0 * std::numbers::pi * c.frequency;
  eb_matrix *lap_raw = nullptr, *rec_raw = nullptr, *true_raw = nullptr;
  double cond = 0.0;
  int near = 0;
  check(eb_circuit_reconstruct(&spec, omega, c.noise, c.seed, &lap_raw, &rec_raw, &cond, &near));
  const Matrix lap(lap_raw), rec(rec_raw);
  check(eb_circuit_projector(&spec, &true_raw));
  const Matrix truth(true_raw);

  const auto t = matrix_entries(truth.get());
  const auto r = matrix_entries(rec.get());
  const size_t n = eb_matrix_dim(truth.get());
  double scale = 0.0, max_err = 0.0;
  for (const auto z : t) scale = std::max(scale, std::hypot(z.re, z.im));

  ebcli::CsvWriter csv(dir / "reconstruct.csv", {"row", "col", "true_re", "true_im", "rec_re", "rec_im"});
  ebcli::Series pts{"entries", {}, {}, true, "#1f77b4"};
  ebcli::Series diag{"ideal", {-scale, scale}, {-scale, scale}, false, "#999999"};
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const auto a = t[i * n + j], b = r[i * n + j];
      csv.add(i + 1).add(j + 1).add(a.re).add(a.im).add(b.re).add(b.im).end_row();
      max_err = std::max(max_err, std::hypot(a.re - b.re, a.im - b.im));
      pts.x.push_back(a.re);
      pts.y.push_back(b.re);
    }
  csv.close();

  json summary = config_header(c);
  summary["frequency_hz"] = c.frequency;
  summary["noise_fraction"] = c.noise;
  summary["seed"] = c.seed;
  summary["condition_number"] = cond;
  summary["near_resonant"] = near != 0;
  summary["max_abs_error"] = max_err;
  summary["max_error_relative_to_largest_entry"] = scale > 0 ? max_err / scale : 0.0;
  write_json(dir / "summary.json", summary);

  maybe_plot(c, {"Reconstructed projector entries", "true Re entry", "recovered Re entry", {diag, pts}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exceptional bound state toolkit: flows, disorder ensembles and circuit simulation"};
  app.set_version_flag("--version", std::string(eb_version()));

  std::string config_path, dump_path;
  app.add_option("--config", config_path, "key = value configuration file (flags override it)");
  app.add_option("--dump-config", dump_path, "write the resolved configuration to this path ('-' for stdout)");

  // One flag per config key. Values stay strings here and go through the
  // same parser as the file so both paths reject bad input identically.
  ebcli::ConfigMap flag_values;
  std::vector<std::pair<std::string, CLI::Option*>> flag_options;
  for (const auto& key : ebcli::config_keys()) {
    if (key == "subcommand") continue;
    std::string names = "--" + key;
    if (key == "f_min") names += ",--fmin";
    if (key == "f_max") names += ",--fmax";
    if (key == "drive") names += ",--drive-node";
    if (key == "perturb_diagonal") names += ",--perturb-diagonal";
    auto* opt = app.add_option(names, flag_values[key], "config key '" + key + "'");
    flag_options.emplace_back(key, opt);
  }

  for (const auto& name : ebcli::kSubcommands) app.add_subcommand(name)->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ebcli::ConfigMap merged;
    if (!config_path.empty()) merged = ebcli::read_config_file(config_path);
    for (const auto& [key, opt] : flag_options)
      if (opt->count() > 0) merged[key] = flag_values[key];
    if (const auto subs = app.get_subcommands(); !subs.empty()) merged["subcommand"] = subs.front()->get_name();
    if (!merged.contains("seed"))
      if (const char* env = std::getenv("EBSTATES_SEED")) {
        try {
          ebcli::apply_config({}, {{"seed", env}});
        } catch (const ebcli::ConfigError&) {
          throw ebcli::ConfigError("EBSTATES_SEED", std::string("environment variable EBSTATES_SEED: '") + env +
                                                        "' is not a 64-bit unsigned integer");
        }
        merged["seed"] = env;
      }
    if (!merged.contains("subcommand"))
      throw ebcli::ConfigError("subcommand", "no subcommand given (one of flow, disorder, twopoint, scaling, "
                                             "circuit-sweep, circuit-reconstruct)");

    const auto cfg = ebcli::apply_config({}, merged);
    cfg.validate();

    if (!dump_path.empty()) {
      if (dump_path == "-")
        std::cout << ebcli::dump_config(cfg);
      else
        ebcli::write_text_file(dump_path, ebcli::dump_config(cfg));
    }

    const fs::path dir = cfg.out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ebcli::IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    if (cfg.subcommand == "flow") run_flow(cfg, dir);
    else if (cfg.subcommand == "disorder") run_disorder(cfg, dir);
    else if (cfg.subcommand == "twopoint") run_twopoint(cfg, dir);
    else if (cfg.subcommand == "scaling") run_scaling(cfg, dir);
    else if (cfg.subcommand == "circuit-sweep") run_sweep(cfg, dir);
    else run_reconstruct(cfg, dir);
    return 0;
  } catch (const ebcli::ConfigError& e) {
    std::cerr << "config error [" << e.key() << "]: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const ebcli::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 1;
  }
}
