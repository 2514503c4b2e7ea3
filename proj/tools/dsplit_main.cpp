#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsplit/config.hpp"
#include "dsplit/csv.hpp"
#include "dsplit/experiments.hpp"
#include "dsplit/parallel.hpp"
#include "dsplit/ridge.hpp"
#include "dsplit/solver.hpp"
#include "dsplit/svg.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

namespace fs = std::filesystem;
using namespace dsplit;

std::string out_path(const RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.out_dir);
  return (fs::path(rc.out_dir) / name).string();
}

void write_sweep_svg(const RunConfig& rc, const SweepOutput& sw) {
  Series sp;
  sp.label = "speedup (uniform / planned)";
  for (const SweepRow& r : sw.rows) {
    if (!r.error.empty()) continue;
    sp.x.push_back(r.tau_comm);
    sp.y.push_back(r.speedup);
  }
  if (sp.x.size() < 2) {
    std::fprintf(stderr, "sweep: too few clean points for a chart\n");
    return;
  }
  ChartSpec spec;
  spec.title = "Planned vs uniform split";
  spec.x_label = "tau_comm / tau_1";
  spec.y_label = "speedup";
  const std::string path = out_path(rc, "sweep.svg");
  std::ofstream(path, std::ios::binary) << render_svg({sp}, {}, spec);
  std::printf("wrote %s\n", path.c_str());
}

void write_noise_svg(const RunConfig& rc, const NoiseOutput& no) {
  std::vector<Series> series;
  std::vector<Band> bands;
  for (double p : rc.noise_levels) {
    Series s;
    Band b;
    char label[32];
    std::snprintf(label, sizeof label, "p = %g", p);
    s.label = label;
    for (const NoiseRow& r : no.rows) {
      if (r.p != p || !r.error.empty()) continue;
      s.x.push_back(r.tau_comm);
      s.y.push_back(r.ratio_mean);
      b.x.push_back(r.tau_comm);
      b.lo.push_back(r.ratio_mean - r.ratio_ci);
      b.hi.push_back(r.ratio_mean + r.ratio_ci);
    }
    if (s.x.size() < 2) continue;
    series.push_back(s);
    bands.push_back(b);
  }
  if (series.empty()) {
    std::fprintf(stderr, "noise: too few clean points for a chart\n");
    return;
  }
  ChartSpec spec;
  spec.title = "Acceleration ratio under timing noise";
  spec.x_label = "tau_comm / tau_1";
  spec.y_label = "noisy / noise-free acceleration";
  const std::string path = out_path(rc, "noise.svg");
  std::ofstream(path, std::ios::binary) << render_svg(series, bands, spec);
  std::printf("wrote %s\n", path.c_str());
}

int cmd_render(const std::string& in_csv, const std::string& out_svg,
               const std::string& x_col, const std::vector<std::string>& y_cols,
               const std::string& band_cols, bool linear_x,
               const std::string& title) {
  const CsvTable t = csv_read_file(in_csv);
  if (t.n_rows() < 2) throw std::runtime_error("render: need at least 2 rows");
  std::vector<Series> series;
  for (const std::string& yc : y_cols) {
    Series s;
    s.label = yc;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const std::string& xs = t.cell(r, x_col);
      const std::string& ys = t.cell(r, yc);
      if (xs.empty() || ys.empty()) continue;
      s.x.push_back(std::stod(xs));
      s.y.push_back(std::stod(ys));
    }
    series.push_back(std::move(s));
  }
  std::vector<Band> bands;
  if (!band_cols.empty()) {
    const std::size_t colon = band_cols.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("render: --band expects LO_COL:HI_COL");
    Band b;
    const std::string lo = band_cols.substr(0, colon);
    const std::string hi = band_cols.substr(colon + 1);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const std::string& xs = t.cell(r, x_col);
      if (xs.empty() || t.cell(r, lo).empty() || t.cell(r, hi).empty())
        continue;
      b.x.push_back(std::stod(xs));
      b.lo.push_back(std::stod(t.cell(r, lo)));
      b.hi.push_back(std::stod(t.cell(r, hi)));
    }
    bands.push_back(std::move(b));
  }
  ChartSpec spec;
  spec.title = title;
  spec.x_label = x_col;
  spec.log_x = !linear_x;
  std::ofstream(out_svg, std::ios::binary)
      << render_svg(series, bands, spec);
  std::printf("wrote %s\n", out_svg.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data-split planner and distributed-training simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // allow global options after the subcommand name

  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = 0;
  bool svg = false;
  app.add_option("--config", config_path, "TOML-style config file");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--threads", threads, "threads to use, 0 = all cores");
  app.add_flag("--svg", svg, "also render SVG charts");

  CLI::App* c_plan = app.add_subcommand("plan", "report the best allocation");
  CLI::App* c_sweep =
      app.add_subcommand("sweep", "planned-vs-uniform sweep over tau_comm");
  CLI::App* c_noise =
      app.add_subcommand("noise", "timing-noise Monte Carlo experiment");
  CLI::App* c_cal =
      app.add_subcommand("calibrate", "fit c1/c2 from a probe run");
  long long cal_b1 = 0;
  c_cal->add_option("--b1", cal_b1, "probe server share (default: uniform)");
  CLI::App* c_render = app.add_subcommand("render", "render a CSV to SVG");
  std::string r_in, r_out = "chart.svg", r_x, r_band, r_title;
  std::vector<std::string> r_y;
  bool r_linear = false;
  c_render->add_option("--in", r_in, "input CSV")->required();
  c_render->add_option("--out-file", r_out, "output SVG path");
  c_render->add_option("--x", r_x, "x column")->required();
  c_render->add_option("--y", r_y, "y column(s)")->required();
  c_render->add_option("--band", r_band, "CI band columns LO_COL:HI_COL");
  c_render->add_flag("--linear-x", r_linear, "linear (not log) x axis");
  c_render->add_option("--title", r_title, "chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

#ifdef _OPENMP
  omp_set_num_threads(dsplit::resolve_threads(threads));
#endif

  try {
    if (c_render->parsed())
      return cmd_render(r_in, r_out, r_x, r_y, r_band, r_linear, r_title);

    Config cfg;
    if (!config_path.empty()) cfg = Config::parse_file(config_path);
    if (!out_dir.empty()) cfg.set("run.out", out_dir);
    if (seed >= 0) cfg.set("run.seed", std::to_string(seed));
    const RunConfig rc = RunConfig::from_config(cfg);

    if (c_plan->parsed()) {
      const PlanReport rep = run_plan(rc);
      std::fputs(rep.text().c_str(), stdout);
      const std::string path = out_path(rc, "plan.csv");
      rep.to_csv().write_file(path);
      std::printf("wrote %s\n", path.c_str());
      return 0;
    }
    if (c_sweep->parsed()) {
      const SweepOutput sw = run_sweep(rc);
      const std::string path = out_path(rc, "results.csv");
      sw.to_csv().write_file(path);
      std::printf("wrote %s (%zu rows)\n", path.c_str(), sw.rows.size());
      std::size_t bad = 0;
      for (const SweepRow& r : sw.rows)
        if (!r.error.empty()) ++bad;
      if (bad)
        std::fprintf(stderr, "sweep: %zu of %zu points failed\n", bad,
                     sw.rows.size());
      if (svg) write_sweep_svg(rc, sw);
      return bad == sw.rows.size() ? 2 : 0;
    }
    if (c_noise->parsed()) {
      const NoiseOutput no = run_noise(rc);
      const std::string path = out_path(rc, "noise.csv");
      no.to_csv().write_file(path);
      std::printf("wrote %s (%zu rows)\n", path.c_str(), no.rows.size());
      if (svg) write_noise_svg(rc, no);
      std::size_t bad = 0;
      for (const NoiseRow& r : no.rows)
        if (!r.error.empty()) ++bad;
      return (!no.rows.empty() && bad == no.rows.size()) ? 2 : 0;
    }
    if (c_cal->parsed()) {
      const CalibrationReport rep = run_calibrate(rc, cal_b1);
      std::printf("probe b1 = %lld: 2K = %lld, inner = %lld -> c1 = %.12g, "
                  "c2 = %.12g\n",
                  rep.b1_probe, rep.observed.two_k_outer, rep.observed.k_inner,
                  rep.cal.c1, rep.cal.c2);
      const std::string path = out_path(rc, "calibration.toml");
      std::ofstream(path, std::ios::binary) << rep.overlay().serialize();
      std::printf("wrote %s\n", path.c_str());
      return 0;
    }
  } catch (const dsplit::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const dsplit::ParseError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
