// Command-line driver for the random commutator spectrum library.
//
// Subcommands: lsd-identity, lsd-general, simulate, compare, pointmass.
// Exit codes: 0 ok, 2 usage/input error, 3 degenerate spectrum,
// 4 solver non-convergence, 5 comparison threshold exceeded.

#include <complex>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rmc/identity_lsd.hpp"
#include "rmc/io.hpp"
#include "rmc/measures.hpp"
#include "rmc/simulate.hpp"
#include "rmc/solver.hpp"
#include "rmc/stats.hpp"

namespace {

namespace fs = std::filesystem;
using rmc::io::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitSolver = 4;
constexpr int kExitThreshold = 5;

struct GlobalOpts {
  std::string out = ".";
  std::string format = "csv";
  int threads = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 0;

  int effective_threads() const {
    if (threads > 0) return threads;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
  }
};

rmc::Kernel parse_kernel(const std::string& s) {
  if (s == "minus" || s == "skew") return rmc::Kernel::skew;
  if (s == "plus" || s == "hermitian") return rmc::Kernel::hermitian;
  throw CLI::ValidationError("kernel", "expected minus|plus");
}

int cmd_lsd_identity(const GlobalOpts& g, double c, int grid_points,
                     const std::string& name) {
  rmc::LsdCurve curve = rmc::identity_curve(c, rmc::Kernel::skew, grid_points);
  rmc::io::CurveMeta meta;
  meta.method = "closed_form";
  fs::path csv = fs::path(g.out) /
                 (name + (g.format == "json" ? ".json" : ".csv"));
  rmc::io::write_curve(csv, curve, meta, g.format);
  rmc::io::write_manifest(fs::path(g.out),
                          json{{"subcommand", "lsd-identity"},
                               {"c", c},
                               {"grid", grid_points},
                               {"out", name}});
  std::cout << "wrote " << csv.string() << " (U=" << curve.support_upper
            << ", point_mass=" << curve.point_mass_zero << ")\n";
  return kExitOk;
}

int cmd_lsd_general(const GlobalOpts& g, double c, const std::string& h_file,
                    const std::string& kernel_name, int grid_points,
                    double tol, int max_iter, const std::string& name) {
  rmc::SpectralMeasure h = rmc::io::read_measure(h_file);
  if (h.degenerate()) {
    std::cerr << "degenerate: LSD is delta_0 (H = delta_0)\n";
    return kExitDegenerate;
  }
  rmc::Kernel kernel = parse_kernel(kernel_name);
  rmc::FixedPointConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  rmc::GridSpec grid;
  grid.points = grid_points;
  rmc::LsdCurve curve;
  try {
    curve = rmc::lsd_curve(c, h, kernel, grid, cfg, g.effective_threads());
  } catch (const rmc::CurveSolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n  failed points:";
    for (double x : e.failed_points) std::cerr << " " << x;
    std::cerr << "\n";
    return kExitSolver;
  } catch (const rmc::NoConvergence& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  rmc::io::CurveMeta meta;
  meta.method = "fixed_point";
  meta.solver_tol = cfg.tol;
  meta.solver_max_iter = cfg.max_iter;
  fs::path csv = fs::path(g.out) /
                 (name + (g.format == "json" ? ".json" : ".csv"));
  rmc::io::write_curve(csv, curve, meta, g.format);
  rmc::io::write_manifest(fs::path(g.out),
                          json{{"subcommand", "lsd-general"},
                               {"c", c},
                               {"H", h_file},
                               {"kernel", kernel_name},
                               {"grid", grid_points},
                               {"tol", tol},
                               {"max_iter", max_iter},
                               {"out", name}});
  std::cout << "wrote " << csv.string()
            << " (point_mass=" << curve.point_mass_zero << ")\n";
  return kExitOk;
}

int cmd_simulate(const GlobalOpts& g, int p, int n,
                 const std::string& entry_dist, const std::string& sigma,
                 const std::string& kernel_name, int replicates,
                 const std::string& prefix) {
  rmc::EnsembleConfig cfg;
  cfg.p = p;
  cfg.n = n;
  cfg.entry_dist = rmc::parse_entry_dist(entry_dist);
  cfg.kernel = parse_kernel(kernel_name);
  cfg.seed = g.seed;
  if (sigma == "identity") {
    cfg.sigma = rmc::SigmaSpec::identity();
  } else {
    cfg.sigma = rmc::SigmaSpec::from_measure(rmc::io::read_measure(sigma));
  }
  cfg.validate();
  const int threads = g.effective_threads();
  for (int r = 0; r < replicates; ++r) {
    cfg.replicate = static_cast<std::uint64_t>(r);
    rmc::EsdSample sample =
        rmc::simulate_esd(cfg, rmc::EigenPath::automatic, threads);
    fs::path csv = fs::path(g.out) /
                   (prefix + "_r" + std::to_string(r) +
                    (g.format == "json" ? ".json" : ".csv"));
    rmc::io::write_sample(csv, sample, cfg, g.format);
    std::cout << "wrote " << csv.string() << " (" << sample.coords.size()
              << " coords)\n";
  }
  rmc::io::write_manifest(fs::path(g.out),
                          json{{"subcommand", "simulate"},
                               {"p", p},
                               {"n", n},
                               {"entry_dist", entry_dist},
                               {"sigma", sigma},
                               {"kernel", kernel_name},
                               {"seed", g.seed},
                               {"replicates", replicates},
                               {"out", prefix}});
  return kExitOk;
}

int cmd_compare(const GlobalOpts& g, const std::vector<std::string>& samples,
                const std::string& curve_file, int bins, double atom_window,
                double fail_above) {
  rmc::LsdCurve curve = rmc::io::read_curve(curve_file);
  std::vector<rmc::ComparisonReport> reports;
  reports.reserve(samples.size());
  for (const auto& f : samples) {
    rmc::EsdSample sample = rmc::io::read_sample(f);
    if (sample.kernel != curve.kernel) {
      std::cerr << "kernel tag mismatch: sample " << f << " is "
                << rmc::kernel_name(sample.kernel) << ", curve is "
                << rmc::kernel_name(curve.kernel) << "\n";
      return kExitUsage;
    }
    reports.push_back(rmc::compare(sample, curve, bins, atom_window));
  }
  rmc::io::write_reports(fs::path(g.out), reports);
  rmc::io::write_manifest(fs::path(g.out),
                          json{{"subcommand", "compare"},
                               {"samples", samples},
                               {"curve", curve_file},
                               {"bins", bins},
                               {"atom_window", atom_window},
                               {"fail_above", fail_above}});
  bool over = false;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::cout << "sample " << i << ": ks=" << reports[i].ks
              << " levy=" << reports[i].levy << " l1=" << reports[i].l1_hist
              << " point_mass_est=" << reports[i].point_mass_est << "\n";
    if (fail_above >= 0.0 && reports[i].ks > fail_above) over = true;
  }
  if (over) {
    std::cerr << "ks exceeded --fail-above threshold " << fail_above << "\n";
    return kExitThreshold;
  }
  return kExitOk;
}

int cmd_pointmass(double beta, double c) {
  double pm = rmc::point_mass_zero_analytic(beta, c);
  double hl = rmc::h_limit_at_zero(beta, c);
  std::cout << "point_mass_zero = " << pm << "\n";
  std::cout << "h_limit_at_zero = " << hl << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limiting spectral distributions of random commutator and "
               "anticommutator matrices"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Output format (csv|json)")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = auto)");
  app.add_option("--seed", g.seed, "Base RNG seed");

  // lsd-identity
  double li_c = 1.0;
  int li_grid = 2001;
  std::string li_name = "lsd_identity";
  auto* li = app.add_subcommand("lsd-identity",
                                "Closed-form identity-covariance LSD curve");
  li->add_option("--c", li_c, "Concentration p/n limit")->required();
  li->add_option("--grid", li_grid, "Grid points")->capture_default_str();
  li->add_option("--name", li_name, "Output file stem")->capture_default_str();

  // lsd-general
  double lg_c = 1.0, lg_tol = 1e-12;
  int lg_grid = 801, lg_max_iter = 2000;
  std::string lg_h, lg_kernel = "minus", lg_name = "lsd_general";
  auto* lg = app.add_subcommand("lsd-general",
                                "Numeric LSD curve for a covariance spectrum");
  lg->add_option("--c", lg_c, "Concentration p/n limit")->required();
  lg->add_option("--H", lg_h, "Spectrum file (location weight lines)")
      ->required();
  lg->add_option("--kernel", lg_kernel, "minus|plus")->capture_default_str();
  lg->add_option("--grid", lg_grid, "Grid points")->capture_default_str();
  lg->add_option("--tol", lg_tol, "Solver residual tolerance")
      ->capture_default_str();
  lg->add_option("--max-iter", lg_max_iter, "Solver iteration cap")
      ->capture_default_str();
  lg->add_option("--name", lg_name, "Output file stem")->capture_default_str();

  // simulate
  int sim_p = 0, sim_n = 0, sim_replicates = 1;
  std::string sim_dist = "gaussian", sim_sigma = "identity",
              sim_kernel = "minus", sim_prefix = "esd";
  auto* sim = app.add_subcommand("simulate",
                                 "Draw ensembles and export their spectra");
  sim->add_option("--p", sim_p, "Matrix dimension")->required();
  sim->add_option("--n", sim_n, "Sample size")->required();
  sim->add_option("--entry-dist", sim_dist,
                  "gaussian|uniform|rademacher|mixed")
      ->capture_default_str();
  sim->add_option("--sigma", sim_sigma, "identity or a spectrum file")
      ->capture_default_str();
  sim->add_option("--kernel", sim_kernel, "minus|plus")->capture_default_str();
  sim->add_option("--replicates", sim_replicates, "Replicate count")
      ->capture_default_str();
  sim->add_option("--name", sim_prefix, "Output file prefix")
      ->capture_default_str();

  // compare
  std::vector<std::string> cmp_samples;
  std::string cmp_curve;
  int cmp_bins = 100;
  double cmp_window = -1.0, cmp_fail_above = -1.0;
  auto* cmp = app.add_subcommand("compare",
                                 "Compare sample spectra against a curve");
  cmp->add_option("--sample", cmp_samples, "Sample CSV file(s)")
      ->required()
      ->expected(-1);
  cmp->add_option("--curve", cmp_curve, "Curve CSV file")->required();
  cmp->add_option("--bins", cmp_bins, "Histogram bins")->capture_default_str();
  cmp->add_option("--atom-window", cmp_window,
                  "Atom window (default 0.01 * U)");
  cmp->add_option("--fail-above", cmp_fail_above,
                  "Exit 5 when any ks exceeds this");

  // pointmass
  double pm_beta = 1.0, pm_c = 1.0;
  auto* pm = app.add_subcommand(
      "pointmass", "Print the point mass at zero for (beta, c)");
  pm->add_option("--beta", pm_beta, "Mass of the nonzero part of H")
      ->required();
  pm->add_option("--c", pm_c, "Concentration p/n limit")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (li->parsed()) return cmd_lsd_identity(g, li_c, li_grid, li_name);
    if (lg->parsed())
      return cmd_lsd_general(g, lg_c, lg_h, lg_kernel, lg_grid, lg_tol,
                             lg_max_iter, lg_name);
    if (sim->parsed())
      return cmd_simulate(g, sim_p, sim_n, sim_dist, sim_sigma, sim_kernel,
                          sim_replicates, sim_prefix);
    if (cmp->parsed())
      return cmd_compare(g, cmp_samples, cmp_curve, cmp_bins, cmp_window,
                         cmp_fail_above);
    if (pm->parsed()) return cmd_pointmass(pm_beta, pm_c);
  } catch (const rmc::DegenerateSpectrum& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const rmc::CurveSolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const rmc::NoConvergence& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
