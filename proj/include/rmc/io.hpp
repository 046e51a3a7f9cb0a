#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmc/measures.hpp"
#include "rmc/simulate.hpp"
#include "rmc/solver.hpp"
#include "rmc/stats.hpp"

namespace rmc {

inline constexpr const char* kVersion = "0.1.0";

namespace io {

using nlohmann::json;

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a partial file.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct CurveMeta {
  std::string method = "fixed_point";  // or "closed_form"
  double solver_tol = 0.0;
  int solver_max_iter = 0;
};

inline json curve_sidecar(const LsdCurve& curve, const CurveMeta& meta) {
  json side = {
      {"c", curve.c},
      {"kernel", kernel_name(curve.kernel)},
      {"point_mass_zero", curve.point_mass_zero},
      {"support", {curve.support_lower, curve.support_upper}},
      {"method", meta.method},
  };
  if (meta.method != "closed_form")
    side["solver"] = {{"tol", meta.solver_tol},
                      {"max_iter", meta.solver_max_iter}};
  return side;
}

/// CSV columns x,density,cdf plus a JSON sidecar with the curve parameters.
/// With format "json" a single JSON document carries the arrays instead.
inline void write_curve(const std::filesystem::path& path,
                        const LsdCurve& curve, const CurveMeta& meta,
                        const std::string& format = "csv") {
  if (format == "json") {
    json doc = curve_sidecar(curve, meta);
    doc["x"] = curve.grid;
    doc["density"] = curve.density;
    doc["cdf"] = curve.cdf;
    atomic_write(path, doc.dump(2) + "\n");
    return;
  }
  std::ostringstream csv;
  csv << "x,density,cdf\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    csv << fmt(curve.grid[i]) << "," << fmt(curve.density[i]) << ","
        << fmt(curve.cdf[i]) << "\n";
  atomic_write(path, csv.str());
  std::filesystem::path side_path = path;
  side_path.replace_extension(".json");
  atomic_write(side_path, curve_sidecar(curve, meta).dump(2) + "\n");
}

inline LsdCurve curve_from_parts(const json& side, std::vector<double> grid,
                                 std::vector<double> density) {
  Kernel kernel = side.at("kernel").get<std::string>() == "skew"
                      ? Kernel::skew
                      : Kernel::hermitian;
  return LsdCurve::build(side.at("c").get<double>(), kernel, std::move(grid),
                         std::move(density),
                         side.at("point_mass_zero").get<double>(),
                         side.at("support")[0].get<double>(),
                         side.at("support")[1].get<double>());
}

inline LsdCurve read_curve(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json doc = json::parse(in);
    return curve_from_parts(doc, doc.at("x").get<std::vector<double>>(),
                            doc.at("density").get<std::vector<double>>());
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> grid, density;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, f, cdf;
    if (!(ls >> x >> f >> cdf))
      throw std::runtime_error("bad curve row: " + line);
    grid.push_back(x);
    density.push_back(f);
  }
  std::filesystem::path side_path = path;
  side_path.replace_extension(".json");
  std::ifstream sin(side_path);
  if (!sin) throw std::runtime_error("missing sidecar " + side_path.string());
  json side = json::parse(sin);
  return curve_from_parts(side, std::move(grid), std::move(density));
}

inline json sample_sidecar(const EsdSample& sample, const EnsembleConfig& cfg) {
  return {
      {"p", sample.p},
      {"n", sample.n},
      {"c_n", sample.c_n},
      {"entry_dist", entry_dist_name(cfg.entry_dist)},
      {"kernel", kernel_name(sample.kernel)},
      {"seed", cfg.seed},
      {"replicate", cfg.replicate},
      {"fingerprint", sample.fingerprint},
      {"gaussian_rows", cfg.entry_dist == EntryDist::mixed
                            ? json(sample_gaussian_rows(cfg))
                            : json(nullptr)},
  };
}

/// CSV columns index,coord plus a JSON sidecar with the ensemble parameters
/// (including the gaussian row assignment of the mixed ensemble). With
/// format "json" a single document carries the coordinates too.
inline void write_sample(const std::filesystem::path& path,
                         const EsdSample& sample, const EnsembleConfig& cfg,
                         const std::string& format = "csv") {
  json side = sample_sidecar(sample, cfg);
  if (format == "json") {
    side["coords"] = sample.coords;
    atomic_write(path, side.dump(2) + "\n");
    return;
  }
  std::ostringstream csv;
  csv << "index,coord\n";
  for (std::size_t i = 0; i < sample.coords.size(); ++i)
    csv << i << "," << fmt(sample.coords[i]) << "\n";
  atomic_write(path, csv.str());
  std::filesystem::path side_path = path;
  side_path.replace_extension(".json");
  atomic_write(side_path, side.dump(2) + "\n");
}

inline EsdSample sample_from_sidecar(const json& side) {
  EsdSample sample;
  sample.n = side.at("n").get<int>();
  sample.c_n = side.at("c_n").get<double>();
  sample.kernel = side.at("kernel").get<std::string>() == "skew"
                      ? Kernel::skew
                      : Kernel::hermitian;
  sample.fingerprint = side.value("fingerprint", "");
  return sample;
}

inline EsdSample read_sample(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json doc = json::parse(in);
    EsdSample sample = sample_from_sidecar(doc);
    sample.coords = doc.at("coords").get<std::vector<double>>();
    std::sort(sample.coords.begin(), sample.coords.end());
    sample.p = static_cast<int>(sample.coords.size());
    return sample;
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> coords;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    long idx;
    double coord;
    if (!(ls >> idx >> coord))
      throw std::runtime_error("bad sample row: " + line);
    coords.push_back(coord);
  }
  std::filesystem::path side_path = path;
  side_path.replace_extension(".json");
  std::ifstream sin(side_path);
  if (!sin) throw std::runtime_error("missing sidecar " + side_path.string());
  EsdSample sample = sample_from_sidecar(json::parse(sin));
  sample.coords = std::move(coords);
  std::sort(sample.coords.begin(), sample.coords.end());
  sample.p = static_cast<int>(sample.coords.size());
  return sample;
}

inline json report_json(const ComparisonReport& r) {
  return {
      {"ks", r.ks},
      {"levy", r.levy},
      {"l1_hist", r.l1_hist},
      {"point_mass_est", r.point_mass_est},
      {"support_violation_frac", r.support_violation_frac},
      {"p", r.p},
      {"n", r.n},
      {"replicates", r.replicates},
  };
}

inline void write_reports(const std::filesystem::path& dir,
                          const std::vector<ComparisonReport>& reports) {
  for (std::size_t i = 0; i < reports.size(); ++i)
    atomic_write(dir / ("report_" + std::to_string(i) + ".json"),
                 report_json(reports[i]).dump(2) + "\n");
  std::ostringstream csv;
  csv << "replicate,ks,levy,l1,point_mass_est,support_violation_frac\n";
  for (std::size_t i = 0; i < reports.size(); ++i)
    csv << i << "," << fmt(reports[i].ks) << "," << fmt(reports[i].levy) << ","
        << fmt(reports[i].l1_hist) << "," << fmt(reports[i].point_mass_est)
        << "," << fmt(reports[i].support_violation_frac) << "\n";
  atomic_write(dir / "reports.csv", csv.str());
}

inline void write_measure(const std::filesystem::path& path,
                          const SpectralMeasure& m) {
  std::ostringstream os;
  m.serialize(os);
  atomic_write(path, os.str());
}

inline SpectralMeasure read_measure(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return SpectralMeasure::parse(in);
}

/// Every CLI run records its full parameter set; re-running the recorded
/// argv reproduces simulation outputs bit-identically and analytic outputs
/// to within roundoff.
inline void write_manifest(const std::filesystem::path& dir, json params) {
  params["version"] = kVersion;
  atomic_write(dir / "manifest.json", params.dump(2) + "\n");
}

}  // namespace io
}  // namespace rmc
