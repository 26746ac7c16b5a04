// stratcheck: numerical verification of jet-sufficiency and stratification
// regularity conditions for polynomial map-germs and their deformations.
//
// Subcommands: kuo, kuo2, regularity, gap, sample-horn. Configuration comes
// from a single JSON file (--config) with flag overrides; reports embed the
// complete effective configuration, the tool version, and wall-clock timings
// under a "timing" key (the only part of a report that varies between
// identical runs).

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stratcheck/stratcheck.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
namespace sr = stratcheck::regularity;
namespace sp = stratcheck::poly;
namespace sh = stratcheck::horn;
namespace ss = stratcheck::subspace;
namespace io = stratcheck::io;

namespace {

constexpr int kExitHolds = 0;
constexpr int kExitError = 1;
constexpr int kExitFails = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitImplicationViolated = 4;

struct RunConfig {
  fs::path f_path;
  fs::path g_path;
  std::vector<fs::path> perturbation_paths;
  int r = 2;
  double width = 0.5;
  double radius_cap = 1.0;
  sh::ShellSchedule schedule{};
  int samples = 400;
  int restarts = 4;
  std::uint64_t seed = 0x5eedULL;
  int t_grid = 11;
  double delta = 0.5;
  std::vector<double> t0_list{0.0, 0.5, 1.0};
  sr::Thresholds thresholds{};
  fs::path out = ".";
};

/// Flag values that override the config file when present.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> r;
  std::optional<double> width;
  std::optional<int> shells;
  std::optional<int> samples;
  std::optional<int> t_grid;
  std::vector<std::string> thresholds;  // name=value
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON run configuration; germ paths resolve relative to it");
  cmd->add_option("--seed", ov.seed, "RNG seed (64-bit)");
  cmd->add_option("--out", ov.out, "output directory for reports and CSVs");
  cmd->add_option("--r", ov.r, "jet order r");
  cmd->add_option("--width", ov.width, "horn width w");
  cmd->add_option("--shells", ov.shells, "number of shells in the radius schedule");
  cmd->add_option("--samples", ov.samples, "samples per shell");
  cmd->add_option("--t-grid", ov.t_grid, "points of the [0,1] parameter grid");
  cmd->add_option("--threshold", ov.thresholds, "override one threshold, e.g. --threshold gap_pass=0.05")
      ->take_all();
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void set_threshold(sr::Thresholds& thr, const std::string& name, double value) {
  if (name == "gap_pass")
    thr.gap_pass = value;
  else if (name == "cauchy_tol")
    thr.cauchy_tol = value;
  else if (name == "cd_floor")
    thr.cd_floor = value;
  else if (name == "half_floor")
    thr.half_floor = value;
  else if (name == "C_floor")
    thr.C_floor = value;
  else if (name == "slope_tol")
    thr.slope_tol = value;
  else if (name == "feas_rel")
    thr.feas_rel = value;
  else if (name == "angle_tol")
    thr.angle_tol = value;
  else if (name == "rank_tol")
    thr.rank_tol = value;
  else
    throw std::invalid_argument("unknown threshold name: " + name);
}

json parse_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io::IoError("cannot open file: " + path.string());
  return json::parse(in);  // parse errors carry the byte position
}

RunConfig load_config(const std::string& config_path) {
  RunConfig cfg;
  if (config_path.empty()) return cfg;
  const fs::path path(config_path);
  const json j = parse_json_file(path);
  if (!j.is_object()) throw io::IoError("config must be a JSON object: " + path.string());
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (j.contains("f")) cfg.f_path = resolve_path(base, j.at("f").get<std::string>());
  if (j.contains("g")) cfg.g_path = resolve_path(base, j.at("g").get<std::string>());
  if (j.contains("perturbations"))
    for (const auto& p : j.at("perturbations")) cfg.perturbation_paths.push_back(resolve_path(base, p.get<std::string>()));
  if (j.contains("r")) cfg.r = j.at("r").get<int>();
  if (j.contains("width")) cfg.width = j.at("width").get<double>();
  if (j.contains("radius_cap")) cfg.radius_cap = j.at("radius_cap").get<double>();
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    if (s.contains("rho0")) cfg.schedule.rho0 = s.at("rho0").get<double>();
    if (s.contains("gamma")) cfg.schedule.gamma = s.at("gamma").get<double>();
    if (s.contains("count")) cfg.schedule.count = s.at("count").get<int>();
  }
  if (j.contains("samples")) cfg.samples = j.at("samples").get<int>();
  if (j.contains("restarts")) cfg.restarts = j.at("restarts").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("t_grid")) cfg.t_grid = j.at("t_grid").get<int>();
  if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
  if (j.contains("t0_list")) cfg.t0_list = j.at("t0_list").get<std::vector<double>>();
  if (j.contains("thresholds"))
    for (const auto& [key, value] : j.at("thresholds").items()) set_threshold(cfg.thresholds, key, value.get<double>());
  if (j.contains("out")) cfg.out = fs::path(j.at("out").get<std::string>());
  return cfg;
}

RunConfig effective_config(const Overrides& ov) {
  RunConfig cfg = load_config(ov.config_path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.out) cfg.out = fs::path(*ov.out);
  if (ov.r) cfg.r = *ov.r;
  if (ov.width) cfg.width = *ov.width;
  if (ov.shells) cfg.schedule.count = *ov.shells;
  if (ov.samples) cfg.samples = *ov.samples;
  if (ov.t_grid) cfg.t_grid = *ov.t_grid;
  for (const auto& spec : ov.thresholds) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--threshold expects name=value, got: " + spec);
    set_threshold(cfg.thresholds, spec.substr(0, eq), std::stod(spec.substr(eq + 1)));
  }
  return cfg;
}

sp::MapGerm load_germ(const fs::path& path, const char* role) {
  if (path.empty()) throw io::IoError(std::string("config must name a germ file for '") + role + "'");
  return sp::germ_from_json(parse_json_file(path));
}

sh::HornSpec horn_spec(const RunConfig& cfg, int degree) { return sh::HornSpec{degree, cfg.width, cfg.radius_cap}; }

sr::ScanConfig scan_config(const RunConfig& cfg) {
  sr::ScanConfig scan;
  scan.schedule = cfg.schedule;
  scan.samples = cfg.samples;
  scan.restarts = cfg.restarts;
  scan.seed = cfg.seed;
  scan.t_grid = cfg.t_grid;
  return scan;
}

/// Every report embeds the complete effective configuration.
json config_json(const RunConfig& cfg) {
  json j;
  if (!cfg.f_path.empty()) j["f"] = cfg.f_path.string();
  if (!cfg.g_path.empty()) j["g"] = cfg.g_path.string();
  if (!cfg.perturbation_paths.empty()) {
    json arr = json::array();
    for (const auto& p : cfg.perturbation_paths) arr.push_back(p.string());
    j["perturbations"] = std::move(arr);
  }
  j["r"] = cfg.r;
  j["width"] = cfg.width;
  j["radius_cap"] = cfg.radius_cap;
  j["schedule"] = json{{"rho0", cfg.schedule.rho0}, {"gamma", cfg.schedule.gamma}, {"count", cfg.schedule.count}};
  j["samples"] = cfg.samples;
  j["restarts"] = cfg.restarts;
  j["seed"] = cfg.seed;
  j["t_grid"] = cfg.t_grid;
  j["delta"] = cfg.delta;
  j["t0_list"] = cfg.t0_list;
  j["thresholds"] = io::to_json(cfg.thresholds);
  j["out"] = cfg.out.string();
  return j;
}

class StageClock {
 public:
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    timing_[name] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }
  json finish() {
    timing_["total_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    return timing_;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
  std::chrono::steady_clock::time_point last_ = start_;
  json timing_ = json::object();
};

json wrap_report(const RunConfig& cfg, json&& report, json&& timing) {
  return json{{"tool", "stratcheck"},
              {"version", stratcheck::kVersion},
              {"config", config_json(cfg)},
              {"timing", std::move(timing)},
              {"report", std::move(report)}};
}

int verdict_exit(sr::Verdict v) {
  switch (v) {
    case sr::Verdict::holds: return kExitHolds;
    case sr::Verdict::fails: return kExitFails;
    default: return kExitInconclusive;
  }
}

int cmd_kuo(const Overrides& ov) {
  const RunConfig cfg = effective_config(ov);
  const sp::MapGerm f = load_germ(cfg.f_path, "f");
  StageClock clock;
  const sr::KuoReport rep = sr::kuo_check(f, cfg.r, horn_spec(cfg, cfg.r), scan_config(cfg), cfg.thresholds);
  clock.lap("scan_ms");
  io::write_json_atomic(cfg.out / "kuo.json", wrap_report(cfg, io::to_json(rep), clock.finish()));
  io::write_text_atomic(cfg.out / "kuo_shells.csv", io::kuo_shells_csv(rep, f.nvars()));
  std::cout << "kuo: verdict=" << sr::to_string(rep.verdict) << " C_est=" << stratcheck::format_double(rep.C_est)
            << " slope=" << stratcheck::format_double(rep.slope) << "\n";
  return verdict_exit(rep.verdict);
}

int cmd_kuo2(const Overrides& ov) {
  const RunConfig cfg = effective_config(ov);
  const sp::MapGerm f = load_germ(cfg.f_path, "f");
  if (cfg.perturbation_paths.empty()) throw io::IoError("kuo2 needs a non-empty \"perturbations\" list in the config");
  std::vector<sp::MapGerm> perts;
  for (const auto& p : cfg.perturbation_paths) perts.push_back(load_germ(p, "perturbations"));
  StageClock clock;
  const std::vector<sr::KuoReport> reps =
      sr::second_kuo_check(f, perts, cfg.r, cfg.delta, horn_spec(cfg, cfg.r + 1), scan_config(cfg), cfg.thresholds);
  clock.lap("scan_ms");
  json arr = json::array();
  for (const auto& rep : reps) arr.push_back(io::to_json(rep));
  io::write_json_atomic(cfg.out / "kuo2.json", wrap_report(cfg, std::move(arr), clock.finish()));
  bool any_fails = false, all_hold = true;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    io::write_text_atomic(cfg.out / ("kuo2_shells_" + std::to_string(i + 1) + ".csv"),
                          io::kuo_shells_csv(reps[i], f.nvars()));
    any_fails = any_fails || reps[i].verdict == sr::Verdict::fails;
    all_hold = all_hold && reps[i].verdict == sr::Verdict::holds;
    std::cout << "kuo2[" << (i + 1) << "]: verdict=" << sr::to_string(reps[i].verdict)
              << " C_est=" << stratcheck::format_double(reps[i].C_est) << "\n";
  }
  return any_fails ? kExitFails : (all_hold ? kExitHolds : kExitInconclusive);
}

int cmd_regularity(const Overrides& ov) {
  const RunConfig cfg = effective_config(ov);
  const sp::MapGerm f = load_germ(cfg.f_path, "f");
  const sp::MapGerm g = cfg.g_path.empty() ? f : load_germ(cfg.g_path, "g");
  const sr::DeformationFamily fam = sr::build_family(f, g, cfg.r);
  sr::PipelineConfig pipeline;
  pipeline.spec = horn_spec(cfg, cfg.r);
  pipeline.scan = scan_config(cfg);
  pipeline.t0_list = cfg.t0_list;
  pipeline.thresholds = cfg.thresholds;
  StageClock clock;
  const sr::PipelineReport rep = sr::full_pipeline(fam, pipeline);
  clock.lap("pipeline_ms");
  io::write_json_atomic(cfg.out / "regularity.json", wrap_report(cfg, io::to_json(rep), clock.finish()));
  io::write_text_atomic(cfg.out / "kuo_shells.csv", io::kuo_shells_csv(rep.kuo, f.nvars()));
  const int n = fam.nvars();
  for (std::size_t i = 0; i < rep.a.size(); ++i) {
    const std::string suffix = "_t" + std::to_string(i) + ".csv";
    io::write_text_atomic(cfg.out / ("condition_a" + suffix), io::condition_csv(rep.a[i], n));
    io::write_text_atomic(cfg.out / ("condition_m" + suffix), io::condition_csv(rep.m[i], n));
    io::write_text_atomic(cfg.out / ("condition_c" + suffix), io::condition_csv(rep.c[i], n));
    io::write_text_atomic(cfg.out / ("condition_c_d" + suffix), io::condition_csv(rep.cd[i], n));
  }
  std::cout << "regularity: kuo=" << sr::to_string(rep.kuo.verdict) << " a=" << sr::to_string(rep.a_verdict)
            << " m=" << sr::to_string(rep.m_verdict) << " c=" << sr::to_string(rep.c_verdict)
            << " c_d=" << sr::to_string(rep.cd_verdict) << " overall=" << sr::to_string(rep.overall) << "\n";
  if (!rep.implication_ok || !rep.kuo_c_ok) {
    std::cerr << "implication flag violated: " << (rep.note.empty() ? "(c) expected to hold" : rep.note) << "\n";
    return kExitImplicationViolated;
  }
  return verdict_exit(rep.overall);
}

int cmd_gap(const std::string& a_path, const std::string& b_path, const Overrides& ov) {
  const RunConfig cfg = effective_config(ov);
  const ss::Subspace a = ss::orthonormalize(io::frame_from_json(parse_json_file(a_path)));
  const ss::Subspace b = ss::orthonormalize(io::frame_from_json(parse_json_file(b_path)));
  const ss::GapResult res = ss::gap(a, b);
  std::cout << "gap = " << stratcheck::format_double(res.gap) << "\n";
  std::cout << "principal_angles_rad =";
  for (double th : ss::principal_angles(a, b)) std::cout << " " << stratcheck::format_double(th);
  std::cout << "\n";
  std::cout << "intersection_dim = " << ss::intersection_dim(a, b, cfg.thresholds.angle_tol) << "\n";
  return kExitHolds;
}

int cmd_sample_horn(const Overrides& ov) {
  const RunConfig cfg = effective_config(ov);
  const sp::MapGerm f = load_germ(cfg.f_path, "f");
  const sh::HornSpec spec = horn_spec(cfg, cfg.r);
  StageClock clock;
  const std::vector<double> radii = cfg.schedule.radii();
  std::string csv = "radius";
  for (int i = 1; i <= f.nvars(); ++i) csv += ",x" + std::to_string(i);
  csv += "\n";
  json summary = json::array();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const sh::Shell shell = sh::sample_shell(f, spec, radii[k], cfg.samples, stratcheck::derive_seed(cfg.seed, k));
    for (const auto& x : shell.points) {
      std::string line = stratcheck::format_double(radii[k]);
      for (Eigen::Index i = 0; i < x.size(); ++i) line += ',' + stratcheck::format_double(x[i]);
      csv += line + '\n';
    }
    summary.push_back(json{{"radius", radii[k]}, {"accepted", shell.points.size()}, {"requested", cfg.samples}});
  }
  clock.lap("sample_ms");
  io::write_text_atomic(cfg.out / "horn_samples.csv", csv);
  io::write_json_atomic(cfg.out / "horn_summary.json", wrap_report(cfg, std::move(summary), clock.finish()));
  std::cout << "sample-horn: wrote " << (cfg.out / "horn_samples.csv").string() << "\n";
  return kExitHolds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratcheck: numerical jet-sufficiency and stratification-regularity checks for polynomial deformations"};
  app.require_subcommand(1);

  Overrides kuo_ov, kuo2_ov, reg_ov, gap_ov, horn_ov;
  std::string gap_a, gap_b;

  CLI::App* kuo = app.add_subcommand("kuo", "estimate the Kuo constant of f on its horn-neighbourhood");
  add_common_flags(kuo, kuo_ov);
  CLI::App* kuo2 = app.add_subcommand("kuo2", "second-condition scan over listed (r+1)-jet perturbations");
  add_common_flags(kuo2, kuo2_ov);
  CLI::App* reg = app.add_subcommand("regularity", "full pipeline: Kuo scan plus (a), (m), (c), (c_d) along Y");
  add_common_flags(reg, reg_ov);
  CLI::App* gap = app.add_subcommand("gap", "gap, principal angles, intersection dimension of two subspaces");
  gap->add_option("a", gap_a, "JSON file with basis vectors of the first subspace")->required();
  gap->add_option("b", gap_b, "JSON file with basis vectors of the second subspace")->required();
  add_common_flags(gap, gap_ov);
  CLI::App* horn = app.add_subcommand("sample-horn", "write accepted horn samples per shell as CSV");
  add_common_flags(horn, horn_ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (app.got_subcommand(kuo)) return cmd_kuo(kuo_ov);
    if (app.got_subcommand(kuo2)) return cmd_kuo2(kuo2_ov);
    if (app.got_subcommand(reg)) return cmd_regularity(reg_ov);
    if (app.got_subcommand(gap)) return cmd_gap(gap_a, gap_b, gap_ov);
    if (app.got_subcommand(horn)) return cmd_sample_horn(horn_ov);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
