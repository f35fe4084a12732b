#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ti64/calibrate.hpp"
#include "ti64/config.hpp"
#include "ti64/csv.hpp"
#include "ti64/diagrams.hpp"
#include "ti64/integrator.hpp"
#include "ti64/levenberg_marquardt.hpp"
#include "ti64/parallel.hpp"
#include "ti64/thermal_paths.hpp"

namespace fs = std::filesystem;
using namespace ti64;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitIntegration = 3;
constexpr int kExitCalibration = 4;

struct CliOptions {
  std::string config_file;
  std::string out_dir = ".";
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  double dt = 0.0;          // 0 = keep config value
  std::string scheme;       // "" = keep config value
};

RunConfig make_run_config(const CliOptions& opt) {
  RunConfig cfg;
  if (!opt.config_file.empty()) {
    std::ifstream in(opt.config_file);
    if (!in) throw ConfigError("cannot open config file '" + opt.config_file + "'");
    load_config(in, cfg);
  }
  if (opt.dt > 0.0) cfg.step.dt = opt.dt;
  if (!opt.scheme.empty()) cfg.step.scheme = detail::parse_scheme("--scheme", opt.scheme);
  if (opt.threads > 0) {
    cfg.ttt.threads = opt.threads;
    cfg.cct.threads = opt.threads;
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const CliOptions& opt, const std::string& name) {
  fs::create_directories(opt.out_dir);
  const fs::path p = fs::path(opt.out_dir) / name;
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot open output file '" + p.string() + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file '" + path + "'");
  return in;
}

int run_simulate(const CliOptions& opt, const std::string& path_file) {
  const RunConfig cfg = make_run_config(opt);
  auto in = open_in(path_file);
  const TemperaturePath path = load_path_csv(in);
  const Trajectory traj = integrate(PhaseState::pure_beta(), path, 0.0,
                                    path.end_time(), cfg.step, cfg.params);
  auto out = open_out(opt, "trajectory.csv");
  out << "time_s,temp_K,x_beta,x_alpha_s,x_alpha_m,x_liq\n";
  for (const auto& s : traj.samples)
    out << csv::format9(s.t) << ',' << csv::format9(s.temperature) << ','
        << csv::format9(s.state.x_beta) << ',' << csv::format9(s.state.x_alpha_s)
        << ',' << csv::format9(s.state.x_alpha_m) << ','
        << csv::format9(s.state.x_liq) << '\n';
  return 0;
}

void write_isoline_row(std::ostream& out, const std::string& phase, const Crossing& c) {
  out << phase << ',' << csv::format9(c.level) << ',' << csv::format9(c.t) << ','
      << csv::format9(c.temperature) << ',' << c.direction << '\n';
}

int run_ttt(const CliOptions& opt) {
  RunConfig cfg = make_run_config(opt);
  cfg.ttt.scheme = cfg.step.scheme;
  const TttResult result = generate_ttt(cfg.params, cfg.ttt);
  auto out = open_out(opt, "ttt_isolines.csv");
  out << "phase,level,time_s,temp_K,direction\n";
  for (const char* phase : {"alpha_s", "alpha_m"})
    for (double level : cfg.ttt.thresholds)
      for (const auto& row : result.rows)
        for (const auto& c : std::string(phase) == "alpha_s" ? row.alpha_s : row.alpha_m)
          if (c.level == level) write_isoline_row(out, phase, c);
  return 0;
}

int run_cct(const CliOptions& opt) {
  RunConfig cfg = make_run_config(opt);
  cfg.cct.scheme = cfg.step.scheme;
  const CctResult result = generate_cct(cfg.params, cfg.cct);

  auto iso = open_out(opt, "cct_isolines.csv");
  iso << "phase,level,time_s,temp_K,direction\n";
  for (const char* phase : {"alpha_s", "alpha_m", "beta"})
    for (double level : cfg.cct.thresholds)
      for (const auto& curve : result.curves) {
        const auto& cs = std::string(phase) == "alpha_s" ? curve.alpha_s
                         : std::string(phase) == "alpha_m" ? curve.alpha_m
                                                           : curve.beta;
        for (const auto& c : cs)
          if (c.level == level) write_isoline_row(iso, phase, c);
      }

  auto term = open_out(opt, "cct_terminal.csv");
  term << "rate_K_per_s,x_alpha_s,x_alpha_m,x_beta\n";
  for (const auto& curve : result.curves)
    term << csv::format9(curve.rate_target) << ',' << csv::format9(curve.terminal.x_alpha_s)
         << ',' << csv::format9(curve.terminal.x_alpha_m) << ','
         << csv::format9(curve.terminal.x_beta) << '\n';

  const CriticalRates crit = critical_rates(result, cfg.params, cfg.cct);
  auto rep = open_out(opt, "cct_critical_rates.csv");
  rep << "rate_pure_martensite_K_per_s,rate_pure_diffusional_K_per_s\n";
  rep << csv::format9(crit.rate_pure_martensite) << ','
      << csv::format9(crit.rate_pure_diffusional) << '\n';
  return 0;
}

int run_calibrate(const CliOptions& opt, const std::string& kind,
                  const std::string& data_file, std::vector<double> theta0) {
  const RunConfig cfg = make_run_config(opt);
  if (!fs::exists(data_file)) throw ParseError("missing data file '" + data_file + "'");
  auto in = open_in(data_file);

  ResidualFn objective;
  std::vector<double> lower, upper;
  std::vector<std::string> names;
  if (kind == "ttt") {
    objective = make_ttt_objective(load_ttt_observations(in), cfg.params, cfg.ttt);
    lower = ttt_lower_bounds();
    upper = ttt_upper_bounds();
    names = {"c_alpha_s", "k1", "k2", "k3"};
    if (theta0.empty())
      theta0 = {cfg.params.diff.c_alpha_s, cfg.params.diff.k1, cfg.params.diff.k2,
                cfg.params.diff.k3};
  } else if (kind == "heating") {
    objective = make_heating_objective(load_heating_observations(in), cfg.params, cfg.step);
    lower = heating_lower_bounds();
    upper = heating_upper_bounds();
    names = {"c_beta", "f"};
    if (theta0.empty()) theta0 = {cfg.params.diff.c_beta, cfg.params.diff.f};
  } else if (kind == "cooling") {
    objective = make_cooling_objective(load_cooling_observations(in), cfg.sib);
    lower = cooling_lower_bounds();
    upper = cooling_upper_bounds();
    names = {"a_g", "b_g", "c_g"};
    if (theta0.empty()) theta0 = {cfg.sib.a_g, cfg.sib.b_g, cfg.sib.c_g};
  } else {
    throw ConfigError("unknown calibration kind '" + kind + "'");
  }
  if (theta0.size() != names.size())
    throw ConfigError("--theta0 expects " + std::to_string(names.size()) + " values");

  const LMResult res = levenberg_marquardt(objective, theta0, lower, upper, cfg.lm);

  std::ostringstream report;
  report << "kind = " << kind << '\n'
         << "converged = " << (res.converged ? "true" : "false") << '\n'
         << "iterations = " << res.iterations << '\n'
         << "final_cost = " << csv::format9(res.cost) << '\n';
  for (std::size_t i = 0; i < names.size(); ++i)
    report << names[i] << " = " << csv::format9(res.theta[i]) << '\n';
  std::cout << report.str();
  auto out = open_out(opt, "calibration_report.txt");
  out << report.str();
  return res.converged ? 0 : kExitCalibration;
}

struct FieldPoint {
  std::string id;
  double x = 0.0, y = 0.0, z = 0.0;
};

int run_field(const CliOptions& opt, const std::string& points_file,
              const std::string& histories_dir) {
  const RunConfig cfg = make_run_config(opt);
  auto in = open_in(points_file);
  std::vector<FieldPoint> points;
  for (const auto& [lineno, cells] : csv::read_rows(in, "point_id,x_mm,y_mm,z_mm")) {
    if (cells.size() != 4) throw ParseError("expected 4 columns", lineno);
    points.push_back({cells[0], csv::to_double(cells[1], lineno),
                      csv::to_double(cells[2], lineno), csv::to_double(cells[3], lineno)});
  }
  for (const auto& p : points) {
    const fs::path h = fs::path(histories_dir) / (p.id + ".csv");
    if (!fs::exists(h))
      throw ParseError("missing temperature history for point '" + p.id + "' (" +
                       h.string() + ")");
  }

  std::vector<PhaseState> terminal(points.size());
  parallel_for(static_cast<int>(points.size()), opt.threads, [&](int i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    std::ifstream hin((fs::path(histories_dir) / (p.id + ".csv")));
    const TemperaturePath path = load_path_csv(hin);
    const Trajectory traj = integrate(PhaseState::pure_beta(), path, 0.0,
                                      path.end_time(), cfg.step, cfg.params);
    terminal[static_cast<std::size_t>(i)] = traj.back().state;
  });

  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points[a].id < points[b].id; });

  auto out = open_out(opt, "field.csv");
  out << "point_id,x_mm,y_mm,z_mm,x_beta,x_alpha_s,x_alpha_m\n";
  for (std::size_t i : order) {
    const auto& p = points[i];
    const auto& s = terminal[i];
    out << p.id << ',' << csv::format9(p.x) << ',' << csv::format9(p.y) << ','
        << csv::format9(p.z) << ',' << csv::format9(s.x_beta) << ','
        << csv::format9(s.x_alpha_s) << ',' << csv::format9(s.x_alpha_m) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ti-6Al-4V phase-fraction simulation toolkit"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_file, "flat key=value configuration file");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--threads", opt.threads, "worker thread count");
  app.add_option("--dt", opt.dt, "base integration step (s)");
  app.add_option("--scheme", opt.scheme, "time integration scheme: euler|cn");

  std::string path_file;
  auto* simulate = app.add_subcommand("simulate", "integrate one temperature history");
  simulate->add_option("path", path_file, "temperature-history CSV (time_s,temp_K)")
      ->required();

  auto* ttt = app.add_subcommand("ttt", "generate a TTT diagram");
  auto* cct = app.add_subcommand("cct", "generate a CCT diagram and critical rates");

  std::string kind, data_file, theta0_csv;
  auto* calibrate = app.add_subcommand("calibrate", "fit model parameters");
  calibrate->add_option("--kind", kind, "objective: ttt|heating|cooling")->required();
  calibrate->add_option("--data", data_file, "observation CSV")->required();
  calibrate->add_option("--theta0", theta0_csv, "comma-separated initial guess");

  std::string points_file, histories_dir;
  auto* field = app.add_subcommand("field", "post-process per-point histories");
  field->add_option("points", points_file, "points CSV (point_id,x_mm,y_mm,z_mm)")
      ->required();
  field->add_option("--histories", histories_dir, "directory with <point_id>.csv files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (*simulate) return run_simulate(opt, path_file);
    if (*ttt) return run_ttt(opt);
    if (*cct) return run_cct(opt);
    if (*calibrate) {
      std::vector<double> theta0;
      if (!theta0_csv.empty()) {
        std::stringstream ss(theta0_csv);
        std::string tok;
        while (std::getline(ss, tok, ','))
          theta0.push_back(detail::parse_double("--theta0", tok));
      }
      return run_calibrate(opt, kind, data_file, std::move(theta0));
    }
    if (*field) return run_field(opt, points_file, histories_dir);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const CalibrationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCalibration;
  } catch (const IntegrationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIntegration;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIntegration;
  }
  return 0;
}
