#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mftg/config_io.hpp"
#include "mftg/csv.hpp"
#include "mftg/learner.hpp"
#include "mftg/olne.hpp"
#include "mftg/presets.hpp"
#include "mftg/riccati.hpp"
#include "mftg/simulate.hpp"
#include "mftg/variance.hpp"
#include "mftg/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSingular = 2;
constexpr int kExitDiverged = 3;

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--preset", args.preset, "named preset experiment");
  cmd->add_option("--out", args.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--seed", args.seed, "override the config seed");
}

mftg::ExperimentConfig resolve_config(const CommonArgs& args) {
  if (args.config_path.empty() == args.preset.empty())
    throw mftg::ParseError("$", "give exactly one of --config or --preset");
  mftg::ExperimentConfig cfg = args.config_path.empty()
                                   ? mftg::make_preset(args.preset)
                                   : mftg::load_config(args.config_path);
  if (args.seed.has_value()) cfg.learner.seed = *args.seed;
  return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (fs::path(args.out_dir) / name).string();
}

void write_manifest(const CommonArgs& args, const std::string& command,
                    const mftg::ExperimentConfig& cfg) {
  fs::create_directories(args.out_dir);
  json manifest;
  manifest["command"] = command;
  manifest["version"] = mftg::kVersion;
  manifest["seed"] = cfg.learner.seed;
  manifest["workers_env"] = "MFTG_WORKERS";
  manifest["config"] = mftg::config_to_json(cfg);
  mftg::write_json_file(out_path(args, "manifest.json"), manifest);
}

std::string grid_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

const mftg::TeamSpec* teams_ptr(const mftg::ExperimentConfig& cfg) {
  return cfg.teams.has_value() ? &*cfg.teams : nullptr;
}

int cmd_solve_ne(const CommonArgs& args) {
  mftg::ExperimentConfig cfg = resolve_config(args);
  mftg::JointModel model = mftg::derive_joint_model(cfg.spec);
  write_manifest(args, "solve-ne", cfg);
  mftg::RiccatiSolution sol = mftg::solve_clne(model);
  mftg::ResidualReport res = mftg::verify_ne_residual(model, sol);
  json out = mftg::solution_to_json(sol);
  out["max_residual_y"] = res.max_residual_y;
  out["max_residual_xbar"] = res.max_residual_xbar;
  mftg::write_json_file(out_path(args, "solution.json"), out);
  double min_rcond = 1.0;
  for (double v : sol.phi_rcond) min_rcond = std::min(min_rcond, v);
  for (double v : sol.phi_bar_rcond) min_rcond = std::min(min_rcond, v);
  std::cout << "solve-ne: max residual " << res.max_residual()
            << ", min stage rcond " << min_rcond << "\n";
  return kExitOk;
}

int cmd_solve_olne(const CommonArgs& args) {
  mftg::ExperimentConfig cfg = resolve_config(args);
  mftg::JointModel model = mftg::derive_joint_model(cfg.spec);
  write_manifest(args, "solve-olne", cfg);
  mftg::OlneSolution sol = mftg::solve_olne(model);
  nlohmann::json j = mftg::olne_to_json(sol);
  // The open-loop gains need not coincide with the closed-loop ones; the gap
  // is reported, never asserted.
  try {
    const mftg::RiccatiSolution ne = mftg::solve_clne(model);
    j["gain_gap_vs_closed_loop"] = std::max(
        mftg::max_gain_distance(sol.gains, ne.gains, mftg::Branch::kDeviation),
        mftg::max_gain_distance(sol.gains, ne.gains,
                                mftg::Branch::kMeanField));
  } catch (const mftg::SingularPhi&) {
  }
  mftg::write_json_file(out_path(args, "olne.json"), j);
  std::cout << "solve-olne: residual deviation "
            << mftg::olne_residual(model, sol, mftg::Branch::kDeviation)
            << ", mean-field "
            << mftg::olne_residual(model, sol, mftg::Branch::kMeanField);
  if (j.contains("gain_gap_vs_closed_loop"))
    std::cout << ", gain gap vs closed loop "
              << j["gain_gap_vs_closed_loop"].get<double>();
  std::cout << "\n";
  return kExitOk;
}

// Shared by run-mrpg / run-sp-mrpg / run-vanilla: runs one learner per grid
// point (eta_grid, nb_grid, or a single run when no grid is set).
template <typename RunFn>
int run_learner_sweep(const CommonArgs& args, const std::string& command,
                      RunFn run_one) {
  mftg::ExperimentConfig cfg = resolve_config(args);
  mftg::JointModel model = mftg::derive_joint_model(cfg.spec);
  write_manifest(args, command, cfg);

  const mftg::PolicyProfile* reference = nullptr;
  mftg::RiccatiSolution ne;
  try {
    ne = mftg::solve_clne(model);
    reference = &ne.gains;
  } catch (const mftg::SingularPhi&) {
    // trace error columns stay NaN without a reference
  }

  struct Variant {
    std::string tag;
    mftg::LearnerConfig learner;
  };
  std::vector<Variant> variants;
  if (!cfg.eta_grid.empty()) {
    for (double eta : cfg.eta_grid) {
      mftg::LearnerConfig lc = cfg.learner;
      lc.eta = {eta};
      variants.push_back({"_eta_" + grid_tag(eta), lc});
    }
  } else if (!cfg.nb_grid.empty()) {
    for (int nb : cfg.nb_grid) {
      mftg::LearnerConfig lc = cfg.learner;
      lc.num_directions = nb;
      variants.push_back({"_nb_" + grid_tag(nb), lc});
    }
  } else {
    variants.push_back({"", cfg.learner});
  }

  for (const Variant& v : variants) {
    const std::string trace_path = out_path(args, "trace" + v.tag + ".csv");
    try {
      mftg::RunTrace trace = run_one(model, v.learner, reference, cfg);
      mftg::write_trace_csv(trace_path, trace);
      mftg::write_json_file(out_path(args, "profile" + v.tag + ".json"),
                            mftg::profile_to_json(trace.profile));
      std::cout << command << v.tag << ": final err " << trace.final_err_k
                << " / " << trace.final_err_kbar << "\n";
    } catch (const mftg::DivergenceDetected& e) {
      mftg::write_trace_csv(trace_path, e.partial);
      std::cerr << command << v.tag << ": " << e.what() << "\n";
      return kExitDiverged;
    }
  }
  return kExitOk;
}

int cmd_run_mrpg(const CommonArgs& args) {
  return run_learner_sweep(
      args, "run-mrpg",
      [](const mftg::JointModel& model, const mftg::LearnerConfig& lc,
         const mftg::PolicyProfile* ref, const mftg::ExperimentConfig&) {
        return mftg::mrpg_run(model, lc, ref);
      });
}

int cmd_run_sp_mrpg(const CommonArgs& args) {
  return run_learner_sweep(
      args, "run-sp-mrpg",
      [](const mftg::JointModel& model, const mftg::LearnerConfig& lc,
         const mftg::PolicyProfile* ref, const mftg::ExperimentConfig& cfg) {
        return mftg::sp_mrpg_run(model, lc, ref, teams_ptr(cfg));
      });
}

int cmd_run_vanilla(const CommonArgs& args) {
  return run_learner_sweep(
      args, "run-vanilla",
      [](const mftg::JointModel& model, const mftg::LearnerConfig& lc,
         const mftg::PolicyProfile* ref, const mftg::ExperimentConfig&) {
        return mftg::vanilla_npg_run(model, lc, ref);
      });
}

int cmd_run_augmented(const CommonArgs& args) {
  mftg::ExperimentConfig cfg = resolve_config(args);
  mftg::JointModel model = mftg::derive_joint_model(cfg.spec);
  write_manifest(args, "run-augmented", cfg);

  mftg::RiccatiSolution base = mftg::solve_clne(model);
  mftg::write_margins_csv(out_path(args, "margins_base.csv"),
                          mftg::check_diag_dominance(model, base));

  mftg::AugmentationSchedule schedule = mftg::compute_gamma_schedule(model);
  json sched;
  sched["gamma"] = json(schedule.gamma);
  sched["gamma_bar"] = json(schedule.gamma_bar);
  sched["gains"] = mftg::profile_to_json(schedule.gains);
  mftg::write_json_file(out_path(args, "gamma_schedule.json"), sched);

  mftg::GameSpec scaled_spec =
      mftg::scale_stage_costs(cfg.spec, schedule.gamma, schedule.gamma_bar);
  mftg::JointModel scaled = mftg::derive_joint_model(scaled_spec);
  mftg::write_margins_csv(out_path(args, "margins_augmented.csv"),
                          mftg::check_diag_dominance(scaled, mftg::solve_clne(scaled)));

  if (!cfg.gamma_scales.empty()) {
    std::ofstream scaling(out_path(args, "gamma_scaling.csv"));
    scaling << "scale,gain_gap_y,gain_gap_xbar\n";
    for (double c : cfg.gamma_scales) {
      mftg::StageScale g = schedule.gamma, gb = schedule.gamma_bar;
      for (auto& row : g)
        for (double& v : row) v *= c;
      for (auto& row : gb)
        for (double& v : row) v *= c;
      mftg::RiccatiSolution sol = mftg::solve_clne(
          mftg::derive_joint_model(mftg::scale_stage_costs(cfg.spec, g, gb)));
      scaling << mftg::format_double(c) << ','
              << mftg::format_double(mftg::max_gain_distance(
                     sol.gains, base.gains, mftg::Branch::kDeviation))
              << ','
              << mftg::format_double(mftg::max_gain_distance(
                     sol.gains, base.gains, mftg::Branch::kMeanField))
              << '\n';
    }
  }

  try {
    mftg::RunTrace trace = mftg::augmented_mrpg_run(model, cfg.learner);
    mftg::write_trace_csv(out_path(args, "trace.csv"), trace);
    mftg::write_json_file(out_path(args, "profile.json"),
                          mftg::profile_to_json(trace.profile));
    std::cout << "run-augmented: final err " << trace.final_err_k << " / "
              << trace.final_err_kbar << "\n";
  } catch (const mftg::DivergenceDetected& e) {
    mftg::write_trace_csv(out_path(args, "trace.csv"), e.partial);
    std::cerr << "run-augmented: " << e.what() << "\n";
    return kExitDiverged;
  }
  return kExitOk;
}

int cmd_eps_nash_sweep(const CommonArgs& args, bool dump_trajectories) {
  mftg::ExperimentConfig cfg = resolve_config(args);
  mftg::JointModel model = mftg::derive_joint_model(cfg.spec);
  if (cfg.m_grid.empty() || cfg.m_grid.size() != cfg.runs_per_m.size())
    throw mftg::ParseError("m_grid",
                           "m_grid and runs_per_m must be set and equal-sized");
  write_manifest(args, "eps-nash-sweep", cfg);

  mftg::RiccatiSolution ne = mftg::solve_clne(model);
  mftg::EpsNashTable table =
      mftg::eps_nash_gap(model, ne.gains, cfg.m_grid, cfg.runs_per_m,
                         cfg.learner.seed, teams_ptr(cfg));
  mftg::write_eps_table_csv(out_path(args, "gaps.csv"), table);
  if (dump_trajectories) {
    for (int m : cfg.m_grid) {
      mftg::Trajectory traj = mftg::simulate_finite_population(
          model, ne.gains, m, cfg.learner.seed, 0, teams_ptr(cfg));
      mftg::write_trajectory_csv(
          out_path(args, "trajectory_m" + std::to_string(m) + ".csv"), traj);
    }
  }
  std::cout << "eps-nash-sweep:";
  for (size_t i = 0; i < table.slope.size(); ++i) {
    std::cout << " player " << i << " slope ";
    if (!table.slope_applicable[i])
      std::cout << "n/a (gaps below noise floor)";
    else
      std::cout << table.slope[i]
                << (table.slope[i] >= -1.3 && table.slope[i] <= -0.7
                        ? " (in [-1.3,-0.7])"
                        : " (outside [-1.3,-0.7])");
    if (i + 1 < table.slope.size()) std::cout << ";";
  }
  std::cout << "\n";
  return kExitOk;
}

int cmd_check_diag_dom(const CommonArgs& args) {
  mftg::ExperimentConfig cfg = resolve_config(args);
  mftg::JointModel model = mftg::derive_joint_model(cfg.spec);
  write_manifest(args, "check-diag-dom", cfg);
  mftg::RiccatiSolution ne = mftg::solve_clne(model);
  mftg::DiagDomReport report = mftg::check_diag_dominance(model, ne);
  mftg::write_margins_csv(out_path(args, "margins.csv"), report);
  std::cout << "check-diag-dom: holds=" << (report.holds() ? "yes" : "no")
            << " min margins " << report.min_margin_y << " / "
            << report.min_margin_xbar << "\n";
  if (!report.holds()) {
    mftg::AugmentationSchedule schedule = mftg::compute_gamma_schedule(model);
    json sched;
    sched["gamma"] = json(schedule.gamma);
    sched["gamma_bar"] = json(schedule.gamma_bar);
    sched["gains"] = mftg::profile_to_json(schedule.gains);
    mftg::write_json_file(out_path(args, "gamma_schedule.json"), sched);
    std::cout << "check-diag-dom: wrote repairing gamma schedule\n";
  }
  return kExitOk;
}

int cmd_variance_cert(const CommonArgs& args, int player, int t,
                      const std::string& branch) {
  mftg::ExperimentConfig cfg = resolve_config(args);
  mftg::JointModel model = mftg::derive_joint_model(cfg.spec);
  if (branch != "deviation" && branch != "mean_field")
    throw mftg::ParseError("--branch", "expected deviation or mean_field");
  write_manifest(args, "variance-cert", cfg);
  mftg::Branch br = branch == "deviation" ? mftg::Branch::kDeviation
                                          : mftg::Branch::kMeanField;
  mftg::RiccatiSolution ne = mftg::solve_clne(model);
  mftg::VarianceCertificate cert =
      mftg::variance_certificate(model, ne.gains, player, t, br);
  json out;
  out["player"] = player;
  out["t"] = t;
  out["branch"] = branch;
  out["psi"] = mftg::mat_to_json(cert.psi);
  out["phi"] = mftg::mat_to_json(cert.phi);
  out["mean"] = cert.mean;
  out["variance"] = cert.variance;
  mftg::write_json_file(out_path(args, "certificate.json"), out);
  std::cout << "variance-cert: mean " << cert.mean << ", variance "
            << cert.variance << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Solvers, learners, and population diagnostics for linear-quadratic "
      "mean-field-type games"};
  app.require_subcommand(1);

  CommonArgs args;
  bool dump_trajectories = false;
  int cert_player = 0;
  int cert_time = 0;
  std::string cert_branch = "deviation";

  CLI::App* solve_ne = app.add_subcommand(
      "solve-ne", "closed-loop equilibrium via the coupled backward recursion");
  CLI::App* solve_olne =
      app.add_subcommand("solve-olne", "open-loop equilibrium costates and gains");
  CLI::App* run_mrpg = app.add_subcommand(
      "run-mrpg", "receding-horizon natural policy gradient");
  CLI::App* run_sp = app.add_subcommand(
      "run-sp-mrpg", "receding-horizon learner on sample-path rollouts");
  CLI::App* run_aug = app.add_subcommand(
      "run-augmented", "learner on the cost-augmented game plus gamma diagnostics");
  CLI::App* run_vanilla = app.add_subcommand(
      "run-vanilla", "all-timesteps policy gradient baseline");
  CLI::App* eps_sweep = app.add_subcommand(
      "eps-nash-sweep", "finite-population optimality gap over population sizes");
  CLI::App* diag_dom = app.add_subcommand(
      "check-diag-dom", "gain-update dominance margins and repair schedule");
  CLI::App* var_cert = app.add_subcommand(
      "variance-cert", "mean and variance certificate of the realized cost");

  for (CLI::App* cmd : {solve_ne, solve_olne, run_mrpg, run_sp, run_aug,
                        run_vanilla, eps_sweep, diag_dom, var_cert})
    add_common(cmd, args);
  eps_sweep->add_flag("--dump-trajectories", dump_trajectories,
                      "write one sample trajectory per population size");
  var_cert->add_option("--player", cert_player, "player index")
      ->capture_default_str();
  var_cert->add_option("--time", cert_time, "start timestep")
      ->capture_default_str();
  var_cert->add_option("--branch", cert_branch, "deviation or mean_field")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_ne->parsed()) return cmd_solve_ne(args);
    if (solve_olne->parsed()) return cmd_solve_olne(args);
    if (run_mrpg->parsed()) return cmd_run_mrpg(args);
    if (run_sp->parsed()) return cmd_run_sp_mrpg(args);
    if (run_aug->parsed()) return cmd_run_augmented(args);
    if (run_vanilla->parsed()) return cmd_run_vanilla(args);
    if (eps_sweep->parsed()) return cmd_eps_nash_sweep(args, dump_trajectories);
    if (diag_dom->parsed()) return cmd_check_diag_dom(args);
    if (var_cert->parsed())
      return cmd_variance_cert(args, cert_player, cert_time, cert_branch);
  } catch (const mftg::SingularPhi& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const mftg::FixedPointDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const mftg::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
