#include "mftg/learner.hpp"

#include <chrono>
#include <cmath>

#include "mftg/rng.hpp"

namespace mftg {

namespace {

constexpr double kDivergenceGuard = 1e6;

void validate_config(const LearnerConfig& cfg, const JointModel& model) {
  if (cfg.eta.empty()) throw std::invalid_argument("eta must be non-empty");
  if (cfg.eta.size() != 1 &&
      cfg.eta.size() != static_cast<size_t>(model.players()))
    throw std::invalid_argument("eta must have one entry or one per player");
  for (double e : cfg.eta)
    if (!(e > 0.0)) throw std::invalid_argument("eta must be positive");
  if (cfg.iterations < 1)
    throw std::invalid_argument("iterations must be >= 1");
  if (!(cfg.sigma_y > 0.0) || !(cfg.sigma_xbar > 0.0))
    throw std::invalid_argument("exploration covariances must be positive");
  if (!(cfg.proj_radius > 0.0))
    throw std::invalid_argument("projection radius must be positive");
  if (cfg.mode != GradientMode::kExact) {
    if (cfg.num_directions < 1)
      throw std::invalid_argument("mini-batch size must be >= 1");
    if (!(cfg.radius > 0.0)) throw InvalidRadius(cfg.radius);
  }
  if (cfg.mode == GradientMode::kZeroOrderSamplePath && cfg.population < 1)
    throw std::invalid_argument("population must be >= 1");
}

Mat project(const Mat& k, double radius) {
  if (!std::isfinite(radius)) return k;
  const double norm = k.norm();
  if (norm <= radius) return k;
  return (radius / norm) * k;
}

uint64_t gradient_seed(uint64_t master, int t, int k, int player, Branch br) {
  return substream_seed(
      master, {uint64_t(t), uint64_t(k),
               uint64_t(player) * 2 + (br == Branch::kMeanField ? 1 : 0)});
}

// Sample-path receding-horizon cost oracle: simulates the finite-population
// deviation ensemble (or the single mean-field path) from phase time to T
// under the snapshot profile with the candidate gain swapped in at the phase
// time, and returns the realized cost. All draws come from the call seed, so
// an antithetic pair sharing the seed sees common random numbers.
struct SamplePathOracle {
  const JointModel* model = nullptr;
  const PolicyProfile* profile = nullptr;
  int player = 0;
  int t = 0;
  Branch br = Branch::kDeviation;
  int population = 1;
  double sigma_init = 1.0;   // exploration covariance scale at the phase time
  Mat step_factor;           // factor of the step-noise covariance

  double operator()(const Mat& candidate, uint64_t call_seed) const {
    return br == Branch::kDeviation ? eval_deviation(candidate, call_seed)
                                    : eval_mean_field(candidate, call_seed);
  }

  double eval_deviation(const Mat& candidate, uint64_t call_seed) const {
    const int T = model->horizon();
    const int n = model->n();
    const int m = population;
    Mat y = std::sqrt(sigma_init) *
            draw_normal_matrix(substream_seed(call_seed, uint64_t(t)), n, m);
    y.colwise() -= Vec(y.rowwise().mean());
    double cost = 0.0;
    for (int s = t; s <= T; ++s) {
      const Mat* k_i = s == t ? &candidate : &profile->k[player][s];
      Mat stage = model->q(player, s, br);
      if (s < T)
        stage += k_i->transpose() * model->r(player, s, br) * (*k_i);
      cost += y.cwiseProduct(stage * y).sum() / m;
      if (s < T) {
        Mat l = model->a(s, br);
        for (int j = 0; j < model->players(); ++j) {
          const Mat& k_j =
              (j == player && s == t) ? candidate : profile->k[j][s];
          l -= model->b(j, s, br) * k_j;
        }
        Mat w = step_factor *
                draw_normal_matrix(
                    substream_seed(call_seed, uint64_t(s) + 1), n, m);
        w.colwise() -= Vec(w.rowwise().mean());
        y = l * y + w;
      }
    }
    return cost;
  }

  double eval_mean_field(const Mat& candidate, uint64_t call_seed) const {
    const int T = model->horizon();
    const int n = model->n();
    Vec xb = std::sqrt(sigma_init) *
             draw_normals(substream_seed(call_seed, uint64_t(t)), n);
    double cost = 0.0;
    for (int s = t; s <= T; ++s) {
      const Mat* k_i = s == t ? &candidate : &profile->k_bar[player][s];
      Mat stage = model->q(player, s, br);
      if (s < T)
        stage += k_i->transpose() * model->r(player, s, br) * (*k_i);
      cost += xb.dot(stage * xb);
      if (s < T) {
        Mat l = model->a(s, br);
        for (int j = 0; j < model->players(); ++j) {
          const Mat& k_j =
              (j == player && s == t) ? candidate : profile->k_bar[j][s];
          l -= model->b(j, s, br) * k_j;
        }
        xb = l * xb +
             step_factor *
                 draw_normals(substream_seed(call_seed, uint64_t(s) + 1), n);
      }
    }
    return cost;
  }
};

struct PhaseContext {
  ValueRecursion vy;
  ValueRecursion vx;
  Mat dev_step_factor;
  Mat mf_step_factor;
};

// Natural-gradient update direction for one (player, branch) at phase t,
// computed against the snapshot profile.
Mat natural_direction(const JointModel& model, const LearnerConfig& cfg,
                      const PolicyProfile& snapshot, const PhaseContext& ctx,
                      int i, int t, Branch br, int iter, double* norm_out) {
  const bool dev = br == Branch::kDeviation;
  const ValueRecursion& vr = dev ? ctx.vy : ctx.vx;
  const double sigma = dev ? cfg.sigma_y : cfg.sigma_xbar;
  Mat natural;
  switch (cfg.mode) {
    case GradientMode::kExact:
      natural =
          2.0 * gradient_bracket(model, snapshot, vr.p[i][t + 1], i, t, br);
      break;
    case GradientMode::kZeroOrderExpected: {
      const StageOracle stage =
          make_expected_cost_oracle(model, snapshot, vr, i, t, br, sigma);
      ZeroOrderOptions opt;
      opt.num_directions = cfg.num_directions;
      opt.radius = cfg.radius;
      opt.antithetic = cfg.antithetic;
      opt.seed = gradient_seed(cfg.seed, t, iter, i, br);
      const CostOracle oracle = [&stage](const Mat& k, uint64_t) {
        return stage(k);
      };
      natural =
          zero_order_gradient(oracle, snapshot.gain(i, t, br), sigma, opt)
              .natural;
      break;
    }
    case GradientMode::kZeroOrderSamplePath: {
      SamplePathOracle sp;
      sp.model = &model;
      sp.profile = &snapshot;
      sp.player = i;
      sp.t = t;
      sp.br = br;
      sp.population = cfg.population;
      if (dev) {
        sp.sigma_init = cfg.sigma_y;
        sp.step_factor = ctx.dev_step_factor;
      } else {
        sp.sigma_init = cfg.sigma_xbar + cfg.sigma_y / cfg.population;
        sp.step_factor = ctx.mf_step_factor;
      }
      ZeroOrderOptions opt;
      opt.num_directions = cfg.num_directions;
      opt.radius = cfg.radius;
      opt.antithetic = cfg.antithetic;
      opt.seed = gradient_seed(cfg.seed, t, iter, i, br);
      const CostOracle oracle = [&sp](const Mat& k, uint64_t call_seed) {
        return sp(k, call_seed);
      };
      natural =
          zero_order_gradient(oracle, snapshot.gain(i, t, br), sigma, opt)
              .natural;
      break;
    }
  }
  if (norm_out) *norm_out = natural.norm();
  return natural;
}

void finalize_errors(const JointModel& model, const PolicyProfile* reference,
                     RunTrace* trace) {
  if (!reference) return;
  (void)model;
  trace->final_err_k =
      max_gain_distance(trace->profile, *reference, Branch::kDeviation);
  trace->final_err_kbar =
      max_gain_distance(trace->profile, *reference, Branch::kMeanField);
}

RunTrace receding_core(const JointModel& model, const LearnerConfig& cfg,
                       const PolicyProfile* reference) {
  validate_config(cfg, model);
  const int N = model.players();
  const int T = model.horizon();
  const bool sp = cfg.mode == GradientMode::kZeroOrderSamplePath;

  RunTrace trace;
  trace.profile = PolicyProfile::zeros(model);
  PolicyProfile& profile = trace.profile;

  for (int t = T - 1; t >= 0; --t) {
    PhaseContext ctx;
    ctx.vy = value_recursion(model, profile, Branch::kDeviation);
    ctx.vx = value_recursion(model, profile, Branch::kMeanField);
    if (sp) {
      ctx.dev_step_factor =
          covariance_factor(model.noise_cov(Branch::kDeviation));
      ctx.mf_step_factor = covariance_factor(
          model.noise_cov(Branch::kMeanField) +
          model.noise_cov(Branch::kDeviation) / cfg.population);
    }
    for (int k = 1; k <= cfg.iterations; ++k) {
      const PolicyProfile snapshot = profile;
      std::vector<double> grad_norms(N, 0.0), wall_ms(N, 0.0);
      for (int i = 0; i < N; ++i) {
        const auto start = std::chrono::steady_clock::now();
        double ny = 0.0, nx = 0.0;
        const Mat dir_y = natural_direction(model, cfg, snapshot, ctx, i, t,
                                            Branch::kDeviation, k, &ny);
        const Mat dir_x = natural_direction(model, cfg, snapshot, ctx, i, t,
                                            Branch::kMeanField, k, &nx);
        profile.k[i][t] = project(
            snapshot.k[i][t] - cfg.eta_for(i) * dir_y, cfg.proj_radius);
        profile.k_bar[i][t] = project(
            snapshot.k_bar[i][t] - cfg.eta_for(i) * dir_x, cfg.proj_radius);
        grad_norms[i] = std::sqrt(ny * ny + nx * nx);
        wall_ms[i] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
      }

      bool diverged = false;
      for (int i = 0; i < N && !diverged; ++i)
        diverged = profile.k[i][t].norm() > kDivergenceGuard ||
                   profile.k_bar[i][t].norm() > kDivergenceGuard ||
                   !profile.k[i][t].allFinite() ||
                   !profile.k_bar[i][t].allFinite();

      for (int i = 0; i < N; ++i) {
        TraceRow row;
        row.phase_t = t;
        row.iter_k = k;
        row.player = i;
        if (reference) {
          row.err_k = (profile.k[i][t] - reference->k[i][t]).norm();
          row.err_kbar =
              (profile.k_bar[i][t] - reference->k_bar[i][t]).norm();
        }
        const StageOracle oy = make_expected_cost_oracle(
            model, profile, ctx.vy, i, t, Branch::kDeviation, cfg.sigma_y);
        const StageOracle ox = make_expected_cost_oracle(
            model, profile, ctx.vx, i, t, Branch::kMeanField, cfg.sigma_xbar);
        row.cost_y = oy(profile.k[i][t]);
        row.cost_xbar = ox(profile.k_bar[i][t]);
        row.grad_norm = grad_norms[i];
        row.wall_ms = wall_ms[i];
        trace.rows.push_back(row);
      }

      if (diverged && !std::isfinite(cfg.proj_radius))
        throw DivergenceDetected(t, k, trace);
    }
  }
  finalize_errors(model, reference, &trace);
  return trace;
}

}  // namespace

RunTrace mrpg_run(const JointModel& model, const LearnerConfig& config,
                  const PolicyProfile* reference) {
  LearnerConfig cfg = config;
  // the sample-path oracle belongs to sp_mrpg_run; a shared config selects
  // the algorithm through the entry point, not the mode field
  if (cfg.mode == GradientMode::kZeroOrderSamplePath)
    cfg.mode = GradientMode::kZeroOrderExpected;
  return receding_core(model, cfg, reference);
}

RunTrace sp_mrpg_run(const JointModel& model, const LearnerConfig& config,
                     const PolicyProfile* reference, const TeamSpec* teams) {
  (void)teams;
  LearnerConfig cfg = config;
  cfg.mode = GradientMode::kZeroOrderSamplePath;
  return receding_core(model, cfg, reference);
}

RunTrace augmented_mrpg_run(const JointModel& model,
                            const LearnerConfig& config,
                            const PolicyProfile* reference) {
  if (!std::isfinite(config.proj_radius))
    throw std::invalid_argument(
        "augmented mode requires a finite projection radius");
  StageScale gamma = config.gamma;
  StageScale gamma_bar = config.gamma_bar;
  if (gamma.empty() || gamma_bar.empty()) {
    const AugmentationSchedule sched = compute_gamma_schedule(model);
    if (gamma.empty()) gamma = sched.gamma;
    if (gamma_bar.empty()) gamma_bar = sched.gamma_bar;
  }
  const JointModel scaled =
      derive_joint_model(scale_stage_costs(model.spec, gamma, gamma_bar));

  LearnerConfig cfg = config;
  cfg.gamma.clear();
  cfg.gamma_bar.clear();
  if (reference) return receding_core(scaled, cfg, reference);
  const RiccatiSolution augmented_ne = solve_clne(scaled);
  return receding_core(scaled, cfg, &augmented_ne.gains);
}

RunTrace vanilla_npg_run(const JointModel& model, const LearnerConfig& config,
                         const PolicyProfile* reference) {
  validate_config(config, model);
  if (config.mode == GradientMode::kZeroOrderSamplePath)
    throw std::invalid_argument(
        "sample-path oracle not supported by the vanilla baseline");
  const int N = model.players();
  const int T = model.horizon();

  RunTrace trace;
  trace.profile = PolicyProfile::zeros(model);
  PolicyProfile& profile = trace.profile;

  for (int k = 1; k <= config.iterations; ++k) {
    const PolicyProfile snapshot = profile;
    ValueRecursion vr[2] = {
        value_recursion(model, snapshot, Branch::kDeviation),
        value_recursion(model, snapshot, Branch::kMeanField)};

    // Forward state covariances under the snapshot, per branch, plus the
    // running constant cost of the stages before each timestep (the parts of
    // the full-horizon cost a time-t perturbation cannot touch).
    MatSeq cov[2];
    std::vector<std::vector<double>> prefix(2);
    for (int b = 0; b < 2; ++b) {
      const Branch br = b == 0 ? Branch::kDeviation : Branch::kMeanField;
      const double sigma0 = b == 0 ? config.sigma_y : config.sigma_xbar;
      cov[b].resize(T + 1);
      prefix[b].assign(T + 1, 0.0);
      cov[b][0] = sigma0 * Mat::Identity(model.n(), model.n());
      for (int s = 0; s < T; ++s) {
        const Mat l = closed_loop(model, snapshot, s, br);
        cov[b][s + 1] = symmetrized(l * cov[b][s] * l.transpose() +
                                    model.noise_cov(br));
      }
    }

    struct Update {
      Mat k, k_bar;
    };
    std::vector<std::vector<Update>> staged(N, std::vector<Update>(T));
    std::vector<std::vector<double>> grad_norms(N,
                                                std::vector<double>(T, 0.0));
    std::vector<std::vector<double>> wall_ms(N, std::vector<double>(T, 0.0));

    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < N; ++i) {
        const auto start = std::chrono::steady_clock::now();
        double norms[2];
        Mat dirs[2];
        for (int b = 0; b < 2; ++b) {
          const Branch br = b == 0 ? Branch::kDeviation : Branch::kMeanField;
          Mat natural;
          if (config.mode == GradientMode::kExact) {
            natural = 2.0 * gradient_bracket(model, snapshot,
                                             vr[b].p[i][t + 1], i, t, br);
          } else {
            StageOracle stage = make_expected_cost_oracle(
                model, snapshot, vr[b], i, t, br, 1.0);
            stage.sigma = cov[b][t];
            double before = 0.0;  // stages s < t under the snapshot
            for (int s = 0; s < t; ++s) {
              const Mat& g = snapshot.gain(i, s, br);
              const Mat m =
                  model.q(i, s, br) + g.transpose() * model.r(i, s, br) * g;
              before += (cov[b][s] * m).trace();
            }
            stage.tail += before;
            ZeroOrderOptions opt;
            opt.num_directions = config.num_directions;
            opt.radius = config.radius;
            opt.antithetic = config.antithetic;
            opt.seed = gradient_seed(config.seed, t, k, i, br);
            const CostOracle oracle = [&stage](const Mat& kk, uint64_t) {
              return stage(kk);
            };
            const Mat raw = zero_order_gradient(
                                oracle, snapshot.gain(i, t, br), 1.0, opt)
                                .raw;
            natural = raw * cov[b][t].inverse();
          }
          dirs[b] = snapshot.gain(i, t, br) - config.eta_for(i) * natural;
          norms[b] = natural.norm();
        }
        staged[i][t].k = project(dirs[0], config.proj_radius);
        staged[i][t].k_bar = project(dirs[1], config.proj_radius);
        grad_norms[i][t] = std::sqrt(norms[0] * norms[0] + norms[1] * norms[1]);
        wall_ms[i][t] = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
      }
    }

    bool diverged = false;
    for (int i = 0; i < N; ++i) {
      for (int t = 0; t < T; ++t) {
        profile.k[i][t] = staged[i][t].k;
        profile.k_bar[i][t] = staged[i][t].k_bar;
        diverged = diverged || profile.k[i][t].norm() > kDivergenceGuard ||
                   profile.k_bar[i][t].norm() > kDivergenceGuard ||
                   !profile.k[i][t].allFinite() ||
                   !profile.k_bar[i][t].allFinite();
      }
    }

    const ValueRecursion post_y =
        value_recursion(model, profile, Branch::kDeviation);
    const ValueRecursion post_x =
        value_recursion(model, profile, Branch::kMeanField);
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < N; ++i) {
        TraceRow row;
        row.phase_t = t;
        row.iter_k = k;
        row.player = i;
        if (reference) {
          row.err_k = (profile.k[i][t] - reference->k[i][t]).norm();
          row.err_kbar =
              (profile.k_bar[i][t] - reference->k_bar[i][t]).norm();
        }
        row.cost_y = cost_to_go(post_y, i, t,
                                config.sigma_y *
                                    Mat::Identity(model.n(), model.n()));
        row.cost_xbar = cost_to_go(post_x, i, t,
                                   config.sigma_xbar *
                                       Mat::Identity(model.n(), model.n()));
        row.grad_norm = grad_norms[i][t];
        row.wall_ms = wall_ms[i][t];
        trace.rows.push_back(row);
      }
    }
    if (diverged && !std::isfinite(config.proj_radius))
      throw DivergenceDetected(T - 1, k, trace);
  }
  finalize_errors(model, reference, &trace);
  return trace;
}

double rate_bound_diagnostic(const JointModel& model) {
  const RiccatiSolution ne = solve_clne(model);
  double bound = std::numeric_limits<double>::infinity();
  for (int b = 0; b < 2; ++b) {
    const Branch br = b == 0 ? Branch::kDeviation : Branch::kMeanField;
    const PlayerMatSeq& z = b == 0 ? ne.z : ne.z_bar;
    for (int i = 0; i < model.players(); ++i) {
      for (int t = 0; t < model.horizon(); ++t) {
        const Mat& bmat = model.b(i, t, br);
        const double h = spectral_norm(
            model.r(i, t, br) + bmat.transpose() * z[i][t + 1] * bmat);
        bound = std::min(bound, std::min(1.0 / (4.0 * h * h + 3.0 * h),
                                         1.0 / (2.0 * h * h + 1.0)));
      }
    }
  }
  return bound;
}

}  // namespace mftg
