#include "scream/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "scream/dac.hpp"
#include "scream/lds.hpp"
#include "scream/omd.hpp"
#include "scream/scream.hpp"
#include "scream/scream_control.hpp"
#include "scream/sysid.hpp"

namespace scream {

namespace {

using Rng = std::mt19937_64;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Vector gaussian_vector(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Matrix gaussian_matrix(int r, int c, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = normal(rng);
  return m;
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Vector in_ball(int n, double radius, Rng& rng) {
  Vector v = gaussian_vector(n, rng);
  const double r = radius * std::pow(uniform(rng, 0.0, 1.0), 1.0 / n);
  return v * (r / v.norm());
}

double spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

// Blocks with spectral norm uniform in [0, cap_i], cap_i = c (1 - gamma)^i.
DacParams random_feasible(int H, int du, int dx, double c, double gamma, Rng& rng) {
  DacParams m(H, du, dx);
  for (int i = 1; i <= H; ++i) {
    Matrix b = gaussian_matrix(du, dx, rng);
    const double cap = c * std::pow(1.0 - gamma, i);
    b *= uniform(rng, 0.0, 1.0) * cap / spectral_norm(b);
    m.block(i) = b;
  }
  return m;
}

// u = -K x + sum_i M[i] w_{t-i}, written out without the library window.
Vector direct_action(const Matrix& K, const DacParams& M, const Vector& x,
                     const std::vector<Vector>& w, int t) {
  Vector u = -K * x;
  for (int i = 1; i <= M.horizon(); ++i)
    if (t - i >= 0) u += M.block(i) * w[static_cast<std::size_t>(t - i)];
  return u;
}

}  // namespace

std::string format_result(const CriterionResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name +
         ": " + r.detail;
}

CriterionResult check_benchmark_orderings(const BenchmarkResult& result) {
  CriterionResult out{1, "regression benchmark ordering", false, ""};
  std::ostringstream d;
  auto mean = [&](const std::string& alg, double alpha) -> const SummaryRow* {
    return find_summary(result.summary, alg, alpha);
  };
  bool ok = result.failures.empty();
  if (!ok) d << result.failures.size() << " failed cells; ";
  for (double alpha : {0.1, 0.5, 1.0}) {
    const SummaryRow* s = mean("scream", alpha);
    const SummaryRow* a = mean("ader", alpha);
    const SummaryRow* o = mean("ogd", alpha);
    if (!s || !a || !o) {
      d << "missing cells at alpha=" << alpha << "; ";
      ok = false;
      continue;
    }
    bool cell = false;
    if (alpha == 0.5) cell = s->overall_mean < o->overall_mean && s->overall_mean < a->overall_mean;
    if (alpha == 0.1)
      cell = a->overall_mean <= 1.05 * s->overall_mean && s->overall_mean < o->overall_mean;
    if (alpha == 1.0)
      cell = o->overall_mean <= 1.05 * s->overall_mean && s->overall_mean < a->overall_mean;
    d << "a=" << alpha << " scream/ader/ogd=" << fmt(s->overall_mean) << "/"
      << fmt(a->overall_mean) << "/" << fmt(o->overall_mean);
    if (alpha != 0.1) {
      const double ratio = a->switching_mean / s->switching_mean;
      d << " sw ratio " << fmt(ratio);
      cell = cell && ratio >= 3.0;
    }
    d << (cell ? " ok; " : " VIOLATED; ");
    ok = ok && cell;
  }
  out.passed = ok;
  out.detail = d.str();
  return out;
}

CriterionResult check_transfer_equivalence(int systems) {
  CriterionResult out{2, "transfer-matrix state equals direct rollout", false, ""};
  const int dx = 3, du = 2, H = 4, T = 60;
  double worst = 0.0;
  for (int s = 0; s < systems; ++s) {
    Rng rng(9000 + static_cast<std::uint64_t>(s));
    const LinearSystem sys = random_diagonalizable_system(dx, du, 0.9, 1.0, 500 + s);
    const Matrix K = Matrix::Zero(du, dx);
    const StronglyStableController ctl = certify(sys, K);
    const double c = sys.kappa_B * std::pow(ctl.kappa, 3);
    std::vector<DacParams> params;
    std::vector<Vector> w;
    for (int t = 0; t < T; ++t) {
      params.push_back(random_feasible(H, du, dx, c, ctl.gamma, rng));
      w.push_back(in_ball(dx, sys.W, rng));
    }
    const ClosedLoop loop(sys, K, T + H + 1);
    Vector x = Vector::Zero(dx);
    for (int t = 0; t <= T; ++t) {
      const Vector via = state_via_transfer(loop, params, w, t);
      const double err = (via - x).norm();
      const double rel = x.norm() > 0.0 ? err / x.norm() : (err == 0.0 ? 0.0 : INFINITY);
      worst = std::max(worst, rel);
      if (t == T) break;
      const Vector u = direct_action(K, params[static_cast<std::size_t>(t)], x, w, t);
      x = sys.A * x + sys.B * u + w[static_cast<std::size_t>(t)];
    }
  }
  out.passed = worst <= 1e-8;
  out.detail = std::to_string(systems) + " systems, worst relative error " + fmt(worst);
  return out;
}

CriterionResult check_truncation_bounds() {
  CriterionResult out{3, "truncation gaps within bounds", false, ""};
  const int T = 400;
  long checks = 0, violations = 0;
  double worst_state = 0.0, worst_loss = 0.0;
  std::string skipped;
  for (const std::string& name : preset_names()) {
    for (int H : {2, 5, 10}) {
      for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        for (bool adversarial : {false, true}) {
          const ScenarioPreset preset = make_preset(name, seed, 1.0);
          const LinearSystem& sys = preset.system;
          const StronglyStableController& ctl = preset.controller;
          const int dx = sys.state_dim(), du = sys.input_dim();
          const double kappa = ctl.kappa, gamma = ctl.gamma, kB = sys.kappa_B, W = sys.W;
          const double decay = kappa * kappa * std::pow(1.0 - gamma, H + 1);
          if (decay >= 1.0) {
            skipped += " " + name + "/H=" + std::to_string(H);
            ++violations;
            continue;
          }
          const double tau = kB * std::pow(kappa, 3);
          const double D =
              W * std::pow(kappa, 3) * (1.0 + H * kB * tau) / (gamma * (1.0 - decay)) +
              W * tau / gamma;
          const TrackingTask task = piecewise_targets(dx, T, 3, 1.0, 0.1, seed + 31);
          const double Gc = task.cost_gradient(D);
          const double state_bound = decay * D;
          const double loss_bound = 2.0 * Gc * D * D * std::pow(kappa, 3) * std::pow(1.0 - gamma, H + 1);
          const CostStream costs = task.stream();

          DisturbanceGenerator gen =
              adversarial ? DisturbanceGenerator(DisturbanceKind::AdversarialSign, dx, W, W, seed + 5)
                          : preset.disturbances;
          Rng rng(seed * 131 + static_cast<std::uint64_t>(H));
          const ClosedLoop loop(sys, ctl.K, H + 1);
          DisturbanceWindow window(2 * H + 1, dx);
          std::deque<DacParams> recent(static_cast<std::size_t>(H + 1), DacParams(H, du, dx));
          std::vector<Vector> w;
          Vector x = Vector::Zero(dx);
          for (int t = 0; t < T; ++t) {
            const DacParams M = random_feasible(H, du, dx, tau, gamma, rng);
            recent.push_back(M);
            const std::vector<DacParams> params(recent.begin(), recent.end());
            const Vector u = direct_action(ctl.K, M, x, w, t);
            const ControlCost cost = costs(t);
            const TruncatedEvaluation tr = truncated_loss(cost, loop, params, window);
            const double gap_x = (x - tr.y).norm();
            const double gap_f = std::abs(cost.value(x, u) - tr.value);
            worst_state = std::max(worst_state, gap_x / state_bound);
            worst_loss = std::max(worst_loss, gap_f / loss_bound);
            ++checks;
            if (gap_x > state_bound * (1.0 + 1e-9) + 1e-12 ||
                gap_f > loss_bound * (1.0 + 1e-9) + 1e-12)
              ++violations;
            recent.pop_front();
            const Vector wt = gen.sample(t, x);
            w.push_back(wt);
            window.push(wt);
            x = sys.A * x + sys.B * u + wt;
          }
        }
      }
    }
  }
  out.passed = violations == 0;
  out.detail = std::to_string(checks) + " rounds, " + std::to_string(violations) +
               " violations, worst state gap/bound " + fmt(worst_state) +
               ", worst loss gap/bound " + fmt(worst_loss);
  if (!skipped.empty()) out.detail += ", no decay for" + skipped;
  return out;
}

CriterionResult check_gradients(int instances) {
  CriterionResult out{4, "unary gradient matches central differences", false, ""};
  double worst = 0.0;
  long entries = 0;
  for (int n = 0; n < instances; ++n) {
    Rng rng(7000 + static_cast<std::uint64_t>(n));
    const int dx = uniform_int(rng, 2, 4), du = uniform_int(rng, 1, 3), H = uniform_int(rng, 1, 5);
    const LinearSystem sys =
        random_diagonalizable_system(dx, du, uniform(rng, 0.3, 0.95), 1.0, 300 + n);
    const Matrix K = n % 2 == 0 ? Matrix(Matrix::Zero(du, dx)) : Matrix(0.1 * gaussian_matrix(du, dx, rng));
    const ClosedLoop loop(sys, K, 2 * H + 2);
    DisturbanceWindow window(2 * H + 1, dx);
    const int pushes = uniform_int(rng, 1, 3 * H + 2);
    for (int k = 0; k < pushes; ++k) window.push(in_ball(dx, 1.0, rng));
    const DacParams M = DacParams::from_stacked(H, 0.3 * gaussian_matrix(H * du, dx, rng));
    const ControlCost cost = quadratic_tracking_cost(in_ball(dx, 1.0, rng), uniform(rng, 0.01, 1.0));

    const Vector g = unary_truncated_gradient(cost, loop, M, window).vec();
    const Vector m = M.vec();
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      Vector plus = m, minus = m;
      plus[k] += h;
      minus[k] -= h;
      const double fp = unary_truncated_loss(cost, loop, DacParams::from_vec(H, du, dx, plus), window).value;
      const double fm = unary_truncated_loss(cost, loop, DacParams::from_vec(H, du, dx, minus), window).value;
      const double fd = (fp - fm) / (2.0 * h);
      const double denom = std::max({std::abs(g[k]), std::abs(fd), 1e-6});
      worst = std::max(worst, std::abs(g[k] - fd) / denom);
      ++entries;
    }
  }
  out.passed = worst <= 1e-5;
  out.detail = std::to_string(instances) + " instances, " + std::to_string(entries) +
               " entries, worst relative error " + fmt(worst);
  return out;
}

CriterionResult check_movement_bounds(const std::vector<const BenchmarkResult*>& results) {
  CriterionResult out{5, "hedge movement and OGD switching bounds", false, ""};
  double worst_excess = -INFINITY, worst_ratio = 0.0;
  int runs = 0, ogd_runs = 0;
  bool ok = true;
  for (const BenchmarkResult* r : results) {
    if (!r->failures.empty()) ok = false;
    for (const MovementAudit& a : r->audits) {
      ++runs;
      worst_excess = std::max(worst_excess, a.worst_hedge_excess);
      if (a.worst_hedge_excess > 1e-9) ok = false;
      if (std::isfinite(a.ogd_bound)) {
        ++ogd_runs;
        worst_ratio = std::max(worst_ratio, a.ogd_switching / a.ogd_bound);
        if (a.ogd_switching > a.ogd_bound) ok = false;
      }
    }
  }
  out.passed = ok && runs > 0;
  out.detail = std::to_string(runs) + " runs, worst ||dp||_1 - eps max|l| = " + fmt(worst_excess) +
               ", " + std::to_string(ogd_runs) + " OGD runs, worst switching/(eta G T) = " +
               fmt(worst_ratio);
  return out;
}

CriterionResult check_regret_scaling(const ExperimentConfig& base, int seeds) {
  CriterionResult out{6, "regret ratio growth across horizons", false, ""};
  const std::vector<long> grid = {2000, 8000, 32000};
  const int S = 5;
  auto grows_ok = [](double prev, double next) { return next <= prev + 0.25 * std::abs(prev); };
  std::ostringstream d;
  bool ok = true;
  for (const std::string task : {"oco", "control"}) {
    std::vector<double> medians;
    for (long T : grid) {
      std::vector<double> ratios;
      for (int s = 0; s < seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        ratios.push_back(task == "oco" ? oco_regret_ratio(base, T, S, 0.5, seed)
                                       : control_regret_ratio(base, T, S, seed));
      }
      medians.push_back(median(ratios));
    }
    bool task_ok = true;
    for (std::size_t k = 1; k < medians.size(); ++k)
      task_ok = task_ok && grows_ok(medians[k - 1], medians[k]);
    d << task << " medians";
    for (double m : medians) d << " " << fmt(m);
    d << (task_ok ? " ok; " : " GROWS; ");
    ok = ok && task_ok;
  }
  out.passed = ok;
  out.detail = d.str();
  return out;
}

CriterionResult check_identification(const ExperimentConfig& base) {
  CriterionResult out{7, "identification rate and model injection", false, ""};
  const IdentificationStudy study = run_identification_study(base);
  const bool slope_ok = study.slope >= -0.8 && study.slope <= -0.3;
  std::ostringstream d;
  d << "k=" << study.k << " medians";
  for (const IdentificationPoint& p : study.points) d << " " << fmt(p.median_A);
  d << " slope " << fmt(study.slope) << (slope_ok ? " ok" : " OUT OF RANGE");

  const long T = 1500;
  const ScenarioPreset preset = make_preset(base.sysid_preset, 0, 1.0, 101);
  const LinearSystem& sys = preset.system;
  IdentificationConfig id;
  id.T0 = 500;
  id.K = preset.controller.K;
  id.k = controllability_index(sys.A, sys.B, id.K);
  const double D = lipschitz_constants(sys, preset.controller, default_truncation(preset.controller.gamma, T - id.T0), 1.0).D;
  const TrackingTask task = piecewise_targets(sys.state_dim(), T, 3, 1.0, 0.1, 5);
  const CostStream costs = task.stream();
  PipelineOptions opts;
  opts.cost_gradient = task.cost_gradient(D);
  opts.lambda_multiplier = base.lambda_multiplier;
  opts.injected_model = sys;
  opts.seed = 77;

  Plant plant_a(sys, preset.disturbances);
  const PipelineResult injected = run_unknown_pipeline(plant_a, id, T, costs, opts);

  Plant plant_b(sys, preset.disturbances);
  identify_system(plant_b, id, opts.seed);
  const ControlConfig config = make_control_config(sys, certify(sys, id.K), T - id.T0,
                                                   opts.cost_gradient, opts.lambda_multiplier);
  ScreamController learner(config, sys);
  const ControlRun known = run_controller(learner, plant_b, costs, T - id.T0, static_cast<int>(id.T0));

  bool identical = injected.phase2.costs == known.costs &&
                   injected.phase2.states.size() == known.states.size() &&
                   injected.phase2.actions.size() == known.actions.size();
  for (std::size_t t = 0; identical && t < known.states.size(); ++t)
    identical = injected.phase2.states[t] == known.states[t];
  for (std::size_t t = 0; identical && t < known.actions.size(); ++t)
    identical = injected.phase2.actions[t] == known.actions[t];
  d << "; injected phase 2 " << (identical ? "bit-identical" : "DIFFERS") << " over "
    << known.costs.size() << " rounds";

  out.passed = slope_ok && identical;
  out.detail = d.str();
  return out;
}

CriterionResult check_structural(int cases) {
  CriterionResult out{8, "structural invariants", false, ""};
  std::ostringstream d;
  bool ok = true;
  auto report = [&](const std::string& what, long fails) {
    d << what << " " << (fails == 0 ? "ok" : std::to_string(fails) + " FAILED") << "; ";
    ok = ok && fails == 0;
  };

  {
    long fails = 0;
    for (int c = 0; c < cases; ++c) {
      Rng rng(100000 + static_cast<std::uint64_t>(c));
      const int n = uniform_int(rng, 1, 40);
      Vector p(n);
      for (int i = 0; i < n; ++i) p[i] = uniform(rng, 0.0, 1.0) < 0.1 ? 0.0 : uniform(rng, 0.0, 1.0);
      if (p.sum() == 0.0) p[0] = 1.0;
      p /= p.sum();
      Vector losses(n);
      for (int i = 0; i < n; ++i) losses[i] = uniform(rng, -100.0, 100.0);
      const Vector q = hedge_update(p, losses, std::pow(10.0, uniform(rng, -3.0, 1.0)));
      const bool good = std::abs(q.sum() - 1.0) <= 1e-12 && q.minCoeff() >= 0.0 && q.allFinite();
      bool zeros_kept = true;
      for (int i = 0; i < n; ++i) zeros_kept = zeros_kept && (p[i] > 0.0 || q[i] == 0.0);
      if (!good || !zeros_kept) ++fails;
    }
    report("simplex", fails);
  }

  {
    long fails = 0;
    for (int c = 0; c < cases; ++c) {
      Rng rng(200000 + static_cast<std::uint64_t>(c));
      const int n = uniform_int(rng, 1, 12);
      const DomainBall ball(n, uniform(rng, 0.1, 5.0));
      const Vector x = gaussian_vector(n, rng) * uniform(rng, 0.0, 3.0) * ball.radius();
      const Vector p = ball.project(x);
      bool good = ball.contains(p) && (ball.project(p) - p).norm() <= 1e-12;
      const double dist = (x - p).norm();
      for (int k = 0; k < 200 && good; ++k)
        good = dist <= (x - in_ball(n, ball.radius(), rng)).norm() + 1e-12;
      if (!good) ++fails;
    }
    report("ball projection", fails);
  }

  {
    long fails = 0;
    for (int c = 0; c < cases; ++c) {
      Rng rng(300000 + static_cast<std::uint64_t>(c));
      const int H = uniform_int(rng, 1, 4), du = uniform_int(rng, 1, 3), dx = uniform_int(rng, 1, 4);
      const double kB = uniform(rng, 0.5, 2.0), kappa = uniform(rng, 1.0, 1.5), gamma = uniform(rng, 0.05, 0.5);
      const DacFeasibleSet set(H, kB, kappa, gamma);
      const DacParams M = DacParams::from_stacked(
          H, gaussian_matrix(H * du, dx, rng) * uniform(rng, 0.0, 3.0) * kB * std::pow(kappa, 3));
      const DacParams P = project_to_dac_set(M, set);
      bool good = set.contains(P) &&
                  (project_to_dac_set(P, set).stacked() - P.stacked()).norm() <= 1e-10;
      for (int i = 1; i <= H && good; ++i)
        good = spectral_norm(P.block(i)) <= kB * std::pow(kappa, 3) * std::pow(1.0 - gamma, i) * (1.0 + 1e-9);
      const double dist = (M.stacked() - P.stacked()).norm();
      for (int k = 0; k < 100 && good; ++k) {
        const DacParams Z = random_feasible(H, du, dx, kB * std::pow(kappa, 3), gamma, rng);
        good = dist <= (M.stacked() - Z.stacked()).norm() + 1e-10;
      }
      if (!good) ++fails;
    }
    report("DAC projection", fails);
  }

  {
    long fails = 0;
    for (int c = 0; c < cases; ++c) {
      Rng rng(400000 + static_cast<std::uint64_t>(c));
      ScreamConfig sc;
      sc.horizon = uniform_int(rng, 10, 200);
      sc.dimension = uniform_int(rng, 1, 6);
      sc.diameter = uniform(rng, 0.5, 4.0);
      sc.gradient_bound = uniform(rng, 0.5, 4.0);
      sc.lambda_override = uniform(rng, 0.0, 3.0);
      const MetaSpec spec = c % 2 == 0 ? scream_spec(sc) : ader_spec(sc);
      const DomainBall ball = sc.domain();
      const Projector project = [&](const Vector& v) { return ball.project(v); };
      ScreamState state = ScreamState::start(spec, Vector::Zero(sc.dimension));
      Vector w_prev = state.aggregate();
      Vector p_prev = state.weights;
      std::vector<Vector> e_prev = state.experts;
      for (int t = 0; t < 20; ++t) {
        const Vector g = in_ball(sc.dimension, sc.gradient_bound, rng);
        meta_expert_update(state, spec, g, project);
        const Vector w = state.aggregate();
        double expert_term = 0.0;
        for (std::size_t i = 0; i < state.experts.size(); ++i)
          expert_term += state.weights[static_cast<Eigen::Index>(i)] * (state.experts[i] - e_prev[i]).norm();
        const double bound = sc.diameter * (state.weights - p_prev).lpNorm<1>() + expert_term;
        if ((w - w_prev).norm() > bound + 1e-12) {
          ++fails;
          break;
        }
        w_prev = w;
        p_prev = state.weights;
        e_prev = state.experts;
      }
    }
    report("switching decomposition", fails);
  }

  {
    long fails = 0;
    for (int n = 1; n <= cases; ++n) {
      const Vector p = nonuniform_prior(n);
      bool good = std::abs(p.sum() - 1.0) <= 1e-12 && p.minCoeff() > 0.0;
      for (int i = 1; i < n && good; ++i) good = p[i] < p[i - 1];
      if (!good) ++fails;
    }
    report("prior", fails);
  }

  {
    long fails = 0;
    for (int c = 0; c < cases; ++c) {
      Rng rng(500000 + static_cast<std::uint64_t>(c));
      const int dim = uniform_int(rng, 1, 5);
      const int T = uniform_int(rng, 5, 30);
      std::vector<Vector> xs;
      std::vector<double> ys;
      for (int t = 0; t < T; ++t) {
        xs.push_back(in_ball(dim, 0.5, rng));
        ys.push_back(uniform(rng, -1.0, 1.0));
      }
      ScreamConfig sc;
      sc.horizon = T;
      sc.dimension = dim;
      sc.diameter = 2.0;
      sc.gradient_bound = 2.0;
      sc.lambda_override = uniform(rng, 0.0, 2.0);
      ComparatorSequence comps;
      comps.points.assign(static_cast<std::size_t>(T), Vector::Zero(dim));
      for (int alg = 0; alg < 3; ++alg) {
        long calls = 0;
        const LossStream stream = [&](int round) {
          MemoryLossOracle o = square_loss_oracle(xs[static_cast<std::size_t>(round - 1)],
                                                  ys[static_cast<std::size_t>(round - 1)], 2.0);
          const auto inner = o.unary_grad;
          o.unary_grad = [&calls, inner](const Vector& w) {
            ++calls;
            return inner(w);
          };
          return o;
        };
        if (alg == 0) run_scream(sc, stream, comps);
        if (alg == 1) run_ader(sc, stream, comps);
        if (alg == 2) run_ogd_memory(sc, stream, comps);
        if (calls != T) ++fails;
      }
    }
    report("OCO gradients per round", fails);
  }

  {
    long fails = 0;
    for (int c = 0; c < cases; ++c) {
      Rng rng(600000 + static_cast<std::uint64_t>(c));
      const ScenarioPreset preset = make_preset(c % 2 == 0 ? "scalar" : "stable3x2", c, 1.0);
      const int T = uniform_int(rng, 8, 30), H = uniform_int(rng, 1, 4);
      const ControlConfig config =
          make_control_config(preset.system, preset.controller, T, 4.0, 1.0, H);
      const TrackingTask task =
          piecewise_targets(preset.system.state_dim(), T, 2, 1.0, 0.1, static_cast<std::uint64_t>(c));
      long calls = 0;
      const CostStream base = task.stream();
      const CostStream costs = [&](int t) {
        ControlCost cost = base(t);
        const auto inner = cost.grad_x;
        cost.grad_x = [&calls, inner](const Vector& x, const Vector& u) {
          ++calls;
          return inner(x, u);
        };
        return cost;
      };
      std::unique_ptr<DacController> ctl;
      if (c % 3 == 2)
        ctl = std::make_unique<OgdController>(config, preset.system, 0.01);
      else
        ctl = std::make_unique<ScreamController>(config, preset.system);
      Plant plant(preset.system, preset.disturbances);
      run_controller(*ctl, plant, costs, T);
      if (calls != T - H || ctl->gradient_evaluations() != T - H) ++fails;
    }
    report("control gradients per round", fails);
  }

  out.passed = ok;
  out.detail = std::to_string(cases) + " cases each: " + d.str();
  return out;
}

}  // namespace scream
