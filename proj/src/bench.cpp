#include "scream/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

namespace scream {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ContractViolation("not a boolean: " + v);
}

Vector uniform_in_ball(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v * (radius * std::pow(unit(rng), 1.0 / dim) / v.norm());
}

std::string alpha_tag(double alpha) {
  std::string s = format_double(alpha);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

/// Runs jobs 0..n-1 on `workers` threads; job i writes only slot i.
template <typename Job>
void parallel_for(int n, int workers, Job job) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int i = next++; i < n; i = next++) job(i);
    });
  }
  for (std::thread& t : threads) t.join();
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : parse_string_list(text)) out.push_back(std::stod(item));
  return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "scenario") c.scenario = value;
  else if (key == "T") c.T = std::stol(value);
  else if (key == "d") c.d = std::stoi(value);
  else if (key == "period") c.period = std::stoi(value);
  else if (key == "Gamma") c.Gamma = std::stod(value);
  else if (key == "D") c.D = std::stod(value);
  else if (key == "G") c.G = std::stod(value);
  else if (key == "noise") c.noise = std::stod(value);
  else if (key == "feature_radius") c.feature_radius = std::stod(value);
  else if (key == "comparator_radius") c.comparator_radius = std::stod(value);
  else if (key == "seeds") {
    c.seeds.clear();
    for (const std::string& s : parse_string_list(value)) c.seeds.push_back(std::stoull(s));
  } else if (key == "algorithms") c.algorithms = parse_string_list(value);
  else if (key == "alphas") c.alphas = parse_double_list(value);
  else if (key == "preset") c.preset = value;
  else if (key == "control_T") c.control_T = std::stol(value);
  else if (key == "segments") c.segments = std::stoi(value);
  else if (key == "target_radius") c.target_radius = std::stod(value);
  else if (key == "rho") c.rho = std::stod(value);
  else if (key == "lambda_multiplier") c.lambda_multiplier = std::stod(value);
  else if (key == "H") {
    const int h = std::stoi(value);
    c.H = h > 0 ? std::optional<int>(h) : std::nullopt;
  } else if (key == "sysid_preset") c.sysid_preset = value;
  else if (key == "T0_grid") {
    c.T0_grid.clear();
    for (const std::string& s : parse_string_list(value)) c.T0_grid.push_back(std::stol(s));
  } else if (key == "sysid_seeds") c.sysid_seeds = std::stoi(value);
  else if (key == "k") c.k = std::stoi(value);
  else if (key == "output_dir" || key == "out") c.output_dir = value;
  else if (key == "per_round") c.per_round = parse_bool(value);
  else if (key == "timing") c.timing = parse_bool(value);
  else if (key == "workers") c.workers = std::stoi(value);
  else throw ContractViolation("unknown config key: " + key);
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ContractViolation("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::logic_error& e) {
      throw ContractViolation("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  try {
    return parse_config(read_text_file(path), std::move(base));
  } catch (const ContractViolation& e) {
    throw ContractViolation(path.string() + ": " + e.what());
  }
}

int worker_count_from_env(int fallback) {
  const char* env = std::getenv("SCREAM_BENCH_WORKERS");
  if (env == nullptr || *env == '\0') return fallback;
  try {
    return std::max(1, std::stoi(env));
  } catch (const std::exception&) {
    return fallback;
  }
}

LossStream RegressionStream::stream() const {
  auto features_ptr = std::make_shared<const std::vector<Vector>>(features);
  auto labels_ptr = std::make_shared<const std::vector<double>>(labels);
  const double g = gradient_bound;
  return [features_ptr, labels_ptr, g](int round) {
    const auto t = static_cast<std::size_t>(round - 1);
    return square_loss_oracle(features_ptr->at(t), labels_ptr->at(t), g);
  };
}

int RegressionStream::segment_jumps() const {
  int jumps = 0;
  for (std::size_t t = 1; t < comparators.points.size(); ++t) {
    if (comparators.points[t] != comparators.points[t - 1]) ++jumps;
  }
  return jumps;
}

RegressionStream gen_piecewise_regression(const ExperimentConfig& config, std::uint64_t seed) {
  SCREAM_REQUIRE(config.T >= 1 && config.d >= 1 && config.period >= 1, "invalid regression config");
  SCREAM_REQUIRE(config.feature_radius <= config.Gamma + 1e-12, "features must respect Gamma");
  SCREAM_REQUIRE(config.comparator_radius <= 0.5 * config.D + 1e-12,
                 "comparators must lie in the decision ball");
  std::mt19937_64 rng(seed);
  RegressionStream out;
  out.gradient_bound = config.G;
  const auto T = static_cast<std::size_t>(config.T);
  out.features.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    out.features.push_back(uniform_in_ball(rng, config.d, config.feature_radius));
  }
  const long segments = (config.T + config.period - 1) / config.period;
  std::vector<Vector> models;
  for (long s = 0; s < segments; ++s) {
    models.push_back(uniform_in_ball(rng, config.d, config.comparator_radius));
  }
  std::uniform_real_distribution<double> noise(0.0, config.noise);
  out.labels.reserve(T);
  out.comparators.points.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Vector& w = models[t / static_cast<std::size_t>(config.period)];
    out.comparators.points.push_back(w);
    const double eps = config.noise > 0.0 ? noise(rng) : 0.0;
    out.labels.push_back(out.features[t].dot(w) + eps);
  }
  return out;
}

ScreamConfig regression_scream_config(const ExperimentConfig& config, double alpha) {
  ScreamConfig sc;
  sc.horizon = config.T;
  sc.dimension = config.d;
  sc.memory = 0;
  sc.gradient_bound = config.G;
  sc.diameter = config.D;
  sc.lambda_override = alpha * config.G;
  return sc;
}

double median(std::vector<double> values) {
  SCREAM_REQUIRE(!values.empty(), "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  SCREAM_REQUIRE(x.size() == y.size() && x.size() >= 2, "need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& input) {
  std::vector<ResultRow> rows = input;
  sort_rows(rows);
  std::vector<SummaryRow> out;
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    std::vector<double> overall, cumulative, switching, regret;
    while (j < rows.size() && rows[j].scenario == rows[i].scenario &&
           rows[j].algorithm == rows[i].algorithm && rows[j].alpha == rows[i].alpha) {
      overall.push_back(rows[j].overall_loss);
      cumulative.push_back(rows[j].cumulative_loss);
      switching.push_back(rows[j].switching_cost);
      regret.push_back(rows[j].dynamic_regret);
      ++j;
    }
    SummaryRow s;
    s.scenario = rows[i].scenario;
    s.algorithm = rows[i].algorithm;
    s.alpha = rows[i].alpha;
    s.runs = static_cast<int>(j - i);
    stats(overall, s.overall_mean, s.overall_std);
    stats(cumulative, s.cumulative_mean, s.cumulative_std);
    stats(switching, s.switching_mean, s.switching_std);
    stats(regret, s.regret_mean, s.regret_std);
    out.push_back(s);
    i = j;
  }
  return out;
}

std::string summary_csv_string(const std::vector<SummaryRow>& summary) {
  std::string out =
      "scenario,algorithm,alpha,runs,overall_mean,overall_std,cumulative_mean,cumulative_std,"
      "switching_mean,switching_std,regret_mean,regret_std\n";
  for (const SummaryRow& s : summary) {
    out += s.scenario + "," + s.algorithm + "," + format_double(s.alpha) + "," +
           std::to_string(s.runs) + "," + format_double(s.overall_mean) + "," +
           format_double(s.overall_std) + "," + format_double(s.cumulative_mean) + "," +
           format_double(s.cumulative_std) + "," + format_double(s.switching_mean) + "," +
           format_double(s.switching_std) + "," + format_double(s.regret_mean) + "," +
           format_double(s.regret_std) + "\n";
  }
  return out;
}

const SummaryRow* find_summary(const std::vector<SummaryRow>& summary, const std::string& algorithm,
                               double alpha) {
  for (const SummaryRow& s : summary) {
    if (s.algorithm == algorithm && std::abs(s.alpha - alpha) < 1e-12) return &s;
  }
  return nullptr;
}

namespace {

std::string per_round_csv(const OnlineRun& run) {
  std::string out = "t,decision_norm,loss,switching_cost";
  const bool weights = !run.weights.empty();
  if (weights) {
    for (Eigen::Index i = 0; i < run.weights.front().size(); ++i) {
      out += ",p" + std::to_string(i + 1);
    }
  }
  out += "\n";
  for (std::size_t t = 0; t < run.decisions.size(); ++t) {
    out += std::to_string(t + 1) + "," + format_double(run.decisions[t].norm()) + "," +
           format_double(run.losses[t]) + "," + format_double(run.switching[t]);
    if (weights) {
      for (Eigen::Index i = 0; i < run.weights[t].size(); ++i) {
        out += "," + format_double(run.weights[t][i]);
      }
    }
    out += "\n";
  }
  return out;
}

std::string control_round_csv(const ControlRun& run) {
  std::string out = "t,cost,state_norm,action_norm,disturbance_norm,param_norm,meta_entropy\n";
  for (std::size_t t = 0; t < run.costs.size(); ++t) {
    out += std::to_string(t) + "," + format_double(run.costs[t]) + "," +
           format_double(run.states[t].norm()) + "," + format_double(run.actions[t].norm()) + "," +
           format_double(run.disturbances[t].norm()) + "," +
           format_double(run.params[t].frobenius()) + "," +
           format_double(t < run.entropy.size() ? run.entropy[t] : 0.0) + "\n";
  }
  return out;
}

OnlineRun run_regression_cell(const std::string& algorithm, const ScreamConfig& sc,
                              const RegressionStream& data, bool record_weights) {
  RunOptions options;
  options.record_weights = record_weights;
  const LossStream stream = data.stream();
  if (algorithm == "scream") return run_scream(sc, stream, data.comparators, options);
  if (algorithm == "ader") return run_ader(sc, stream, data.comparators, options);
  if (algorithm == "ogd") return run_ogd_memory(sc, stream, data.comparators, std::nullopt, options);
  throw ContractViolation("unknown algorithm: " + algorithm);
}

}  // namespace

BenchmarkResult run_oco_benchmark(const ExperimentConfig& config, bool write) {
  std::vector<RegressionStream> data;
  for (std::uint64_t seed : config.seeds) data.push_back(gen_piecewise_regression(config, seed));

  struct Cell {
    std::string algorithm;
    double alpha;
    std::size_t seed_index;
  };
  std::vector<Cell> cells;
  for (double alpha : config.alphas)
    for (const std::string& alg : config.algorithms)
      for (std::size_t s = 0; s < config.seeds.size(); ++s) cells.push_back({alg, alpha, s});

  const int n = static_cast<int>(cells.size());
  std::vector<std::optional<ResultRow>> rows(static_cast<std::size_t>(n));
  std::vector<std::optional<MovementAudit>> audits(static_cast<std::size_t>(n));
  std::vector<std::optional<CellFailure>> failures(static_cast<std::size_t>(n));
  std::mutex io;

  parallel_for(n, config.workers, [&](int i) {
    const Cell& cell = cells[static_cast<std::size_t>(i)];
    const std::uint64_t seed = config.seeds[cell.seed_index];
    const std::string name = config.scenario + "/" + cell.algorithm + "/alpha=" +
                             format_double(cell.alpha) + "/seed=" + std::to_string(seed);
    try {
      const auto start = std::chrono::steady_clock::now();
      const ScreamConfig sc = regression_scream_config(config, cell.alpha);
      const RegressionStream& stream = data[cell.seed_index];
      const OnlineRun run =
          run_regression_cell(cell.algorithm, sc, stream, config.per_round && write);
      const auto stop = std::chrono::steady_clock::now();

      ResultRow row;
      row.scenario = config.scenario;
      row.algorithm = cell.algorithm;
      row.seed = static_cast<long>(seed);
      row.alpha = cell.alpha;
      row.cumulative_loss = run.report.cumulative_loss;
      row.switching_cost = run.report.switching_cost;
      row.overall_loss = row.cumulative_loss + row.switching_cost;
      row.dynamic_regret = row.overall_loss - run.report.comparator_loss;
      row.path_length = run.report.path_length;
      row.wall_time_ms =
          config.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
      rows[static_cast<std::size_t>(i)] = row;

      MovementAudit audit;
      audit.cell = name;
      audit.worst_hedge_excess = -INFINITY;
      for (std::size_t t = 0; t < run.weight_movement.size(); ++t) {
        audit.worst_hedge_excess = std::max(
            audit.worst_hedge_excess, run.weight_movement[t] - run.meta_rate * run.loss_sup[t]);
      }
      if (run.weight_movement.empty()) audit.worst_hedge_excess = 0.0;
      audit.ogd_switching = path_length(run.decisions);
      audit.ogd_bound = run.algorithm == "ogd" ? run.step_size * sc.gradient_bound * sc.horizon
                                               : INFINITY;
      audits[static_cast<std::size_t>(i)] = audit;

      if (write && config.per_round) {
        const std::string file = config.scenario + "_" + cell.algorithm + "_a" +
                                 alpha_tag(cell.alpha) + "_s" + std::to_string(seed) + ".csv";
        const std::string text = per_round_csv(run);
        std::lock_guard<std::mutex> lock(io);
        write_text_file(config.output_dir / "rounds" / file, text);
      }
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = CellFailure{name, e.what()};
    }
  });

  BenchmarkResult result;
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (rows[idx]) result.rows.push_back(*rows[idx]);
    if (audits[idx]) result.audits.push_back(*audits[idx]);
    if (failures[idx]) result.failures.push_back(*failures[idx]);
  }
  sort_rows(result.rows);
  result.summary = summarize(result.rows);
  if (write) {
    emit_csv(result.rows, kResultSchemaVersion, config.output_dir / "results.csv");
    write_text_file(config.output_dir / "summary.csv", summary_csv_string(result.summary));
    write_text_file(config.output_dir / "run_metadata.json", run_metadata_json(config, "oco-bench"));
  }
  return result;
}

TrackingInstance make_tracking_instance(const ExperimentConfig& config, long horizon,
                                        std::uint64_t seed) {
  TrackingInstance inst;
  inst.preset = make_preset(config.preset, seed, 1.0);
  const LinearSystem& sys = inst.preset.system;
  const StronglyStableController& ctl = inst.preset.controller;
  const int H = config.H.value_or(default_truncation(ctl.gamma, horizon));
  const double D = lipschitz_constants(sys, ctl, H, 1.0).D;
  inst.task = piecewise_targets(sys.state_dim(), horizon, config.segments, config.target_radius,
                                config.rho, seed + 7919);
  inst.config = make_control_config(sys, ctl, horizon, inst.task.cost_gradient(D),
                                    config.lambda_multiplier, H);
  return inst;
}

ControlOutcome run_tracking(const TrackingInstance& inst, const std::string& algorithm,
                            int segments, std::uint64_t) {
  const LinearSystem& sys = inst.preset.system;
  Plant plant(sys, inst.preset.disturbances);
  const CostStream costs = inst.task.stream();
  std::unique_ptr<DacController> controller;
  double ogd_step = 0.0;
  if (algorithm == "scream") {
    controller = std::make_unique<ScreamController>(inst.config, sys);
  } else if (algorithm == "ader") {
    MetaSpec spec;
    spec.pool = inst.config.pool.pool;
    spec.prior = uniform_prior(spec.pool.size());
    const double gd = inst.config.constants.G_f * inst.config.constants.D_f;
    spec.meta_rate = std::sqrt(8.0 * std::log(static_cast<double>(spec.pool.size())) /
                               (gd * gd * inst.config.horizon));
    spec.meta_lambda = 0.0;
    controller = std::make_unique<ScreamController>(inst.config, sys, spec);
  } else if (algorithm == "ogd") {
    const LipschitzConstants& c = inst.config.constants;
    ogd_step = std::sqrt(2.0 * c.D_f * c.D_f /
                         ((c.G_f * c.G_f + c.lambda * c.G_f) * inst.config.horizon));
    controller = std::make_unique<OgdController>(inst.config, sys, ogd_step);
  } else {
    throw ContractViolation("unknown control algorithm: " + algorithm);
  }
  ControlOutcome out;
  out.ogd_step = ogd_step;
  out.run = run_controller(*controller, plant, costs, inst.config.horizon);
  const ClosedLoop loop(sys, inst.preset.controller.K, inst.config.H);
  const std::vector<DacParams> comparators = segment_comparators(
      loop, inst.config.H, inst.config.feasible, out.run.disturbances, inst.task, segments);
  out.report =
      dynamic_policy_regret_control(out.run, sys, inst.preset.controller.K, comparators, costs);
  return out;
}

BenchmarkResult run_control_benchmark(const ExperimentConfig& config, bool write) {
  struct Cell {
    std::string algorithm;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const std::string& alg : config.algorithms)
    for (std::uint64_t seed : config.seeds) cells.push_back({alg, seed});
  const int n = static_cast<int>(cells.size());
  std::vector<std::optional<ResultRow>> rows(static_cast<std::size_t>(n));
  std::vector<std::optional<MovementAudit>> audits(static_cast<std::size_t>(n));
  std::vector<std::optional<CellFailure>> failures(static_cast<std::size_t>(n));
  std::mutex io;

  parallel_for(n, config.workers, [&](int i) {
    const Cell& cell = cells[static_cast<std::size_t>(i)];
    const std::string name = config.preset + "/" + cell.algorithm + "/seed=" + std::to_string(cell.seed);
    try {
      const auto start = std::chrono::steady_clock::now();
      const TrackingInstance inst = make_tracking_instance(config, config.control_T, cell.seed);
      const ControlOutcome out = run_tracking(inst, cell.algorithm, config.segments, cell.seed);
      const auto stop = std::chrono::steady_clock::now();
      ResultRow row;
      row.scenario = config.preset;
      row.algorithm = cell.algorithm;
      row.seed = static_cast<long>(cell.seed);
      row.alpha = config.lambda_multiplier;
      row.cumulative_loss = out.report.cumulative_loss;
      row.switching_cost = 0.0;
      row.overall_loss = row.cumulative_loss;
      row.dynamic_regret = out.report.dynamic_policy_regret;
      row.path_length = out.report.path_length;
      row.wall_time_ms =
          config.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
      rows[static_cast<std::size_t>(i)] = row;

      MovementAudit audit;
      audit.cell = name;
      for (std::size_t t = 0; t < out.run.weight_movement.size(); ++t) {
        audit.worst_hedge_excess = std::max(
            audit.worst_hedge_excess, out.run.weight_movement[t] - out.run.meta_rate * out.run.loss_sup[t]);
      }
      audit.ogd_switching = dac_path_length(out.run.params);
      audit.ogd_bound = cell.algorithm == "ogd"
                            ? out.ogd_step * inst.config.constants.G_f * config.control_T
                            : INFINITY;
      audits[static_cast<std::size_t>(i)] = audit;

      if (write && config.per_round) {
        const std::string file =
            config.preset + "_" + cell.algorithm + "_s" + std::to_string(cell.seed) + ".csv";
        const std::string text = control_round_csv(out.run);
        std::lock_guard<std::mutex> lock(io);
        write_text_file(config.output_dir / "rounds" / file, text);
      }
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = CellFailure{name, e.what()};
    }
  });

  BenchmarkResult result;
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (rows[idx]) result.rows.push_back(*rows[idx]);
    if (audits[idx]) result.audits.push_back(*audits[idx]);
    if (failures[idx]) result.failures.push_back(*failures[idx]);
  }
  sort_rows(result.rows);
  result.summary = summarize(result.rows);
  if (write) {
    emit_csv(result.rows, kResultSchemaVersion, config.output_dir / "results.csv");
    write_text_file(config.output_dir / "summary.csv", summary_csv_string(result.summary));
    write_text_file(config.output_dir / "run_metadata.json",
                    run_metadata_json(config, "control-bench"));
  }
  return result;
}

IdentificationStudy run_identification_study(const ExperimentConfig& config) {
  const ScenarioPreset base = make_preset(config.sysid_preset, 0, 1.0);
  const LinearSystem& sys = base.system;
  const Matrix& K = base.controller.K;
  IdentificationStudy study;
  study.k = config.k > 0 ? config.k : controllability_index(sys.A, sys.B, K);
  const Matrix a_k = sys.A - sys.B * K;

  std::vector<double> grid, medians;
  for (long T0 : config.T0_grid) {
    IdentificationPoint point;
    point.T0 = T0;
    for (int s = 0; s < config.sysid_seeds; ++s) {
      const std::uint64_t seed = 1000003ULL * static_cast<std::uint64_t>(s) + 17;
      const ScenarioPreset preset = make_preset(config.sysid_preset, 0, 1.0, seed);
      Plant plant(preset.system, preset.disturbances);
      IdentificationConfig id;
      id.T0 = T0;
      id.k = study.k;
      id.K = K;
      const IdentifiedSystem est = identify_system(plant, id, seed + 1);
      point.errors_A.push_back((est.A_hat - sys.A).norm());
      point.errors_B.push_back((est.B_hat - sys.B).norm());
      std::vector<double> moments;
      Matrix power_b = sys.B;
      for (const Matrix& n : est.moments.N) {
        moments.push_back((n - power_b).norm());
        power_b = a_k * power_b;
      }
      point.moment_errors.push_back(moments);
    }
    point.median_A = median(point.errors_A);
    point.median_B = median(point.errors_B);
    grid.push_back(static_cast<double>(T0));
    medians.push_back(point.median_A);
    study.points.push_back(std::move(point));
  }
  if (grid.size() >= 2) study.slope = loglog_slope(grid, medians);
  return study;
}

std::string identification_report_json(const IdentificationStudy& study) {
  nlohmann::ordered_json j;
  j["k"] = study.k;
  j["loglog_slope"] = study.slope;
  j["points"] = nlohmann::ordered_json::array();
  for (const IdentificationPoint& p : study.points) {
    nlohmann::ordered_json e;
    e["T0"] = p.T0;
    e["median_error_A_fro"] = p.median_A;
    e["median_error_B_fro"] = p.median_B;
    e["error_A_fro"] = p.errors_A;
    e["error_B_fro"] = p.errors_B;
    e["moment_errors"] = p.moment_errors;
    j["points"].push_back(e);
  }
  return j.dump(2) + "\n";
}

double oco_regret_ratio(const ExperimentConfig& base, long T, int segments, double alpha,
                        std::uint64_t seed) {
  ExperimentConfig config = base;
  config.T = T;
  config.period = static_cast<int>(T / segments);
  const RegressionStream data = gen_piecewise_regression(config, seed);
  const OnlineRun run = run_scream(regression_scream_config(config, alpha), data.stream(),
                                   data.comparators);
  const double regret = run.overall_loss() - run.report.comparator_loss;
  return regret / std::sqrt(static_cast<double>(T) * (1.0 + run.report.path_length));
}

double control_regret_ratio(const ExperimentConfig& base, long T, int segments,
                            std::uint64_t seed) {
  ExperimentConfig config = base;
  config.segments = segments;
  const TrackingInstance inst = make_tracking_instance(config, T, seed);
  const ControlOutcome out = run_tracking(inst, "scream", segments, seed);
  return out.report.dynamic_policy_regret /
         std::sqrt(static_cast<double>(T) * (1.0 + out.report.path_length));
}

std::string run_metadata_json(const ExperimentConfig& c, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["schema_version"] = kResultSchemaVersion;
  j["scenario"] = c.scenario;
  j["T"] = c.T;
  j["d"] = c.d;
  j["period"] = c.period;
  j["Gamma"] = c.Gamma;
  j["D"] = c.D;
  j["G"] = c.G;
  j["noise"] = c.noise;
  j["feature_radius"] = c.feature_radius;
  j["comparator_radius"] = c.comparator_radius;
  j["seeds"] = c.seeds;
  j["algorithms"] = c.algorithms;
  j["alphas"] = c.alphas;
  if (command == "oco-bench") {
    nlohmann::ordered_json tuning = nlohmann::ordered_json::array();
    for (double alpha : c.alphas) {
      const ScreamConfig sc = regression_scream_config(c, alpha);
      nlohmann::ordered_json e;
      e["alpha"] = alpha;
      e["lambda"] = sc.lambda();
      e["step_sizes"] = sc.pool().steps;
      e["scream_meta_rate"] = sc.meta_rate();
      e["ader_meta_rate"] = ader_spec(sc).meta_rate;
      e["ogd_step"] = ogd_memory_step(sc);
      tuning.push_back(e);
    }
    j["tuning"] = tuning;
  }
  if (command == "control-bench") {
    j["preset"] = c.preset;
    j["control_T"] = c.control_T;
    j["segments"] = c.segments;
    j["rho"] = c.rho;
    j["target_radius"] = c.target_radius;
    j["lambda_multiplier"] = c.lambda_multiplier;
    const std::uint64_t seed = c.seeds.empty() ? 0 : c.seeds.front();
    const TrackingInstance inst = make_tracking_instance(c, c.control_T, seed);
    const LipschitzConstants& k = inst.config.constants;
    j["H"] = inst.config.H;
    j["kappa"] = inst.preset.controller.kappa;
    j["gamma"] = inst.preset.controller.gamma;
    j["G_c"] = inst.config.cost_gradient;
    j["constants"] = {{"tau", k.tau},     {"D", k.D},     {"L_f", k.L_f},
                      {"G_f", k.G_f},     {"D_f", k.D_f}, {"lambda_theory", k.lambda_theory},
                      {"lambda", k.lambda}};
    j["step_sizes"] = inst.config.pool.pool.steps;
    j["meta_rate"] = inst.config.pool.meta_rate;
  }
  if (command == "sysid-bench") {
    j["sysid_preset"] = c.sysid_preset;
    j["T0_grid"] = c.T0_grid;
    j["sysid_seeds"] = c.sysid_seeds;
  }
  j["per_round"] = c.per_round;
  j["timing"] = c.timing;
  return j.dump(2) + "\n";
}

}  // namespace scream
