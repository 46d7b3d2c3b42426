#include "csd/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csd/csv_io.hpp"
#include "csd/errors.hpp"
#include "csd/nulldist.hpp"
#include "csd/refined.hpp"
#include "csd/report.hpp"
#include "csd/runner.hpp"
#include "csd/simbench.hpp"
#include "csd/tuning.hpp"
#include "csd/version.hpp"

namespace csd {

namespace {

using nlohmann::json;

std::uint64_t default_seed() {
  if (const char* s = std::getenv("CSD_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw InvalidParameterError(std::string("CSD_SEED is not an unsigned integer: '") + s + "'");
    }
  }
  return 1;
}

// "10,20,30", "1-8" or a mix of both.
std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoul(item));
      } else {
        const std::size_t a = std::stoul(item.substr(0, dash));
        const std::size_t b = std::stoul(item.substr(dash + 1));
        if (b < a) throw InvalidParameterError("empty range '" + item + "'");
        for (std::size_t v = a; v <= b; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw InvalidParameterError("cannot read '" + item + "' as a size or range");
    }
  }
  if (out.empty()) throw InvalidParameterError("empty size list '" + text + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw InvalidParameterError("cannot read '" + item + "' as a number");
    }
  }
  if (out.empty()) throw InvalidParameterError("empty number list '" + text + "'");
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Output {
  std::string out_path;
  std::string manifest_path;
};

class Emitter {
 public:
  Emitter(std::ostream& fallback, const Output& o) : fallback_(fallback), o_(o) {}

  void write(const std::string& text) {
    if (o_.out_path.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream f(o_.out_path, std::ios::binary);
    if (!f) throw InvalidParameterError("cannot write '" + o_.out_path + "'");
    f << text;
  }

  void manifest(json m) {
    std::string path = o_.manifest_path;
    if (path.empty() && !o_.out_path.empty()) path = o_.out_path + ".manifest.json";
    if (path.empty()) return;
    m["output"] = o_.out_path.empty() ? json(nullptr) : json(o_.out_path);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidParameterError("cannot write manifest '" + path + "'");
    f << m.dump(2) << '\n';
  }

 private:
  std::ostream& fallback_;
  const Output& o_;
};

json base_manifest(const std::string& sub, int argc, const char* const* argv) {
  json m;
  m["tool"] = "csd";
  m["version"] = kVersion;
  m["subcommand"] = sub;
  m["argv"] = json::array();
  for (int i = 0; i < argc; ++i) m["argv"].push_back(argv[i]);
  m["created_utc"] = utc_now();
  m["inputs"] = json::array();
  return m;
}

void add_input(json& m, const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  const auto size = in ? static_cast<long long>(in.tellg()) : -1;
  m["inputs"].push_back({{"path", path}, {"bytes", size}, {"fnv1a64", file_checksum(path)}});
}

// Options shared by `test` and `tune`.
struct DataOptions {
  std::string data;
  std::vector<double> targets;
  std::optional<double> cutoff;
  std::string y_side = "below";
  double rho_clamp = 0.99;
  std::size_t q_min = 2;
  std::optional<std::size_t> q_max;
};

void add_data_options(CLI::App* sub, DataOptions& d) {
  sub->add_option("data", d.data, "CSV file (header: group,w,z; or w,z with --cutoff)")
      ->required();
  sub->add_option("--target", d.targets, "target covariate value (repeatable)");
  sub->add_option("--cutoff", d.cutoff, "RDD cutoff; the file then has no group column");
  sub->add_option("--y-side", d.y_side, "RDD side feeding Y: below (z <= cutoff) or above")
      ->check(CLI::IsMember({"below", "above"}));
  sub->add_option("--rho-clamp", d.rho_clamp, "clamp for |corr(w, z)| in the tuning rule");
  sub->add_option("--q-min", d.q_min, "smallest q the tuning rule may return");
  sub->add_option("--q-max", d.q_max, "largest q the tuning rule may return");
}

void apply_data_options(const DataOptions& d, TestConfig& cfg) {
  for (double t : d.targets) cfg.targets.push_back({t});
  cfg.rdd_cutoff = d.cutoff;
  cfg.rdd_orientation = d.y_side == "above" ? RddOrientation::kYAbove : RddOrientation::kYAtOrBelow;
  cfg.tuning.rho_clamp = d.rho_clamp;
  cfg.tuning.q_min = d.q_min;
  cfg.tuning.q_max = d.q_max;
  if (!cfg.rdd_cutoff && cfg.targets.empty()) {
    throw InvalidParameterError("give at least one --target (or --cutoff in RDD mode)");
  }
}

struct RefinedOptions {
  std::optional<std::size_t> r;
  bool estimate_r = false;
  std::size_t grid = 0;
  std::size_t iterations = 50;
  std::size_t budget = 2000;
};

void add_refined_options(CLI::App* sub, RefinedOptions& o) {
  sub->add_option("--refined-r", o.r, "use the refined critical value for r support points");
  sub->add_flag("--estimate-r", o.estimate_r,
                "refined critical value with r = distinct values in the effective sample");
  sub->add_option("--grid", o.grid, "grid points per coordinate (0 = automatic)");
  sub->add_option("--refine-iters", o.iterations, "local refinement rounds");
  sub->add_option("--grid-budget", o.budget, "largest number of grid tuples when automatic");
}

std::optional<RefinedSpec> refined_spec(const RefinedOptions& o) {
  if (!o.r && !o.estimate_r) return std::nullopt;
  RefinedSpec s;
  s.r = o.r.value_or(1);
  s.grid_resolution = o.grid;
  s.refinement_iterations = o.iterations;
  s.max_grid_tuples = o.budget;
  return s;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tests of conditional stochastic dominance at target covariate values", "csd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Output output;
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", output.out_path, "write the report here instead of stdout");
    sub->add_option("--manifest", output.manifest_path,
                    "run manifest path (default <out>.manifest.json when --out is set)");
  };

  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t workers = 0;

  // test
  auto* test = app.add_subcommand("test", "run the dominance test on a data file");
  DataOptions test_data;
  add_data_options(test, test_data);
  double test_alpha = 0.05;
  std::string test_stat = "ks";
  std::vector<std::size_t> test_qy, test_qx;
  std::string test_method = "auto";
  std::uint64_t test_draws = 1'000'000;
  RefinedOptions test_refined;
  test->add_option("--alpha", test_alpha, "overall level");
  test->add_option("--statistic", test_stat, "ks, cvm or ad")
      ->check(CLI::IsMember({"ks", "cvm", "ad"}));
  test->add_option("--qy", test_qy, "manual q_y (one, or one per target)");
  test->add_option("--qx", test_qx, "manual q_x (one, or one per target)");
  test->add_option("--cv-method", test_method, "auto, exact or mc")
      ->check(CLI::IsMember({"auto", "exact", "mc"}));
  test->add_option("--draws", test_draws, "Monte Carlo draws for the null distribution");
  test->add_option("--seed", seed, "Monte Carlo seed (default $CSD_SEED or 1)");
  test->add_option("--workers", workers, "threads (0 = all cores)");
  add_refined_options(test, test_refined);
  add_output(test);

  // tune
  auto* tune = app.add_subcommand("tune", "print the rule-of-thumb q_y, q_x and moments");
  DataOptions tune_data;
  add_data_options(tune, tune_data);
  add_output(tune);

  // cv
  auto* cv = app.add_subcommand("cv", "critical value for given q_y, q_x");
  std::size_t cv_qy = 0, cv_qx = 0;
  double cv_alpha = 0.05;
  std::string cv_method = "exact";
  std::uint64_t cv_draws = 1'000'000;
  RefinedOptions cv_refined;
  cv->add_option("--qy", cv_qy, "Y effective sample size")->required();
  cv->add_option("--qx", cv_qx, "X effective sample size")->required();
  cv->add_option("--alpha", cv_alpha, "level");
  cv->add_option("--method", cv_method, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  cv->add_option("--draws", cv_draws, "Monte Carlo draws");
  cv->add_option("--seed", seed, "Monte Carlo seed (default $CSD_SEED or 1)");
  cv->add_option("--workers", workers, "threads (0 = all cores)");
  add_refined_options(cv, cv_refined);
  add_output(cv);

  // nulltable
  auto* table = app.add_subcommand("nulltable", "CSV table of critical values");
  std::string tab_qy, tab_qx, tab_alpha = "0.1,0.05,0.01";
  std::string tab_method = "exact";
  std::uint64_t tab_draws = 1'000'000;
  table->add_option("--qy", tab_qy, "q_y values, e.g. 10,20 or 1-8")->required();
  table->add_option("--qx", tab_qx, "q_x values, e.g. 10,20 or 1-8")->required();
  table->add_option("--alpha", tab_alpha, "comma-separated levels");
  table->add_option("--method", tab_method, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  table->add_option("--draws", tab_draws, "Monte Carlo draws");
  table->add_option("--seed", seed, "Monte Carlo seed (default $CSD_SEED or 1)");
  table->add_option("--workers", workers, "threads (0 = all cores)");
  add_output(table);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo rejection rates for a design");
  int sim_design = 1;
  std::string sim_case = "a";
  std::size_t sim_n = 1000;
  std::uint64_t sim_reps = 1000;
  double sim_alpha = 0.05;
  std::string sim_stat = "ks";
  bool sim_refined = false;
  std::optional<std::size_t> sim_r;
  sim->add_option("--design", sim_design, "design 1-7")->required();
  sim->add_option("--case", sim_case, "case a-d")->required();
  sim->add_option("--n", sim_n, "sample size");
  sim->add_option("--reps", sim_reps, "replications");
  sim->add_option("--alpha", sim_alpha, "level");
  sim->add_option("--seed", seed, "root seed (default $CSD_SEED or 1)");
  sim->add_option("--statistic", sim_stat, "ks, cvm or ad")
      ->check(CLI::IsMember({"ks", "cvm", "ad"}));
  sim->add_flag("--refined", sim_refined, "use the refined critical value (designs 6 and 7)");
  sim->add_option("--refined-r", sim_r, "support size for the refined critical value");
  sim->add_option("--workers", workers, "threads (0 = all cores)");
  add_output(sim);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    app.exit(e, err, err);
    return 2;
  }

  try {
    for (auto* o : app.get_subcommands()) {
      const CLI::Option* opt = o->get_option_no_throw("--seed");
      seed_given = seed_given || (opt != nullptr && opt->count() > 0);
    }
    if (!seed_given) seed = default_seed();
    Emitter emit(out, output);

    if (test->parsed() || tune->parsed()) {
      const bool is_test = test->parsed();
      const DataOptions& d = is_test ? test_data : tune_data;
      json manifest = base_manifest(is_test ? "test" : "tune", argc, argv);
      add_input(manifest, d.data);
      TestConfig cfg;
      apply_data_options(d, cfg);
      const bool rdd = cfg.rdd_cutoff.has_value();
      const ParsedData data = parse_csv_file(d.data, rdd);
      Sample ys = data.ysample;
      Sample xs = data.xsample;
      if (rdd) {
        const RddSplit s = rdd_split(data.pooled, *cfg.rdd_cutoff, cfg.rdd_orientation);
        ys = s.ysample;
        xs = s.xsample;
        if (cfg.targets.empty()) cfg.targets = {TargetPoint{*cfg.rdd_cutoff}};
        const TuningInputs pooled = estimate_moments(data.pooled, cfg.tuning.rho_clamp);
        cfg.z_moments = ZMoments{pooled.mu_z, pooled.sigma_z};
      }

      if (!is_test) {
        json j;
        j["tool"] = "csd";
        j["version"] = kVersion;
        TuningInputs ty = estimate_moments(ys, cfg.tuning.rho_clamp);
        TuningInputs tx = estimate_moments(xs, cfg.tuning.rho_clamp);
        if (cfg.z_moments) {
          ty.mu_z = tx.mu_z = cfg.z_moments->mu;
          ty.sigma_z = tx.sigma_z = cfg.z_moments->sigma;
        }
        j["moments_y"] = tuning_to_json(ty);
        j["moments_x"] = tuning_to_json(tx);
        j["targets"] = json::array();
        for (const auto& t : cfg.targets) {
          TuningBounds by = cfg.tuning;
          TuningBounds bx = cfg.tuning;
          by.q_max = std::min(by.q_max.value_or(ty.n), ty.n);
          bx.q_max = std::min(bx.q_max.value_or(tx.n), tx.n);
          j["targets"].push_back({{"target", t.z0},
                                  {"q_y", rule_of_thumb_q(ty, t.z0, by)},
                                  {"q_x", rule_of_thumb_q(tx, t.z0, bx)},
                                  {"q_y_raw", rule_of_thumb_raw(ty, t.z0, by.rho_clamp)},
                                  {"q_x_raw", rule_of_thumb_raw(tx, t.z0, bx.rho_clamp)}});
        }
        manifest["config"] = config_to_json(cfg);
        emit.write(j.dump(2) + "\n");
        emit.manifest(manifest);
        return 0;
      }

      cfg.alpha = test_alpha;
      cfg.statistic = parse_statistic_kind(test_stat);
      cfg.cv_method = parse_cv_method(test_method);
      cfg.mc_draws = test_draws;
      cfg.mc_seed = seed;
      cfg.workers = workers;
      cfg.refined = refined_spec(test_refined);
      cfg.estimate_refined_r = test_refined.estimate_r;
      if (!test_qy.empty() || !test_qx.empty()) {
        if (test_qy.size() != test_qx.size()) {
          throw InvalidParameterError("--qy and --qx must be given the same number of times");
        }
        cfg.q_mode = QMode::kManual;
        for (std::size_t i = 0; i < test_qy.size(); ++i) cfg.manual_q.push_back({test_qy[i], test_qx[i]});
      }
      const TestOutcome o = run_multi_target(ys, xs, cfg);
      TestOutcome shown = o;
      if (rdd) {
        shown.metadata["rdd_cutoff"] = format_double(*cfg.rdd_cutoff);
        shown.metadata["rdd_y_side"] = test_data.y_side;
      }
      manifest["config"] = config_to_json(cfg);
      manifest["seed"] = seed;
      emit.write(outcome_to_json(shown, cfg).dump(2) + "\n");
      emit.manifest(manifest);
      return 0;
    }

    if (cv->parsed()) {
      json manifest = base_manifest("cv", argc, argv);
      validate_alpha(cv_alpha);
      json j;
      j["q_y"] = cv_qy;
      j["q_x"] = cv_qx;
      j["alpha"] = cv_alpha;
      double c = 0.0;
      if (cv_method == "exact") {
        c = exact_critical_value(cv_qy, cv_qx, cv_alpha);
        j["achieved_level"] = exact_achieved_level(cv_qy, cv_qx, cv_alpha);
        j["method"] = "exact";
      } else {
        const NullDistribution nd = mc_null_cdf(cv_qy, cv_qx, cv_draws, seed, workers);
        c = critical_value(nd, cv_alpha);
        j["achieved_level"] = achieved_level(nd, cv_alpha);
        j["method"] = "monte_carlo";
        j["draws"] = cv_draws;
        j["seed"] = seed;
      }
      const double scale = std::sqrt(static_cast<double>(cv_qy) * static_cast<double>(cv_qx) /
                                     static_cast<double>(cv_qy + cv_qx));
      j["c"] = c;
      j["scaled_c"] = scale * c;
      j["limiting_c"] = limiting_critical_value(cv_alpha);
      if (const auto rs = refined_spec(cv_refined)) {
        const RefinedResult rr = refined_critical_value(cv_qy, cv_qx, cv_alpha, *rs);
        j["refined"] = {{"r", rs->r},
                        {"c", rr.critical_value},
                        {"lower_bound", rr.lower_bound},
                        {"upper_bound", rr.upper_bound},
                        {"worst_tuple", rr.worst_tuple},
                        {"worst_probability", rr.worst_probability},
                        {"grid_resolution", rr.grid_resolution},
                        {"warnings", rr.warnings}};
      }
      manifest["seed"] = seed;
      emit.write(j.dump(2) + "\n");
      emit.manifest(manifest);
      return 0;
    }

    if (table->parsed()) {
      json manifest = base_manifest("nulltable", argc, argv);
      const auto qys = parse_size_list(tab_qy);
      const auto qxs = parse_size_list(tab_qx);
      const auto alphas = parse_double_list(tab_alpha);
      std::vector<NullTableRow> rows;
      for (std::size_t qy : qys) {
        for (std::size_t qx : qxs) {
          std::optional<NullDistribution> nd;
          if (tab_method == "mc") nd = mc_null_cdf(qy, qx, tab_draws, seed, workers);
          for (double a : alphas) {
            NullTableRow r{qy, qx, a, 0.0, 0.0, tab_method == "mc" ? "monte_carlo" : "exact"};
            if (nd) {
              r.c = critical_value(*nd, a);
              r.achieved_level = achieved_level(*nd, a);
            } else {
              r.c = exact_critical_value(qy, qx, a);
              r.achieved_level = exact_achieved_level(qy, qx, a);
            }
            rows.push_back(r);
          }
        }
      }
      std::ostringstream os;
      write_nulltable_csv(os, rows);
      manifest["seed"] = seed;
      emit.write(os.str());
      emit.manifest(manifest);
      return 0;
    }

    if (sim->parsed()) {
      json manifest = base_manifest("simulate", argc, argv);
      const DesignSpec spec = parse_design(sim_design, sim_case, sim_n);
      SimOptions opt;
      opt.statistic = parse_statistic_kind(sim_stat);
      opt.refined = sim_refined || sim_r.has_value();
      opt.refined_r = sim_r;
      opt.workers = workers;
      const SimResult r = run_monte_carlo(spec, sim_alpha, sim_reps, seed, opt);
      std::ostringstream os;
      write_sim_csv_header(os);
      write_sim_csv_row(os, r);
      manifest["seed"] = seed;
      manifest["failures"] = r.failures;
      if (r.default_rejection_rate) manifest["default_rejection_rate"] = *r.default_rejection_rate;
      emit.write(os.str());
      emit.manifest(manifest);
      return 0;
    }
  } catch (const CsdError& e) {
    json j{{"error", {{"message", e.what()}}}};
    err << j.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    json j{{"error", {{"message", e.what()}}}};
    err << j.dump() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace csd
