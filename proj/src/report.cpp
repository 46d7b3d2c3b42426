#include "csd/report.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "csd/csv_io.hpp"
#include "csd/errors.hpp"
#include "csd/version.hpp"

namespace csd {

nlohmann::json config_to_json(const TestConfig& c) {
  nlohmann::json j;
  j["alpha"] = c.alpha;
  j["targets"] = nlohmann::json::array();
  for (const auto& t : c.targets) j["targets"].push_back(t.z0);
  j["statistic"] = std::string(to_string(c.statistic));
  j["q_mode"] = c.q_mode == QMode::kAuto ? "auto" : "manual";
  j["manual_q"] = nlohmann::json::array();
  for (const auto& m : c.manual_q) j["manual_q"].push_back({{"q_y", m.q_y}, {"q_x", m.q_x}});
  j["cv_method"] = std::string(to_string(c.cv_method));
  j["mc_draws"] = c.mc_draws;
  j["mc_seed"] = c.mc_seed;
  j["auto_exact_limit"] = c.auto_exact_limit;
  if (c.refined) {
    j["refined"] = {{"r", c.refined->r},
                    {"grid_resolution", c.refined->grid_resolution},
                    {"refinement_iterations", c.refined->refinement_iterations},
                    {"max_grid_tuples", c.refined->max_grid_tuples},
                    {"estimate_r", c.estimate_refined_r}};
  } else {
    j["refined"] = nullptr;
  }
  if (c.rdd_cutoff) {
    j["rdd_cutoff"] = *c.rdd_cutoff;
    j["rdd_y_side"] = c.rdd_orientation == RddOrientation::kYAtOrBelow ? "below" : "above";
  } else {
    j["rdd_cutoff"] = nullptr;
  }
  j["tuning"] = {{"q_min", c.tuning.q_min},
                 {"q_max", c.tuning.q_max ? nlohmann::json(*c.tuning.q_max) : nlohmann::json(nullptr)},
                 {"rho_clamp", c.tuning.rho_clamp}};
  return j;
}

nlohmann::json tuning_to_json(const TuningInputs& t) {
  return {{"n", t.n}, {"mu_z", t.mu_z}, {"sigma_z", t.sigma_z}, {"rho", t.rho}};
}

nlohmann::json outcome_to_json(const TestOutcome& o, const TestConfig& config) {
  nlohmann::json j;
  j["tool"] = "csd";
  j["version"] = kVersion;
  j["config"] = config_to_json(config);
  j["per_target"] = nlohmann::json::array();
  for (const auto& r : o.per_target) {
    nlohmann::json t;
    t["target"] = r.target.z0;
    t["q_y"] = r.q_y;
    t["q_x"] = r.q_x;
    t["statistic"] = r.statistic_value;
    t["critical_value"] = r.critical_value;
    t["p_value"] = r.p_value;
    t["reject"] = r.reject;
    t["per_target_level"] = r.per_target_level;
    t["achieved_level"] = r.achieved_level;
    t["method"] = std::string(to_string(r.method));
    t["refined"] = r.refined;
    if (r.refined) {
      t["refined_r"] = r.refined_r;
      t["default_critical_value"] = r.default_critical_value;
    }
    t["tuning_y"] = r.tuning_y ? tuning_to_json(*r.tuning_y) : nlohmann::json(nullptr);
    t["tuning_x"] = r.tuning_x ? tuning_to_json(*r.tuning_x) : nlohmann::json(nullptr);
    t["warnings"] = r.warnings;
    j["per_target"].push_back(t);
  }
  j["overall_reject"] = o.overall_reject;
  j["warnings"] = o.warnings;
  j["metadata"] = o.metadata;
  return j;
}

void write_nulltable_csv(std::ostream& out, const std::vector<NullTableRow>& rows) {
  out << "q_y,q_x,alpha,c,achieved_level,method\n";
  for (const auto& r : rows) {
    out << r.q_y << ',' << r.q_x << ',' << format_double(r.alpha) << ',' << format_double(r.c)
        << ',' << format_double(r.achieved_level) << ',' << r.method << '\n';
  }
}

void write_sim_csv_header(std::ostream& out) {
  out << "design,case,n,alpha,reps,rejection_rate,se,mean_qy,mean_qx,seed\n";
}

void write_sim_csv_row(std::ostream& out, const SimResult& r) {
  out << r.spec.design << ',' << r.spec.case_id << ',' << r.spec.n << ','
      << format_double(r.alpha) << ',' << r.reps << ',' << format_double(r.rejection_rate)
      << ',' << format_double(r.se) << ',' << format_double(r.mean_q_y) << ','
      << format_double(r.mean_q_x) << ',' << r.seed << '\n';
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameterError("cannot open '" + path + "' for checksum");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace csd
