#ifndef CSD_REPORT_HPP_
#define CSD_REPORT_HPP_

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csd/runner.hpp"
#include "csd/simbench.hpp"
#include "csd/tuning.hpp"

namespace csd {

// JSON layouts are documented in docs/report_schema.md.
nlohmann::json config_to_json(const TestConfig& config);
nlohmann::json tuning_to_json(const TuningInputs& t);
nlohmann::json outcome_to_json(const TestOutcome& outcome, const TestConfig& config);

struct NullTableRow {
  std::size_t q_y = 0;
  std::size_t q_x = 0;
  double alpha = 0.0;
  double c = 0.0;
  double achieved_level = 0.0;
  std::string method;
};

void write_nulltable_csv(std::ostream& out, const std::vector<NullTableRow>& rows);

void write_sim_csv_header(std::ostream& out);
void write_sim_csv_row(std::ostream& out, const SimResult& r);

// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::string& path);

}  // namespace csd

#endif  // CSD_REPORT_HPP_
