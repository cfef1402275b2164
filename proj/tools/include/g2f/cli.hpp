#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace g2f::cli {

inline constexpr int kSchemaVersion = 1;

enum class Profile { strict, fast };

/// One verified statement: a residual against a tolerance, a lower bound, or
/// a boolean flag.
struct CheckRecord {
  std::string name;
  std::string paper_ref;
  enum class Kind { residual, lower_bound, flag } kind = Kind::residual;
  double value = 0.0;
  double threshold = 0.0;
  bool flag = false;
  bool pass = false;
};

struct RunReport {
  std::string command;
  std::optional<std::uint64_t> seed;
  Profile profile = Profile::strict;
  std::vector<CheckRecord> checks;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  /// Rows for CSV output of sweeps; empty for non-sweep commands.
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;
  std::optional<double> wall_time_seconds;

  void residual(std::string name, std::string ref, double value, double tol);
  void lower_bound(std::string name, std::string ref, double value, double bound);
  void flag(std::string name, std::string ref, bool value, bool expected = true);
  bool all_pass() const;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Parses argv (without the program name), runs the command and writes the
/// report to `out` or to the --out file. Returns 0 when every check passes,
/// 1 on a failed check or runtime error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs a command and returns the rendered report text, for determinism
/// checks. The exit code is stored in `exit_code` when given.
std::string run_to_string(const std::vector<std::string>& args, int* exit_code = nullptr);

}  // namespace g2f::cli
