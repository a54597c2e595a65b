#pragma once

#include <iosfwd>
#include <string>

#include "nsslip/config.hpp"

namespace nsslip {

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitVerify = 2, kExitBlowUp = 3 };

struct CheckResult {
  std::string name;
  std::string status;  // PASS | FAIL | SKIPPED
  std::vector<std::pair<std::string, double>> metrics;
  std::string message;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

VerifyReport run_verify_suite(const ExperimentConfig& cfg, std::ostream& log);

// Runs one subcommand into cfg.output_dir and returns the process exit status.
int run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& log);

std::string version_string();

}  // namespace nsslip
