#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lap/config.hpp"

namespace lap {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNonConvergence = 2, kExitVerification = 3 };

struct CheckLine {
    std::string name;
    double value = 0;
    double bound = 0;
    bool pass = false;
    bool asserted = true;
};

std::string format_check(const CheckLine& c);

int cmd_solve(const RunConfig& cfg, const std::string& out, std::ostream& log);
int cmd_verify(const std::string& dir, std::ostream& log);
// Checks run on a solve directory; exposed for the verify command and tests.
std::vector<CheckLine> verify_checks(const std::string& dir);
int cmd_sweep_T(const RunConfig& cfg, const std::vector<double>& Ts, int threads, const std::string& out,
                std::ostream& log);
int cmd_check_potential(const RunConfig& cfg, const std::string& out, std::ostream& log);
int cmd_oracle(const RunConfig& cfg, const std::string& out, std::ostream& log);

}  // namespace lap
