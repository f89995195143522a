#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lap/grid.hpp"
#include "lap/potential.hpp"
#include "lap/solver.hpp"

namespace lap {

// Carries "source:line: message" for malformed input.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& source, int line, const std::string& msg);
    int line;
};

struct RunConfig {
    Domain domain;
    int Nt = 64, Nx = 64;
    double theta = 1.5, beta = 1.25;
    SolveConfig solver;
    std::string potential = "example";
    std::map<std::string, double> potential_overrides;  // g, A, L, shift
    double e_tilde = 1e-3;
    double mixing_tau = 0;  // 0 selects the default threshold
    bool energy_csv = true;
    std::vector<double> sweep_T = {1, 2, 4};
    int oracle_restarts = 20;
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    void validate() const;
    Grid grid() const { return Grid(domain, Nt, Nx); }
    PotentialSpec make_potential() const;
    Problem problem() const;
    double tau() const;
};

RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
// Writes every field; parse_config(write_config(c)) reproduces c.
void write_config(std::ostream& os, const RunConfig& c);

}  // namespace lap
