#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lap/grid.hpp"

namespace lap {

// V and its first three z-derivatives at one point.
struct PotJet {
    double v = 0, dz = 0, dz2 = 0, dz3 = 0;
};

using PotentialFn = std::function<PotJet(double x2, double z)>;

struct PotentialSpec {
    std::string name;
    double g = 1.0, A = 1.0, L = 1.0;
    PotentialFn base;       // V without the shift
    PotentialFn f;          // dissipation part, V = -gAz + f; empty when V has no such split
    double shift = 0.0;

    PotJet eval(double x2, double z) const {
        PotJet j = base(x2, z);
        j.v += shift;
        return j;
    }
    double V(double x2, double z) const { return eval(x2, z).v; }
    bool has_f() const { return static_cast<bool>(f); }
};

struct SVResult {
    double value = 0;
    std::vector<double> x2;
    std::vector<double> argmax;
};

SVResult compute_sV(const PotentialSpec& ps, const Domain& dom, int nq, int scan = 129);

PotentialSpec example_potential(const Domain& dom);
// The example without the dissipation term: V = -gAz, f = 0.
PotentialSpec gravity_potential(const Domain& dom);
PotentialSpec zero_potential(const Domain& dom);
PotentialSpec polynomial_potential(const std::string& name, std::vector<double> coeffs, const Domain& dom);

// Potential by name: example, gravity, zero. Overrides may hold g, A, L, shift.
PotentialSpec make_potential(const std::string& name, Domain dom, const std::map<std::string, double>& overrides);

// Sets the shift so that s_V = 0.
void normalize_shift(PotentialSpec& ps, const Domain& dom, int nq = 3072);

struct ConditionResult {
    std::string name;
    bool pass = false;
    std::string quote;
    std::string witness;
    double value = 0;
};

struct ConditionReport {
    std::vector<ConditionResult> items;
    bool all_pass() const;
    const ConditionResult& get(const std::string& name) const;
};

ConditionReport check_conditions(const PotentialSpec& ps, const Domain& dom);

}  // namespace lap
