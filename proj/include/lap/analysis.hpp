#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lap/grid.hpp"
#include "lap/potential.hpp"
#include "lap/solver.hpp"

namespace lap {

// One entry per cell layer (i, i+1), evaluated at the layer center.
struct EnergyTrace {
    std::vector<double> x1, E_kin, E_pot, E_f, H, D;
    size_t size() const { return x1.size(); }
};

EnergyTrace energy_trace(const Problem& pb, const ScalarField& u, double eps);
void write_energy_csv(std::ostream& os, const EnergyTrace& tr);
EnergyTrace read_energy_csv(std::istream& is);

double first_integral_deviation(const EnergyTrace& tr);

struct DissipationReport {
    std::vector<double> rate;      // d/dx1 (E_kin + E_pot) between consecutive layers
    std::vector<double> expected;  // -int d_z f d_1 u, averaged over the two layers
    double max_rate = 0;           // largest positive excursion
    double max_abs_rate = 0;
    double max_mismatch = 0;
    double row_scale = 0;
};

DissipationReport dissipation_check(const EnergyTrace& tr);

struct MixingZone {
    int Nt = 0, Nx = 0;
    std::vector<char> mask;  // cell (i, j) at i*Nx + j
    std::vector<std::vector<std::pair<int, int>>> components;
    std::vector<int> holes;

    bool at(int i, int j) const { return mask[static_cast<size_t>(i) * Nx + j] != 0; }
    size_t count() const;
};

MixingZone mixing_zone(const ScalarField& u, double tau);
double default_mixing_threshold(double newton_tol);

struct TraceTable {
    std::vector<double> a, A1, C1;  // a from large to small
    std::vector<double> b, B1;
    bool A1_monotone = false, C1_monotone = false, B1_bound = false;
    double slack = 1e-4;
};

TraceTable trace_attainment(const ScalarField& u, double slack = 1e-4);

struct OscillationRow {
    double c1, c2, r, osc, ratio;
};

struct OscillationTable {
    std::vector<OscillationRow> rows;
    std::vector<std::string> notes;
    double max_ratio = 0;
    double grad_l2 = 0;
};

OscillationTable oscillation_modulus(const ScalarField& u, const std::vector<Vec2>& centers,
                                     const std::vector<double>& radii, double monotone_tol = 1e-6);

struct TRun {
    double T = 1;
    double action = 0;
    double kin_start = 0;  // first-layer kinetic energy
    double kin_end = 0;    // last-layer kinetic energy
};

struct KineticJumpRow {
    double T, c_start, c_end, bound;
    bool bound_ok, ends_agree;
};

std::vector<KineticJumpRow> kinetic_jump_vs_T(const std::vector<TRun>& runs, double tol = 1e-2);

}  // namespace lap
