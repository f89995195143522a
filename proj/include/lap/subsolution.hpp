#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lap/grid.hpp"

namespace lap {

// Cell-centered field, value (i, j) at i*Nx + j.
struct CellField {
    Grid grid;
    std::vector<double> v;

    CellField() = default;
    explicit CellField(const Grid& g, double fill = 0.0)
        : grid(g), v(static_cast<size_t>(g.Nt) * g.Nx, fill) {}
    double& operator()(int i, int j) { return v[static_cast<size_t>(i) * grid.Nx + j]; }
    double operator()(int i, int j) const { return v[static_cast<size_t>(i) * grid.Nx + j]; }
};

void write_cell_field(std::ostream& os, const CellField& f);
CellField read_cell_field(std::istream& is);

struct SubsolutionFields {
    Grid grid;
    int n = 2;
    double e_tilde_value = 0;
    double tau = 0;
    std::vector<char> mask;
    CellField rho, m, e0, e1, sigma_nn, p, e_tilde;

    bool on_mask(int i, int j) const { return mask[static_cast<size_t>(i) * grid.Nx + j] != 0; }
};

// Throws DegenerateError if a mask cell has 1 - rho^2 <= 1e-12.
SubsolutionFields reconstruct(const ScalarField& u, double e_tilde_value, const Domain& dom, double tau);

// Largest eigenvalue of (m (x) m)/(1 - rho^2) - sigma for v = 0 and the diagonal sigma above.
double lambda_max_closed_form(double rho, double m, double sigma_nn, int n);

struct MembershipReport {
    double min_plus = 0;     // e0 + e1 - m^2/(n(rho+1)^2)
    double min_minus = 0;    // e0 - e1 - m^2/(n(rho-1)^2)
    double min_lambda = 0;   // e0 + rho e1 - lambda_max
    int mask_cells = 0;
    int mask_violations = 0;
    int off_mask_violations = 0;
    double min_margin() const;
};

MembershipReport verify_membership(const SubsolutionFields& sf, const Domain& dom);

struct ContinuityResidual {
    std::vector<double> residuals;  // one per test function
    double max_residual = 0;
};

ContinuityResidual continuity_residual(const SubsolutionFields& sf, const ScalarField& u, const Domain& dom);

struct AdmissibilityReport {
    std::vector<double> margins;  // one per cell layer
    double min_interior = 0;
};

AdmissibilityReport admissibility(const SubsolutionFields& sf, const Domain& dom);

struct TwoPhaseFlow {
    Grid grid;
    CellField mu_plus, mu_minus, v_plus, v_minus;
};

TwoPhaseFlow to_two_phase(const CellField& rho, const CellField& m, const Domain& dom, double tol = 1e-12);
std::pair<CellField, CellField> from_two_phase(const TwoPhaseFlow& tp, const Domain& dom);
double two_phase_action(const TwoPhaseFlow& tp, const Domain& dom);
// int int m^2/(2(1-rho^2)) - rho gA x2 by the same cell quadrature.
double stream_action(const CellField& rho, const CellField& m, const Domain& dom);

void save_subsolution(const std::string& dir, const SubsolutionFields& sf);

}  // namespace lap
