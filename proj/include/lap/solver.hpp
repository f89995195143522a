#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lap/grid.hpp"
#include "lap/integrand.hpp"
#include "lap/potential.hpp"

namespace lap {

struct SolveConfig {
    std::vector<double> eps_schedule = default_schedule();
    double newton_tol = 1e-9;
    int max_newton_iters = 200;
    double ls_shrink = 0.5;
    double ls_slope = 1e-4;
    double lm_shift0 = 0.0;

    static std::vector<double> default_schedule();
    void validate() const;
};

struct SolveRecord {
    double eps = 0;
    double action = 0;
    double grad_norm = 0;
    int iterations = 0;
    int line_search_steps = 0;
    double el_residual = 0;
    bool converged = false;
    std::vector<double> action_history;
};

struct SolveReport {
    std::vector<SolveRecord> records;
};

struct NonConvergence : std::runtime_error {
    NonConvergence(const std::string& what, ScalarField last, SolveRecord record)
        : std::runtime_error(what), last(std::move(last)), record(std::move(record)) {}
    ScalarField last;
    SolveRecord record;
};

using KineticFn = std::function<Jet(const Vec2&)>;

struct Problem {
    Domain dom;
    Grid grid;
    PotentialSpec pot;
    double theta = 1.5;
    double beta = 1.25;
    KineticFn kinetic;  // replaces F_hat when set

    Problem(const Domain& dom, const Grid& grid, PotentialSpec pot, double theta = 1.5, double beta = 1.25);
    RegularizationParams params(double eps) const { return {eps, theta, beta}; }
};

// Discrete action A_eps with derivatives in the interior nodal values.
// Interior node (i, j) has index (i-1)(Nx-1) + (j-1).
class ActionModel {
public:
    ActionModel(const Problem& pb, double eps);

    double eps() const { return eps_; }
    Jet kinetic(const Vec2& p) const;
    double kinetic_value(const Vec2& p) const;

    double action(const ScalarField& u) const;
    Eigen::VectorXd gradient(const ScalarField& u) const;
    Eigen::SparseMatrix<double> hessian(const ScalarField& u) const;

    Eigen::VectorXd interior(const ScalarField& u) const;
    void set_interior(ScalarField& u, const Eigen::VectorXd& x) const;

private:
    const Problem& pb_;
    double eps_;
    std::optional<FastExtension> ext_;
};

double action(const Problem& pb, const ScalarField& u, double eps);
Eigen::VectorXd gradient(const Problem& pb, const ScalarField& u, double eps);
Eigen::SparseMatrix<double> hessian(const Problem& pb, const ScalarField& u, double eps);

ScalarField initial_guess(double eps, const Domain& dom, const Grid& grid, double beta);
// (2 x1/T - 1) U_eps(x2).
ScalarField linear_interpolant(double eps, const Domain& dom, const Grid& grid, double beta);

// Throws NonConvergence after max_newton_iters.
std::pair<ScalarField, SolveRecord> newton_solve(const Problem& pb, const ScalarField& u0, double eps,
                                                 const SolveConfig& cfg);

struct ContinuationResult {
    std::vector<double> eps;
    std::vector<ScalarField> fields;
    SolveReport report;
};

// On failure the partial result is available through the callback before the
// exception propagates.
ContinuationResult continuation_solve(const Problem& pb, const SolveConfig& cfg,
                                      const std::function<void(const ContinuationResult&)>& on_fail = {});

ScalarField el_residual(const Problem& pb, const ScalarField& u, double eps);

// Largest s in [0,1] such that Uhat_0 + s (u - Uhat_eps) has finite limit action.
ScalarField reinterpret_in_X(const Problem& pb, const ScalarField& u, double eps_u);
ScalarField recovery_sequence(const Problem& pb, const ScalarField& u, double eps);

struct OracleResult {
    ScalarField field;
    double action = 0;
    std::vector<double> restart_actions;
    int sweeps = 0;
};

OracleResult oracle_minimize(const Problem& pb, double eps, std::uint64_t seed = 1, int restarts = 20);

}  // namespace lap
