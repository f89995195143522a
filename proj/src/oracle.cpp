#include <cmath>
#include <random>

#include "lap/solver.hpp"

namespace lap {

namespace {

// Coordinate descent on the nodal values, evaluating only the four cells
// around the active node.
class CoordinateOracle {
public:
    CoordinateOracle(const Problem& pb, double eps) : pb_(pb), model_(pb, eps) {}

    double local_action(const ScalarField& u, int i, int j) const {
        const Grid& g = u.grid();
        double s = 0;
        for (int ci = i - 1; ci <= i; ++ci)
            for (int cj = j - 1; cj <= j; ++cj)
                s += model_.kinetic(cell_gradient(u, ci, cj)).value - pb_.pot.V(g.x2c(cj), cell_value(u, ci, cj));
        return s * g.ht * g.hx;
    }

    double local_derivative(const ScalarField& u, int i, int j) const {
        const Grid& g = u.grid();
        double s = 0;
        for (int ci = i - 1; ci <= i; ++ci)
            for (int cj = j - 1; cj <= j; ++cj) {
                Jet k = model_.kinetic(cell_gradient(u, ci, cj));
                double s1 = ci == i ? -1.0 : 1.0, s2 = cj == j ? -1.0 : 1.0;
                s += k.grad[0] * s1 / (2 * g.ht) + k.grad[1] * s2 / (2 * g.hx) -
                     0.25 * pb_.pot.eval(g.x2c(cj), cell_value(u, ci, cj)).dz;
            }
        return s * g.ht * g.hx;
    }

    // Golden-section search on a bracket of the coordinate derivative's sign
    // change, finished by bisection on the derivative.
    void line_search(ScalarField& u, int i, int j) const {
        double x0 = u(i, j);
        auto d = [&](double x) {
            u(i, j) = x;
            return local_derivative(u, i, j);
        };
        auto a = [&](double x) {
            u(i, j) = x;
            return local_action(u, i, j);
        };
        double g0 = d(x0);
        if (g0 == 0) {
            u(i, j) = x0;
            return;
        }
        double dir = g0 > 0 ? -1.0 : 1.0;
        double step = 1e-3, lo = x0, hi = x0 + dir * step;
        while (d(hi) * dir < 0) {
            lo = hi;
            step *= 2;
            hi = x0 + dir * step;
        }
        if (lo > hi) std::swap(lo, hi);
        const double lo0 = lo, hi0 = hi;
        const double r = 0.6180339887498949;
        double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo), f1 = a(x1), f2 = a(x2);
        for (int it = 0; it < 40 && hi - lo > 1e-9 * (1 + std::abs(lo)); ++it) {
            if (f1 > f2) {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + r * (hi - lo); f2 = a(x2);
            } else {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - r * (hi - lo); f1 = a(x1);
            }
        }
        // Re-bracket the root of the derivative and bisect.
        if (d(lo) > 0 || d(hi) < 0) {
            lo = lo0;
            hi = hi0;
        }
        for (int it = 0; it < 200 && hi - lo > 0; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            double gm = d(mid);
            if (gm == 0) {
                lo = hi = mid;
                break;
            }
            (gm < 0 ? lo : hi) = mid;
        }
        u(i, j) = std::abs(d(lo)) < std::abs(d(hi)) ? lo : hi;
    }

    double stationarity(ScalarField& u) const {
        const Grid& g = u.grid();
        double m = 0;
        for (int i = 1; i < g.Nt; ++i)
            for (int j = 1; j < g.Nx; ++j) m = std::max(m, std::abs(local_derivative(u, i, j)));
        return m;
    }

    int descend(ScalarField& u, double tol, int max_sweeps) const {
        const Grid& g = u.grid();
        for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
            for (int i = 1; i < g.Nt; ++i)
                for (int j = 1; j < g.Nx; ++j) line_search(u, i, j);
            if (stationarity(u) <= tol) return sweep;
        }
        return max_sweeps;
    }

    const ActionModel& model() const { return model_; }

private:
    const Problem& pb_;
    ActionModel model_;
};

}  // namespace

OracleResult oracle_minimize(const Problem& pb, double eps, std::uint64_t seed, int restarts) {
    const Grid& g = pb.grid;
    if (g.interior_count() > 25) throw PreconditionError("oracle_minimize is limited to 25 interior nodes");
    CoordinateOracle oracle(pb, eps);
    ScalarField base = initial_guess(eps, pb.dom, g, pb.beta);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pert(-0.1, 0.1);
    OracleResult best;
    best.action = kInfinity;
    for (int r = 0; r < restarts; ++r) {
        ScalarField u = base;
        for (int i = 1; i < g.Nt; ++i)
            for (int j = 1; j < g.Nx; ++j) u(i, j) += pert(rng);
        best.sweeps = std::max(best.sweeps, oracle.descend(u, 1e-10, 200000));
        double A = oracle.model().action(u);
        best.restart_actions.push_back(A);
        if (A < best.action) {
            best.action = A;
            best.field = u;
        }
    }
    return best;
}

}  // namespace lap
