#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lap/solver.hpp"

namespace lap {

namespace {

bool limit_action_finite(const ScalarField& v) {
    const Grid& g = v.grid();
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j)
            if (std::isinf(F(cell_gradient(v, i, j)))) return false;
    return true;
}

ScalarField segment(const ScalarField& U0, const ScalarField& u, const ScalarField& Ue, double s) {
    ScalarField v = U0;
    for (size_t k = 0; k < v.values().size(); ++k) v.values()[k] += s * (u.values()[k] - Ue.values()[k]);
    return v;
}

// Bump-kernel quadrature on [-1,1].
void kernel_rule(int n, std::vector<double>& x, std::vector<double>& w) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(n);
    w.resize(n);
    double total = 0;
    for (int k = 0; k < n; ++k) {
        x[k] = es.eigenvalues()(k);
        w[k] = 2 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k) * std::exp(-1 / (1 - x[k] * x[k]));
        total += w[k];
    }
    for (double& v : w) v /= total;
}

}  // namespace

ScalarField reinterpret_in_X(const Problem& pb, const ScalarField& u, double eps_u) {
    const Grid& g = u.grid();
    ScalarField U0 = linear_interpolant(0, pb.dom, g, pb.beta);
    ScalarField Ue = linear_interpolant(eps_u, pb.dom, g, pb.beta);
    double smax = 1;
    if (!limit_action_finite(segment(U0, u, Ue, 1))) {
        double lo = 0, hi = 1;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (limit_action_finite(segment(U0, u, Ue, mid)) ? lo : hi) = mid;
        }
        smax = lo;
    }
    auto A = [&](double s) { return action(pb, segment(U0, u, Ue, s), 0.0); };
    const double r = 0.6180339887498949;
    double lo = 0, hi = smax;
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo), f1 = A(x1), f2 = A(x2);
    while (hi - lo > 1e-10) {
        if (f1 > f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + r * (hi - lo); f2 = A(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - r * (hi - lo); f1 = A(x1);
        }
    }
    double best = 0.5 * (lo + hi);
    if (A(smax) <= A(best)) best = smax;
    return segment(U0, u, Ue, best);
}

ScalarField recovery_sequence(const Problem& pb, const ScalarField& u, double eps) {
    RegularizationParams rp = pb.params(eps);
    rp.validate();
    if (!std::isfinite(action(pb, u, 0.0))) throw PreconditionError("recovery_sequence needs finite limit action");
    const Grid& g = u.grid();
    const double T = g.T, delta = eps, eta = std::pow(eps, pb.theta);
    if (!(2 * delta < T)) throw PreconditionError("eps too large for the time margins");

    auto U0 = [&](int j) { return boundary_profile(std::clamp(g.x2(j), -g.L, g.L), 0, pb.beta, pb.dom); };
    auto column = [&](double t, int j) {
        double s = std::clamp(t / g.ht, 0.0, static_cast<double>(g.Nt));
        int i = std::min(static_cast<int>(s), g.Nt - 1);
        double a = s - i;
        return (1 - a) * u(i, j) + a * u(i + 1, j);
    };
    auto capped = [&](double s, int j) {
        if (s < 0) return -(2 - std::cos(s)) * U0(j);
        if (s < delta) return -std::cos(s) * U0(j);
        if (s <= T - delta) return std::cos(delta) * column(T / (T - 2 * delta) * (s - delta), j);
        if (s <= T) return std::cos(T - s) * U0(j);
        return (2 - std::cos(T - s)) * U0(j);
    };

    std::vector<double> z, w;
    kernel_rule(32, z, w);
    ScalarField Ue = linear_interpolant(eps, pb.dom, g, pb.beta);
    ScalarField Uz = linear_interpolant(0, pb.dom, g, pb.beta);
    ScalarField out(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Nx; ++j) {
            double s = 0;
            for (size_t q = 0; q < z.size(); ++q) s += w[q] * capped(g.x1(i) - eta * z[q], j);
            out(i, j) = s + Ue(i, j) - Uz(i, j);
        }
    return impose_boundary(std::move(out), eps, pb.beta, pb.dom);
}

}  // namespace lap
