#include "lap/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace lap {

std::vector<double> SolveConfig::default_schedule() {
    std::vector<double> s;
    for (double e = 0.2; e > 1e-3 * (1 + 1e-12); e *= 0.5) s.push_back(e);
    s.push_back(1e-3);
    return s;
}

void SolveConfig::validate() const {
    if (eps_schedule.empty()) throw DomainError("eps_schedule is empty");
    for (size_t k = 0; k < eps_schedule.size(); ++k) {
        double e = eps_schedule[k];
        if (!(e > 0 && e < 1)) throw DomainError("eps_schedule entries must lie in (0,1)");
        if (k > 0 && !(e < eps_schedule[k - 1])) throw DomainError("eps_schedule must be strictly decreasing");
    }
    if (!(newton_tol > 0)) throw DomainError("newton_tol must be positive");
    if (max_newton_iters < 1) throw DomainError("max_newton_iters must be positive");
    if (!(ls_shrink > 0 && ls_shrink < 1)) throw DomainError("ls_shrink must lie in (0,1)");
    if (!(ls_slope > 0 && ls_slope < 0.5)) throw DomainError("ls_slope must lie in (0,1/2)");
    if (!(lm_shift0 >= 0)) throw DomainError("lm_shift0 must be non-negative");
}

Problem::Problem(const Domain& d, const Grid& g, PotentialSpec p, double th, double be)
    : dom(d), grid(g), pot(std::move(p)), theta(th), beta(be) {}

ActionModel::ActionModel(const Problem& pb, double eps) : pb_(pb), eps_(eps) {
    if (eps < 0) throw DomainError("eps must be non-negative");
    if (eps > 0 && !pb.kinetic) ext_.emplace(pb.params(eps));
}

Jet ActionModel::kinetic(const Vec2& p) const {
    if (pb_.kinetic) return pb_.kinetic(p);
    if (!ext_) throw DomainError("derivatives of the limit integrand are not available");
    return ext_->eval(p);
}

double ActionModel::kinetic_value(const Vec2& p) const {
    if (pb_.kinetic) return pb_.kinetic(p).value;
    if (!ext_) return F(p);
    return ext_->eval(p).value;
}

double ActionModel::action(const ScalarField& u) const {
    const Grid& g = u.grid();
    double sum = 0;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            double k = kinetic_value(cell_gradient(u, i, j));
            if (std::isinf(k)) return kInfinity;
            sum += k - pb_.pot.V(g.x2c(j), cell_value(u, i, j));
        }
    return sum * g.ht * g.hx;
}

namespace {

// Local derivative weights of (d1 u, d2 u, u_c) with respect to the four
// cell nodes (i,j), (i,j+1), (i+1,j), (i+1,j+1).
struct CellStencil {
    double d1[4], d2[4];
    int di[4] = {0, 0, 1, 1};
    int dj[4] = {0, 1, 0, 1};
    explicit CellStencil(const Grid& g) {
        const double a = 1 / (2 * g.ht), b = 1 / (2 * g.hx);
        const double s1[4] = {-1, -1, 1, 1}, s2[4] = {-1, 1, -1, 1};
        for (int k = 0; k < 4; ++k) {
            d1[k] = s1[k] * a;
            d2[k] = s2[k] * b;
        }
    }
};

double sup_abs(const ScalarField& f) {
    double m = 0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

int interior_index(const Grid& g, int i, int j) {
    if (i <= 0 || i >= g.Nt || j <= 0 || j >= g.Nx) return -1;
    return (i - 1) * (g.Nx - 1) + (j - 1);
}

}  // namespace

Eigen::VectorXd ActionModel::gradient(const ScalarField& u) const {
    const Grid& g = u.grid();
    CellStencil st(g);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.interior_count());
    const double w = g.ht * g.hx;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            Jet k = kinetic(cell_gradient(u, i, j));
            double vz = pb_.pot.eval(g.x2c(j), cell_value(u, i, j)).dz;
            for (int a = 0; a < 4; ++a) {
                int idx = interior_index(g, i + st.di[a], j + st.dj[a]);
                if (idx < 0) continue;
                out[idx] += w * (k.grad[0] * st.d1[a] + k.grad[1] * st.d2[a] - 0.25 * vz);
            }
        }
    return out;
}

Eigen::SparseMatrix<double> ActionModel::hessian(const ScalarField& u) const {
    const Grid& g = u.grid();
    CellStencil st(g);
    const int n = g.interior_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(g.Nt) * g.Nx * 16);
    const double w = g.ht * g.hx;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            Jet k = kinetic(cell_gradient(u, i, j));
            double vzz = pb_.pot.eval(g.x2c(j), cell_value(u, i, j)).dz2;
            int idx[4];
            for (int a = 0; a < 4; ++a) idx[a] = interior_index(g, i + st.di[a], j + st.dj[a]);
            for (int a = 0; a < 4; ++a) {
                if (idx[a] < 0) continue;
                for (int b = 0; b < 4; ++b) {
                    if (idx[b] < 0) continue;
                    double v = k.hess.a11 * st.d1[a] * st.d1[b] + k.hess.a12 * (st.d1[a] * st.d2[b] + st.d2[a] * st.d1[b]) +
                               k.hess.a22 * st.d2[a] * st.d2[b] - vzz / 16;
                    trip.emplace_back(idx[a], idx[b], w * v);
                }
            }
        }
    Eigen::SparseMatrix<double> H(n, n);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

Eigen::VectorXd ActionModel::interior(const ScalarField& u) const {
    const Grid& g = u.grid();
    Eigen::VectorXd x(g.interior_count());
    for (int i = 1; i < g.Nt; ++i)
        for (int j = 1; j < g.Nx; ++j) x[interior_index(g, i, j)] = u(i, j);
    return x;
}

void ActionModel::set_interior(ScalarField& u, const Eigen::VectorXd& x) const {
    const Grid& g = u.grid();
    for (int i = 1; i < g.Nt; ++i)
        for (int j = 1; j < g.Nx; ++j) u(i, j) = x[interior_index(g, i, j)];
}

double action(const Problem& pb, const ScalarField& u, double eps) { return ActionModel(pb, eps).action(u); }

Eigen::VectorXd gradient(const Problem& pb, const ScalarField& u, double eps) {
    return ActionModel(pb, eps).gradient(u);
}

Eigen::SparseMatrix<double> hessian(const Problem& pb, const ScalarField& u, double eps) {
    return ActionModel(pb, eps).hessian(u);
}

ScalarField initial_guess(double eps, const Domain& dom, const Grid& grid, double beta) {
    ScalarField u(grid);
    for (int i = 0; i <= grid.Nt; ++i)
        for (int j = 0; j <= grid.Nx; ++j) {
            double x2 = std::clamp(grid.x2(j), -dom.L, dom.L);
            u(i, j) = -boundary_profile(x2, eps, beta, dom) * std::cos(M_PI * grid.x1(i) / grid.T);
        }
    return impose_boundary(std::move(u), eps, beta, dom);
}

ScalarField linear_interpolant(double eps, const Domain& dom, const Grid& grid, double beta) {
    ScalarField u(grid);
    for (int i = 0; i <= grid.Nt; ++i)
        for (int j = 0; j <= grid.Nx; ++j) {
            double x2 = std::clamp(grid.x2(j), -dom.L, dom.L);
            u(i, j) = (2.0 * i / grid.Nt - 1) * boundary_profile(x2, eps, beta, dom);
        }
    return impose_boundary(std::move(u), eps, beta, dom);
}

std::pair<ScalarField, SolveRecord> newton_solve(const Problem& pb, const ScalarField& u0, double eps,
                                                 const SolveConfig& cfg) {
    cfg.validate();
    ActionModel model(pb, eps);
    ScalarField u = u0;
    SolveRecord rec;
    rec.eps = eps;
    double A = model.action(u);
    if (!std::isfinite(A)) throw DomainError("non-finite action at the starting point");
    rec.action_history.push_back(A);
    double mu = cfg.lm_shift0;
    const double roundoff = 64 * std::numeric_limits<double>::epsilon();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;

    for (int it = 0;; ++it) {
        Eigen::VectorXd g = model.gradient(u);
        rec.grad_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
        rec.action = A;
        if (rec.grad_norm <= cfg.newton_tol) {
            rec.converged = true;
            rec.iterations = it;
            break;
        }
        if (it >= cfg.max_newton_iters) {
            rec.iterations = it;
            rec.el_residual = sup_abs(el_residual(pb, u, eps));
            throw NonConvergence("Newton did not converge at eps=" + std::to_string(eps), u, rec);
        }
        Eigen::SparseMatrix<double> H = model.hessian(u);
        double diag_max = 0;
        for (int k = 0; k < H.rows(); ++k) diag_max = std::max(diag_max, std::abs(H.coeff(k, k)));
        const double mu_min = 1e-10 * std::max(diag_max, 1e-300);
        Eigen::VectorXd x = model.interior(u);

        bool accepted = false;
        for (int attempt = 0; attempt < 200 && !accepted; ++attempt) {
            Eigen::SparseMatrix<double> M = H;
            if (mu > 0)
                for (int k = 0; k < M.rows(); ++k) M.coeffRef(k, k) += mu;
            if (!analyzed) {
                ldlt.analyzePattern(M);
                analyzed = true;
            }
            ldlt.factorize(M);
            bool ok = ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all();
            Eigen::VectorXd d;
            double slope = 0;
            if (ok) {
                d = ldlt.solve(-g);
                slope = g.dot(d);
                ok = d.allFinite() && slope < 0;
            }
            if (!ok) {
                mu = mu > 0 ? 2 * mu : mu_min;
                continue;
            }
            double t = 1;
            for (int ls = 0; ls < 60; ++ls) {
                ScalarField trial = u;
                model.set_interior(trial, x + t * d);
                double At = model.action(trial);
                ++rec.line_search_steps;
                bool armijo = std::isfinite(At) && At <= A + cfg.ls_slope * t * slope;
                // Near the optimum the decrease drops below round-off; accept
                // a step that stays level and reduces the gradient.
                bool level = !armijo && std::isfinite(At) && At <= A + roundoff * (1 + std::abs(A)) &&
                             model.gradient(trial).lpNorm<Eigen::Infinity>() < rec.grad_norm;
                if (armijo || level) {
                    u = std::move(trial);
                    A = At;
                    accepted = true;
                    break;
                }
                t *= cfg.ls_shrink;
            }
            if (accepted) {
                mu = mu / 10 < mu_min ? 0.0 : mu / 10;
            } else {
                mu = mu > 0 ? 2 * mu : mu_min;
            }
        }
        if (!accepted) {
            rec.iterations = it;
            throw NonConvergence("no acceptable step at eps=" + std::to_string(eps), u, rec);
        }
        rec.action_history.push_back(A);
    }
    rec.el_residual = sup_abs(el_residual(pb, u, eps));
    return {u, rec};
}

// Multiplies column x2 by U_to(x2)/U_from(x2), which carries resting
// regions u = +-U_from onto +-U_to and keeps the traces exact.
static ScalarField rescale_profile(ScalarField u, double from, double to, const Problem& pb) {
    const Grid& g = u.grid();
    const double L = g.L, bf = std::pow(from, pb.beta), bt = std::pow(to, pb.beta);
    for (int j = 0; j <= g.Nx; ++j) {
        double a = (L + std::abs(std::clamp(g.x2(j), -L, L))) / (2 * L);
        double r = (1 + bt * a) / (1 + bf * a);
        for (int i = 0; i <= g.Nt; ++i) u(i, j) *= r;
    }
    return impose_boundary(std::move(u), to, pb.beta, pb.dom);
}

ContinuationResult continuation_solve(const Problem& pb, const SolveConfig& cfg,
                                      const std::function<void(const ContinuationResult&)>& on_fail) {
    cfg.validate();
    ContinuationResult res;
    ScalarField u = initial_guess(cfg.eps_schedule.front(), pb.dom, pb.grid, pb.beta);
    double prev = cfg.eps_schedule.front();
    for (double eps : cfg.eps_schedule) {
        u = rescale_profile(std::move(u), prev, eps, pb);
        prev = eps;
        try {
            auto [sol, rec] = newton_solve(pb, u, eps, cfg);
            res.eps.push_back(eps);
            res.fields.push_back(sol);
            res.report.records.push_back(rec);
            u = std::move(sol);
        } catch (NonConvergence& e) {
            res.report.records.push_back(e.record);
            if (on_fail) on_fail(res);
            throw;
        }
    }
    return res;
}

ScalarField el_residual(const Problem& pb, const ScalarField& u, double eps) {
    ActionModel model(pb, eps);
    const Grid& g = u.grid();
    ScalarField r(g);
    // Second differences are taken from the four cell-center gradients around
    // the node, so checkerboard modes with zero cell gradients do not register.
    for (int i = 1; i < g.Nt; ++i)
        for (int j = 1; j < g.Nx; ++j) {
            Vec2 a = cell_gradient(u, i - 1, j - 1), b = cell_gradient(u, i - 1, j);
            Vec2 c = cell_gradient(u, i, j - 1), d = cell_gradient(u, i, j);
            Vec2 p{(a[0] + b[0] + c[0] + d[0]) / 4, (a[1] + b[1] + c[1] + d[1]) / 4};
            double u11 = (c[0] + d[0] - a[0] - b[0]) / (2 * g.ht);
            double u22 = (b[1] + d[1] - a[1] - c[1]) / (2 * g.hx);
            double u12 = 0.5 * ((c[1] + d[1] - a[1] - b[1]) / (2 * g.ht) + (b[0] + d[0] - a[0] - c[0]) / (2 * g.hx));
            Sym2 H = model.kinetic(p).hess;
            r(i, j) = H.a11 * u11 + 2 * H.a12 * u12 + H.a22 * u22 + pb.pot.eval(g.x2(j), u(i, j)).dz;
        }
    return r;
}

}  // namespace lap
