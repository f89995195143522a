#include "lap/subsolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lap/analysis.hpp"

namespace lap {

void write_cell_field(std::ostream& os, const CellField& f) {
    const Grid& g = f.grid;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", g.T);
    os << g.Nt << ' ' << g.Nx << ' ' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", g.L);
    os << ' ' << buf << '\n';
    for (int i = 0; i < g.Nt; ++i) {
        for (int j = 0; j < g.Nx; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", f(i, j));
            if (j) os << ' ';
            os << buf;
        }
        os << '\n';
    }
}

CellField read_cell_field(std::istream& is) {
    int Nt = 0, Nx = 0;
    std::string ts, ls;
    if (!(is >> Nt >> Nx >> ts >> ls)) throw PreconditionError("bad cell field header");
    Domain dom;
    dom.T = std::strtod(ts.c_str(), nullptr);
    dom.L = std::strtod(ls.c_str(), nullptr);
    CellField f(Grid(dom, Nt, Nx));
    std::string tok;
    for (double& x : f.v) {
        if (!(is >> tok)) throw PreconditionError("truncated cell field");
        x = std::strtod(tok.c_str(), nullptr);
    }
    return f;
}

SubsolutionFields reconstruct(const ScalarField& u, double e_tilde_value, const Domain& dom, double tau) {
    if (!(e_tilde_value > 0)) throw DomainError("e_tilde must be positive");
    if (!(tau > 0)) throw DomainError("mask threshold must be positive");
    const Grid& g = u.grid();
    const int n = dom.n;
    const double gA = dom.g * dom.A;
    SubsolutionFields sf;
    sf.grid = g;
    sf.n = n;
    sf.e_tilde_value = e_tilde_value;
    sf.tau = tau;
    sf.mask.assign(static_cast<size_t>(g.Nt) * g.Nx, 0);
    for (CellField* f : {&sf.rho, &sf.m, &sf.e0, &sf.e1, &sf.sigma_nn, &sf.p, &sf.e_tilde}) *f = CellField(g);

    const MixingZone mz = mixing_zone(u, tau);
    std::vector<std::pair<int, int>> bad;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            Vec2 q = cell_gradient(u, i, j);
            double rho = q[1], m = -q[0];
            if (!mz.at(i, j)) {
                sf.rho(i, j) = std::clamp(rho, -1.0, 1.0);
                continue;
            }
            double d = 1 - rho * rho;
            if (d <= 1e-12) {
                bad.push_back({i, j});
                continue;
            }
            sf.mask[static_cast<size_t>(i) * g.Nx + j] = 1;
            sf.rho(i, j) = rho;
            sf.m(i, j) = m;
            sf.e0(i, j) = m * m * (1 + rho * rho) / (n * d * d) + e_tilde_value;
            sf.e1(i, j) = -2 * rho * m * m / (n * d * d);
            sf.sigma_nn(i, j) = m * m / d * (1 - 1.0 / n);
            sf.e_tilde(i, j) = e_tilde_value;
        }
    if (!bad.empty()) throw DegenerateError("mask cells with 1 - rho^2 <= 1e-12", bad);
    // p = -sigma_nn - gA int_{-L}^{x2} rho, cumulative in x2 at cell centers.
    for (int i = 0; i < g.Nt; ++i) {
        double acc = 0;
        for (int j = 0; j < g.Nx; ++j) {
            double mid = acc + 0.5 * g.hx * sf.rho(i, j);
            sf.p(i, j) = -sf.sigma_nn(i, j) - gA * mid;
            acc += g.hx * sf.rho(i, j);
        }
    }
    return sf;
}

double lambda_max_closed_form(double rho, double m, double sigma_nn, int n) {
    double k = m * m / (1 - rho * rho);
    return std::max(k - sigma_nn, sigma_nn / (n - 1));
}

double MembershipReport::min_margin() const { return std::min({min_plus, min_minus, min_lambda}); }

MembershipReport verify_membership(const SubsolutionFields& sf, const Domain&) {
    const Grid& g = sf.grid;
    const int n = sf.n;
    MembershipReport r;
    r.min_plus = r.min_minus = r.min_lambda = INFINITY;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            double rho = sf.rho(i, j), m = sf.m(i, j), e0 = sf.e0(i, j), e1 = sf.e1(i, j);
            if (sf.on_mask(i, j)) {
                ++r.mask_cells;
                double a = e0 + e1 - m * m / (n * (rho + 1) * (rho + 1));
                double b = e0 - e1 - m * m / (n * (rho - 1) * (rho - 1));
                double c = e0 + rho * e1 - lambda_max_closed_form(rho, m, sf.sigma_nn(i, j), n);
                r.min_plus = std::min(r.min_plus, a);
                r.min_minus = std::min(r.min_minus, b);
                r.min_lambda = std::min(r.min_lambda, c);
                if (!(a > 0 && b > 0 && c > 0)) ++r.mask_violations;
            } else {
                // K with v = 0, or a mixed resting region.
                bool zero = m == 0 && e0 == 0 && e1 == 0 && sf.sigma_nn(i, j) == 0;
                if (!(zero && std::abs(rho) <= 1)) ++r.off_mask_violations;
            }
        }
    if (r.mask_cells == 0) r.min_plus = r.min_minus = r.min_lambda = 0;
    return r;
}

ContinuityResidual continuity_residual(const SubsolutionFields& sf, const ScalarField& u, const Domain&) {
    const Grid& g = sf.grid;
    const double T = g.T, L = g.L;
    ContinuityResidual out;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) {
            const double k = a * M_PI / (2 * T);
            auto phi = [&](double x1, double x2) { return std::pow(x2 / L, b) * std::cos(k * x1); };
            auto d1 = [&](double x1, double x2) { return -k * std::pow(x2 / L, b) * std::sin(k * x1); };
            auto d2 = [&](double x1, double x2) {
                return b == 0 ? 0.0 : b * std::pow(x2 / L, b - 1) / L * std::cos(k * x1);
            };
            double bulk = 0;
            for (int i = 0; i < g.Nt; ++i)
                for (int j = 0; j < g.Nx; ++j) {
                    double x1 = g.x1c(i), x2 = g.x2c(j);
                    bulk += sf.rho(i, j) * d1(x1, x2) + sf.m(i, j) * d2(x1, x2);
                }
            bulk *= g.ht * g.hx;
            // Traces rho(0) and rho(T) from the boundary rows, edge midpoints.
            double start = 0, end = 0;
            for (int j = 0; j < g.Nx; ++j) {
                double x2 = g.x2c(j);
                start += (u(0, j + 1) - u(0, j)) * phi(0, x2);
                end += (u(g.Nt, j + 1) - u(g.Nt, j)) * phi(T, x2);
            }
            double res = bulk + start - end;
            out.residuals.push_back(res);
            out.max_residual = std::max(out.max_residual, std::abs(res));
        }
    return out;
}

AdmissibilityReport admissibility(const SubsolutionFields& sf, const Domain& dom) {
    const Grid& g = sf.grid;
    const double gA = dom.g * dom.A, n = sf.n;
    const double rhs = gA * g.L * g.L;
    AdmissibilityReport r;
    for (int i = 0; i < g.Nt; ++i) {
        double lhs = 0;
        for (int j = 0; j < g.Nx; ++j)
            lhs += n / 2 * (sf.e0(i, j) + sf.rho(i, j) * sf.e1(i, j)) + sf.rho(i, j) * gA * g.x2c(j);
        r.margins.push_back(rhs - lhs * g.hx);
    }
    r.min_interior = INFINITY;
    for (size_t i = 1; i + 1 < r.margins.size(); ++i) r.min_interior = std::min(r.min_interior, r.margins[i]);
    return r;
}

TwoPhaseFlow to_two_phase(const CellField& rho, const CellField& m, const Domain& dom, double tol) {
    const Grid& g = rho.grid;
    const double L = dom.L;
    TwoPhaseFlow tp;
    tp.grid = g;
    tp.mu_plus = tp.mu_minus = tp.v_plus = tp.v_minus = CellField(g);
    std::vector<std::pair<int, int>> bad;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            double r = rho(i, j), mm = m(i, j);
            if (std::abs(r) > 1 + tol) throw DomainError("|rho| > 1 in to_two_phase");
            tp.mu_plus(i, j) = (1 + r) / (4 * L);
            tp.mu_minus(i, j) = (1 - r) / (4 * L);
            if (mm != 0 && (1 + r <= tol || 1 - r <= tol)) {
                bad.push_back({i, j});
                continue;
            }
            tp.v_plus(i, j) = mm == 0 ? 0.0 : mm / (1 + r);
            tp.v_minus(i, j) = mm == 0 ? 0.0 : -mm / (1 - r);
        }
    if (!bad.empty()) throw DegenerateError("phase vacuum with nonzero momentum", bad);
    return tp;
}

std::pair<CellField, CellField> from_two_phase(const TwoPhaseFlow& tp, const Domain& dom) {
    const double L = dom.L;
    CellField rho(tp.grid), m(tp.grid);
    for (size_t k = 0; k < rho.v.size(); ++k) {
        rho.v[k] = 4 * L * tp.mu_plus.v[k] - 1;
        m.v[k] = 4 * L * tp.mu_plus.v[k] * tp.v_plus.v[k];
    }
    return {rho, m};
}

double two_phase_action(const TwoPhaseFlow& tp, const Domain& dom) {
    const Grid& g = tp.grid;
    const double gA = dom.g * dom.A;
    double s = 0;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            double mp = tp.mu_plus(i, j), mm = tp.mu_minus(i, j), vp = tp.v_plus(i, j), vm = tp.v_minus(i, j);
            s += 0.5 * (mp * vp * vp + mm * vm * vm) - gA * (mp - mm) * g.x2c(j);
        }
    return s * g.ht * g.hx;
}

double stream_action(const CellField& rho, const CellField& m, const Domain& dom) {
    const Grid& g = rho.grid;
    const double gA = dom.g * dom.A;
    double s = 0;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            double r = rho(i, j), mm = m(i, j);
            double kin = mm == 0 ? 0.0 : mm * mm / (2 * (1 - r * r));
            s += kin - r * gA * g.x2c(j);
        }
    return s * g.ht * g.hx;
}

void save_subsolution(const std::string& dir, const SubsolutionFields& sf) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::pair<const char*, const CellField*> parts[] = {
        {"rho", &sf.rho}, {"m", &sf.m}, {"e0", &sf.e0}, {"e1", &sf.e1},
        {"sigma_nn", &sf.sigma_nn}, {"p", &sf.p}, {"e_tilde", &sf.e_tilde}};
    std::ofstream man(fs::path(dir) / "manifest.txt");
    char buf[128];
    std::snprintf(buf, sizeof buf, "n = %d\ne_tilde = %.17g\ntau = %.17g\n", sf.n, sf.e_tilde_value, sf.tau);
    man << buf << "components =";
    for (auto& [name, f] : parts) {
        man << ' ' << name;
        std::ofstream os(fs::path(dir) / (std::string(name) + ".txt"));
        write_cell_field(os, *f);
    }
    man << '\n';
}

}  // namespace lap
