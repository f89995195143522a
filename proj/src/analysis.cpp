#include "lap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace lap {

EnergyTrace energy_trace(const Problem& pb, const ScalarField& u, double eps) {
    ActionModel model(pb, eps);
    const Grid& g = u.grid();
    const double gA = pb.pot.g * pb.pot.A;
    EnergyTrace tr;
    for (int i = 0; i < g.Nt; ++i) {
        double ek = 0, ep = 0, ef = 0, h = 0, d = 0;
        for (int j = 0; j < g.Nx; ++j) {
            Vec2 p = cell_gradient(u, i, j);
            double uc = cell_value(u, i, j), x2 = g.x2c(j);
            double V = pb.pot.V(x2, uc);
            double fv = 0, fz = 0;
            if (pb.pot.has_f()) {
                PotJet f = pb.pot.f(x2, uc);
                fv = f.v;
                fz = f.dz;
            }
            double k, legendre;
            if (eps > 0 || pb.kinetic) {
                Jet j = model.kinetic(p);
                k = j.value;
                legendre = j.grad[0] * p[0] - j.value;
            } else {
                k = F(p);
                legendre = k;
            }
            ek += k;
            ep += -gA * uc;
            ef += fv;
            h += legendre + V;
            d += -fz * p[0];
        }
        tr.x1.push_back(g.x1c(i));
        tr.E_kin.push_back(ek * g.hx);
        tr.E_pot.push_back(ep * g.hx);
        tr.E_f.push_back(ef * g.hx);
        tr.H.push_back(h * g.hx);
        tr.D.push_back(d * g.hx);
    }
    return tr;
}

void write_energy_csv(std::ostream& os, const EnergyTrace& tr) {
    os << "row,x1,E_kin,E_pot,E_f,H,D\n";
    char buf[256];
    for (size_t i = 0; i < tr.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, tr.x1[i], tr.E_kin[i],
                      tr.E_pot[i], tr.E_f[i], tr.H[i], tr.D[i]);
        os << buf;
    }
}

EnergyTrace read_energy_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "row,x1,E_kin,E_pot,E_f,H,D")
        throw PreconditionError("bad energy CSV header");
    EnergyTrace tr;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(std::strtod(tok.c_str(), nullptr));
        if (v.size() != 7) throw PreconditionError("bad energy CSV row: " + line);
        tr.x1.push_back(v[1]);
        tr.E_kin.push_back(v[2]);
        tr.E_pot.push_back(v[3]);
        tr.E_f.push_back(v[4]);
        tr.H.push_back(v[5]);
        tr.D.push_back(v[6]);
    }
    return tr;
}

double first_integral_deviation(const EnergyTrace& tr) {
    if (tr.size() < 3) return 0;
    double mean = 0;
    for (size_t i = 1; i + 1 < tr.size(); ++i) mean += tr.H[i];
    mean /= static_cast<double>(tr.size() - 2);
    double dev = 0;
    for (size_t i = 1; i + 1 < tr.size(); ++i) dev = std::max(dev, std::abs(tr.H[i] - mean));
    return dev;
}

DissipationReport dissipation_check(const EnergyTrace& tr) {
    DissipationReport r;
    double scale = 0;
    for (size_t i = 0; i < tr.size(); ++i)
        scale = std::max(scale, std::abs(tr.E_kin[i]) + std::abs(tr.E_pot[i]) + std::abs(tr.D[i]));
    r.row_scale = scale;
    for (size_t i = 0; i + 1 < tr.size(); ++i) {
        double h = tr.x1[i + 1] - tr.x1[i];
        double rate = ((tr.E_kin[i + 1] + tr.E_pot[i + 1]) - (tr.E_kin[i] + tr.E_pot[i])) / h;
        double ex = 0.5 * (tr.D[i] + tr.D[i + 1]);
        r.rate.push_back(rate);
        r.expected.push_back(ex);
        r.max_rate = std::max(r.max_rate, rate);
        r.max_abs_rate = std::max(r.max_abs_rate, std::abs(rate));
        r.max_mismatch = std::max(r.max_mismatch, std::abs(rate - ex));
    }
    return r;
}

size_t MixingZone::count() const { return static_cast<size_t>(std::count(mask.begin(), mask.end(), 1)); }

double default_mixing_threshold(double newton_tol) { return 10 * std::sqrt(newton_tol); }

MixingZone mixing_zone(const ScalarField& u, double tau) {
    if (!(tau > 0)) throw DomainError("mixing threshold must be positive");
    const Grid& g = u.grid();
    MixingZone mz;
    mz.Nt = g.Nt;
    mz.Nx = g.Nx;
    mz.mask.assign(static_cast<size_t>(g.Nt) * g.Nx, 0);
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            Vec2 p = cell_gradient(u, i, j);
            mz.mask[static_cast<size_t>(i) * g.Nx + j] = p[0] > tau && std::abs(p[1]) < 1 - tau;
        }
    // Components with 4-connectivity.
    std::vector<int> label(mz.mask.size(), -1);
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            size_t s = static_cast<size_t>(i) * g.Nx + j;
            if (!mz.mask[s] || label[s] >= 0) continue;
            int id = static_cast<int>(mz.components.size());
            mz.components.emplace_back();
            std::vector<std::pair<int, int>> stack{{i, j}};
            label[s] = id;
            while (!stack.empty()) {
                auto [a, b] = stack.back();
                stack.pop_back();
                mz.components[id].push_back({a, b});
                const int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int na = a + da[k], nb = b + db[k];
                    if (na < 0 || na >= g.Nt || nb < 0 || nb >= g.Nx) continue;
                    size_t t = static_cast<size_t>(na) * g.Nx + nb;
                    if (mz.mask[t] && label[t] < 0) {
                        label[t] = id;
                        stack.push_back({na, nb});
                    }
                }
            }
        }
    // Holes: 8-connected components of the complement inside the padded
    // bounding box that do not reach the box border.
    for (size_t id = 0; id < mz.components.size(); ++id) {
        int i0 = g.Nt, i1 = -1, j0 = g.Nx, j1 = -1;
        for (auto [a, b] : mz.components[id]) {
            i0 = std::min(i0, a);
            i1 = std::max(i1, a);
            j0 = std::min(j0, b);
            j1 = std::max(j1, b);
        }
        i0 -= 1;
        j0 -= 1;
        i1 += 1;
        j1 += 1;
        const int H = i1 - i0 + 1, W = j1 - j0 + 1;
        std::vector<int> seen(static_cast<size_t>(H) * W, 0);
        auto inside = [&](int a, int b) {
            if (a < 0 || a >= g.Nt || b < 0 || b >= g.Nx) return false;
            return label[static_cast<size_t>(a) * g.Nx + b] == static_cast<int>(id);
        };
        int holes = 0;
        for (int a = i0; a <= i1; ++a)
            for (int b = j0; b <= j1; ++b) {
                size_t s = static_cast<size_t>(a - i0) * W + (b - j0);
                if (seen[s] || inside(a, b)) continue;
                bool touches = false;
                std::vector<std::pair<int, int>> stack{{a, b}};
                seen[s] = 1;
                while (!stack.empty()) {
                    auto [x, y] = stack.back();
                    stack.pop_back();
                    if (x == i0 || x == i1 || y == j0 || y == j1) touches = true;
                    for (int dx = -1; dx <= 1; ++dx)
                        for (int dy = -1; dy <= 1; ++dy) {
                            int nx = x + dx, ny = y + dy;
                            if (nx < i0 || nx > i1 || ny < j0 || ny > j1) continue;
                            size_t t = static_cast<size_t>(nx - i0) * W + (ny - j0);
                            if (seen[t] || inside(nx, ny)) continue;
                            seen[t] = 1;
                            stack.push_back({nx, ny});
                        }
                }
                if (!touches) ++holes;
            }
        mz.holes.push_back(holes);
    }
    return mz;
}

namespace {

// (1/a) int_0^a int |f(cell)| dx2 dx1 over cell layers, with partial overlap.
template <class Fn>
double layer_average(const Grid& g, double a, Fn&& cell) {
    double s = 0;
    for (int i = 0; i < g.Nt; ++i) {
        double lo = i * g.ht, hi = lo + g.ht;
        double w = std::min(hi, a) - lo;
        if (w <= 0) break;
        double row = 0;
        for (int j = 0; j < g.Nx; ++j) row += cell(i, j);
        s += w * row * g.hx;
    }
    return s / a;
}

}  // namespace

TraceTable trace_attainment(const ScalarField& u, double slack) {
    const Grid& g = u.grid();
    TraceTable t;
    t.slack = slack;
    for (double a = g.T / 2; a >= g.ht * (1 - 1e-12); a /= 2) {
        t.a.push_back(a);
        t.A1.push_back(layer_average(g, a, [&](int i, int j) {
            double sgn = g.x2c(j) > 0 ? 1.0 : -1.0;
            return std::abs(cell_gradient(u, i, j)[1] - sgn);
        }));
        t.C1.push_back(layer_average(g, a, [&](int i, int j) { return std::abs(cell_gradient(u, i, j)[0]); }));
    }
    for (double b = g.L / 2; b >= g.hx * (1 - 1e-12); b /= 2) {
        double s = 0;
        for (int j = 0; j < g.Nx; ++j) {
            double lo = j * g.hx, hi = lo + g.hx;
            double w = std::min(hi, b) - lo;
            if (w <= 0) break;
            double col = 0;
            for (int i = 0; i < g.Nt; ++i) col += std::abs(cell_gradient(u, i, j)[0]);
            s += w * col * g.ht;
        }
        t.b.push_back(b);
        t.B1.push_back(s / b);
    }
    auto monotone = [&](const std::vector<double>& v) {
        for (size_t k = 1; k < v.size(); ++k)
            if (v[k] > v[k - 1] + slack) return false;
        return true;
    };
    t.A1_monotone = monotone(t.A1);
    t.C1_monotone = monotone(t.C1);
    t.B1_bound = true;
    for (size_t k = 0; k < t.b.size(); ++k)
        if (t.B1[k] > 2 * t.b[k] + 2 * g.hx) t.B1_bound = false;
    return t;
}

OscillationTable oscillation_modulus(const ScalarField& u, const std::vector<Vec2>& centers,
                                     const std::vector<double>& radii, double monotone_tol) {
    const Grid& g = u.grid();
    OscillationTable t;
    double l2 = 0;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            Vec2 p = cell_gradient(u, i, j);
            if (p[0] < -monotone_tol) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "d1u=%.3g < 0 at cell (%d,%d)", p[0], i, j);
                t.notes.push_back(buf);
            }
            l2 += p[0] * p[0] + p[1] * p[1];
        }
    t.grad_l2 = std::sqrt(l2 * g.ht * g.hx);
    for (const Vec2& c : centers)
        for (double r : radii) {
            double R = std::sqrt(r);
            if (c[0] - R <= 0 || c[0] + R >= g.T || c[1] - R <= -g.L || c[1] + R >= g.L) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "skipped center (%.3g,%.3g) r=%.3g: ball of radius sqrt(r) leaves the domain",
                              c[0], c[1], r);
                t.notes.push_back(buf);
                continue;
            }
            double lo = kInfinity, hi = -kInfinity;
            for (int i = 0; i <= g.Nt; ++i)
                for (int j = 0; j <= g.Nx; ++j)
                    if (std::hypot(g.x1(i) - c[0], g.x2(j) - c[1]) <= r) {
                        lo = std::min(lo, u(i, j));
                        hi = std::max(hi, u(i, j));
                    }
            double osc = hi >= lo ? hi - lo : 0;
            double scale = t.grad_l2 / std::sqrt(std::abs(std::log(r)));
            double ratio = scale > 0 ? osc / scale : 0;
            t.rows.push_back({c[0], c[1], r, osc, ratio});
            t.max_ratio = std::max(t.max_ratio, ratio);
        }
    return t;
}

std::vector<KineticJumpRow> kinetic_jump_vs_T(const std::vector<TRun>& runs, double tol) {
    auto one = std::find_if(runs.begin(), runs.end(), [](const TRun& r) { return std::abs(r.T - 1) < 1e-12; });
    if (one == runs.end()) throw PreconditionError("kinetic_jump_vs_T needs a run with T = 1");
    std::vector<KineticJumpRow> rows;
    for (const TRun& r : runs) {
        double bound = one->action / r.T;
        rows.push_back({r.T, r.kin_start, r.kin_end, bound, r.kin_start <= bound + tol,
                        std::abs(r.kin_start - r.kin_end) <= tol});
    }
    return rows;
}

}  // namespace lap
