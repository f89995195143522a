// Acceptance suite: one PASS/FAIL line per criterion, default configuration
// g = A = L = T = 1, n = 2, theta = 1.5, beta = 1.25, example potential.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lap/analysis.hpp"
#include "lap/subsolution.hpp"

using namespace lap;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
        char buf[256];
        va_list ap;
        va_start(ap, fmt);
        std::vsnprintf(buf, sizeof buf, fmt, ap);
        va_end(ap);
        if (!detail.empty()) detail += "; ";
        detail += buf;
        if (!ok) {
            detail += " [x]";
            pass = false;
        }
    }
};

int failures = 0;

void run(int id, const char* title, const std::function<void(Verdict&)>& body) {
    Verdict v;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(v);
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail += std::string(v.detail.empty() ? "" : "; ") + "exception: " + e.what();
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failures;
    std::printf("criterion %2d %-28s %s  (%.2fs) %s\n", id, title, v.pass ? "PASS" : "FAIL", sec, v.detail.c_str());
    std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Vec2> halton(int n, double lo, double hi) {
    auto radical = [](int i, int b) {
        double f = 1, r = 0;
        while (i > 0) {
            f /= b;
            r += f * (i % b);
            i /= b;
        }
        return r;
    };
    std::vector<Vec2> pts;
    for (int k = 1; k <= n; ++k) pts.push_back({lo + (hi - lo) * radical(k, 2), lo + (hi - lo) * radical(k, 3)});
    return pts;
}

struct ExtensionStats {
    double min_conv = kInfinity;  // relative convexity gap
    double min_eig_margin = kInfinity;
    double min_lower = kInfinity;  // d1 F p1 + eps
    double min_upper = kInfinity;  // 3F - d1 F p1
};

ExtensionStats extension_stats(const std::vector<Vec2>& pts, const std::vector<Jet>& J, double eps, double floor,
                               const std::function<bool(const Vec2&)>& in_region) {
    ExtensionStats s;
    for (size_t k = 0; k < pts.size(); ++k) {
        const Vec2& p = pts[k];
        double d = J[k].grad[0] * p[0];
        s.min_lower = std::min(s.min_lower, d + eps);
        s.min_upper = std::min(s.min_upper, 3 * J[k].value - d);
        if (in_region(p)) s.min_eig_margin = std::min(s.min_eig_margin, J[k].hess.min_eig() - floor);
        for (size_t l = k % 13; l < pts.size(); l += 101) {
            Vec2 dq{pts[l][0] - p[0], pts[l][1] - p[1]};
            double lin = J[k].grad[0] * dq[0] + J[k].grad[1] * dq[1];
            double gap = J[l].value - J[k].value - lin;
            s.min_conv = std::min(s.min_conv, gap / (1 + std::abs(J[l].value) + std::abs(J[k].value) + std::abs(lin)));
        }
    }
    return s;
}

Problem default_problem(int Nt, int Nx, double T = 1) {
    Domain d;
    d.T = T;
    return Problem(d, Grid(d, Nt, Nx), example_potential(d));
}

SolveConfig default_solver() { return SolveConfig{}; }

struct Run {
    Problem pb;
    ContinuationResult res;

    const ScalarField& at(double eps) const {
        for (size_t k = 0; k < res.eps.size(); ++k)
            if (std::abs(res.eps[k] - eps) < 1e-12) return res.fields[k];
        throw PreconditionError("eps not in schedule");
    }
};

Run solve_default(int N, double T = 1) {
    Run r{default_problem(static_cast<int>(std::lround(N * T)), N, T), {}};
    r.res = continuation_solve(r.pb, default_solver());
    return r;
}

double observed_order(const double e[3]) {
    return std::min(std::log2(e[0] / e[1]), std::log2(e[1] / e[2]));
}

}  // namespace

int main() {
    const double hs[3] = {1e-3, 5e-4, 2.5e-4};

    run(1, "extension properties", [](Verdict& v) {
        auto t0 = std::chrono::steady_clock::now();
        auto pts = halton(10000, -5, 5);
        ExtensionStats worst;
        auto merge = [&](const ExtensionStats& s) {
            worst.min_conv = std::min(worst.min_conv, s.min_conv);
            worst.min_eig_margin = std::min(worst.min_eig_margin, s.min_eig_margin);
            worst.min_lower = std::min(worst.min_lower, s.min_lower);
            worst.min_upper = std::min(worst.min_upper, s.min_upper);
        };
        for (double eps : {0.2, 0.05, 0.01, 0.001}) {
            RegularizationParams rp{eps, 1.5, 1.25};
            FastExtension fe(rp);
            SafeBox box = SafeBox::of(rp);
            std::vector<Jet> J;
            for (const Vec2& p : pts) J.push_back(fe.eval(p));
            merge(extension_stats(pts, J, eps, std::min(lambda_eps(rp), kLambda0),
                                  [&](const Vec2& p) { return std::abs(p[1]) >= box.p2_max || std::abs(p[0]) >= 1; }));
        }
        for (double eps : {0.2, 0.05, 0.01}) {
            RegularizationParams rp{eps, 1.5, 1.25};
            ReferenceExtensionParams rep = make_reference_params(rp);
            ReferenceExtension re(rp, rep);
            SafeBox box = SafeBox::of(rp);
            std::vector<Jet> J;
            for (const Vec2& p : pts) J.push_back(re.eval(p));
            merge(extension_stats(pts, J, eps, std::min(lambda_eps(rp), kLambda0), [&](const Vec2& p) {
                return std::abs(p[1]) >= box.p2_max || std::abs(p[0]) >= rep.p1_box;
            }));
        }
        double sec = elapsed_since(t0);
        v.require(worst.min_conv >= -1e-10, "rel convexity gap %.2e", worst.min_conv);
        v.require(worst.min_eig_margin >= -1e-8, "eig margin %.2e", worst.min_eig_margin);
        v.require(worst.min_lower >= -1e-6 && worst.min_upper >= -1e-6, "scaling margins %.2e/%.2e",
                  worst.min_lower, worst.min_upper);
        v.require(sec < 10, "runtime %.1fs", sec);
    });

    run(2, "derivative consistency", [&](Verdict& v) {
        auto t0 = std::chrono::steady_clock::now();
        RegularizationParams rp{0.2, 1.5, 1.25};
        const std::vector<Vec2> pts = {{0.3, 0.5}, {-0.7, 0.2}, {1.1, -0.8}, {0.05, 0.95}};
        double eg[3] = {0, 0, 0}, eh[3] = {0, 0, 0};
        for (int k = 0; k < 3; ++k)
            for (const Vec2& p : pts) {
                Vec2 g = grad_F_eps(p, rp);
                Sym2 H = hess_F_eps(p, rp);
                for (int a = 0; a < 2; ++a) {
                    Vec2 pp = p, pm = p;
                    pp[a] += hs[k];
                    pm[a] -= hs[k];
                    eg[k] = std::max(eg[k], std::abs((F_eps(pp, rp) - F_eps(pm, rp)) / (2 * hs[k]) - g[a]));
                    Vec2 gp = grad_F_eps(pp, rp), gm = grad_F_eps(pm, rp);
                    double c0 = (gp[0] - gm[0]) / (2 * hs[k]), c1 = (gp[1] - gm[1]) / (2 * hs[k]);
                    double h0 = a == 0 ? H.a11 : H.a12, h1 = a == 0 ? H.a12 : H.a22;
                    eh[k] = std::max({eh[k], std::abs(c0 - h0), std::abs(c1 - h1)});
                }
            }
        Problem pb = default_problem(6, 6);
        ActionModel model(pb, 0.2);
        ScalarField u = initial_guess(0.2, pb.dom, pb.grid, pb.beta);
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> pert(-0.05, 0.05);
        for (int i = 1; i < pb.grid.Nt; ++i)
            for (int j = 1; j < pb.grid.Nx; ++j) u(i, j) += pert(rng);
        Eigen::VectorXd g = model.gradient(u), x = model.interior(u);
        Eigen::MatrixXd H = Eigen::MatrixXd(model.hessian(u));
        double ag[3] = {0, 0, 0}, ah[3] = {0, 0, 0};
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < x.size(); ++a) {
                ScalarField up = u, um = u;
                Eigen::VectorXd xp = x, xm = x;
                xp[a] += hs[k];
                xm[a] -= hs[k];
                model.set_interior(up, xp);
                model.set_interior(um, xm);
                ag[k] = std::max(ag[k], std::abs((model.action(up) - model.action(um)) / (2 * hs[k]) - g[a]));
                Eigen::VectorXd col = (model.gradient(up) - model.gradient(um)) / (2 * hs[k]);
                ah[k] = std::max(ah[k], (col - H.col(a)).lpNorm<Eigen::Infinity>());
            }
        double o = std::min({observed_order(eg), observed_order(eh), observed_order(ag), observed_order(ah)});
        double sec = elapsed_since(t0);
        v.require(o >= 1.9, "min order %.3f (F_eps grad %.2f hess %.2f, action grad %.2f hess %.2f)", o,
                  observed_order(eg), observed_order(eh), observed_order(ag), observed_order(ah));
        v.require(sec < 5, "runtime %.2fs", sec);
    });

    run(3, "oracle equivalence", [](Verdict& v) {
        auto t0 = std::chrono::steady_clock::now();
        Problem pb = default_problem(4, 4);
        auto [u, rec] = newton_solve(pb, initial_guess(0.2, pb.dom, pb.grid, pb.beta), 0.2, default_solver());
        OracleResult o = oracle_minimize(pb, 0.2, 1, 20);
        auto [lo, hi] = std::minmax_element(o.restart_actions.begin(), o.restart_actions.end());
        double diff = std::abs(rec.action - o.action);
        double sec = elapsed_since(t0);
        v.require(diff <= 1e-6 * (1 + std::abs(rec.action)), "|dA| %.2e", diff);
        v.require(*hi - *lo <= 1e-7 && o.restart_actions.size() == 20, "restart spread %.2e", *hi - *lo);
        v.require(sec < 30, "runtime %.2fs", sec);
    });

    auto t64 = std::chrono::steady_clock::now();
    Run r64 = solve_default(64);
    const double solve64_sec = elapsed_since(t64);
    const ScalarField& u_final = r64.res.fields.back();
    const double eps_final = r64.res.eps.back();

    run(4, "max principle & monotonicity", [&](Verdict& v) {
        const Grid& g = u_final.grid();
        double over = -kInfinity, min_d1 = kInfinity, max_d2 = 0;
        for (int i = 0; i <= g.Nt; ++i)
            for (int j = 0; j <= g.Nx; ++j)
                over = std::max(over, std::abs(u_final(i, j)) - boundary_profile(g.x2(j), eps_final, 1.25, r64.pb.dom));
        for (int i = 0; i < g.Nt; ++i)
            for (int j = 0; j < g.Nx; ++j) {
                Vec2 p = cell_gradient(u_final, i, j);
                min_d1 = std::min(min_d1, p[0]);
                max_d2 = std::max(max_d2, std::abs(p[1]));
            }
        v.require(over <= 1e-6, "max(|u|-U) %.2e", over);
        v.require(min_d1 >= -1e-6, "min d1u %.2e", min_d1);
        v.require(max_d2 <= 1 + eps_final + 1e-6, "max |d2u| - (1+eps) %.2e", max_d2 - 1 - eps_final);
        v.require(solve64_sec < 300, "runtime %.2fs", solve64_sec);
    });

    Run r128 = solve_default(128);

    run(5, "first integral", [&](Verdict& v) {
        EnergyTrace t64 = energy_trace(r64.pb, r64.at(0.05), 0.05);
        EnergyTrace t128 = energy_trace(r128.pb, r128.at(0.05), 0.05);
        double mean = 0;
        for (size_t i = 1; i + 1 < t64.size(); ++i) mean += t64.H[i];
        mean /= static_cast<double>(t64.size() - 2);
        double d64 = first_integral_deviation(t64), d128 = first_integral_deviation(t128);
        v.require(d64 <= 1e-3 * (std::abs(mean) + 1), "deviation %.3e bound %.3e", d64, 1e-3 * (std::abs(mean) + 1));
        v.require(d64 / d128 >= 1.5, "refinement ratio %.2f", d64 / d128);
    });

    run(6, "energy dissipation", [&](Verdict& v) {
        EnergyTrace tr = energy_trace(r64.pb, r64.at(0.05), 0.05);
        DissipationReport d = dissipation_check(tr);
        v.require(d.max_rate <= 1e-3, "max d/dx1(Ekin+Epot) %.3e", d.max_rate);
        v.require(d.max_mismatch <= 1e-2 * d.row_scale, "mismatch %.3e bound %.3e", d.max_mismatch,
                  1e-2 * d.row_scale);
        Problem gp(r64.pb.dom, Grid(r64.pb.dom, 32, 32), gravity_potential(r64.pb.dom));
        SolveConfig sc;
        sc.eps_schedule = {0.2, 0.1, 0.05};
        ContinuationResult gr = continuation_solve(gp, sc);
        DissipationReport dg = dissipation_check(energy_trace(gp, gr.fields.back(), 0.05));
        v.require(dg.max_abs_rate <= 1e-3, "f=0 conservation %.3e", dg.max_abs_rate);
    });

    Run r32 = solve_default(32);

    run(7, "boundary traces", [&](Verdict& v) {
        TraceTable t = trace_attainment(u_final);
        TraceTable c = trace_attainment(r32.res.fields.back());
        double worst_b = -kInfinity;
        for (size_t k = 0; k < t.b.size(); ++k) worst_b = std::max(worst_b, t.B1[k] - 2 * t.b[k] - 2 * u_final.grid().hx);
        v.require(t.B1_bound, "max B1-(2b+2hx) %.3e", worst_b);
        v.require(t.A1_monotone && t.C1_monotone, "A1/C1 monotone %d/%d", t.A1_monotone, t.C1_monotone);
        v.require(t.A1.back() < c.A1.back(), "A1 finest 32->64 %.4f->%.4f", c.A1.back(), t.A1.back());
        v.require(t.C1.back() < c.C1.back(), "C1 finest 32->64 %.4f->%.4f", c.C1.back(), t.C1.back());
    });

    run(8, "long-time bound", [&](Verdict& v) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<TRun> runs;
        for (double T : {1.0, 2.0, 4.0}) {
            std::optional<Run> other;
            if (T != 1.0) other = solve_default(64, T);
            const Run& r = other ? *other : r64;
            EnergyTrace tr = energy_trace(r.pb, r.res.fields.back(), r.res.eps.back());
            runs.push_back({T, r.res.report.records.back().action, tr.E_kin.front(), tr.E_kin.back()});
        }
        for (const KineticJumpRow& row : kinetic_jump_vs_T(runs)) {
            v.require(row.bound_ok, "T=%g Ekin0 %.4f <= %.4f", row.T, row.c_start, row.bound + 1e-2);
            v.require(row.ends_agree, "ends %.4f/%.4f", row.c_start, row.c_end);
        }
        double sec = elapsed_since(t0);
        v.require(sec < 1200, "runtime %.1fs", sec);
    });

    run(9, "subsolution certificate", [&](Verdict& v) {
        const double et = 1e-3, tau = default_mixing_threshold(default_solver().newton_tol);
        SubsolutionFields sf = reconstruct(u_final, et, r64.pb.dom, tau);
        const int n = r64.pb.dom.n;
        double id_err = 0;
        for (int i = 0; i < sf.grid.Nt; ++i)
            for (int j = 0; j < sf.grid.Nx; ++j) {
                if (!sf.on_mask(i, j)) continue;
                double rho = sf.rho(i, j), m = sf.m(i, j);
                double lhs = n / 2.0 * (sf.e0(i, j) + rho * sf.e1(i, j));
                double rhs = m * m / (2 * (1 - rho * rho)) + n / 2.0 * et;
                id_err = std::max(id_err, std::abs(lhs - rhs) / std::abs(rhs));
            }
        v.require(id_err <= 1e-12, "identity rel %.2e", id_err);
        MembershipReport mr = verify_membership(sf, r64.pb.dom);
        v.require(mr.mask_cells > 0 && mr.min_margin() >= 1e-4 * et && mr.off_mask_violations == 0,
                  "membership margin %.3e on %d cells", mr.min_margin(), mr.mask_cells);
        AdmissibilityReport ad = admissibility(sf, r64.pb.dom);
        v.require(ad.min_interior > 0, "admissibility interior min %.4f", ad.min_interior);
        // The default mask drops moving cells at the walls, which costs an O(h) flux defect.
        const double tau_flux = 1e-6;
        double C = 0, prev = 0, ratio = kInfinity;
        for (const Run* r : {&r32, &r64, &r128}) {
            const ScalarField& u = r->res.fields.back();
            SubsolutionFields s = reconstruct(u, et, r->pb.dom, tau_flux);
            double res = continuity_residual(s, u, r->pb.dom).max_residual;
            double h = std::max(u.grid().ht, u.grid().hx);
            C = std::max(C, res / (h * h));
            if (prev > 0) ratio = std::min(ratio, prev / res);
            prev = res;
        }
        v.require(ratio >= 3.5, "continuity C %.3f, refinement ratio %.2f", C, ratio);
    });

    run(10, "two-phase equivalence", [&](Verdict& v) {
        const Domain& dom = r64.pb.dom;
        double worst = 0, rt = 0;
        auto check = [&](const CellField& rho, const CellField& m) {
            TwoPhaseFlow tp = to_two_phase(rho, m, dom);
            double A0 = stream_action(rho, m, dom);
            worst = std::max(worst, std::abs(two_phase_action(tp, dom) - A0 / (2 * dom.L)) / (1 + std::abs(A0)));
            auto [r2, m2] = from_two_phase(tp, dom);
            for (size_t k = 0; k < rho.v.size(); ++k)
                rt = std::max({rt, std::abs(r2.v[k] - rho.v[k]), std::abs(m2.v[k] - m.v[k])});
        };
        Grid g(dom, 32, 32);
        for (int s = 0; s < 5; ++s) {
            CellField rho(g), m(g);
            for (int i = 0; i < g.Nt; ++i)
                for (int j = 0; j < g.Nx; ++j) {
                    double x1 = g.x1c(i), x2 = g.x2c(j);
                    rho(i, j) = 0.9 * std::sin(1.3 * x2 + s) * std::cos(0.7 * x1 * (s + 1));
                    m(i, j) = std::cos(2 * x1 - s * x2) + 0.5 * x2;
                }
            check(rho, m);
        }
        SubsolutionFields sf = reconstruct(u_final, 1e-3, dom, default_mixing_threshold(1e-9));
        check(sf.rho, sf.m);
        v.require(worst <= 1e-12, "rel action gap %.2e", worst);
        v.require(rt <= 1e-14, "round trip %.2e", rt);
    });

    run(11, "mixing-zone topology", [&](Verdict& v) {
        ConditionReport cr = check_conditions(r64.pb.pot, r64.pb.dom);
        v.require(cr.get("V_con").pass, "V_con holds for the example potential");
        MixingZone mz = mixing_zone(u_final, default_mixing_threshold(1e-9));
        int holes = 0;
        for (int h : mz.holes) holes += h;
        v.require(mz.count() > 0, "%zu mask cells in %zu components", mz.count(), mz.components.size());
        v.require(holes == 0, "%d holes", holes);
    });

    run(12, "recovery sequence", [&](Verdict& v) {
        ScalarField w = reinterpret_in_X(r64.pb, u_final, eps_final);
        double A0 = action(r64.pb, w, 0.0);
        v.require(std::isfinite(A0), "A0 %.6f", A0);
        double prev = kInfinity, last = 0;
        bool shrinking = true;
        for (double eps : {1e-1, 3e-2, 1e-2}) {
            double gap = action(r64.pb, recovery_sequence(r64.pb, w, eps), eps) - A0;
            if (!(gap < prev)) shrinking = false;
            prev = last = gap;
            v.require(true, "gap(%g) %.4f", eps, gap);
        }
        v.require(last <= 0.05, "gap at 1e-2 %.4f <= 0.05", last);
        v.require(shrinking, "monotone shrink");
    });

    std::printf("acceptance: %d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
