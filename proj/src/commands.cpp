#include "lap/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "lap/analysis.hpp"
#include "lap/subsolution.hpp"

namespace lap {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string field_name(size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "field_%02zu.txt", k);
    return buf;
}

void write_report(const fs::path& path, const ContinuationResult& res, bool converged) {
    std::ofstream os(path);
    os << "status " << (converged ? "converged" : "nonconverged") << "\n";
    os << "eps action grad_norm iterations line_search_steps el_residual converged field\n";
    for (size_t k = 0; k < res.report.records.size(); ++k) {
        const SolveRecord& r = res.report.records[k];
        os << fmt(r.eps) << ' ' << fmt(r.action) << ' ' << fmt(r.grad_norm) << ' ' << r.iterations << ' '
           << r.line_search_steps << ' ' << fmt(r.el_residual) << ' ' << (r.converged ? 1 : 0) << ' '
           << field_name(k) << '\n';
    }
}

struct SolveOutcome {
    int code = kExitOk;
    ContinuationResult res;
};

SolveOutcome solve_into(const RunConfig& cfg, const fs::path& dir, std::ostream* log) {
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "config.txt");
        write_config(os, cfg);
    }
    Problem pb = cfg.problem();
    SolveOutcome out;
    bool failed = false;
    try {
        out.res = continuation_solve(pb, cfg.solver, [&](const ContinuationResult& partial) { out.res = partial; });
    } catch (const NonConvergence& e) {
        failed = true;
        out.res.eps.push_back(e.record.eps);
        out.res.fields.push_back(e.last);
        if (log) *log << "non-convergence: " << e.what() << "\n";
    }
    for (size_t k = 0; k < out.res.fields.size(); ++k) save_field((dir / field_name(k)).string(), out.res.fields[k]);
    write_report(dir / "report.txt", out.res, !failed);
    if (cfg.energy_csv && !out.res.fields.empty()) {
        std::ofstream os(dir / "energy.csv");
        write_energy_csv(os, energy_trace(pb, out.res.fields.back(), out.res.eps.back()));
    }
    if (log)
        for (const SolveRecord& r : out.res.report.records)
            *log << "eps " << fmt(r.eps) << " action " << fmt(r.action) << " iterations " << r.iterations
                 << (r.converged ? "" : " (not converged)") << "\n";
    out.code = failed ? kExitNonConvergence : kExitOk;
    return out;
}

struct SolveDir {
    RunConfig cfg;
    double eps = 0;
    bool converged = false;
    ScalarField u;
};

SolveDir load_solve_dir(const fs::path& dir) {
    SolveDir sd;
    sd.cfg = load_config((dir / "config.txt").string());
    std::ifstream is(dir / "report.txt");
    if (!is) throw PreconditionError("missing report.txt in " + dir.string());
    std::string line, status, file;
    std::getline(is, line);
    std::istringstream(line) >> status >> status;
    sd.converged = status == "converged";
    std::getline(is, line);
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string e, skip;
        ls >> e;
        for (int k = 0; k < 6; ++k) ls >> skip;
        ls >> file;
        sd.eps = std::strtod(e.c_str(), nullptr);
    }
    if (file.empty()) throw PreconditionError("report.txt lists no fields");
    sd.u = load_field((dir / file).string());
    return sd;
}

}  // namespace

std::string format_check(const CheckLine& c) {
    char buf[160];
    const char* verdict = !c.asserted ? "INFO" : (c.pass ? "PASS" : "FAIL");
    std::snprintf(buf, sizeof buf, "%-24s value=% .6e bound=% .6e %s", c.name.c_str(), c.value, c.bound, verdict);
    return buf;
}

int cmd_solve(const RunConfig& cfg, const std::string& out, std::ostream& log) {
    return solve_into(cfg, out, &log).code;
}

std::vector<CheckLine> verify_checks(const std::string& dir_s) {
    const fs::path dir(dir_s);
    SolveDir sd = load_solve_dir(dir);
    std::vector<CheckLine> out;
    auto add = [&](std::string name, double value, double bound, bool pass, bool asserted = true) {
        out.push_back({std::move(name), value, bound, pass, asserted});
    };
    const ScalarField& u = sd.u;
    add("solver_converged", sd.converged ? 1 : 0, 1, sd.converged);
    if (!u.all_finite()) {
        add("field_finite", 0, 1, false);
        return out;
    }
    add("field_finite", 1, 1, true);

    const RunConfig& cfg = sd.cfg;
    const Domain& dom = cfg.domain;
    if (!u.grid().same_shape(cfg.grid())) {
        add("grid_shape", 0, 1, false);
        return out;
    }
    Problem pb = cfg.problem();
    const Grid& g = u.grid();
    const double eps = sd.eps, beta = cfg.beta;

    double trace = 0, maxp = -INFINITY, min_d1 = INFINITY, max_d2 = 0;
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Nx; ++j) {
            double U = boundary_profile(g.x2(j), eps, beta, dom);
            maxp = std::max(maxp, std::abs(u(i, j)) - U);
            if (i == 0) trace = std::max(trace, std::abs(u(i, j) + U));
            if (i == g.Nt) trace = std::max(trace, std::abs(u(i, j) - U));
            if (j == 0 || j == g.Nx) trace = std::max(trace, std::abs(u(i, j)));
        }
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            Vec2 p = cell_gradient(u, i, j);
            min_d1 = std::min(min_d1, p[0]);
            max_d2 = std::max(max_d2, std::abs(p[1]));
        }
    add("boundary_traces", trace, 1e-12, trace <= 1e-12);
    add("max_principle", maxp, 1e-6, maxp <= 1e-6);
    add("monotone_x1", -min_d1, 1e-6, -min_d1 <= 1e-6);
    add("slope_bound", max_d2 - 1 - eps, 1e-6, max_d2 - 1 - eps <= 1e-6);

    EnergyTrace tr = energy_trace(pb, u, eps);
    double meanH = 0;
    for (double h : tr.H) meanH += h;
    meanH /= static_cast<double>(tr.size());
    double dev = first_integral_deviation(tr);
    double dev_bound = 1e-3 * (std::abs(meanH) + 1);
    add("first_integral", dev, dev_bound, dev <= dev_bound);
    DissipationReport dr = dissipation_check(tr);
    if (pb.pot.has_f()) {
        add("energy_dissipation", dr.max_rate, 1e-3, dr.max_rate <= 1e-3);
        double mis = dr.max_mismatch / std::max(dr.row_scale, 1e-300);
        add("dissipation_mismatch", mis, 1e-2, mis <= 1e-2);
    } else {
        add("energy_conservation", dr.max_abs_rate, 1e-3, dr.max_abs_rate <= 1e-3);
    }

    TraceTable tt = trace_attainment(u);
    add("trace_A1_monotone", tt.A1_monotone, 1, tt.A1_monotone);
    add("trace_C1_monotone", tt.C1_monotone, 1, tt.C1_monotone);
    add("trace_B1_bound", tt.B1_bound, 1, tt.B1_bound);

    const double tau = cfg.tau();
    MixingZone mz = mixing_zone(u, tau);
    int holes = 0;
    for (int h : mz.holes) holes += h;
    add("mixing_nonempty", static_cast<double>(mz.count()), 1, mz.count() > 0);
    add("mixing_hole_free", holes, 0, holes == 0);

    try {
        SubsolutionFields sf = reconstruct(u, cfg.e_tilde, dom, tau);
        double kid = 0;
        for (int i = 0; i < g.Nt; ++i)
            for (int j = 0; j < g.Nx; ++j) {
                if (!sf.on_mask(i, j)) continue;
                double r = sf.rho(i, j), m = sf.m(i, j);
                double lhs = sf.n / 2.0 * (sf.e0(i, j) + r * sf.e1(i, j));
                double rhs = m * m / (2 * (1 - r * r)) + sf.n / 2.0 * sf.e_tilde(i, j);
                kid = std::max(kid, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
        add("kinetic_identity", kid, 1e-12, kid <= 1e-12);
        MembershipReport mr = verify_membership(sf, dom);
        add("membership_margin", mr.min_margin(), 1e-4 * cfg.e_tilde,
            mr.min_margin() >= 1e-4 * cfg.e_tilde && mr.mask_violations == 0);
        add("membership_off_mask", mr.off_mask_violations, 0, mr.off_mask_violations == 0);
        AdmissibilityReport ad = admissibility(sf, dom);
        add("admissibility_interior", ad.min_interior, 0, ad.min_interior > 0);
        add("admissibility_first", ad.margins.front(), 0, ad.margins.front() > 0, false);
        add("admissibility_last", ad.margins.back(), 0, ad.margins.back() > 0, false);
        ContinuityResidual cr = continuity_residual(sf, u, dom);
        double h2 = std::max(g.ht, g.hx) * std::max(g.ht, g.hx);
        add("continuity_residual", cr.max_residual, 10 * h2, cr.max_residual <= 10 * h2);
        TwoPhaseFlow tp = to_two_phase(sf.rho, sf.m, dom);
        double A0 = stream_action(sf.rho, sf.m, dom);
        double gap = std::abs(two_phase_action(tp, dom) - A0 / (2 * dom.L));
        add("two_phase_action", gap, 1e-12 * (1 + std::abs(A0)), gap <= 1e-12 * (1 + std::abs(A0)));
        auto [rho2, m2] = from_two_phase(tp, dom);
        double rt = 0;
        for (size_t k = 0; k < rho2.v.size(); ++k)
            rt = std::max({rt, std::abs(rho2.v[k] - sf.rho.v[k]), std::abs(m2.v[k] - sf.m.v[k])});
        add("two_phase_roundtrip", rt, 1e-14, rt <= 1e-14);
    } catch (const DegenerateError& e) {
        add("subsolution_reconstruct", static_cast<double>(e.cells.size()), 0, false);
    }
    return out;
}

int cmd_verify(const std::string& dir, std::ostream& log) {
    std::vector<CheckLine> checks;
    try {
        checks = verify_checks(dir);
    } catch (const std::exception& e) {
        log << "verify: " << e.what() << "\n";
        return kExitInput;
    }
    std::ofstream rep(fs::path(dir) / "verification.txt");
    bool ok = true;
    for (const CheckLine& c : checks) {
        std::string s = format_check(c);
        rep << s << "\n";
        log << s << "\n";
        if (c.asserted && !c.pass) ok = false;
    }
    return ok ? kExitOk : kExitVerification;
}

int cmd_sweep_T(const RunConfig& cfg, const std::vector<double>& Ts, int threads, const std::string& out,
                std::ostream& log) {
    if (std::none_of(Ts.begin(), Ts.end(), [](double T) { return std::abs(T - 1) < 1e-12; })) {
        log << "sweep-T: the T list must contain 1\n";
        return kExitInput;
    }
    const double T0 = cfg.domain.T;
    std::vector<RunConfig> cfgs;
    for (double T : Ts) {
        RunConfig c = cfg;
        c.domain.T = T;
        c.Nt = std::max(2, static_cast<int>(std::lround(cfg.Nt * T / T0)));
        c.out_dir = (fs::path(out) / ("T_" + fmt(T))).string();
        c.validate();
        cfgs.push_back(c);
    }
    std::vector<TRun> runs(Ts.size());
    std::vector<int> codes(Ts.size(), kExitOk);
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t k; (k = next++) < cfgs.size();) {
            SolveOutcome so = solve_into(cfgs[k], cfgs[k].out_dir, nullptr);
            codes[k] = so.code;
            if (so.code != kExitOk || so.res.fields.empty()) continue;
            Problem pb = cfgs[k].problem();
            EnergyTrace tr = energy_trace(pb, so.res.fields.back(), so.res.eps.back());
            runs[k] = {Ts[k], so.res.report.records.back().action, tr.E_kin.front(), tr.E_kin.back()};
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, threads); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::vector<TRun> done;
    for (size_t k = 0; k < Ts.size(); ++k) {
        if (codes[k] == kExitOk) done.push_back(runs[k]);
        log << "T " << fmt(Ts[k]) << (codes[k] == kExitOk ? " solved" : " failed") << "\n";
    }
    bool all_ok = done.size() == Ts.size();
    std::ofstream csv(fs::path(out) / "kinetic_jump.csv");
    csv << "T,c_start,c_end,bound,bound_ok,ends_agree\n";
    if (std::any_of(done.begin(), done.end(), [](const TRun& r) { return std::abs(r.T - 1) < 1e-12; })) {
        for (const KineticJumpRow& r : kinetic_jump_vs_T(done)) {
            csv << fmt(r.T) << ',' << fmt(r.c_start) << ',' << fmt(r.c_end) << ',' << fmt(r.bound) << ','
                << r.bound_ok << ',' << r.ends_agree << '\n';
            log << "T " << fmt(r.T) << " c_start " << fmt(r.c_start) << " bound " << fmt(r.bound)
                << (r.bound_ok && r.ends_agree ? " ok" : " violated") << "\n";
            if (!r.bound_ok || !r.ends_agree) all_ok = false;
        }
    }
    if (done.size() != Ts.size()) return kExitNonConvergence;
    return all_ok ? kExitOk : kExitVerification;
}

int cmd_check_potential(const RunConfig& cfg, const std::string& out, std::ostream& log) {
    PotentialSpec ps = cfg.make_potential();
    ConditionReport rep = check_conditions(ps, cfg.domain);
    fs::create_directories(out);
    std::ofstream os(fs::path(out) / "conditions.txt");
    for (const ConditionResult& c : rep.items) {
        std::string line = c.name + " " + (c.pass ? "PASS" : "FAIL") + " value=" + fmt(c.value);
        if (!c.witness.empty()) line += " witness: " + c.witness;
        os << line << "\n";
        log << line << "\n";
    }
    return rep.all_pass() ? kExitOk : kExitVerification;
}

int cmd_oracle(const RunConfig& cfg, const std::string& out, std::ostream& log) {
    Problem pb = cfg.problem();
    if (pb.grid.interior_count() > 25) {
        log << "oracle: grid too large (" << pb.grid.interior_count() << " interior nodes, limit 25)\n";
        return kExitInput;
    }
    const double eps = cfg.solver.eps_schedule.front();
    ScalarField u0 = initial_guess(eps, cfg.domain, pb.grid, cfg.beta);
    double newton_action = 0;
    try {
        newton_action = newton_solve(pb, u0, eps, cfg.solver).second.action;
    } catch (const NonConvergence& e) {
        log << "oracle: newton did not converge: " << e.what() << "\n";
        return kExitNonConvergence;
    }
    OracleResult orc = oracle_minimize(pb, eps, cfg.seed, cfg.oracle_restarts);
    auto [lo, hi] = std::minmax_element(orc.restart_actions.begin(), orc.restart_actions.end());
    double diff = std::abs(newton_action - orc.action);
    double tol = 1e-6 * (1 + std::abs(orc.action));
    double spread = *hi - *lo;
    fs::create_directories(out);
    std::ofstream os(fs::path(out) / "oracle.txt");
    std::vector<CheckLine> lines = {{"newton_action", newton_action, 0, true, false},
                                    {"oracle_action", orc.action, 0, true, false},
                                    {"action_agreement", diff, tol, diff <= tol},
                                    {"restart_spread", spread, 1e-7, spread <= 1e-7}};
    bool ok = true;
    for (const CheckLine& c : lines) {
        os << format_check(c) << "\n";
        log << format_check(c) << "\n";
        if (c.asserted && !c.pass) ok = false;
    }
    return ok ? kExitOk : kExitVerification;
}

}  // namespace lap
