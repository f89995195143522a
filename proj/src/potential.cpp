#include "lap/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lap {

namespace {

constexpr double kTol = 1e-9;

std::string fmt_point(double x2, double z) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "x2=%.6g z=%.6g", x2, z);
    return buf;
}

// (3gA/4L)(z - (|x2| - L))^2 on |z| <= L+1; beyond, d2f/dz2 is tapered to 0
// over one unit of z by a cubic smoothstep.
PotJet example_f(double x2, double z, double g, double A, double L) {
    const double k = 3 * g * A / (4 * L);
    const double ell = std::abs(x2) - L;
    const double zb = L + 1;
    auto inner = [&](double zz) {
        double d = zz - ell;
        return PotJet{k * d * d, 2 * k * d, 2 * k, 0};
    };
    if (std::abs(z) <= zb) return inner(z);
    double sgn = z > 0 ? 1.0 : -1.0;
    PotJet e = inner(sgn * zb);
    double s = std::abs(z) - zb;
    double I1, I2, tau, dtau;
    if (s < 1) {
        double s2 = s * s;
        I1 = s - s2 * s + s2 * s2 / 2;
        I2 = s2 / 2 - s2 * s2 / 4 + s2 * s2 * s / 10;
        tau = 1 - 3 * s2 + 2 * s2 * s;
        dtau = -6 * s + 6 * s2;
    } else {
        I1 = 0.5;
        I2 = 0.35 + 0.5 * (s - 1);
        tau = 0;
        dtau = 0;
    }
    PotJet r;
    r.v = e.v + e.dz * sgn * s + 2 * k * I2;
    r.dz = e.dz + sgn * 2 * k * I1;
    r.dz2 = 2 * k * tau;
    r.dz3 = sgn * 2 * k * dtau;
    return r;
}

}  // namespace

// Slices of an admissible stream function are 1-Lipschitz in x2, so the
// supremum runs over profiles with |phi'| <= 1 inside the cone. Dynamic
// programming on a z lattice of spacing h/r, where one x2 step moves at most r
// lattice cells.
SVResult compute_sV(const PotentialSpec& ps, const Domain& dom, int nq, int scan) {
    if (nq < 64) throw PreconditionError("compute_sV needs nq >= 64");
    if (scan < 3) throw PreconditionError("compute_sV needs scan >= 3");
    const int r = std::max(1, (scan - 1) / 128);
    const double L = dom.L, h = 2 * L / nq, dz = h / r;
    auto width = [&](int k) { return r * std::min(k, nq - k); };
    std::vector<std::vector<signed char>> from(nq + 1);
    std::vector<double> best(1, 0.5 * h * ps.V(-L, 0.0)), next;
    for (int k = 1; k <= nq; ++k) {
        const int w = width(k), wp = width(k - 1);
        const double x2 = -L + k * h, wt = k == nq ? 0.5 * h : h;
        next.assign(2 * w + 1, -INFINITY);
        from[k].assign(2 * w + 1, 0);
        for (int m = -w; m <= w; ++m) {
            double bv = -INFINITY;
            signed char bs = 0;
            for (int s = -r; s <= r; ++s) {
                int mp = m + s;
                if (mp < -wp || mp > wp) continue;
                double v = best[mp + wp];
                if (v > bv) {
                    bv = v;
                    bs = static_cast<signed char>(s);
                }
            }
            next[m + w] = bv + wt * ps.V(x2, m * dz);
            from[k][m + w] = bs;
        }
        best.swap(next);
    }
    SVResult res;
    res.value = best[0];
    res.x2.resize(nq + 1);
    res.argmax.resize(nq + 1);
    int m = 0;
    for (int k = nq; k >= 0; --k) {
        res.x2[k] = -L + k * h;
        res.argmax[k] = m * dz;
        if (k > 0) m += from[k][m + width(k)];
    }
    return res;
}

PotentialSpec example_potential(const Domain& dom) {
    PotentialSpec ps;
    ps.name = "example";
    ps.g = dom.g;
    ps.A = dom.A;
    ps.L = dom.L;
    const double g = dom.g, A = dom.A, L = dom.L;
    ps.f = [=](double x2, double z) { return example_f(x2, z, g, A, L); };
    ps.base = [=](double x2, double z) {
        PotJet f = example_f(x2, z, g, A, L);
        return PotJet{-g * A * z + f.v, -g * A + f.dz, f.dz2, f.dz3};
    };
    normalize_shift(ps, dom);
    return ps;
}

PotentialSpec gravity_potential(const Domain& dom) {
    PotentialSpec ps;
    ps.name = "gravity";
    ps.g = dom.g;
    ps.A = dom.A;
    ps.L = dom.L;
    const double gA = dom.g * dom.A;
    ps.f = [](double, double) { return PotJet{}; };
    ps.base = [=](double, double z) { return PotJet{-gA * z, -gA, 0, 0}; };
    normalize_shift(ps, dom);
    return ps;
}

PotentialSpec zero_potential(const Domain& dom) {
    PotentialSpec ps;
    ps.name = "zero";
    ps.g = dom.g;
    ps.A = dom.A;
    ps.L = dom.L;
    ps.base = [](double, double) { return PotJet{}; };
    return ps;
}

PotentialSpec polynomial_potential(const std::string& name, std::vector<double> c, const Domain& dom) {
    PotentialSpec ps;
    ps.name = name;
    ps.g = dom.g;
    ps.A = dom.A;
    ps.L = dom.L;
    ps.base = [c = std::move(c)](double, double z) {
        double d0 = 0, d1 = 0, d2 = 0, d3 = 0;
        for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
            d3 = d3 * z + d2;
            d2 = d2 * z + d1;
            d1 = d1 * z + d0;
            d0 = d0 * z + c[k];
        }
        return PotJet{d0, d1, 2 * d2, 6 * d3};
    };
    return ps;
}

void normalize_shift(PotentialSpec& ps, const Domain& dom, int nq) {
    ps.shift = 0;
    ps.shift = -compute_sV(ps, dom, nq).value / (2 * dom.L);
}

PotentialSpec make_potential(const std::string& name, Domain dom, const std::map<std::string, double>& ov) {
    if (auto it = ov.find("g"); it != ov.end()) dom.g = it->second;
    if (auto it = ov.find("A"); it != ov.end()) dom.A = it->second;
    if (auto it = ov.find("L"); it != ov.end()) dom.L = it->second;
    dom.validate();
    PotentialSpec ps;
    if (name == "example")
        ps = example_potential(dom);
    else if (name == "gravity")
        ps = gravity_potential(dom);
    else if (name == "zero")
        ps = zero_potential(dom);
    else
        throw PreconditionError("unknown potential '" + name + "'");
    if (auto it = ov.find("shift"); it != ov.end()) ps.shift = it->second;
    return ps;
}

bool ConditionReport::all_pass() const {
    return std::all_of(items.begin(), items.end(), [](const ConditionResult& c) { return c.pass; });
}

const ConditionResult& ConditionReport::get(const std::string& name) const {
    for (const auto& c : items)
        if (c.name == name) return c;
    throw std::out_of_range("no condition " + name);
}

static ConditionResult check_reg(const PotentialSpec& ps, const Domain& dom) {
    ConditionResult r{"V_reg", true, "V(x_2,.) is 3 times differentiable with bounded Lipschitz derivatives", "", 0};
    const double L = dom.L;
    const int nx = 201, nz = 801;
    // sup |d^k V| and z-Lipschitz quotients of d^k V on |z| <= R.
    auto sweep = [&](double R, std::array<double, 4>& sup, std::array<double, 4>& lip) {
        sup.fill(0);
        lip.fill(0);
        for (int a = 0; a < nx; ++a) {
            double x2 = -L + 2 * L * a / (nx - 1);
            PotJet prev{};
            double zp = 0;
            for (int b = 0; b < nz; ++b) {
                double z = -R + 2 * R * b / (nz - 1);
                PotJet j = ps.eval(x2, z);
                std::array<double, 4> v{j.v, j.dz, j.dz2, j.dz3}, pv{prev.v, prev.dz, prev.dz2, prev.dz3};
                for (int k = 0; k < 4; ++k) {
                    if (!std::isfinite(v[k])) sup[k] = INFINITY;
                    sup[k] = std::max(sup[k], std::abs(v[k]));
                    if (b > 0) lip[k] = std::max(lip[k], std::abs(v[k] - pv[k]) / (z - zp));
                }
                prev = j;
                zp = z;
            }
        }
    };
    std::array<double, 4> s1, l1, s2, l2;
    sweep(L + 4, s1, l1);
    sweep(L + 8, s2, l2);
    for (int k = 1; k < 4; ++k)
        if (!(s2[k] <= s1[k] * (1 + 1e-6) + kTol)) {
            r.pass = false;
            r.witness = "d^" + std::to_string(k) + "V grows with |z|: sup " + std::to_string(s1[k]) + " -> " +
                        std::to_string(s2[k]);
            r.value = s2[k];
            return r;
        }
    for (int k = 0; k < 4; ++k)
        if (!(l2[k] <= l1[k] * (1 + 1e-6) + kTol)) {
            r.pass = false;
            r.witness = "Lipschitz quotient of d^" + std::to_string(k) + "V grows with |z|";
            r.value = l2[k];
            return r;
        }
    // Derivatives against central differences.
    const double h = 1e-5;
    for (int a = 0; a < 41; ++a)
        for (int b = 0; b < 41; ++b) {
            double x2 = -L + 2 * L * (a + 0.37) / 41.5;
            double z = -(L + 3) + 2 * (L + 3) * (b + 0.29) / 41.5;
            PotJet c = ps.eval(x2, z), p = ps.eval(x2, z + h), m = ps.eval(x2, z - h);
            double e1 = std::abs((p.v - m.v) / (2 * h) - c.dz) / (1 + std::abs(c.dz));
            double e2 = std::abs((p.dz - m.dz) / (2 * h) - c.dz2) / (1 + std::abs(c.dz2));
            double e3 = std::abs((p.dz2 - m.dz2) / (2 * h) - c.dz3) / (1 + std::abs(c.dz3));
            double e = std::max({e1, e2, e3});
            if (e > 1e-4) {
                r.pass = false;
                r.witness = "derivative mismatch at " + fmt_point(x2, z);
                r.value = e;
                return r;
            }
        }
    r.value = std::max({s1[1], s1[2], s1[3]});
    return r;
}

static ConditionResult check_con(const PotentialSpec& ps, const Domain& dom) {
    ConditionResult r{"V_con", true, "\xe2\x88\x82_z^2V(x,z)\xe2\x89\xa5 0", "", INFINITY};
    const double L = dom.L;
    for (int a = 0; a < 201; ++a)
        for (int b = 0; b < 201; ++b) {
            double x2 = -L + 2 * L * a / 200, z = -(L + 1) + 2 * (L + 1) * b / 200;
            double v = ps.eval(x2, z).dz2;
            if (v < r.value) {
                r.value = v;
                r.witness = fmt_point(x2, z);
            }
        }
    r.pass = r.value >= -kTol;
    if (r.pass) r.witness.clear();
    return r;
}

static ConditionResult check_dis(const PotentialSpec& ps, const Domain& dom) {
    ConditionResult r{"V_dis", true, "\xe2\x88\x82_zf(x_2,z)>0", "", INFINITY};
    if (!ps.has_f()) {
        r.pass = false;
        r.witness = "no dissipation part f";
        return r;
    }
    const double L = dom.L;
    for (int a = 0; a < 201; ++a) {
        double x2 = -L + 2 * L * a / 200;
        double d = L - std::abs(x2);
        if (a == 0 || a == 200 || d <= 0) continue;
        for (int b = 0; b < 201; ++b) {
            double z = -d + 2 * d * (b + 1) / 202;
            double v = ps.f(x2, z).dz;
            if (v < r.value) {
                r.value = v;
                r.witness = fmt_point(x2, z);
            }
        }
    }
    r.pass = r.value > kTol;
    if (r.pass) r.witness.clear();
    return r;
}

static ConditionResult check_sup(const PotentialSpec& ps, const Domain& dom) {
    ConditionResult r{"V_sup", true, "s_V=0 and s_V=\xe2\x88\xab V(x_2,\xcf\x86) if and only if \xcf\x86=\xc2\xb1(L-|x_2|)",
                      "", 0};
    const int nq = 3072;
    SVResult sv = compute_sV(ps, dom, nq);
    r.value = sv.value;
    const double L = dom.L, h = 2 * L / nq;
    double up = 0, lo = 0, worst = 0, wx = 0;
    for (int k = 0; k <= nq; ++k) {
        double x2 = -L + k * h, d = (k == 0 || k == nq) ? 0 : L - std::abs(x2);
        double vu = ps.V(x2, d), vl = ps.V(x2, -d);
        double w = (k == 0 || k == nq) ? 0.5 : 1.0;
        up += w * vu;
        lo += w * vl;
        if (std::abs(vu - vl) > worst) {
            worst = std::abs(vu - vl);
            wx = x2;
        }
    }
    up *= h;
    lo *= h;
    char buf[256];
    if (std::abs(sv.value) > kTol) {
        r.pass = false;
        std::snprintf(buf, sizeof buf, "s_V=%.10g", sv.value);
        r.witness = buf;
    } else if (double tol = std::max(kTol, 10 * h * h); std::abs(up - sv.value) > tol || std::abs(lo - sv.value) > tol) {
        r.pass = false;
        std::snprintf(buf, sizeof buf,
                      "int V(+cone)=%.10g int V(-cone)=%.10g below s_V=%.3g; cones disagree most at x2=%.6g "
                      "(|dV|=%.6g)",
                      up, lo, sv.value, wx, worst);
        r.witness = buf;
    }
    return r;
}

ConditionReport check_conditions(const PotentialSpec& ps, const Domain& dom) {
    ConditionReport rep;
    rep.items.push_back(check_reg(ps, dom));
    rep.items.push_back({"V_aut", true, "V does not depend on x_1", "", 0});
    rep.items.push_back(check_con(ps, dom));
    rep.items.push_back(check_dis(ps, dom));
    rep.items.push_back(check_sup(ps, dom));
    return rep;
}

}  // namespace lap
