#include "lap/integrand.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace lap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGolden = 0.6180339887498949;

double sq(double x) { return x * x; }

// Golden-section maximization of f on [lo, hi].
template <class Fn>
double golden_max(Fn&& f, double lo, double hi, double tol) {
    double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

Sym2 add(const Sym2& a, const Sym2& b) { return {a.a11 + b.a11, a.a12 + b.a12, a.a22 + b.a22}; }
Sym2 scale(const Sym2& a, double s) { return {a.a11 * s, a.a12 * s, a.a22 * s}; }

}  // namespace

double Sym2::min_eig() const {
    double m = 0.5 * (a11 + a22), d = std::hypot(0.5 * (a11 - a22), a12);
    return m - d;
}

double Sym2::max_eig() const {
    double m = 0.5 * (a11 + a22), d = std::hypot(0.5 * (a11 - a22), a12);
    return m + d;
}

void RegularizationParams::validate() const {
    if (!(eps > 0 && eps < 1)) throw DomainError("eps must lie in (0,1)");
    if (!(theta > 1 && theta < 2)) throw DomainError("theta must lie in (1,2)");
    if (!(beta > 1 && beta < 3 - theta)) throw DomainError("beta must lie in (1, 3-theta)");
}

double RegularizationParams::c() const { return std::pow(eps, theta); }

SafeBox SafeBox::of(const RegularizationParams& rp) {
    SafeBox b;
    b.p1_max = std::min(std::pow(rp.eps, -4 * rp.theta), 64.0);
    double gap = std::max(std::pow(rp.eps, 4 * rp.theta), 0.5 * (rp.eps - std::pow(rp.eps, rp.beta)));
    b.p2_max = rp.s0() - gap;
    return b;
}

bool SafeBox::contains(const Vec2& p) const {
    return std::abs(p[0]) <= p1_max && std::abs(p[1]) <= p2_max;
}

double F(const Vec2& p) {
    if (p[0] == 0.0) return 0.0;
    if (std::abs(p[1]) >= 1.0) return kInfinity;
    return p[0] * p[0] / (2 * (1 - p[1] * p[1]));
}

static double strip_sigma(const Vec2& p, const RegularizationParams& rp) {
    double S = sq(rp.s0());
    double sg = S - p[1] * p[1];
    if (!(sg > 0)) throw DomainError("|p2| >= 1 + eps in F_eps");
    return sg;
}

double F_eps(const Vec2& p, const RegularizationParams& rp) {
    return (p[0] * p[0] + rp.c()) / (2 * strip_sigma(p, rp));
}

Vec2 grad_F_eps(const Vec2& p, const RegularizationParams& rp) {
    double sg = strip_sigma(p, rp);
    return {p[0] / sg, (p[0] * p[0] + rp.c()) * p[1] / (sg * sg)};
}

Sym2 hess_F_eps(const Vec2& p, const RegularizationParams& rp) {
    double sg = strip_sigma(p, rp), S = sq(rp.s0());
    double num = p[0] * p[0] + rp.c();
    return {1 / sg, 2 * p[0] * p[1] / (sg * sg), num * (S + 3 * p[1] * p[1]) / (sg * sg * sg)};
}

Jet F_eps_jet(const Vec2& p, const RegularizationParams& rp) {
    double sg = strip_sigma(p, rp), S = sq(rp.s0());
    double num = p[0] * p[0] + rp.c();
    Jet j;
    j.value = num / (2 * sg);
    j.grad = {p[0] / sg, num * p[1] / (sg * sg)};
    j.hess = {1 / sg, 2 * p[0] * p[1] / (sg * sg), num * (S + 3 * p[1] * p[1]) / (sg * sg * sg)};
    return j;
}

Sym2 d3_F_eps(const Vec2& p, const Vec2& v, const RegularizationParams& rp) {
    double sg = strip_sigma(p, rp), S = sq(rp.s0());
    double p1 = p[0], p2 = p[1];
    double f112 = 2 * p2 / (sg * sg);
    double f122 = 2 * p1 * (S + 3 * p2 * p2) / (sg * sg * sg);
    double f222 = 12 * p2 * (S + p2 * p2) * (p1 * p1 + rp.c()) / (sg * sg * sg * sg);
    return {f112 * v[1], f112 * v[0] + f122 * v[1], f122 * v[0] + f222 * v[1]};
}

double lambda_eps(const RegularizationParams& rp) {
    double S = sq(rp.s0());
    return std::min(1 / S, rp.c() / (S * S));
}

Jet smooth_max(const Jet& a, const Jet& b, double tau) {
    double x = (a.value - b.value) / (2 * tau);
    if (x >= 1) return a;
    if (x <= -1) return b;
    double x2 = x * x;
    double m = (-x2 * x2 + 6 * x2 + 3) / 8;
    double m1 = (-4 * x2 * x + 12 * x) / 8;
    double m2 = (-12 * x2 + 12) / 8;
    double wa = 0.5 + 0.5 * m1, wb = 0.5 - 0.5 * m1;
    Vec2 d{a.grad[0] - b.grad[0], a.grad[1] - b.grad[1]};
    double k = m2 / (4 * tau);
    Jet r;
    r.value = 0.5 * (a.value + b.value) + tau * m;
    r.grad = {wa * a.grad[0] + wb * b.grad[0], wa * a.grad[1] + wb * b.grad[1]};
    r.hess = add(add(scale(a.hess, wa), scale(b.hess, wb)), Sym2{k * d[0] * d[0], k * d[0] * d[1], k * d[1] * d[1]});
    return r;
}

EllipseSupport::EllipseSupport(const RegularizationParams& rp, double a, double b, int scan, bool newton)
    : rp_(rp), a_(a), b_(b), scan_(scan), newton_(newton) {}

double EllipseSupport::ell(double t, const Vec2& p) const {
    Vec2 q{a_ * std::cos(t), b_ * std::sin(t)};
    Jet f = F_eps_jet(q, rp_);
    return f.value + f.grad[0] * (p[0] - q[0]) + f.grad[1] * (p[1] - q[1]);
}

double EllipseSupport::argmax(const Vec2& p) const {
    const double h = kTwoPi / scan_;
    int best = 0;
    double bv = -kInfinity;
    for (int k = 0; k < scan_; ++k) {
        double v = ell(k * h, p);
        if (v > bv) {
            bv = v;
            best = k;
        }
    }
    double t0 = best * h;
    auto f = [&](double t) { return ell(t, p); };
    if (!newton_) return golden_max(f, t0 - h, t0 + h, 1e-10);

    double t = t0;
    for (int it = 0; it < 50; ++it) {
        Vec2 q{a_ * std::cos(t), b_ * std::sin(t)};
        Vec2 dq{-a_ * std::sin(t), b_ * std::cos(t)};
        Vec2 r{p[0] - q[0], p[1] - q[1]};
        Sym2 H = hess_F_eps(q, rp_);
        Sym2 T3 = d3_F_eps(q, dq, rp_);
        double l1 = H.quad(r, dq);
        double l2 = -H.quad(dq, dq) + T3.quad(r, dq) - H.quad(r, q);
        if (!(l2 < 0)) return golden_max(f, t0 - h, t0 + h, 1e-12);
        double step = -l1 / l2;
        step = std::clamp(step, -h, h);
        t += step;
        if (std::abs(t - t0) > 2 * h) return golden_max(f, t0 - h, t0 + h, 1e-12);
        if (std::abs(step) < 1e-15) break;
    }
    return t;
}

double EllipseSupport::value(const Vec2& p) const { return ell(argmax(p), p); }

Jet EllipseSupport::eval(const Vec2& p) const {
    double t = argmax(p);
    Vec2 q{a_ * std::cos(t), b_ * std::sin(t)};
    Vec2 dq{-a_ * std::sin(t), b_ * std::cos(t)};
    Vec2 r{p[0] - q[0], p[1] - q[1]};
    Jet f = F_eps_jet(q, rp_);
    Sym2 T3 = d3_F_eps(q, dq, rp_);
    double l2 = -f.hess.quad(dq, dq) + T3.quad(r, dq) - f.hess.quad(r, q);
    Vec2 v = f.hess.mul(dq);
    Jet j;
    j.value = f.value + f.grad[0] * r[0] + f.grad[1] * r[1];
    j.grad = f.grad;
    double k = l2 < 0 ? -1.0 / l2 : 0.0;
    j.hess = {k * v[0] * v[0], k * v[0] * v[1], k * v[1] * v[1]};
    return j;
}

static double fast_bE(const RegularizationParams& rp, const SafeBox& box) {
    return rp.s0() - 0.5 * (rp.s0() - box.p2_max);
}

FastExtension::FastExtension(const RegularizationParams& rp)
    : rp_(rp), box_(SafeBox::of(rp)), bE_(fast_bE(rp, box_)), support_(rp, 1, 1, 64, true) {
    rp.validate();
    double gap = rp.s0() - box_.p2_max;
    w_ = std::min(gap / (4 * rp.s0()), 0.05);
    double r = 1 - 2 * w_ - sq(box_.p2_max / bE_);
    if (!(r > 0)) throw DomainError("degenerate extension ellipse");
    a_ = box_.p1_max / std::sqrt(r);
    kappa_ = 0.5 * kLambda0 * a_ * a_ * 1.05;
    tau_ = kappa_ * w_ / 4;
    support_ = EllipseSupport(rp, a_, bE_, 64, true);
}

Jet FastExtension::eval(const Vec2& p) const {
    double Q = sq(p[0] / a_) + sq(p[1] / bE_);
    if (Q <= 1 - w_) return F_eps_jet(p, rp_);
    Jet chk = Q <= 1 ? F_eps_jet(p, rp_) : support_.eval(p);
    chk.value += kappa_ * (Q - 1);
    chk.grad[0] += kappa_ * 2 * p[0] / (a_ * a_);
    chk.grad[1] += kappa_ * 2 * p[1] / (bE_ * bE_);
    chk.hess.a11 += kappa_ * 2 / (a_ * a_);
    chk.hess.a22 += kappa_ * 2 / (bE_ * bE_);
    if (Q < 1 + w_) return smooth_max(F_eps_jet(p, rp_), chk, tau_);
    return chk;
}

Jet F_hat_fast(const Vec2& p, const RegularizationParams& rp) { return FastExtension(rp).eval(p); }

// Gauss-Legendre nodes on [-1,1] with bump-kernel weights normalized to 1.
static void kernel_rule(int n, std::vector<double>& x, std::vector<double>& w) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1);
        J(k, k - 1) = J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(n);
    w.resize(n);
    double total = 0;
    for (int k = 0; k < n; ++k) {
        x[k] = es.eigenvalues()(k);
        double gl = 2 * sq(es.eigenvectors()(0, k));
        w[k] = gl * std::exp(-1 / (1 - x[k] * x[k]));
        total += w[k];
    }
    for (double& v : w) v /= total;
}

static void level_axes(const RegularizationParams& rp, double N, double& A, double& B, double& M) {
    double S = sq(rp.s0()), c = rp.c();
    M = 2 * N * S - c;
    A = std::sqrt(M);
    B = std::sqrt(S - c / (2 * N));
}

ReferenceExtension::ReferenceExtension(const RegularizationParams& rp, const ReferenceExtensionParams& rep)
    : rp_(rp), rep_(rep), support_(rp, 1, 1, 256, false) {
    rp.validate();
    level_axes(rp, rep.N, A_, B_, M_);
    support_ = EllipseSupport(rp, A_, B_, 256, false);
    kernel_rule(rep.quad_points, nodes_, weights_);
}

double ReferenceExtension::Q(const Vec2& p) const { return (p[0] * p[0] + 2 * rep_.N * p[1] * p[1]) / M_; }

double ReferenceExtension::distance_to_level(const Vec2& p) const {
    auto d2 = [&](double t) { return sq(p[0] - A_ * std::cos(t)) + sq(p[1] - B_ * std::sin(t)); };
    const int n = 256;
    const double h = kTwoPi / n;
    int best = 0;
    double bv = kInfinity;
    for (int k = 0; k < n; ++k) {
        double v = d2(k * h);
        if (v < bv) {
            bv = v;
            best = k;
        }
    }
    double t = golden_max([&](double s) { return -d2(s); }, (best - 1) * h, (best + 1) * h, 1e-10);
    return std::sqrt(std::min(d2(t), bv));
}

double ReferenceExtension::F_tilde(const Vec2& p) const {
    if (Q(p) <= 1) return F_eps(p, rp_);
    return support_.value(p);
}

Jet ReferenceExtension::F_tilde_jet(const Vec2& p) const {
    if (Q(p) <= 1) return F_eps_jet(p, rp_);
    return support_.eval(p);
}

Jet ReferenceExtension::F_check(const Vec2& p) const {
    Jet r;
    const double eta = rep_.moll_radius;
    for (size_t a = 0; a < nodes_.size(); ++a)
        for (size_t b = 0; b < nodes_.size(); ++b) {
            double w = weights_[a] * weights_[b];
            Jet j = F_tilde_jet({p[0] - eta * nodes_[a], p[1] - eta * nodes_[b]});
            r.value += w * j.value;
            r.grad[0] += w * j.grad[0];
            r.grad[1] += w * j.grad[1];
            r.hess = add(r.hess, scale(j.hess, w));
        }
    double k = rep_.N / 4;
    r.value += k * (Q(p) - 1);
    r.grad[0] += k * 2 * p[0] / M_;
    r.grad[1] += k * 4 * rep_.N * p[1] / M_;
    r.hess.a11 += k * 2 / M_;
    r.hess.a22 += k * 4 * rep_.N / M_;
    return r;
}

Jet ReferenceExtension::eval(const Vec2& p) const {
    const double delta = rep_.blend_radius;
    double q = Q(p);
    double sq_q = std::sqrt(q);
    // Cheap lower bound on the distance to the level ellipse.
    double lower = std::abs(1 - sq_q) * std::min(A_, B_);
    double d = lower >= delta ? lower : distance_to_level(p);
    if (q <= 1 && d >= delta) return F_eps_jet(p, rp_);
    if (d < delta) return smooth_max(F_eps_jet(p, rp_), F_check(p), rep_.blend_width);
    return F_check(p);
}

double ReferenceExtension::blend_margin() const {
    const double delta = rep_.blend_radius;
    double worst = kInfinity;
    const int n = 256;
    for (int k = 0; k < n; ++k) {
        double t = kTwoPi * k / n;
        Vec2 q{A_ * std::cos(t), B_ * std::sin(t)};
        Vec2 nv{q[0] / (A_ * A_), q[1] / (B_ * B_)};
        double nn = std::hypot(nv[0], nv[1]);
        nv = {nv[0] / nn, nv[1] / nn};
        Vec2 pin{q[0] - delta * nv[0], q[1] - delta * nv[1]};
        Vec2 pout{q[0] + delta * nv[0], q[1] + delta * nv[1]};
        if (std::abs(pout[1]) >= rp_.s0()) return -1;
        double mi = F_eps(pin, rp_) - F_check(pin).value;
        double mo = F_check(pout).value - F_eps(pout, rp_);
        worst = std::min({worst, mi / delta, mo / delta});
    }
    return worst;
}

ReferenceExtensionParams make_reference_params(const RegularizationParams& rp, int quad_points, double p1_box) {
    rp.validate();
    if (quad_points < 2) throw DomainError("quad_points must be at least 2");
    SafeBox box = SafeBox::of(rp);
    ReferenceExtensionParams rep;
    rep.quad_points = quad_points;
    rep.p1_box = p1_box;
    rep.N = F_eps({p1_box, box.p2_max}, rp) + 1;
    double A, B, M;
    level_axes(rp, rep.N, A, B, M);

    // Distance from the box to the level ellipse.
    double dbox = kInfinity;
    const int n = 4096;
    for (int k = 0; k < n; ++k) {
        double t = kTwoPi * k / n;
        double e1 = A * std::cos(t), e2 = B * std::sin(t);
        double c1 = std::clamp(e1, -p1_box, p1_box), c2 = std::clamp(e2, -box.p2_max, box.p2_max);
        dbox = std::min(dbox, std::hypot(e1 - c1, e2 - c2));
    }
    double delta = 0.5 * std::min(dbox, rp.s0() - B);
    for (int it = 0; it < 60; ++it) {
        rep.blend_radius = delta;
        rep.moll_radius = delta / 4;
        double C = ReferenceExtension(rp, rep).blend_margin();
        if (C > 0) {
            rep.blend_width = C * delta / 8;
            return rep;
        }
        delta *= 0.5;
    }
    throw DomainError("no admissible blend radius for the reference extension");
}

double F_tilde_reference(const Vec2& p, const RegularizationParams& rp, const ReferenceExtensionParams& rep) {
    return ReferenceExtension(rp, rep).F_tilde(p);
}

double F_hat_reference(const Vec2& p, const RegularizationParams& rp, const ReferenceExtensionParams& rep) {
    return ReferenceExtension(rp, rep).eval(p).value;
}

}  // namespace lap
