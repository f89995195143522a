#pragma once

#include <limits>
#include <vector>

#include "lap/grid.hpp"

namespace lap {

struct Sym2 {
    double a11 = 0, a12 = 0, a22 = 0;

    double min_eig() const;
    double max_eig() const;
    double det() const { return a11 * a22 - a12 * a12; }
    Vec2 mul(const Vec2& v) const { return {a11 * v[0] + a12 * v[1], a12 * v[0] + a22 * v[1]}; }
    double quad(const Vec2& v, const Vec2& w) const {
        return v[0] * (a11 * w[0] + a12 * w[1]) + v[1] * (a12 * w[0] + a22 * w[1]);
    }
};

// Value, gradient and Hessian of an integrand at one point.
struct Jet {
    double value = 0;
    Vec2 grad{0, 0};
    Sym2 hess;
};

inline constexpr double kLambda0 = 1.0 / 128.0;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct RegularizationParams {
    double eps = 0.1;
    double theta = 1.5;
    double beta = 1.25;

    void validate() const;
    double c() const;   // eps^theta
    double s0() const { return 1.0 + eps; }
};

// K^eps. p1_max is capped at 64, see README.
struct SafeBox {
    double p1_max = 0;
    double p2_max = 0;

    static SafeBox of(const RegularizationParams& rp);
    bool contains(const Vec2& p) const;
};

double F(const Vec2& p);

double F_eps(const Vec2& p, const RegularizationParams& rp);
Vec2 grad_F_eps(const Vec2& p, const RegularizationParams& rp);
Sym2 hess_F_eps(const Vec2& p, const RegularizationParams& rp);
Jet F_eps_jet(const Vec2& p, const RegularizationParams& rp);
// Contraction of the third derivative with v: (sum_k F_ijk v_k)_ij.
Sym2 d3_F_eps(const Vec2& p, const Vec2& v, const RegularizationParams& rp);
// Smallest eigenvalue of D^2 F_eps over the strip, attained at p = 0.
double lambda_eps(const RegularizationParams& rp);

// Smooth maximum of two jets; equals the larger one when they differ by >= 2 tau.
Jet smooth_max(const Jet& a, const Jet& b, double tau);

// Support function of F_eps along the ellipse (a cos t, b sin t), i.e.
// sup_t F(q) + grad F(q).(p - q), with derivatives through the maximizer.
class EllipseSupport {
public:
    EllipseSupport(const RegularizationParams& rp, double a, double b, int scan, bool newton);
    Jet eval(const Vec2& p) const;
    double value(const Vec2& p) const;

private:
    double ell(double t, const Vec2& p) const;
    double argmax(const Vec2& p) const;

    RegularizationParams rp_;
    double a_, b_;
    int scan_;
    bool newton_;
};

// Globally convex extension used by the solver.
class FastExtension {
public:
    explicit FastExtension(const RegularizationParams& rp);
    Jet eval(const Vec2& p) const;

    const SafeBox& box() const { return box_; }
    double ellipse_a() const { return a_; }
    double ellipse_b() const { return bE_; }
    double band() const { return w_; }

private:
    RegularizationParams rp_;
    SafeBox box_;
    double a_, bE_, w_, kappa_, tau_;
    EllipseSupport support_;
};

Jet F_hat_fast(const Vec2& p, const RegularizationParams& rp);

struct ReferenceExtensionParams {
    double N = 0;
    double moll_radius = 0;   // eta
    double blend_radius = 0;  // delta
    double blend_width = 0;   // smooth-max half width
    int quad_points = 4;
    double p1_box = 1.0;      // validation box |p1| <= p1_box, |p2| <= SafeBox p2_max
};

ReferenceExtensionParams make_reference_params(const RegularizationParams& rp, int quad_points = 4,
                                               double p1_box = 1.0);

class ReferenceExtension {
public:
    ReferenceExtension(const RegularizationParams& rp, const ReferenceExtensionParams& rep);

    double F_tilde(const Vec2& p) const;
    Jet F_tilde_jet(const Vec2& p) const;
    Jet F_check(const Vec2& p) const;   // mollified F_tilde + (N/4)(Q - 1)
    Jet eval(const Vec2& p) const;

    double Q(const Vec2& p) const;
    double distance_to_level(const Vec2& p) const;
    double ellipse_a() const { return A_; }
    double ellipse_b() const { return B_; }
    const ReferenceExtensionParams& params() const { return rep_; }

    // Worst of (F_eps - F_check) just inside and (F_check - F_eps) just outside
    // the level ellipse, divided by delta.
    double blend_margin() const;

private:
    RegularizationParams rp_;
    ReferenceExtensionParams rep_;
    double A_, B_, M_;
    EllipseSupport support_;
    std::vector<double> nodes_, weights_;
};

double F_tilde_reference(const Vec2& p, const RegularizationParams& rp, const ReferenceExtensionParams& rep);
double F_hat_reference(const Vec2& p, const RegularizationParams& rp, const ReferenceExtensionParams& rep);

}  // namespace lap
