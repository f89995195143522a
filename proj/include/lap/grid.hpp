#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lap/errors.hpp"

namespace lap {

using Vec2 = std::array<double, 2>;

struct Domain {
    double T = 1.0;
    double L = 1.0;
    int n = 2;
    double g = 1.0;
    double A = 1.0;

    void validate() const;
};

struct Grid {
    int Nt = 2;
    int Nx = 2;
    double T = 1.0;
    double L = 1.0;
    double ht = 0.5;
    double hx = 1.0;

    Grid() = default;
    Grid(const Domain& dom, int Nt, int Nx);

    double x1(int i) const { return i * ht; }
    double x2(int j) const { return -L + j * hx; }
    double x1c(int i) const { return (i + 0.5) * ht; }
    double x2c(int j) const { return -L + (j + 0.5) * hx; }
    int interior_count() const { return (Nt - 1) * (Nx - 1); }
    bool same_shape(const Grid& o) const;
};

// Nodal values u(i, j) at (i*ht, -L + j*hx), row-major in i.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0);

    const Grid& grid() const { return grid_; }
    int Nt() const { return grid_.Nt; }
    int Nx() const { return grid_.Nx; }

    double& operator()(int i, int j) { return v_[static_cast<size_t>(i) * (grid_.Nx + 1) + j]; }
    double operator()(int i, int j) const { return v_[static_cast<size_t>(i) * (grid_.Nx + 1) + j]; }
    double at(int i, int j) const;

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    bool all_finite() const;

private:
    Grid grid_;
    std::vector<double> v_;
};

double boundary_profile(double x2, double eps, double beta, const Domain& dom);

// Sets the trace data of X_eps on the boundary nodes; the interior is untouched.
ScalarField impose_boundary(ScalarField u, double eps, double beta, const Domain& dom);

Vec2 cell_gradient(const ScalarField& u, int i, int j);
double cell_value(const ScalarField& u, int i, int j);

struct CellSample {
    int i, j;
    double x1, x2;
    Vec2 grad;
    double u;
};

using CellIntegrand = std::function<double(const CellSample&)>;

CellSample cell_sample(const ScalarField& u, int i, int j);
double quadrature(const ScalarField& u, const CellIntegrand& f);

void write_field(std::ostream& os, const ScalarField& u);
ScalarField read_field(std::istream& is);
void save_field(const std::string& path, const ScalarField& u);
ScalarField load_field(const std::string& path);

}  // namespace lap
