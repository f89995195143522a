#include "lap/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lap {

void Domain::validate() const {
    if (!(T > 0) || !std::isfinite(T)) throw DomainError("T must be positive");
    if (!(L > 0) || !std::isfinite(L)) throw DomainError("L must be positive");
    if (n < 2) throw DomainError("n must be at least 2");
    if (!(g > 0)) throw DomainError("g must be positive");
    if (!(A > 0)) throw DomainError("A must be positive");
}

Grid::Grid(const Domain& dom, int nt, int nx) : Nt(nt), Nx(nx), T(dom.T), L(dom.L) {
    dom.validate();
    if (Nt < 2) throw DomainError("Nt must be at least 2");
    if (Nx < 2 || Nx % 2 != 0) throw DomainError("Nx must be even and at least 2");
    ht = T / Nt;
    hx = 2.0 * L / Nx;
}

bool Grid::same_shape(const Grid& o) const {
    return Nt == o.Nt && Nx == o.Nx && T == o.T && L == o.L;
}

ScalarField::ScalarField(const Grid& g, double fill)
    : grid_(g), v_(static_cast<size_t>(g.Nt + 1) * (g.Nx + 1), fill) {}

double ScalarField::at(int i, int j) const {
    if (i < 0 || i > grid_.Nt || j < 0 || j > grid_.Nx) throw IndexError("node index out of range");
    return (*this)(i, j);
}

bool ScalarField::all_finite() const {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

double boundary_profile(double x2, double eps, double beta, const Domain& dom) {
    const double L = dom.L;
    if (std::abs(x2) > L * (1 + 1e-14)) throw DomainError("|x2| > L in boundary_profile");
    double base = L - std::abs(x2);
    if (eps == 0.0) return base;
    return base + std::pow(eps, beta) / (2 * L) * (L * L - x2 * x2);
}

ScalarField impose_boundary(ScalarField u, double eps, double beta, const Domain& dom) {
    const Grid& g = u.grid();
    for (int j = 0; j <= g.Nx; ++j) {
        double x2 = (j == 0) ? -g.L : (j == g.Nx ? g.L : g.x2(j));
        double U = boundary_profile(x2, eps, beta, dom);
        u(0, j) = -U;
        u(g.Nt, j) = U;
    }
    for (int i = 0; i <= g.Nt; ++i) {
        u(i, 0) = 0.0;
        u(i, g.Nx) = 0.0;
    }
    return u;
}

static void check_cell(const Grid& g, int i, int j) {
    if (i < 0 || i >= g.Nt || j < 0 || j >= g.Nx) throw IndexError("cell index out of range");
}

Vec2 cell_gradient(const ScalarField& u, int i, int j) {
    const Grid& g = u.grid();
    check_cell(g, i, j);
    double u00 = u(i, j), u01 = u(i, j + 1), u10 = u(i + 1, j), u11 = u(i + 1, j + 1);
    return {((u10 + u11) - (u00 + u01)) / (2 * g.ht), ((u01 + u11) - (u00 + u10)) / (2 * g.hx)};
}

double cell_value(const ScalarField& u, int i, int j) {
    check_cell(u.grid(), i, j);
    return 0.25 * (u(i, j) + u(i, j + 1) + u(i + 1, j) + u(i + 1, j + 1));
}

CellSample cell_sample(const ScalarField& u, int i, int j) {
    const Grid& g = u.grid();
    return {i, j, g.x1c(i), g.x2c(j), cell_gradient(u, i, j), cell_value(u, i, j)};
}

double quadrature(const ScalarField& u, const CellIntegrand& f) {
    const Grid& g = u.grid();
    double sum = 0.0;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Nx; ++j) {
            double v = f(cell_sample(u, i, j));
            if (!std::isfinite(v))
                throw EvaluationError("non-finite integrand at cell (" + std::to_string(i) + "," +
                                          std::to_string(j) + ")",
                                      i, j);
            sum += v;
        }
    return sum * g.ht * g.hx;
}

void write_field(std::ostream& os, const ScalarField& u) {
    const Grid& g = u.grid();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", g.T);
    os << g.Nt << ' ' << g.Nx << ' ' << buf;
    std::snprintf(buf, sizeof buf, "%.17g", g.L);
    os << ' ' << buf << '\n';
    for (int i = 0; i <= g.Nt; ++i) {
        for (int j = 0; j <= g.Nx; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", u(i, j));
            if (j) os << ' ';
            os << buf;
        }
        os << '\n';
    }
}

static double parse_double(const std::string& tok) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw PreconditionError("bad number in field dump: " + tok);
    return v;
}

ScalarField read_field(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw PreconditionError("empty field dump");
    std::istringstream hs(header);
    int Nt = 0, Nx = 0;
    std::string ts, ls;
    if (!(hs >> Nt >> Nx >> ts >> ls)) throw PreconditionError("bad field dump header");
    Domain dom;
    dom.T = parse_double(ts);
    dom.L = parse_double(ls);
    ScalarField u(Grid(dom, Nt, Nx));
    std::string tok;
    for (int i = 0; i <= Nt; ++i)
        for (int j = 0; j <= Nx; ++j) {
            if (!(is >> tok)) throw PreconditionError("truncated field dump");
            u(i, j) = parse_double(tok);
        }
    return u;
}

void save_field(const std::string& path, const ScalarField& u) {
    std::ofstream os(path);
    if (!os) throw PreconditionError("cannot write " + path);
    write_field(os, u);
}

ScalarField load_field(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw PreconditionError("cannot read " + path);
    return read_field(is);
}

}  // namespace lap
