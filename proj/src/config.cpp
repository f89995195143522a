#include "lap/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "lap/analysis.hpp"

namespace lap {

ConfigError::ConfigError(const std::string& source, int line, const std::string& msg)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + msg), line(line) {}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

double to_double(const std::string& s) {
    const char* b = s.c_str();
    char* e = nullptr;
    errno = 0;
    double v = std::strtod(b, &e);
    if (e == b || trim(e) != "" || errno == ERANGE) throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

long long to_int(const std::string& s) {
    const char* b = s.c_str();
    char* e = nullptr;
    errno = 0;
    long long v = std::strtoll(b, &e, 10);
    if (e == b || trim(e) != "" || errno == ERANGE) throw std::invalid_argument("expected an integer, got '" + s + "'");
    return v;
}

std::vector<double> to_list(std::string s) {
    s = trim(s);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw std::invalid_argument("unterminated list");
        s = s.substr(1, s.size() - 2);
    }
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s = "[";
    for (size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
    return s + "]";
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> m = {
        {"domain.T", [](RunConfig& c, const std::string& v) { c.domain.T = to_double(v); }},
        {"domain.L", [](RunConfig& c, const std::string& v) { c.domain.L = to_double(v); }},
        {"domain.g", [](RunConfig& c, const std::string& v) { c.domain.g = to_double(v); }},
        {"domain.A", [](RunConfig& c, const std::string& v) { c.domain.A = to_double(v); }},
        {"domain.n", [](RunConfig& c, const std::string& v) { c.domain.n = static_cast<int>(to_int(v)); }},
        {"grid.Nt", [](RunConfig& c, const std::string& v) { c.Nt = static_cast<int>(to_int(v)); }},
        {"grid.Nx", [](RunConfig& c, const std::string& v) { c.Nx = static_cast<int>(to_int(v)); }},
        {"regularization.theta", [](RunConfig& c, const std::string& v) { c.theta = to_double(v); }},
        {"regularization.beta", [](RunConfig& c, const std::string& v) { c.beta = to_double(v); }},
        {"regularization.eps_schedule", [](RunConfig& c, const std::string& v) { c.solver.eps_schedule = to_list(v); }},
        {"potential.name", [](RunConfig& c, const std::string& v) { c.potential = unquote(v); }},
        {"potential.g", [](RunConfig& c, const std::string& v) { c.potential_overrides["g"] = to_double(v); }},
        {"potential.A", [](RunConfig& c, const std::string& v) { c.potential_overrides["A"] = to_double(v); }},
        {"potential.L", [](RunConfig& c, const std::string& v) { c.potential_overrides["L"] = to_double(v); }},
        {"potential.shift",
         [](RunConfig& c, const std::string& v) {
             if (unquote(v) == "auto")
                 c.potential_overrides.erase("shift");
             else
                 c.potential_overrides["shift"] = to_double(v);
         }},
        {"solver.newton_tol", [](RunConfig& c, const std::string& v) { c.solver.newton_tol = to_double(v); }},
        {"solver.max_newton_iters",
         [](RunConfig& c, const std::string& v) { c.solver.max_newton_iters = static_cast<int>(to_int(v)); }},
        {"solver.ls_shrink", [](RunConfig& c, const std::string& v) { c.solver.ls_shrink = to_double(v); }},
        {"solver.ls_slope", [](RunConfig& c, const std::string& v) { c.solver.ls_slope = to_double(v); }},
        {"solver.lm_shift0", [](RunConfig& c, const std::string& v) { c.solver.lm_shift0 = to_double(v); }},
        {"diagnostics.e_tilde", [](RunConfig& c, const std::string& v) { c.e_tilde = to_double(v); }},
        {"diagnostics.mixing_tau", [](RunConfig& c, const std::string& v) { c.mixing_tau = to_double(v); }},
        {"diagnostics.energy_csv", [](RunConfig& c, const std::string& v) { c.energy_csv = to_bool(v); }},
        {"sweep.T", [](RunConfig& c, const std::string& v) { c.sweep_T = to_list(v); }},
        {"oracle.restarts", [](RunConfig& c, const std::string& v) { c.oracle_restarts = static_cast<int>(to_int(v)); }},
        {"output.dir", [](RunConfig& c, const std::string& v) { c.out_dir = unquote(v); }},
        {"run.seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(std::stoull(v)); }},
    };
    return m;
}

}  // namespace

void RunConfig::validate() const {
    domain.validate();
    Grid(domain, Nt, Nx);
    RegularizationParams{0.1, theta, beta}.validate();
    solver.validate();
    if (!(e_tilde > 0)) throw DomainError("e_tilde must be positive");
    if (mixing_tau < 0) throw DomainError("mixing_tau must be non-negative");
    if (oracle_restarts < 1) throw DomainError("oracle restarts must be positive");
    for (double T : sweep_T)
        if (!(T > 0)) throw DomainError("sweep T values must be positive");
    make_potential();
}

PotentialSpec RunConfig::make_potential() const { return lap::make_potential(potential, domain, potential_overrides); }

Problem RunConfig::problem() const { return Problem(domain, grid(), make_potential(), theta, beta); }

double RunConfig::tau() const { return mixing_tau > 0 ? mixing_tau : default_mixing_threshold(solver.newton_tol); }

RunConfig parse_config(std::istream& is, const std::string& source) {
    RunConfig c;
    std::string section, raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = raw;
        if (auto h = s.find('#'); h != std::string::npos) s = s.substr(0, h);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(source, line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ConfigError(source, line, "empty section name");
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line, "expected key = value");
        std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(source, line, "missing key");
        if (val.empty()) throw ConfigError(source, line, "missing value for '" + key + "'");
        std::string full = section.empty() ? key : section + "." + key;
        auto it = setters().find(full);
        if (it == setters().end()) throw ConfigError(source, line, "unknown key '" + full + "'");
        try {
            it->second(c, val);
        } catch (const std::exception& e) {
            throw ConfigError(source, line, full + ": " + e.what());
        }
    }
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(source, line, std::string("invalid configuration: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path, 0, "cannot open file");
    return parse_config(is, path);
}

void write_config(std::ostream& os, const RunConfig& c) {
    os << "[domain]\nT = " << fmt(c.domain.T) << "\nL = " << fmt(c.domain.L) << "\ng = " << fmt(c.domain.g)
       << "\nA = " << fmt(c.domain.A) << "\nn = " << c.domain.n << "\n\n";
    os << "[grid]\nNt = " << c.Nt << "\nNx = " << c.Nx << "\n\n";
    os << "[regularization]\ntheta = " << fmt(c.theta) << "\nbeta = " << fmt(c.beta)
       << "\neps_schedule = " << fmt_list(c.solver.eps_schedule) << "\n\n";
    os << "[potential]\nname = \"" << c.potential << "\"\n";
    for (auto& [k, v] : c.potential_overrides) os << k << " = " << fmt(v) << "\n";
    os << "\n[solver]\nnewton_tol = " << fmt(c.solver.newton_tol) << "\nmax_newton_iters = " << c.solver.max_newton_iters
       << "\nls_shrink = " << fmt(c.solver.ls_shrink) << "\nls_slope = " << fmt(c.solver.ls_slope)
       << "\nlm_shift0 = " << fmt(c.solver.lm_shift0) << "\n\n";
    os << "[diagnostics]\ne_tilde = " << fmt(c.e_tilde) << "\nmixing_tau = " << fmt(c.mixing_tau)
       << "\nenergy_csv = " << (c.energy_csv ? "true" : "false") << "\n\n";
    os << "[sweep]\nT = " << fmt_list(c.sweep_T) << "\n\n";
    os << "[oracle]\nrestarts = " << c.oracle_restarts << "\n\n";
    os << "[output]\ndir = \"" << c.out_dir << "\"\n\n";
    os << "[run]\nseed = " << c.seed << "\n";
}

}  // namespace lap
