#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lap {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite integrand value at cell (i, j).
struct EvaluationError : std::runtime_error {
    EvaluationError(const std::string& what, int i, int j)
        : std::runtime_error(what), cell_i(i), cell_j(j) {}
    int cell_i;
    int cell_j;
};

struct DegenerateError : std::runtime_error {
    DegenerateError(const std::string& what, std::vector<std::pair<int, int>> cells)
        : std::runtime_error(what), cells(std::move(cells)) {}
    std::vector<std::pair<int, int>> cells;
};

}  // namespace lap
