#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace exactrep {

/// A symmetric factorization hit a non-positive pivot.
class not_positive_definite : public std::runtime_error {
public:
    explicit not_positive_definite(const std::string& what) : std::runtime_error(what) {}
};

/// An adaptive quadrature kept growing past its refinement budget.
class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// A discretization grid cannot support the requested scheme.
class grid_error : public std::runtime_error {
public:
    explicit grid_error(const std::string& what) : std::runtime_error(what) {}
};

/// A path state left the tabulated PDE domain.
class extrapolation_error : public std::out_of_range {
public:
    explicit extrapolation_error(const std::string& what) : std::out_of_range(what) {}
};

/// Configuration rejected; carries every violation found, not just the first.
class config_error : public std::runtime_error {
public:
    explicit config_error(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) {
            out += "\n  - " + s;
        }
        return out;
    }
    std::vector<std::string> violations_;
};

} // namespace exactrep
