#pragma once

#include <stdexcept>
#include <string>

namespace drmdp {

/// An instance violates one of its invariants. `path()` points into the
/// configuration tree (e.g. "price_transition[2]").
class ModelError : public std::runtime_error {
public:
    ModelError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message),
          path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// An iterative solver ran out of iterations before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& message, double residual, long iterations)
        : std::runtime_error(message), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    long iterations() const noexcept { return iterations_; }

private:
    double residual_;
    long iterations_;
};

} // namespace drmdp
