#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gml {

struct VerifyOptions {
    std::uint64_t seed = 0;
    std::size_t instances = 1000;  // random matrices for the spectral properties
    std::size_t max_dim = 30;
    std::size_t optimizer_runs = 5;
};

struct PropertyResult {
    std::string name;
    std::size_t checked = 0;
    std::size_t failures = 0;
    double worst = 0.0;      // largest observed violation measure
    double tolerance = 0.0;
    std::string first_failure;

    bool passed() const noexcept { return failures == 0; }
};

/// Runs the library's property checks on random instances:
/// disc alignment, eigenvector positivity, the Gershgorin lower bound,
/// LOBPCG against the dense solver, the closed-form diagonal LP against the
/// simplex solver, GLR gradients against finite differences, and feasibility
/// of every optimizer iterate.
std::vector<PropertyResult> run_verification(const VerifyOptions& options);

}  // namespace gml
