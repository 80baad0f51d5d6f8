#pragma once

#include <vector>

namespace bergman {

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached rule with n points (1 <= n <= 256). Thread safe.
const GaussRule& gauss_legendre(int n);

}  // namespace bergman
