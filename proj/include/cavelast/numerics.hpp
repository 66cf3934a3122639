#pragma once

#include "cavelast/types.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cavelast {

// Pairwise (cascade) summation in index order. The result depends only on
// the input values, never on how they were produced.
double pairwise_sum(std::span<const double> values);

// Caps the number of worker threads used by parallel_for; 0 restores the
// hardware default.
void set_max_threads(unsigned n);
unsigned max_threads();

// Calls body(begin, end) over disjoint contiguous chunks of [0, n). Bodies
// must only write to per-index storage; reductions happen afterwards in a
// fixed order so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

struct QuadratureRule1D {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

QuadratureRule1D gauss_legendre(int points);

// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b] to absolute
// tolerance tol.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth = 40);

struct TriangleRule {
    std::vector<Eigen::Vector3d> barycentric;
    std::vector<double> weights; // sum to 1
};

// Symmetric triangle rules of polynomial degree 1, 2, 3, 5 (other degrees
// round up to the next available).
TriangleRule triangle_rule(int degree);

} // namespace cavelast
