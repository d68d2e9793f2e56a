#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dirwalk/graph.hpp"

namespace dirwalk {

// Per-vertex centrality scores (normalized to sum 1) plus the induced
// ranking as tie groups in descending score order.  Vertices are 0-based.
struct CentralityReport {
    std::string method;  // "pagerank" or "ctqw"
    std::vector<double> scores;
    std::vector<std::vector<int>> ranking;
    double tie_tolerance = 1e-9;
};

// Normalizes scores to sum 1 and builds the tie-grouped ranking.
CentralityReport make_report(std::string method, std::vector<double> scores,
                             double tie_tolerance = 1e-9);

struct PagerankOptions {
    double damping = 0.85;
    double tol = 1e-12;
    int max_iter = 100000;
    double tie_tolerance = 1e-9;
};

struct ConvergenceError : std::runtime_error {
    double residual;
    ConvergenceError(const std::string& what_, double residual_)
        : std::runtime_error(what_), residual(residual_) {}
};

// Stationary vector of the damped column-stochastic walk matrix.  Dangling
// vertices redistribute uniformly over all vertices.
CentralityReport pagerank(const DirectedGraph& g, const PagerankOptions& opt = {});

}  // namespace dirwalk
