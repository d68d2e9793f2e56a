#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dirwalk {

// Directed graph on vertices 0..n-1 with an (ordered, duplicate-free) edge set.
struct DirectedGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // (source, target), sorted, unique

    bool has_edge(int i, int j) const;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

// Parses the edge-list format (first non-comment line: vertex count; then
// "src dst" pairs, 0-based; '#' starts a comment) or, when the first
// non-space character is '{', the JSON form {"n": int, "edges": [[i,j],...]}.
// Duplicate edges and self-loops are accepted with a warning.
DirectedGraph parse_graph(std::string_view text, std::vector<std::string>* warnings = nullptr);

// A_ij = 1 iff (i,j) is an edge.
Eigen::MatrixXd adjacency_matrix(const DirectedGraph& g);

// Walk Hamiltonian H = L^T with L_ij = outdeg(i)*delta_ij - A_ij.
// Columns of H sum to zero.
Eigen::MatrixXd hamiltonian(const DirectedGraph& g);

}  // namespace dirwalk
