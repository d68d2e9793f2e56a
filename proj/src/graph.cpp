#include "dirwalk/graph.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

namespace dirwalk {

bool DirectedGraph::has_edge(int i, int j) const {
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

namespace {

void warn(std::vector<std::string>* warnings, const std::string& msg) {
    if (warnings) warnings->push_back(msg);
}

DirectedGraph finalize(int n, std::vector<std::pair<int, int>> edges,
                       std::vector<std::string>* warnings) {
    if (n < 1) throw ParseError(1, "vertex count must be positive");
    std::sort(edges.begin(), edges.end());
    auto dup = std::unique(edges.begin(), edges.end());
    if (dup != edges.end()) {
        warn(warnings, "duplicate edges removed: " + std::to_string(edges.end() - dup));
        edges.erase(dup, edges.end());
    }
    for (const auto& [i, j] : edges) {
        if (i == j) warn(warnings, "self-loop at vertex " + std::to_string(i));
    }
    return DirectedGraph{n, std::move(edges)};
}

DirectedGraph parse_json_graph(std::string_view text, std::vector<std::string>* warnings) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(1, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
        throw ParseError(1, "JSON graph needs an integer field \"n\"");
    int n = j["n"].get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.value("edges", nlohmann::json::array())) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer())
            throw ParseError(1, "JSON edge must be a pair of integers");
        int a = e[0].get<int>(), b = e[1].get<int>();
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw ParseError(1, "edge endpoint out of range: [" + std::to_string(a) + ", " +
                                    std::to_string(b) + "]");
        edges.emplace_back(a, b);
    }
    return finalize(n, std::move(edges), warnings);
}

}  // namespace

DirectedGraph parse_graph(std::string_view text, std::vector<std::string>* warnings) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{')
        return parse_json_graph(text, warnings);

    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    int n = -1;
    std::vector<std::pair<int, int>> edges;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (n < 0) {
            if (!(ls >> n)) {
                if (ls.eof()) { n = -1; continue; }  // blank/comment before the count
                throw ParseError(lineno, "expected vertex count");
            }
            std::string rest;
            if (ls >> rest) throw ParseError(lineno, "unexpected token after vertex count");
            if (n < 1) throw ParseError(lineno, "vertex count must be positive");
            continue;
        }
        int a, b;
        if (!(ls >> a)) {
            if (ls.eof()) continue;  // blank line
            throw ParseError(lineno, "malformed edge line");
        }
        if (!(ls >> b)) throw ParseError(lineno, "malformed edge line: missing target");
        std::string rest;
        if (ls >> rest) throw ParseError(lineno, "malformed edge line: trailing token");
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw ParseError(lineno, "edge endpoint out of range: " + std::to_string(a) + " " +
                                         std::to_string(b));
        edges.emplace_back(a, b);
    }
    if (n < 0) throw ParseError(lineno, "missing vertex count");
    return finalize(n, std::move(edges), warnings);
}

Eigen::MatrixXd adjacency_matrix(const DirectedGraph& g) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& [i, j] : g.edges) A(i, j) = 1.0;
    return A;
}

Eigen::MatrixXd hamiltonian(const DirectedGraph& g) {
    Eigen::MatrixXd A = adjacency_matrix(g);
    Eigen::MatrixXd L = Eigen::MatrixXd(A.rowwise().sum().asDiagonal()) - A;
    return L.transpose();
}

}  // namespace dirwalk
