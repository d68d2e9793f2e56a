#include "dirwalk/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dirwalk {

CentralityReport make_report(std::string method, std::vector<double> scores,
                             double tie_tolerance) {
    double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (!(sum > 0.0) || !std::isfinite(sum))
        throw std::invalid_argument("centrality scores must have a positive finite sum");
    for (double& s : scores) s /= sum;

    const int n = static_cast<int>(scores.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });

    // Greedy grouping: a vertex joins the current group only if it ties both
    // its predecessor and the group's top score (keeps ties pairwise).
    std::vector<std::vector<int>> ranking;
    for (int v : order) {
        if (!ranking.empty()) {
            double top = scores[ranking.back().front()];
            double prev = scores[ranking.back().back()];
            if (prev - scores[v] <= tie_tolerance && top - scores[v] <= tie_tolerance) {
                ranking.back().push_back(v);
                continue;
            }
        }
        ranking.push_back({v});
    }
    return CentralityReport{std::move(method), std::move(scores), std::move(ranking),
                            tie_tolerance};
}

CentralityReport pagerank(const DirectedGraph& g, const PagerankOptions& opt) {
    if (g.n < 1) throw std::invalid_argument("pagerank: empty graph");
    if (opt.damping < 0.0 || opt.damping > 1.0)
        throw std::invalid_argument("pagerank: damping must lie in [0, 1]");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("pagerank: tol must be positive");

    const int n = g.n;
    std::vector<int> outdeg(n, 0);
    for (const auto& [i, j] : g.edges) {
        (void)j;
        ++outdeg[i];
    }

    const double d = opt.damping;
    std::vector<double> r(n, 1.0 / n), next(n);
    double residual = 0.0;
    for (int it = 0; it < opt.max_iter; ++it) {
        double dangling = 0.0;
        for (int i = 0; i < n; ++i)
            if (outdeg[i] == 0) dangling += r[i];
        std::fill(next.begin(), next.end(), (1.0 - d) / n + d * dangling / n);
        for (const auto& [i, j] : g.edges) next[j] += d * r[i] / outdeg[i];

        residual = 0.0;
        for (int i = 0; i < n; ++i) residual += std::abs(next[i] - r[i]);
        r.swap(next);
        if (residual <= opt.tol)
            return make_report("pagerank", std::move(r), opt.tie_tolerance);
    }
    throw ConvergenceError("pagerank did not converge within " + std::to_string(opt.max_iter) +
                               " iterations (residual " + std::to_string(residual) + ")",
                           residual);
}

}  // namespace dirwalk
