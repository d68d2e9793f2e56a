#include "dirwalk/jones.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dirwalk {

using Complex = std::complex<double>;
using Eigen::Matrix2cd;
using Eigen::Matrix4cd;

Eigen::Matrix2cd hwp_jones(double theta) {
    Matrix2cd H;
    H << std::cos(2 * theta), std::sin(2 * theta), std::sin(2 * theta), -std::cos(2 * theta);
    return H;
}

Eigen::Matrix2cd qwp_jones(double theta) {
    Matrix2cd R, Ri;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Ri << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return R * Eigen::Vector2cd(1.0, Complex(0, 1)).asDiagonal() * Ri;
}

namespace {

Matrix4cd on_path(int path, const Matrix2cd& block) {
    Matrix4cd M = Matrix4cd::Identity();
    M.block<2, 2>(2 * path, 2 * path) = block;
    return M;
}

}  // namespace

Eigen::Matrix4cd element_matrix(const Stage& stage, double t) {
    return std::visit(
        [&](const auto& op) -> Matrix4cd {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, WaveplateStage>) {
                return on_path(op.path,
                               op.plate == PlateKind::HWP ? hwp_jones(op.angle)
                                                          : qwp_jones(op.angle));
            } else if constexpr (std::is_same_v<T, RoutingStage>) {
                Matrix4cd M = Matrix4cd::Zero();
                for (int i = 0; i < 4; ++i) M(i, op.perm[i]) = 1.0;
                return M;
            } else if constexpr (std::is_same_v<T, AttenuationStage>) {
                Matrix4cd M = Matrix4cd::Zero();
                for (int i = 0; i < 4; ++i) M(i, i) = std::sin(2 * op.angles[i]);
                return M;
            } else if constexpr (std::is_same_v<T, PhaseStage>) {
                Matrix4cd M = Matrix4cd::Identity();
                for (int i = 0; i < 4 && i < static_cast<int>(op.coeffs.size()); ++i)
                    M(i, i) = std::polar(1.0, -op.coeffs[i] * t);
                return M;
            } else {
                Matrix4cd M = Matrix4cd::Zero();
                M.block<2, 2>(0, 0) = std::polar(1.0, op.comp1 + op.path1.global_phase) *
                                      qwp_jones(op.path1.alpha) * hwp_jones(op.path1.beta) *
                                      qwp_jones(op.path1.gamma) *
                                      std::polar(1.0, -op.path1.global_phase);
                M.block<2, 2>(2, 2) = std::polar(1.0, op.comp2 + op.path2.global_phase) *
                                      qwp_jones(op.path2.alpha) * hwp_jones(op.path2.beta) *
                                      qwp_jones(op.path2.gamma) *
                                      std::polar(1.0, -op.path2.global_phase);
                return M;
            }
        },
        stage.op);
}

QuquartState simulate(const CircuitIR& ir, const QuquartState& psi_in, double t) {
    QuquartState psi = psi_in;
    for (const auto& st : ir.stages) psi = element_matrix(st, t) * psi;
    return psi;
}

Eigen::Matrix4cd transfer_matrix(const CircuitIR& ir, double t) {
    Matrix4cd T;
    for (int j = 0; j < 4; ++j) T.col(j) = simulate(ir, QuquartState::Unit(j), t);
    return T;
}

double phase_invariant_distance(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw std::invalid_argument("phase_invariant_distance: shape mismatch");
    const double a2 = A.squaredNorm(), b2 = B.squaredNorm();
    const double cross = std::abs((B.adjoint() * A).trace());
    return std::sqrt(std::max(0.0, a2 + b2 - 2 * cross));
}

SweepTable sweep(const CircuitIR& ir, const QuquartState& psi_in,
                 const std::vector<double>& t_grid, Exec policy) {
    if (t_grid.empty()) throw std::invalid_argument("sweep: empty grid");
    const int rows = static_cast<int>(t_grid.size());
    const int dets = static_cast<int>(ir.detector_modes.size());

    SweepTable table;
    table.t_grid = t_grid;
    table.detector_modes = ir.detector_modes;
    table.probabilities.resize(rows, dets);

    auto eval = [&](int i) {
        QuquartState psi = simulate(ir, psi_in, t_grid[i]);
        for (int d = 0; d < dets; ++d)
            table.probabilities(i, d) = std::norm(psi[ir.detector_modes[d]]);
    };
    if (policy == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < rows; ++i) eval(i);
    } else {
        for (int i = 0; i < rows; ++i) eval(i);
    }

    table.average.assign(dets, 0.0);
    for (int d = 0; d < dets; ++d) table.average[d] = table.probabilities.col(d).mean();
    double total = std::accumulate(table.average.begin(), table.average.end(), 0.0);
    if (total > 0.0)
        for (double& a : table.average) a /= total;
    return table;
}

std::vector<std::int64_t> sample_counts(const std::vector<double>& probabilities,
                                        double mean_total, std::uint64_t seed) {
    if (mean_total < 0.0) throw std::invalid_argument("sample_counts: negative mean");
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> counts(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] < 0.0)
            throw std::invalid_argument("sample_counts: negative probability");
        const double mean = mean_total * probabilities[i];
        counts[i] = mean > 0.0 ? std::poisson_distribution<std::int64_t>(mean)(rng) : 0;
    }
    return counts;
}

void add_poisson_counts(SweepTable& table, double mean_total, std::uint64_t seed) {
    if (mean_total < 0.0) throw std::invalid_argument("add_poisson_counts: negative mean");
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd counts(table.probabilities.rows(), table.probabilities.cols());
    for (int i = 0; i < counts.rows(); ++i)
        for (int d = 0; d < counts.cols(); ++d) {
            const double mean = mean_total * table.probabilities(i, d);
            counts(i, d) =
                mean > 0.0
                    ? static_cast<double>(std::poisson_distribution<std::int64_t>(mean)(rng))
                    : 0.0;
        }
    table.counts = std::move(counts);
}

void write_csv(const SweepTable& table, std::ostream& out) {
    const int dets = static_cast<int>(table.probabilities.cols());
    out << "t";
    for (int d = 0; d < dets; ++d) out << ",det" << d + 1;
    if (table.counts)
        for (int d = 0; d < dets; ++d) out << ",count" << d + 1;
    out << "\n";
    char buf[32];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.12g", x);
        out << buf;
    };
    for (std::size_t i = 0; i < table.t_grid.size(); ++i) {
        put(table.t_grid[i]);
        for (int d = 0; d < dets; ++d) {
            out << ",";
            put(table.probabilities(i, d));
        }
        if (table.counts)
            for (int d = 0; d < dets; ++d)
                out << "," << static_cast<std::int64_t>((*table.counts)(i, d));
        out << "\n";
    }
}

}  // namespace dirwalk
