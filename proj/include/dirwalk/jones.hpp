#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "dirwalk/compiler.hpp"
#include "dirwalk/exec.hpp"

namespace dirwalk {

// Walker state over (|1H>, |1V>, |2H>, |2V>).
using QuquartState = Eigen::Vector4cd;

// Jones conventions, fixed module-wide:
//   HWP(theta) = [[cos 2theta, sin 2theta], [sin 2theta, -cos 2theta]]
//   QWP(theta) = R(theta) diag(1, i) R(-theta)
Eigen::Matrix2cd hwp_jones(double theta);
Eigen::Matrix2cd qwp_jones(double theta);

// 4x4 operator of one stage at evolution time t (t only matters for the
// phase stage).
Eigen::Matrix4cd element_matrix(const Stage& stage, double t);

// Applies the stage list in order to psi_in.
QuquartState simulate(const CircuitIR& ir, const QuquartState& psi_in, double t);

// End-to-end transfer matrix (columns from simulating basis states; blocked
// modes appear as zero rows/columns).
Eigen::Matrix4cd transfer_matrix(const CircuitIR& ir, double t);

// min over phi of ||A - exp(i phi) B||_F.
double phase_invariant_distance(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B);

struct SweepTable {
    std::vector<double> t_grid;
    Eigen::MatrixXd probabilities;           // one row per grid point, one column per detector
    std::optional<Eigen::MatrixXd> counts;   // Poisson samples, same shape
    std::vector<int> detector_modes;
    std::vector<double> average;             // grid-averaged, normalized to sum 1
};

SweepTable sweep(const CircuitIR& ir, const QuquartState& psi_in,
                 const std::vector<double>& t_grid, Exec policy = Exec::parallel);

// Independent Poisson draws with means mean_total * p_j, deterministic for a
// fixed seed.
std::vector<std::int64_t> sample_counts(const std::vector<double>& probabilities,
                                        double mean_total, std::uint64_t seed);

// Adds count columns to a sweep table (one engine, row-major draw order).
void add_poisson_counts(SweepTable& table, double mean_total, std::uint64_t seed);

// CSV export: header t,det1,...[,count1,...]; floats with 12 significant digits.
void write_csv(const SweepTable& table, std::ostream& out);

}  // namespace dirwalk
