#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dirwalk/spectral.hpp"

namespace dirwalk {

// ---------------------------------------------------------------------------
// Factorizations
// ---------------------------------------------------------------------------

// M = scale * U1 * diag(D) * U2 with D descending in [0,1] and scale the
// largest singular value, so every D entry is realizable as an attenuation.
struct SvdFactors {
    Eigen::MatrixXcd U1;
    Eigen::VectorXd D;
    Eigen::MatrixXcd U2;
    double scale = 1.0;

    Eigen::MatrixXcd reassemble() const;
};

SvdFactors svd(const Eigen::MatrixXcd& M);

// Cosine-sine decomposition of a 4x4 unitary into 2x2 blocks:
//   U = blkdiag(L, Lp) * S4(theta1, theta2) * blkdiag(R^dag, Rp^dag)
// where S4 interleaves cos/sin on mode pairs (0,2) and (1,3).  Angles are in
// [0, pi/2] with cos(theta1) >= cos(theta2).
struct CsdFactors {
    Eigen::Matrix2cd L, Lp;
    double theta1 = 0.0, theta2 = 0.0;
    Eigen::Matrix2cd R, Rp;

    Eigen::Matrix4cd l4() const;
    Eigen::Matrix4cd s4() const;
    Eigen::Matrix4cd r4() const;
    Eigen::Matrix4cd reassemble() const;
};

CsdFactors csd4(const Eigen::Matrix4cd& U);

// Q(alpha) H(beta) Q(gamma) = exp(i global_phase) * target, angles in [0, pi).
struct WaveplateTriple {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double global_phase = 0.0;
};

WaveplateTriple solve_waveplate_triple(const Eigen::Matrix2cd& target);

// ---------------------------------------------------------------------------
// Optical stages
// ---------------------------------------------------------------------------

enum class PlateKind { HWP, QWP };

// Single wave plate acting on one path (0 or 1) at a fast-axis angle.
struct WaveplateStage {
    int path = 0;
    PlateKind plate = PlateKind::HWP;
    double angle = 0.0;
};

// Basis-mode permutation (beam displacers merging/splitting paths):
// output mode i takes input mode perm[i].
struct RoutingStage {
    std::array<int, 4> perm{0, 1, 2, 3};
};

// Per-mode amplitude attenuation sin(2 theta_k); lambda_scale records the
// factored-out diagonal scale so that lambda_scale * sin(2 theta_k)
// reconstructs the target diagonal.
struct AttenuationStage {
    std::array<double, 4> angles{};
    double lambda_scale = 1.0;
};

// Parametric stage applying diag(exp(-i coeffs_k t)).  The coefficients are
// the eigenvalues minus the recorded centering offset; hwp_parameterization
// maps each mode to the slope relating a physical HWP angle to t.
struct PhaseStage {
    std::vector<double> coeffs;
    double offset = 0.0;
    std::vector<std::pair<int, double>> hwp_parameterization;
};

// Arbitrary 2x2 unitaries on both paths, realized as QWP-HWP-QWP triples
// plus per-path compensation phases (so the stage matrix equals the exact
// block targets, not just up to relative phase).
struct BlockUnitaryStage {
    WaveplateTriple path1, path2;
    double comp1 = 0.0, comp2 = 0.0;
};

struct Stage {
    std::variant<WaveplateStage, RoutingStage, AttenuationStage, PhaseStage, BlockUnitaryStage>
        op;
    std::string block;  // D2 | U2 | Lambda_t | U1 | D1 (provenance tag)
};

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

// theta_k = asin(entry_k)/2 per the sin(2theta) parameterization.
AttenuationStage synthesize_attenuation(const Eigen::VectorXd& diag_entries,
                                        double lambda_scale = 1.0);

// Centers the eigenvalues around (min+max)/2 and records the offset; the
// realized stage equals diag(exp(-i lambda_k t)) up to exp(i offset t).
PhaseStage synthesize_phase_stage(const Eigen::VectorXd& lambda);

enum class ExpandMode { paper_fixture, generic_pad };

struct Expansion {
    Eigen::Matrix4cd matrix;
    std::vector<int> blocked_modes;
};

// Embeds a 3x3 matrix into 4x4.  generic_pad places M in the top-left block
// with a 1 at (3,3); paper_fixture returns the hand-crafted expansions for
// the two shipped 3-vertex matrices and rejects anything else.
Expansion expand_dimension(const Eigen::Matrix3cd& M, ExpandMode mode);

// ---------------------------------------------------------------------------
// Circuit IR
// ---------------------------------------------------------------------------

struct CircuitIR {
    int dim = 4;
    int n_vertices = 0;
    double total_scale = 1.0;
    std::vector<int> detector_modes;  // detector k reads vertex k at this mode
    std::vector<int> blocked_modes;
    std::vector<Stage> stages;
    nlohmann::json provenance;
};

struct CompileOptions {
    bool peephole = true;
    std::string source;  // recorded in provenance
};

// Compiles U(t) = P exp(-i Lambda t) P_inv into an optical stage program for
// n in {3, 4}.  The simulated transfer matrix on the detector modes, times
// total_scale, equals U(t) up to a global phase for all t.
CircuitIR compile_evolution(const SpectralDecomposition& dec, const CompileOptions& opt = {});

// Removes adjacent same-path HWP pairs at 45 degrees (they compose to the
// identity).  Returns the number of stages removed.
int peephole_merge_hwp_pairs(std::vector<Stage>& stages);

nlohmann::json to_json(const CircuitIR& ir);
CircuitIR circuit_from_json(const nlohmann::json& j);

// Paper-graph fixtures used by the dimension-expansion fixtures and tests.
namespace fixtures {
Eigen::Matrix3d three_vertex_p();       // eigenvector matrix of the 3-vertex walk
Eigen::Matrix3d three_vertex_p_inv();   // its (integer, unscaled) inverse times 2
Eigen::Matrix4d three_vertex_p_expanded();
Eigen::Matrix4d three_vertex_p_inv_expanded();
Eigen::Matrix4d four_vertex_p();
Eigen::Matrix4d four_vertex_p_inv();    // integer matrix, 6 * inverse(P)
}  // namespace fixtures

}  // namespace dirwalk
