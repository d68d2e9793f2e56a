#include "dirwalk/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dirwalk {

using Complex = std::complex<double>;
using Eigen::Matrix2cd;
using Eigen::Matrix4cd;

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a, kPi);
    if (a < 0) a += kPi;
    if (a >= kPi - 1e-15) a = 0.0;  // pi-periodic orientation
    return a;
}

bool approx_unitary(const Eigen::MatrixXcd& U, double tol) {
    return (U * U.adjoint() - Eigen::MatrixXcd::Identity(U.rows(), U.cols())).norm() <= tol;
}

}  // namespace

// ---------------------------------------------------------------------------
// SVD
// ---------------------------------------------------------------------------

Eigen::MatrixXcd SvdFactors::reassemble() const {
    return scale * U1 * D.cast<Complex>().asDiagonal() * U2;
}

SvdFactors svd(const Eigen::MatrixXcd& M) {
    if (M.rows() != M.cols() || M.rows() == 0)
        throw std::invalid_argument("svd: matrix must be square and non-empty");
    if (!M.allFinite()) throw std::invalid_argument("svd: non-finite entries");

    SvdFactors f;
    if (M.imag().norm() <= 1e-13 * std::max(1.0, M.norm())) {
        Eigen::JacobiSVD<Eigen::MatrixXd> s(M.real(),
                                            Eigen::ComputeFullU | Eigen::ComputeFullV);
        f.scale = s.singularValues()(0);
        if (!(f.scale > 0.0)) throw std::invalid_argument("svd: zero matrix has no scale");
        f.U1 = s.matrixU().cast<Complex>();
        f.U2 = s.matrixV().transpose().cast<Complex>();
        f.D = s.singularValues() / f.scale;
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXcd> s(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
        f.scale = s.singularValues()(0);
        if (!(f.scale > 0.0)) throw std::invalid_argument("svd: zero matrix has no scale");
        f.U1 = s.matrixU();
        f.U2 = s.matrixV().adjoint();
        f.D = s.singularValues() / f.scale;
    }
    return f;
}

// ---------------------------------------------------------------------------
// CSD
// ---------------------------------------------------------------------------

Eigen::Matrix4cd CsdFactors::l4() const {
    Matrix4cd M = Matrix4cd::Zero();
    M.block<2, 2>(0, 0) = L;
    M.block<2, 2>(2, 2) = Lp;
    return M;
}

Eigen::Matrix4cd CsdFactors::s4() const {
    const double c1 = std::cos(theta1), s1 = std::sin(theta1);
    const double c2 = std::cos(theta2), s2 = std::sin(theta2);
    Matrix4cd S = Matrix4cd::Zero();
    S(0, 0) = c1; S(0, 2) = s1;
    S(1, 1) = c2; S(1, 3) = s2;
    S(2, 0) = -s1; S(2, 2) = c1;
    S(3, 1) = -s2; S(3, 3) = c2;
    return S;
}

Eigen::Matrix4cd CsdFactors::r4() const {
    Matrix4cd M = Matrix4cd::Zero();
    M.block<2, 2>(0, 0) = R.adjoint();
    M.block<2, 2>(2, 2) = Rp.adjoint();
    return M;
}

Eigen::Matrix4cd CsdFactors::reassemble() const { return l4() * s4() * r4(); }

namespace {

Matrix2cd polar_unitary(const Matrix2cd& M) {
    Eigen::JacobiSVD<Matrix2cd> s(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return s.matrixU() * s.matrixV().adjoint();
}

double csd_error(const CsdFactors& f, const Matrix4cd& U) {
    return (f.reassemble() - U).norm();
}

// Constructive CSD for the well-separated case: SVD of the A block, then the
// remaining factors from the B and C blocks; indices with a tiny sine are
// completed from the residual of the D block.
CsdFactors csd_core(const Matrix4cd& U) {
    const Matrix2cd A = U.block<2, 2>(0, 0);
    const Matrix2cd B = U.block<2, 2>(0, 2);
    const Matrix2cd C = U.block<2, 2>(2, 0);
    const Matrix2cd D = U.block<2, 2>(2, 2);

    Eigen::JacobiSVD<Matrix2cd> sa(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix2cd L = sa.matrixU();
    Matrix2cd R = sa.matrixV();
    Eigen::Vector2d c = sa.singularValues().cwiseMin(1.0);

    const Matrix2cd Bt = L.adjoint() * B;  // = S R'^dag
    const Matrix2cd Ct = C * R;            // = -L' S
    Eigen::Vector2d s(Bt.row(0).norm(), Bt.row(1).norm());
    Eigen::Vector2d theta(std::atan2(s[0], c[0]), std::atan2(s[1], c[1]));
    c = theta.array().cos();
    s = theta.array().sin();

    constexpr double kTau = 1e-2;
    Matrix2cd Rp = Matrix2cd::Zero(), Lp = Matrix2cd::Zero();
    std::array<bool, 2> from_b{};
    for (int i = 0; i < 2; ++i) {
        if (s[i] >= kTau) {
            Rp.col(i) = (Bt.row(i) / s[i]).adjoint();
            Lp.col(i) = -Ct.col(i) / s[i];
            from_b[i] = true;
        }
    }
    if (!from_b[0] || !from_b[1]) {
        Matrix2cd G = D;
        for (int j = 0; j < 2; ++j)
            if (from_b[j]) G -= (Lp.col(j) * c[j]) * Rp.col(j).adjoint();
        Eigen::JacobiSVD<Matrix2cd> sg(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
        int slot = 0;
        for (int i = 0; i < 2; ++i) {
            if (from_b[i]) continue;
            Eigen::Vector2cd lw = sg.matrixU().col(slot);
            Eigen::Vector2cd rw = sg.matrixV().col(slot);
            ++slot;
            if (s[i] > 1e-13) {
                // align the common phase with the B-side direction
                Eigen::Vector2cd b = (Bt.row(i) / s[i]).adjoint();
                Complex ph = rw.dot(b);  // <rw, b>
                if (std::abs(ph) > 1e-8) {
                    ph /= std::abs(ph);
                    lw *= ph;
                    rw *= ph;
                }
            }
            Lp.col(i) = lw;
            Rp.col(i) = rw;
        }
    }

    CsdFactors f{L, Lp, theta[0], theta[1], R, Rp};

    // Alternating-Procrustes polish: monotone in the reassembly error.
    CsdFactors best = f;
    double best_err = csd_error(best, U);
    for (int sweep = 0; sweep < 20 && best_err > 1e-14; ++sweep) {
        Eigen::Vector2d cd = theta.array().cos(), sd = theta.array().sin();
        Matrix2cd Cd = cd.cast<Complex>().asDiagonal();
        Matrix2cd Sd = sd.cast<Complex>().asDiagonal();
        L = polar_unitary(A * R * Cd + B * Rp * Sd);
        Lp = polar_unitary(D * Rp * Cd - C * R * Sd);
        R = polar_unitary(A.adjoint() * L * Cd - C.adjoint() * Lp * Sd);
        Rp = polar_unitary(B.adjoint() * L * Sd + D.adjoint() * Lp * Cd);
        Eigen::Vector2d cn =
            0.5 * ((L.adjoint() * A * R).diagonal().real() +
                   (Lp.adjoint() * D * Rp).diagonal().real());
        Eigen::Vector2d sn =
            0.5 * ((L.adjoint() * B * Rp).diagonal().real() -
                   (Lp.adjoint() * C * R).diagonal().real());
        for (int i = 0; i < 2; ++i)
            theta[i] = std::atan2(std::max(0.0, sn[i]), std::max(0.0, cn[i]));
        CsdFactors cur{L, Lp, theta[0], theta[1], R, Rp};
        double err = csd_error(cur, U);
        if (err < best_err) {
            best = cur;
            best_err = err;
        }
    }
    return best;
}

}  // namespace

CsdFactors csd4(const Eigen::Matrix4cd& U) {
    if (!U.allFinite()) throw std::invalid_argument("csd4: non-finite entries");
    if (!approx_unitary(U, 1e-10)) throw std::invalid_argument("csd4: input is not unitary");

    // When both angles are small the A block is nearly unitary and the B/C
    // blocks carry no usable direction information.  Solve the column-swapped
    // problem instead (its angles are the complements) and map back.
    Eigen::JacobiSVD<Matrix2cd> probe(U.block<2, 2>(0, 0));
    Eigen::Vector2d ca = probe.singularValues().cwiseMin(1.0);
    double s_big = std::sqrt(std::max(0.0, 1.0 - ca[1] * ca[1]));
    double s_small = std::sqrt(std::max(0.0, 1.0 - ca[0] * ca[0]));
    if (std::max(s_big, s_small) < 0.1) {
        Matrix4cd J = Matrix4cd::Zero();
        J.block<2, 2>(0, 2).setIdentity();
        J.block<2, 2>(2, 0).setIdentity();
        CsdFactors g = csd_core(U * J);
        CsdFactors f;
        f.L = g.L;
        f.Lp = -g.Lp;
        f.theta1 = kPi / 2 - g.theta1;
        f.theta2 = kPi / 2 - g.theta2;
        f.R = g.Rp;
        f.Rp = g.R;
        if (std::cos(f.theta1) < std::cos(f.theta2)) {
            f.L.col(0).swap(f.L.col(1));
            f.Lp.col(0).swap(f.Lp.col(1));
            f.R.col(0).swap(f.R.col(1));
            f.Rp.col(0).swap(f.Rp.col(1));
            std::swap(f.theta1, f.theta2);
        }
        return f;
    }
    return csd_core(U);
}

// ---------------------------------------------------------------------------
// Wave-plate triple
// ---------------------------------------------------------------------------

namespace {

Eigen::Matrix2cd rotation2(double t) {
    Matrix2cd R;
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return R;
}

Eigen::Matrix2cd hwp_matrix(double theta) {
    Matrix2cd H;
    H << std::cos(2 * theta), std::sin(2 * theta), std::sin(2 * theta), -std::cos(2 * theta);
    return H;
}

Eigen::Matrix2cd qwp_matrix(double theta) {
    return rotation2(theta) * Eigen::Vector2cd(1.0, Complex(0, 1)).asDiagonal() *
           rotation2(-theta);
}

}  // namespace

WaveplateTriple solve_waveplate_triple(const Eigen::Matrix2cd& target) {
    if (!approx_unitary(target, 1e-10))
        throw std::invalid_argument("solve_waveplate_triple: target is not unitary");

    // Split off det, then read the SU(2) part as a quaternion
    // V = W I - i (X sx + Y sy + Z sz).
    const double phi_det = std::arg(target.determinant()) / 2;
    const Matrix2cd V = target * std::polar(1.0, -phi_det);
    const double W = (V(0, 0).real() + V(1, 1).real()) / 2;
    const double Z = (V(1, 1).imag() - V(0, 0).imag()) / 2;
    const double X = -(V(0, 1).imag() + V(1, 0).imag()) / 2;
    const double Y = (V(1, 0).real() - V(0, 1).real()) / 2;

    // The product quaternion of Q(a)H(b)Q(g) separates into
    //   (W, Y) = -cos(delta) (cos sigma, sin sigma),
    //   (X, Z) =  sin(delta) (-cos sbar, sin sbar),
    // with sigma = a - g, sbar = a + g (doubled plate angles) and
    // delta = sbar - 2b.
    const double cd = std::hypot(W, Y);
    const double sd = std::hypot(X, Z);
    const double sigma = cd > 1e-12 ? std::atan2(-Y, -W) : 0.0;
    const double sbar = sd > 1e-12 ? std::atan2(Z, -X) : 0.0;
    const double delta = std::atan2(sd, cd);

    WaveplateTriple w;
    w.alpha = wrap_angle((sbar + sigma) / 2);
    w.beta = wrap_angle((sbar - delta) / 2);
    w.gamma = wrap_angle((sbar - sigma) / 2);
    const Matrix2cd M = qwp_matrix(w.alpha) * hwp_matrix(w.beta) * qwp_matrix(w.gamma);
    w.global_phase = std::arg((target.adjoint() * M).trace());
    return w;
}

// ---------------------------------------------------------------------------
// Attenuation / phase stages
// ---------------------------------------------------------------------------

AttenuationStage synthesize_attenuation(const Eigen::VectorXd& diag_entries,
                                        double lambda_scale) {
    if (diag_entries.size() != 4)
        throw std::invalid_argument("synthesize_attenuation: need 4 diagonal entries");
    AttenuationStage st;
    st.lambda_scale = lambda_scale;
    for (int i = 0; i < 4; ++i) {
        double d = diag_entries[i];
        if (d < -1e-12 || d > 1.0 + 1e-12)
            throw std::invalid_argument("synthesize_attenuation: entry outside [0, 1]");
        st.angles[i] = 0.5 * std::asin(std::clamp(d, 0.0, 1.0));
    }
    return st;
}

PhaseStage synthesize_phase_stage(const Eigen::VectorXd& lambda) {
    if (lambda.size() == 0) throw std::invalid_argument("synthesize_phase_stage: empty spectrum");
    PhaseStage st;
    st.offset = (lambda.minCoeff() + lambda.maxCoeff()) / 2;
    st.coeffs.resize(lambda.size());
    for (int i = 0; i < lambda.size(); ++i) st.coeffs[i] = lambda[i] - st.offset;
    // Slope of the HWP_t angle per path: theta = pi/4 + (c/2) t for the
    // H mode of each path under the Q(45) H(theta) Q(45) gadget.
    for (int m = 0; m + 1 < static_cast<int>(st.coeffs.size()); m += 2)
        st.hwp_parameterization.emplace_back(m, st.coeffs[m] / 2);
    return st;
}

// ---------------------------------------------------------------------------
// Dimension expansion fixtures
// ---------------------------------------------------------------------------

namespace fixtures {

Eigen::Matrix3d three_vertex_p() {
    Eigen::Matrix3d P;
    P << -1, 1, -1, 1, 1, 0, 0, 0, 1;
    return P;
}

Eigen::Matrix3d three_vertex_p_inv() {
    Eigen::Matrix3d Pi;
    Pi << -1, 1, -1, 1, 1, 1, 0, 0, 2;
    return Pi;
}

Eigen::Matrix4d three_vertex_p_expanded() {
    Eigen::Matrix4d M;
    M << -1, 1, -1, 1, 1, 1, 0, 0, 0, 0, 1, 1, -1, 1, 1, -1;
    return M;
}

Eigen::Matrix4d three_vertex_p_inv_expanded() {
    const double r3 = std::sqrt(3.0);
    Eigen::Matrix4d M;
    M << -1, 1, -1, 2 / r3, 1, 1, 1, -2 / r3, 0, 0, 2, r3, -2, 0, 1, -2 / r3;
    return M;
}

Eigen::Matrix4d four_vertex_p() {
    Eigen::Matrix4d P;
    P << 2, -1, 1, 0, 2, -1, -1, 0, 1, 1, -1, 1, 1, 1, 1, -1;
    return P;
}

Eigen::Matrix4d four_vertex_p_inv() {
    Eigen::Matrix4d Pi;
    Pi << 1, 1, 1, 1, -1, -1, 2, 2, 3, -3, 0, 0, 3, -3, 3, -3;
    return Pi;
}

}  // namespace fixtures

Expansion expand_dimension(const Eigen::Matrix3cd& M, ExpandMode mode) {
    Expansion e;
    e.blocked_modes = {3};
    if (mode == ExpandMode::generic_pad) {
        e.matrix = Matrix4cd::Zero();
        e.matrix.block<3, 3>(0, 0) = M;
        e.matrix(3, 3) = 1.0;
        return e;
    }
    if ((M - fixtures::three_vertex_p().cast<Complex>()).norm() < 1e-12) {
        e.matrix = fixtures::three_vertex_p_expanded().cast<Complex>();
        return e;
    }
    if ((M - fixtures::three_vertex_p_inv().cast<Complex>()).norm() < 1e-12) {
        e.matrix = fixtures::three_vertex_p_inv_expanded().cast<Complex>();
        return e;
    }
    throw std::invalid_argument("expand_dimension: no paper fixture matches this matrix");
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

namespace {

bool is_real(const Matrix2cd& M) { return M.imag().norm() <= 1e-12; }

// Single 2x2 unitary on one path as wave-plate stages: reflections need one
// HWP, rotations two (the first fixed at 45 degrees), anything complex a
// QWP-HWP-QWP triple handled by the caller.
void emit_real_block(std::vector<Stage>& out, int path, const Eigen::Matrix2d& M,
                     const std::string& block) {
    if ((M - Eigen::Matrix2d::Identity()).norm() <= 1e-12) return;
    const double det = M.determinant();
    if (det < 0.0) {
        double beta = 0.5 * std::atan2(M(1, 0), M(0, 0));
        out.push_back({WaveplateStage{path, PlateKind::HWP, wrap_angle(beta)}, block});
    } else {
        double phi = std::atan2(M(1, 0), M(0, 0));  // M = [[c,-s],[s,c]]
        out.push_back({WaveplateStage{path, PlateKind::HWP, kPi / 4}, block});
        out.push_back({WaveplateStage{path, PlateKind::HWP, wrap_angle(kPi / 4 + phi / 2)}, block});
    }
}

void emit_block_pair(std::vector<Stage>& out, const Matrix2cd& M1, const Matrix2cd& M2,
                     const std::string& block) {
    const bool id1 = (M1 - Matrix2cd::Identity()).norm() <= 1e-12;
    const bool id2 = (M2 - Matrix2cd::Identity()).norm() <= 1e-12;
    if (id1 && id2) return;
    if (is_real(M1) && is_real(M2)) {
        emit_real_block(out, 0, M1.real(), block);
        emit_real_block(out, 1, M2.real(), block);
        return;
    }
    BlockUnitaryStage st;
    st.path1 = solve_waveplate_triple(M1);
    st.path2 = solve_waveplate_triple(M2);
    st.comp1 = -st.path1.global_phase;
    st.comp2 = -st.path2.global_phase;
    out.push_back({st, block});
}

// U = L4 S4 R4 in application order: R4 blocks, then the S4 rotation pair on
// re-routed mode pairs (1H,2H) and (1V,2V), then the L4 blocks.
void emit_unitary(std::vector<Stage>& out, const Matrix4cd& U, const std::string& block) {
    if ((U - Matrix4cd::Identity()).norm() <= 1e-12) return;
    CsdFactors f = csd4(U);
    emit_block_pair(out, f.R.adjoint(), f.Rp.adjoint(), block);
    if (std::abs(f.theta1) > 1e-12 || std::abs(f.theta2) > 1e-12) {
        out.push_back({RoutingStage{{0, 2, 1, 3}}, block});
        Eigen::Matrix2d r1, r2;  // [[c, s], [-s, c]] per S4 row pattern
        r1 << std::cos(f.theta1), std::sin(f.theta1), -std::sin(f.theta1), std::cos(f.theta1);
        r2 << std::cos(f.theta2), std::sin(f.theta2), -std::sin(f.theta2), std::cos(f.theta2);
        emit_real_block(out, 0, r1, block);
        emit_real_block(out, 1, r2, block);
        out.push_back({RoutingStage{{0, 2, 1, 3}}, block});
    }
    emit_block_pair(out, f.L, f.Lp, block);
}

void emit_attenuator(std::vector<Stage>& out, const Eigen::VectorXd& D, double scale,
                     const std::string& block) {
    if ((D.array() - 1.0).abs().maxCoeff() <= 1e-15) return;  // full transmission
    out.push_back({synthesize_attenuation(D, scale), block});
}

void emit_blocker(std::vector<Stage>& out, const std::string& block) {
    AttenuationStage st;
    st.angles = {kPi / 4, kPi / 4, kPi / 4, 0.0};
    st.lambda_scale = 1.0;
    out.push_back({st, block});
}

}  // namespace

int peephole_merge_hwp_pairs(std::vector<Stage>& stages) {
    auto as_hwp45 = [](const Stage& st) -> const WaveplateStage* {
        const auto* w = std::get_if<WaveplateStage>(&st.op);
        if (w && w->plate == PlateKind::HWP && std::abs(w->angle - kPi / 4) < 1e-12) return w;
        return nullptr;
    };
    int removed = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < stages.size(); ++i) {
            const auto* a = as_hwp45(stages[i]);
            if (!a) continue;
            // next stage touching the same path; other-path wave plates commute past
            for (std::size_t j = i + 1; j < stages.size(); ++j) {
                const auto* w = std::get_if<WaveplateStage>(&stages[j].op);
                if (!w) break;
                if (w->path != a->path) continue;
                if (as_hwp45(stages[j])) {
                    stages.erase(stages.begin() + j);
                    stages.erase(stages.begin() + i);
                    removed += 2;
                    changed = true;
                }
                break;
            }
            if (changed) break;
        }
    }
    return removed;
}

CircuitIR compile_evolution(const SpectralDecomposition& dec, const CompileOptions& opt) {
    if (dec.classification == SpectralClass::complex_spectrum ||
        dec.classification == SpectralClass::defective)
        throw std::invalid_argument("compile_evolution: decomposition is " +
                                    to_string(dec.classification));
    if (dec.n != 3 && dec.n != 4)
        throw std::invalid_argument("compile_evolution: unsupported dimension " +
                                    std::to_string(dec.n));

    Matrix4cd P4, P4i;
    Eigen::VectorXd lam4(4);
    if (dec.n == 3) {
        P4 = expand_dimension(dec.P, ExpandMode::generic_pad).matrix;
        P4i = expand_dimension(dec.P_inv, ExpandMode::generic_pad).matrix;
        lam4.head<3>() = dec.lambda;
        lam4[3] = (dec.lambda.minCoeff() + dec.lambda.maxCoeff()) / 2;  // zero after centering
    } else {
        P4 = dec.P;
        P4i = dec.P_inv;
        lam4 = dec.lambda;
    }

    const SvdFactors fp = svd(P4);
    const SvdFactors fpi = svd(P4i);

    CircuitIR ir;
    ir.n_vertices = dec.n;
    ir.total_scale = fp.scale * fpi.scale;
    for (int v = 0; v < dec.n; ++v) ir.detector_modes.push_back(v);
    if (dec.n == 3) ir.blocked_modes = {3};

    emit_unitary(ir.stages, fpi.U2, "D2");
    emit_attenuator(ir.stages, fpi.D, fpi.scale, "D2");
    emit_unitary(ir.stages, fpi.U1, "U2");
    if (dec.n == 3) emit_blocker(ir.stages, "U2");

    PhaseStage phase = synthesize_phase_stage(lam4);
    ir.stages.push_back({phase, "Lambda_t"});

    emit_unitary(ir.stages, fp.U2, "U1");
    emit_attenuator(ir.stages, fp.D, fp.scale, "D1");
    emit_unitary(ir.stages, fp.U1, "D1");
    if (dec.n == 3) emit_blocker(ir.stages, "D1");

    if (opt.peephole) peephole_merge_hwp_pairs(ir.stages);

    ir.provenance["eigenvalues"] =
        std::vector<double>(dec.lambda.data(), dec.lambda.data() + dec.n);
    ir.provenance["phase_offset"] = phase.offset;
    if (!opt.source.empty()) ir.provenance["source"] = opt.source;
    return ir;
}

// ---------------------------------------------------------------------------
// IR serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json triple_to_json(const WaveplateTriple& w) {
    return {{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma},
            {"global_phase", w.global_phase}};
}

WaveplateTriple triple_from_json(const nlohmann::json& j) {
    return {j.at("alpha").get<double>(), j.at("beta").get<double>(),
            j.at("gamma").get<double>(), j.at("global_phase").get<double>()};
}

nlohmann::json stage_to_json(const Stage& st) {
    nlohmann::json j;
    j["block"] = st.block;
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, WaveplateStage>) {
                j["kind"] = "waveplate";
                j["path"] = op.path + 1;
                j["plate"] = op.plate == PlateKind::HWP ? "HWP" : "QWP";
                j["angle"] = op.angle;
            } else if constexpr (std::is_same_v<T, RoutingStage>) {
                j["kind"] = "routing";
                j["perm"] = op.perm;
            } else if constexpr (std::is_same_v<T, AttenuationStage>) {
                j["kind"] = "attenuator";
                j["angles"] = op.angles;
                j["lambda_scale"] = op.lambda_scale;
            } else if constexpr (std::is_same_v<T, PhaseStage>) {
                j["kind"] = "phase";
                j["coeffs"] = op.coeffs;
                j["offset"] = op.offset;
                j["hwp_slopes"] = op.hwp_parameterization;
            } else {
                j["kind"] = "block_unitary";
                j["path1"] = triple_to_json(op.path1);
                j["path2"] = triple_to_json(op.path2);
                j["comp"] = {op.comp1, op.comp2};
            }
        },
        st.op);
    return j;
}

Stage stage_from_json(const nlohmann::json& j) {
    Stage st;
    st.block = j.value("block", "");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "waveplate") {
        WaveplateStage w;
        w.path = j.at("path").get<int>() - 1;
        if (w.path != 0 && w.path != 1)
            throw std::invalid_argument("waveplate stage: path must be 1 or 2");
        w.plate = j.at("plate").get<std::string>() == "QWP" ? PlateKind::QWP : PlateKind::HWP;
        w.angle = j.at("angle").get<double>();
        st.op = w;
    } else if (kind == "routing") {
        RoutingStage r;
        auto p = j.at("perm").get<std::vector<int>>();
        if (p.size() != 4) throw std::invalid_argument("routing stage: perm must have 4 entries");
        std::copy(p.begin(), p.end(), r.perm.begin());
        st.op = r;
    } else if (kind == "attenuator") {
        AttenuationStage a;
        auto ang = j.at("angles").get<std::vector<double>>();
        if (ang.size() != 4)
            throw std::invalid_argument("attenuator stage: angles must have 4 entries");
        std::copy(ang.begin(), ang.end(), a.angles.begin());
        a.lambda_scale = j.value("lambda_scale", 1.0);
        st.op = a;
    } else if (kind == "phase") {
        PhaseStage p;
        p.coeffs = j.at("coeffs").get<std::vector<double>>();
        p.offset = j.value("offset", 0.0);
        if (j.contains("hwp_slopes"))
            p.hwp_parameterization =
                j["hwp_slopes"].get<std::vector<std::pair<int, double>>>();
        st.op = p;
    } else if (kind == "block_unitary") {
        BlockUnitaryStage b;
        b.path1 = triple_from_json(j.at("path1"));
        b.path2 = triple_from_json(j.at("path2"));
        auto comp = j.value("comp", std::vector<double>{0.0, 0.0});
        b.comp1 = comp[0];
        b.comp2 = comp[1];
        st.op = b;
    } else {
        throw std::invalid_argument("unknown stage kind: " + kind);
    }
    return st;
}

}  // namespace

nlohmann::json to_json(const CircuitIR& ir) {
    nlohmann::json j;
    j["dim"] = ir.dim;
    j["n_vertices"] = ir.n_vertices;
    j["total_scale"] = ir.total_scale;
    j["detector_modes"] = ir.detector_modes;
    j["blocked_modes"] = ir.blocked_modes;
    j["provenance"] = ir.provenance;
    j["stages"] = nlohmann::json::array();
    for (const auto& st : ir.stages) j["stages"].push_back(stage_to_json(st));
    return j;
}

CircuitIR circuit_from_json(const nlohmann::json& j) {
    CircuitIR ir;
    ir.dim = j.at("dim").get<int>();
    if (ir.dim != 4) throw std::invalid_argument("circuit IR: dim must be 4");
    ir.n_vertices = j.at("n_vertices").get<int>();
    ir.total_scale = j.at("total_scale").get<double>();
    ir.detector_modes = j.at("detector_modes").get<std::vector<int>>();
    ir.blocked_modes = j.value("blocked_modes", std::vector<int>{});
    ir.provenance = j.value("provenance", nlohmann::json::object());
    for (const auto& sj : j.at("stages")) ir.stages.push_back(stage_from_json(sj));
    return ir;
}

}  // namespace dirwalk
