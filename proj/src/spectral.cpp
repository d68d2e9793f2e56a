#include "dirwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dirwalk {

using Complex = std::complex<double>;

std::string to_string(SpectralClass c) {
    switch (c) {
        case SpectralClass::hermitian: return "hermitian";
        case SpectralClass::pseudo_hermitian: return "pseudo_hermitian";
        case SpectralClass::complex_spectrum: return "complex_spectrum";
        case SpectralClass::defective: return "defective";
    }
    return "unknown";
}

SpectralClass spectral_class_from_string(const std::string& s) {
    if (s == "hermitian") return SpectralClass::hermitian;
    if (s == "pseudo_hermitian") return SpectralClass::pseudo_hermitian;
    if (s == "complex_spectrum") return SpectralClass::complex_spectrum;
    if (s == "defective") return SpectralClass::defective;
    throw std::invalid_argument("unknown spectral classification: " + s);
}

namespace {

// Unit norm, largest-magnitude component rotated to be real positive.
void canonicalize_column(Eigen::Ref<Eigen::VectorXcd> v) {
    double nrm = v.norm();
    if (nrm > 0.0) v /= nrm;
    int imax = 0;
    double best = -1.0;
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > best + 1e-15) {
            best = std::abs(v[i]);
            imax = i;
        }
    }
    if (best > 0.0) v *= std::conj(v[imax]) / std::abs(v[imax]);
}

}  // namespace

SpectralDecomposition eigendecompose(const Eigen::MatrixXcd& H, double tol) {
    const int n = static_cast<int>(H.rows());
    if (n == 0 || H.cols() != n) throw std::invalid_argument("eigendecompose: matrix must be square and non-empty");
    if (!H.allFinite()) throw std::invalid_argument("eigendecompose: non-finite entries");

    const double scale = std::max(1.0, H.norm());
    const bool hermitian = (H - H.adjoint()).norm() <= tol * scale;

    SpectralDecomposition dec;
    dec.n = n;
    dec.tol = tol;

    if (hermitian) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigendecompose: self-adjoint solver failed");
        dec.P = es.eigenvectors();
        dec.lambda = es.eigenvalues();
        for (int k = 0; k < n; ++k) canonicalize_column(dec.P.col(k));
        dec.P_inv = dec.P.adjoint();
        dec.raw_eigenvalues = dec.lambda.cast<Complex>();
        dec.classification = SpectralClass::hermitian;
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eigendecompose: eigensolver failed");
        Eigen::VectorXcd vals = es.eigenvalues();
        Eigen::MatrixXcd vecs = es.eigenvectors();

        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (vals[a].real() != vals[b].real()) return vals[a].real() < vals[b].real();
            return vals[a].imag() < vals[b].imag();
        });
        dec.P.resize(n, n);
        dec.raw_eigenvalues.resize(n);
        for (int k = 0; k < n; ++k) {
            dec.P.col(k) = vecs.col(order[k]);
            canonicalize_column(dec.P.col(k));
            dec.raw_eigenvalues[k] = vals[order[k]];
        }
        dec.lambda = dec.raw_eigenvalues.real();

        Eigen::JacobiSVD<Eigen::MatrixXcd> svd_p(dec.P);
        double smin = svd_p.singularValues()(n - 1);
        double cond = smin > 0.0 ? svd_p.singularValues()(0) / smin
                                 : std::numeric_limits<double>::infinity();

        bool complex_spec = false;
        for (int k = 0; k < n; ++k)
            if (std::abs(dec.raw_eigenvalues[k].imag()) > tol * scale) complex_spec = true;

        if (complex_spec)
            dec.classification = SpectralClass::complex_spectrum;
        else if (cond > 1.0 / tol)
            dec.classification = SpectralClass::defective;
        else
            dec.classification = SpectralClass::pseudo_hermitian;

        dec.P_inv = dec.P.fullPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
    }

    dec.residual = (H * dec.P - dec.P * dec.raw_eigenvalues.asDiagonal()).norm();
    return dec;
}

namespace {

void require_real_spectrum(const SpectralDecomposition& dec, const char* who) {
    if (dec.classification == SpectralClass::complex_spectrum ||
        dec.classification == SpectralClass::defective)
        throw std::invalid_argument(std::string(who) + ": decomposition is " +
                                    to_string(dec.classification) +
                                    "; need hermitian or pseudo_hermitian");
}

Eigen::VectorXcd phase_column(const Eigen::VectorXd& lambda, double t) {
    Eigen::VectorXcd ph(lambda.size());
    for (int k = 0; k < lambda.size(); ++k) ph[k] = std::polar(1.0, -lambda[k] * t);
    return ph;
}

}  // namespace

Eigen::MatrixXcd evolution_operator(const SpectralDecomposition& dec, double t) {
    require_real_spectrum(dec, "evolution_operator");
    return dec.P * phase_column(dec.lambda, t).asDiagonal() * dec.P_inv;
}

Eigen::VectorXcd evolve_state(const SpectralDecomposition& dec, const Eigen::VectorXcd& psi0,
                              double t) {
    require_real_spectrum(dec, "evolve_state");
    if (psi0.size() != dec.n) throw std::invalid_argument("evolve_state: dimension mismatch");
    Eigen::VectorXcd c = dec.P_inv * psi0;
    return dec.P * phase_column(dec.lambda, t).cwiseProduct(c);
}

CentralityReport ctqw_centrality(const SpectralDecomposition& dec, const Eigen::VectorXcd& psi0,
                                 double tie_tolerance) {
    require_real_spectrum(dec, "ctqw_centrality");
    if (psi0.size() != dec.n) throw std::invalid_argument("ctqw_centrality: dimension mismatch");

    const int n = dec.n;
    const Eigen::VectorXcd c = dec.P_inv * psi0;
    const double deg_tol = dec.tol * std::max(1.0, dec.lambda.cwiseAbs().maxCoeff());

    std::vector<double> scores(n, 0.0);
    for (int j = 0; j < n; ++j) {
        Complex acc = 0.0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                if (std::abs(dec.lambda[k] - dec.lambda[l]) <= deg_tol)
                    acc += dec.P(j, k) * c[k] * std::conj(dec.P(j, l) * c[l]);
        scores[j] = std::max(0.0, acc.real());
    }
    double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (!(total > 0.0))
        throw std::invalid_argument("ctqw_centrality: zero total average probability");
    return make_report("ctqw", std::move(scores), tie_tolerance);
}

std::vector<double> time_average_numeric(const SpectralDecomposition& dec,
                                         const Eigen::VectorXcd& psi0, double period, int samples,
                                         Exec policy) {
    require_real_spectrum(dec, "time_average_numeric");
    if (psi0.size() != dec.n) throw std::invalid_argument("time_average_numeric: dimension mismatch");
    if (samples < 2) throw std::invalid_argument("time_average_numeric: samples must be >= 2");
    if (!(period > 0.0)) throw std::invalid_argument("time_average_numeric: period must be positive");

    const int n = dec.n;
    const Eigen::VectorXcd c = dec.P_inv * psi0;
    const double h = period / (samples - 1);

    // Per-sample probabilities land in independent slots; the trapezoid
    // reduction below runs serially either way, so both policies agree bitwise.
    Eigen::MatrixXd prob(samples, n);
    auto eval = [&](int i) {
        Eigen::VectorXcd psi = dec.P * phase_column(dec.lambda, i * h).cwiseProduct(c);
        for (int j = 0; j < n; ++j) prob(i, j) = std::norm(psi[j]);
    };
    if (policy == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < samples; ++i) eval(i);
    } else {
        for (int i = 0; i < samples; ++i) eval(i);
    }

    std::vector<double> avg(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.5 * (prob(0, j) + prob(samples - 1, j));
        for (int i = 1; i < samples - 1; ++i) acc += prob(i, j);
        avg[j] = acc * h / period;
    }
    return avg;
}

NormBounds norm_oscillation_bounds(const SpectralDecomposition& dec,
                                   const Eigen::VectorXcd& psi0) {
    const Eigen::VectorXcd c = dec.P_inv * psi0;
    double sum = 0.0, biggest = 0.0;
    for (int k = 0; k < dec.n; ++k) {
        double term = dec.P.col(k).norm() * std::abs(c[k]);
        sum += term;
        biggest = std::max(biggest, term);
    }
    double lower = std::max(0.0, 2.0 * biggest - sum);
    return NormBounds{lower * lower, sum * sum};
}

// --- JSON -------------------------------------------------------------------

namespace {

nlohmann::json complex_matrix_to_json(const Eigen::MatrixXcd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < M.cols(); ++j)
            row.push_back({M(i, j).real(), M(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXcd complex_matrix_from_json(const nlohmann::json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    Eigen::MatrixXcd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k)
            M(i, k) = Complex(j[i][k][0].get<double>(), j[i][k][1].get<double>());
    return M;
}

}  // namespace

nlohmann::json to_json(const SpectralDecomposition& dec) {
    nlohmann::json j;
    j["n"] = dec.n;
    j["classification"] = to_string(dec.classification);
    j["lambda"] = std::vector<double>(dec.lambda.data(), dec.lambda.data() + dec.n);
    j["P"] = complex_matrix_to_json(dec.P);
    j["P_inv"] = complex_matrix_to_json(dec.P_inv);
    j["residual"] = dec.residual;
    j["tol"] = dec.tol;
    return j;
}

SpectralDecomposition spectral_from_json(const nlohmann::json& j) {
    SpectralDecomposition dec;
    dec.n = j.at("n").get<int>();
    dec.classification = spectral_class_from_string(j.at("classification").get<std::string>());
    auto lam = j.at("lambda").get<std::vector<double>>();
    dec.lambda = Eigen::Map<Eigen::VectorXd>(lam.data(), lam.size());
    dec.raw_eigenvalues = dec.lambda.cast<Complex>();
    dec.P = complex_matrix_from_json(j.at("P"));
    dec.P_inv = complex_matrix_from_json(j.at("P_inv"));
    dec.residual = j.value("residual", 0.0);
    dec.tol = j.value("tol", 1e-9);
    return dec;
}

}  // namespace dirwalk
