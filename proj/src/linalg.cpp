#include "oinfo/linalg.hpp"

#include "oinfo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace oinfo {

namespace {

Matrix cholesky_once(const Matrix& m, double tol) {
    const Eigen::Index n = m.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double diag = m(j, j);
        for (Eigen::Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > tol)) throw NotPositiveDefinite(static_cast<std::size_t>(j), diag);
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

void check_indices(const IndexList& idx, Eigen::Index n, const char* what) {
    for (auto i : idx) {
        if (i < 0 || i >= n) {
            throw ConfigError(std::string(what) + " index " + std::to_string(i) + " out of range [0, " +
                              std::to_string(n) + ")");
        }
    }
}

}  // namespace

Matrix cholesky(const Matrix& m, const CholeskyOptions& opts) {
    if (m.rows() != m.cols()) throw ConfigError("cholesky: matrix is not square");
    if (!all_finite(m)) throw NumericError("cholesky: matrix has non-finite entries");
    if (!is_symmetric(m, 1e-10)) throw NumericError("cholesky: matrix is not symmetric");
    try {
        return cholesky_once(m, opts.pd_tolerance);
    } catch (const NotPositiveDefinite&) {
        if (!opts.jitter_retry) throw;
    }
    Matrix jittered = m;
    jittered.diagonal().array() += 1e-8;
    return cholesky_once(jittered, opts.pd_tolerance);
}

double logdet(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    const Matrix l = cholesky(m);
    return 2.0 * l.diagonal().array().log().sum();
}

Matrix submatrix(const Matrix& m, const IndexList& rows, const IndexList& cols) {
    check_indices(rows, m.rows(), "row");
    check_indices(cols, m.cols(), "column");
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
    return out;
}

Matrix spd_solve(const Matrix& m, const Matrix& rhs) {
    const Matrix l = cholesky(m);
    const auto tri = l.triangularView<Eigen::Lower>();
    const Matrix y = tri.solve(rhs);
    return tri.transpose().solve(y);
}

Matrix conditional_weights(const Matrix& cov, const IndexList& target, const IndexList& given) {
    std::set<Eigen::Index> seen(target.begin(), target.end());
    for (auto g : given) {
        if (seen.count(g)) throw ConfigError("target and given index sets overlap at " + std::to_string(g));
    }
    if (given.empty()) return Matrix::Zero(static_cast<Eigen::Index>(target.size()), 0);
    const Matrix s_gg = submatrix(cov, given, given);
    const Matrix s_gt = submatrix(cov, given, target);
    // W = S_tg S_gg^{-1} = (S_gg^{-1} S_gt)^T
    return spd_solve(s_gg, s_gt).transpose();
}

Matrix schur_conditional(const Matrix& cov, const IndexList& target, const IndexList& given) {
    const Matrix w = conditional_weights(cov, target, given);
    Matrix s_tt = submatrix(cov, target, target);
    if (given.empty()) return s_tt;
    const Matrix s_gt = submatrix(cov, given, target);
    Matrix out = s_tt - w * s_gt;
    return 0.5 * (out + out.transpose());
}

double min_eigenvalue(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    if (m.size() == 0) return true;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace oinfo
