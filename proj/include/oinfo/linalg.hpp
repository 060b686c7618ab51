#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace oinfo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<Eigen::Index>;

struct CholeskyOptions {
    /// A pivot must exceed this value for the matrix to count as positive definite.
    double pd_tolerance = 1e-10;
    /// On failure, retry once with 1e-8 * I added to the diagonal.
    bool jitter_retry = false;
};

/// Lower-triangular L with L * L^T == m. Throws NotPositiveDefinite naming the
/// first pivot that falls at or below the tolerance.
Matrix cholesky(const Matrix& m, const CholeskyOptions& opts = {});

/// log det(m) computed as 2 * sum(log L_ii).
double logdet(const Matrix& m);

Matrix submatrix(const Matrix& m, const IndexList& rows, const IndexList& cols);

/// Covariance of the target coordinates given the `given` coordinates:
/// S_tt - S_tg S_gg^{-1} S_gt. An empty `given` returns S_tt.
Matrix schur_conditional(const Matrix& cov, const IndexList& target, const IndexList& given);

/// Regression matrix S_tg S_gg^{-1} so that E[x_t | x_g] = mu_t + W (x_g - mu_g).
Matrix conditional_weights(const Matrix& cov, const IndexList& target, const IndexList& given);

/// Solves m * X = rhs for symmetric positive definite m.
Matrix spd_solve(const Matrix& m, const Matrix& rhs);

double min_eigenvalue(const Matrix& m);
bool is_symmetric(const Matrix& m, double tol);
bool all_finite(const Matrix& m);

/// Pairwise (tree) summation; the result does not depend on how callers chunk work.
double pairwise_sum(std::span<const double> values);

}  // namespace oinfo
