#pragma once

// Dense kernels built on symmetric eigendecompositions of Gram matrices.
//
// For an n x c matrix A with n >> c, every kernel here forms the c x c Gram
// product (or the n x n one when n < c), decomposes it, and maps back. The
// cost is O(n c^2 + c^3), linear in the row count.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <optional>

namespace mvml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerances used by the Gram-route kernels. Defaults are fixed constants;
/// nothing is read from the environment.
struct KernelTolerances {
    /// Eigenvalues of the Gram matrix below rank_cutoff * max(lambda_max, 1)
    /// are treated as exact zeros.
    double rank_cutoff = 1e-10;
    /// Relative ridge added by SpdFactorization: eps = ridge * trace / dim.
    double ridge = 1e-8;
};

struct EigenPair {
    Vector values;  // descending
    Matrix vectors; // orthonormal columns, one per value
};

/// Eigendecomposition of a symmetric matrix; the input is symmetrized as
/// (b + b^T) / 2 first. Values are returned in descending order.
EigenPair symmetric_eig(const Matrix& b);

/// Sum of singular values.
double nuclear_norm(const Matrix& a, const KernelTolerances& tol = {});

/// The Q = 0 member U V^T of the trace-norm subdifferential, computed as
/// A V S^{-1/2} V^T from the eigendecomposition B = A^T A = V S V^T (or the
/// mirrored form U S^{-1/2} U^T A when rows < cols). Zero eigenvalues are
/// dropped, which gives the pseudo-inverse member for rank-deficient input.
Matrix trace_norm_subgradient(const Matrix& a, const KernelTolerances& tol = {});

/// Singular value thresholding: argmin_Z tau ||Z||_* + 1/2 ||Z - a||_F^2.
Matrix svt(const Matrix& a, double tau, const KernelTolerances& tol = {});

/// Numeric rank: number of singular values strictly above sigma_tol. The Gram
/// route cannot resolve singular values below ~sqrt(dim * eps) * sigma_max,
/// so that floor is applied as well.
int numeric_rank(const Matrix& a, double sigma_tol);

/// Largest singular value.
double spectral_norm(const Matrix& a);

/// Cholesky factorization of (m + eps I) with eps = ridge * trace(m) / dim.
/// Reusable across right-hand sides; immutable after construction.
class SpdFactorization {
public:
    explicit SpdFactorization(const Matrix& m, const KernelTolerances& tol = {});

    Matrix solve(const Matrix& rhs) const;

    Eigen::Index dim() const noexcept { return dim_; }
    double ridge() const noexcept { return eps_; }
    /// The regularized matrix (m + eps I) that was factorized.
    const Matrix& regularized() const noexcept { return regularized_; }

private:
    Eigen::Index dim_ = 0;
    double eps_ = 0.0;
    Matrix regularized_;
    Eigen::LLT<Matrix> llt_;
};

/// One-shot solve of (m + eps I) x = rhs.
Matrix spd_solve(const Matrix& m, const Matrix& rhs, const KernelTolerances& tol = {});

/// True when every entry is finite.
bool all_finite(const Matrix& a);

} // namespace mvml
