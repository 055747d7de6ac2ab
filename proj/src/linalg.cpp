#include "mvml/linalg.hpp"

#include "mvml/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvml {

namespace {

// Spectrum of the smaller Gram product of `a`.
struct GramSpectrum {
    bool tall = true; // true: B = A^T A (cols x cols); false: B = A A^T
    EigenPair eig;    // eigenvalues clamped at zero
};

GramSpectrum gram_spectrum(const Matrix& a)
{
    GramSpectrum out;
    out.tall = a.rows() >= a.cols();
    Matrix b;
    if (out.tall) {
        b.noalias() = a.transpose() * a;
    } else {
        b.noalias() = a * a.transpose();
    }
    out.eig = symmetric_eig(b);
    out.eig.values = out.eig.values.cwiseMax(0.0);
    return out;
}

double eig_cutoff(const Vector& values, const KernelTolerances& tol)
{
    const double top = values.size() > 0 ? values(0) : 0.0;
    return tol.rank_cutoff * std::max(top, 1.0);
}

void require_finite(const Matrix& a, const char* op)
{
    if (!all_finite(a)) {
        throw Error(ErrorKind::InvalidInput, std::string(op) + ": non-finite entry in input");
    }
}

// Apply a spectral filter: returns A V diag(scale) V^T (tall) or
// U diag(scale) U^T A (wide), where scale is indexed like spec.eig.values.
Matrix spectral_map(const Matrix& a, const GramSpectrum& spec, const Vector& scale)
{
    const Matrix& vecs = spec.eig.vectors;
    Matrix middle = vecs * scale.asDiagonal() * vecs.transpose();
    Matrix out;
    if (spec.tall) {
        out.noalias() = a * middle;
    } else {
        out.noalias() = middle * a;
    }
    return out;
}

} // namespace

bool all_finite(const Matrix& a)
{
    return a.allFinite();
}

EigenPair symmetric_eig(const Matrix& b)
{
    if (b.rows() != b.cols()) {
        throw Error(ErrorKind::InvalidInput, "symmetric_eig: matrix is not square");
    }
    require_finite(b, "symmetric_eig");
    const Eigen::Index m = b.rows();
    EigenPair out;
    if (m == 0) {
        return out;
    }
    Matrix sym = 0.5 * (b + b.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::InvalidInput, "symmetric_eig: eigensolver did not converge");
    }
    // Eigen returns ascending order.
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

double nuclear_norm(const Matrix& a, const KernelTolerances& tol)
{
    require_finite(a, "nuclear_norm");
    if (a.size() == 0) {
        return 0.0;
    }
    const GramSpectrum spec = gram_spectrum(a);
    const double cutoff = eig_cutoff(spec.eig.values, tol);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < spec.eig.values.size(); ++i) {
        const double s = spec.eig.values(i);
        if (s > cutoff) {
            sum += std::sqrt(s);
        }
    }
    return sum;
}

Matrix trace_norm_subgradient(const Matrix& a, const KernelTolerances& tol)
{
    require_finite(a, "trace_norm_subgradient");
    if (a.size() == 0) {
        return Matrix::Zero(a.rows(), a.cols());
    }
    const GramSpectrum spec = gram_spectrum(a);
    const double cutoff = eig_cutoff(spec.eig.values, tol);
    Vector inv_sqrt(spec.eig.values.size());
    for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i) {
        const double s = spec.eig.values(i);
        inv_sqrt(i) = s > cutoff ? 1.0 / std::sqrt(s) : 0.0;
    }
    return spectral_map(a, spec, inv_sqrt);
}

Matrix svt(const Matrix& a, double tau, const KernelTolerances& /*tol*/)
{
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw Error(ErrorKind::InvalidInput, "svt: threshold must be finite and >= 0");
    }
    require_finite(a, "svt");
    if (tau == 0.0 || a.size() == 0) {
        return a;
    }
    const GramSpectrum spec = gram_spectrum(a);
    // Shrink factor (sigma - tau)_+ / sigma lies in [0, 1], so noisy tiny
    // eigenvalues cannot blow up the reconstruction.
    Vector factor(spec.eig.values.size());
    for (Eigen::Index i = 0; i < factor.size(); ++i) {
        const double sigma = std::sqrt(spec.eig.values(i));
        factor(i) = sigma > tau ? 1.0 - tau / sigma : 0.0;
    }
    return spectral_map(a, spec, factor);
}

int numeric_rank(const Matrix& a, double sigma_tol)
{
    require_finite(a, "numeric_rank");
    if (a.size() == 0) {
        return 0;
    }
    const GramSpectrum spec = gram_spectrum(a);
    const double top = spec.eig.values(0);
    const auto dim = static_cast<double>(spec.eig.values.size());
    const double floor = dim * std::numeric_limits<double>::epsilon() * top;
    const double cutoff = std::max(sigma_tol * sigma_tol, floor);
    int rank = 0;
    for (Eigen::Index i = 0; i < spec.eig.values.size(); ++i) {
        if (spec.eig.values(i) > cutoff) {
            ++rank;
        }
    }
    return rank;
}

double spectral_norm(const Matrix& a)
{
    require_finite(a, "spectral_norm");
    if (a.size() == 0) {
        return 0.0;
    }
    return std::sqrt(gram_spectrum(a).eig.values(0));
}

SpdFactorization::SpdFactorization(const Matrix& m, const KernelTolerances& tol)
{
    if (m.rows() != m.cols()) {
        throw Error(ErrorKind::InvalidInput, "spd_solve: matrix is not square");
    }
    require_finite(m, "spd_solve");
    dim_ = m.rows();
    regularized_ = 0.5 * (m + m.transpose());
    if (dim_ > 0) {
        eps_ = tol.ridge * regularized_.trace() / static_cast<double>(dim_);
        regularized_.diagonal().array() += eps_;
    }
    llt_.compute(regularized_);
    if (dim_ > 0 && (llt_.info() != Eigen::Success || !(eps_ > 0.0))) {
        throw Error(ErrorKind::SingularSystem, "spd_solve: Cholesky factorization failed after ridge");
    }
}

Matrix SpdFactorization::solve(const Matrix& rhs) const
{
    if (rhs.rows() != dim_) {
        throw Error(ErrorKind::InvalidInput, "spd_solve: right-hand side has wrong row count");
    }
    if (dim_ == 0) {
        return Matrix::Zero(0, rhs.cols());
    }
    return llt_.solve(rhs);
}

Matrix spd_solve(const Matrix& m, const Matrix& rhs, const KernelTolerances& tol)
{
    return SpdFactorization(m, tol).solve(rhs);
}

} // namespace mvml
