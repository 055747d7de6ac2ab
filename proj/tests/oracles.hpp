#pragma once

// Independent reference implementations used only by the tests. None of them
// shares code with the library: the SVD is a one-sided Jacobi sweep written
// from the textbook recurrence, and the metrics are direct transcriptions of
// their definitions with brute-force pair loops.

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Svd {
    Matrix u; // m x r
    Vector s; // r, descending
    Matrix v; // n x r
};

// One-sided Jacobi (Hestenes). Orthogonalizes the columns of a working copy
// of A by plane rotations; singular values are the final column norms.
inline Svd jacobi_svd(const Matrix& a)
{
    const bool flip = a.rows() < a.cols();
    Matrix w = flip ? Matrix(a.transpose()) : a;
    const Eigen::Index m = w.rows();
    const Eigen::Index n = w.cols();
    Matrix v = Matrix::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (Eigen::Index i = 0; i < m; ++i) {
                    alpha += w(i, p) * w(i, p);
                    beta += w(i, q) * w(i, q);
                    gamma += w(i, p) * w(i, q);
                }
                if (gamma == 0.0) continue;
                off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index i = 0; i < m; ++i) {
                    const double x = w(i, p), y = w(i, q);
                    w(i, p) = c * x - s * y;
                    w(i, q) = s * x + c * y;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double x = v(i, p), y = v(i, q);
                    v(i, p) = c * x - s * y;
                    v(i, q) = s * x + c * y;
                }
            }
        }
        if (off < 1e-15) break;
    }
    std::vector<std::pair<double, Eigen::Index>> order;
    for (Eigen::Index j = 0; j < n; ++j) order.emplace_back(w.col(j).norm(), j);
    std::sort(order.begin(), order.end(), [](auto x, auto y) { return x.first > y.first; });
    Svd out;
    out.s.resize(n);
    out.u.resize(m, n);
    out.v.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto [sigma, j] = order[static_cast<std::size_t>(r)];
        out.s(r) = sigma;
        out.u.col(r) = sigma > 0 ? Vector(w.col(j) / sigma) : Vector(Vector::Zero(m));
        out.v.col(r) = v.col(j);
    }
    if (flip) std::swap(out.u, out.v);
    return out;
}

inline int rank_of(const Svd& svd, double rel = 1e-10)
{
    int r = 0;
    const double top = svd.s.size() ? svd.s(0) : 0.0;
    for (Eigen::Index i = 0; i < svd.s.size(); ++i) {
        if (svd.s(i) > rel * std::max(top, 1.0)) ++r;
    }
    return r;
}

inline double nuclear(const Matrix& a) { return jacobi_svd(a).s.sum(); }

// U_r V_r^T over the numerically nonzero singular values.
inline Matrix polar_part(const Matrix& a)
{
    const Svd svd = jacobi_svd(a);
    const int r = rank_of(svd);
    return svd.u.leftCols(r) * svd.v.leftCols(r).transpose();
}

inline Matrix shrink(const Matrix& a, double tau)
{
    const Svd svd = jacobi_svd(a);
    Vector s = (svd.s.array() - tau).max(0.0);
    return svd.u * s.asDiagonal() * svd.v.transpose();
}

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen)
{
    std::normal_distribution<double> nd;
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(gen);
    return m;
}

// ---- metrics straight from the definitions ----

inline double hamming(const Matrix& s, const Matrix& y)
{
    double wrong = 0;
    for (Eigen::Index j = 0; j < s.rows(); ++j)
        for (Eigen::Index k = 0; k < s.cols(); ++k)
            if ((s(j, k) >= 0 ? 1.0 : -1.0) != y(j, k)) wrong += 1;
    return wrong / static_cast<double>(s.size());
}

inline double ranking(const Matrix& s, const Matrix& y)
{
    double total = 0;
    int used = 0;
    for (Eigen::Index j = 0; j < s.rows(); ++j) {
        Eigen::Index rel = 0, irr = 0, bad = 0;
        for (Eigen::Index a = 0; a < s.cols(); ++a) (y(j, a) > 0 ? rel : irr) += 1;
        if (rel == 0 || irr == 0) continue;
        for (Eigen::Index a = 0; a < s.cols(); ++a)
            for (Eigen::Index b = 0; b < s.cols(); ++b)
                if (y(j, a) > 0 && y(j, b) < 0 && s(j, a) <= s(j, b)) ++bad;
        total += static_cast<double>(bad) / static_cast<double>(rel * irr);
        ++used;
    }
    return total / used;
}

// Rank of label a in row j: position after a stable descending sort.
inline Eigen::Index position(const Matrix& s, Eigen::Index j, Eigen::Index a)
{
    Eigen::Index before = 0;
    for (Eigen::Index b = 0; b < s.cols(); ++b)
        if (s(j, b) > s(j, a) || (s(j, b) == s(j, a) && b < a)) ++before;
    return before + 1;
}

inline double avg_precision(const Matrix& s, const Matrix& y)
{
    double total = 0;
    int used = 0;
    for (Eigen::Index j = 0; j < s.rows(); ++j) {
        Eigen::Index rel = 0;
        double acc = 0;
        for (Eigen::Index a = 0; a < s.cols(); ++a) {
            if (y(j, a) <= 0) continue;
            ++rel;
            const Eigen::Index ra = position(s, j, a);
            Eigen::Index above = 0;
            for (Eigen::Index b = 0; b < s.cols(); ++b)
                if (y(j, b) > 0 && position(s, j, b) <= ra) ++above;
            acc += static_cast<double>(above) / static_cast<double>(ra);
        }
        if (rel == 0) continue;
        total += acc / static_cast<double>(rel);
        ++used;
    }
    return total / used;
}

inline double auc(const Matrix& s, const Matrix& y)
{
    double total = 0;
    int used = 0;
    for (Eigen::Index k = 0; k < s.cols(); ++k) {
        double wins = 0;
        Eigen::Index pos = 0, neg = 0;
        for (Eigen::Index a = 0; a < s.rows(); ++a) (y(a, k) > 0 ? pos : neg) += 1;
        if (pos == 0 || neg == 0) continue;
        for (Eigen::Index a = 0; a < s.rows(); ++a)
            for (Eigen::Index b = 0; b < s.rows(); ++b)
                if (y(a, k) > 0 && y(b, k) < 0) wins += s(a, k) > s(b, k) ? 1.0 : s(a, k) == s(b, k) ? 0.5 : 0.0;
        total += wins / static_cast<double>(pos * neg);
        ++used;
    }
    return total / used;
}

} // namespace oracle
