#include "dfflow/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

namespace dfflow {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> entries)
{
    SparseMatrix m;
    m.n_ = n;
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    m.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    m.col_indices_.reserve(entries.size());
    m.values_.reserve(entries.size());
    int last_row = -1, last_col = -1;
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
            throw std::out_of_range("triplet outside matrix bounds");
        }
        if (t.row == last_row && t.col == last_col) {
            m.values_.back() += t.value;
            continue;
        }
        m.col_indices_.push_back(t.col);
        m.values_.push_back(t.value);
        ++m.row_offsets_[static_cast<std::size_t>(t.row) + 1];
        last_row = t.row;
        last_col = t.col;
    }
    for (int r = 0; r < n; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
    return m;
}

double SparseMatrix::at(int r, int c) const
{
    const auto first = col_indices_.begin() + row_offsets_[r];
    const auto last = col_indices_.begin() + row_offsets_[r + 1];
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const
{
    std::vector<double> y(n_, 0.0);
    for (int r = 0; r < n_; ++r) {
        double s = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) s += values_[k] * x[col_indices_[k]];
        y[r] = s;
    }
    return y;
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> x) const
{
    std::vector<double> y(n_, 0.0);
    for (int r = 0; r < n_; ++r) {
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) y[col_indices_[k]] += values_[k] * x[r];
    }
    return y;
}

double SparseMatrix::norm1() const
{
    std::vector<double> colsum(n_, 0.0);
    for (std::size_t k = 0; k < values_.size(); ++k) colsum[col_indices_[k]] += std::abs(values_[k]);
    return colsum.empty() ? 0.0 : *std::max_element(colsum.begin(), colsum.end());
}

bool SparseMatrix::is_symmetric(double tol) const
{
    for (int r = 0; r < n_; ++r) {
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            const int c = col_indices_[k];
            const double a = values_[k];
            const double b = at(c, r);
            const double scale = std::max({1.0, std::abs(a), std::abs(b)});
            if (std::abs(a - b) > tol * scale) return false;
        }
    }
    return true;
}

std::vector<double> SparseMatrix::to_dense() const
{
    std::vector<double> d(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int r = 0; r < n_; ++r) {
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            d[static_cast<std::size_t>(r) * n_ + col_indices_[k]] = values_[k];
        }
    }
    return d;
}

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

EigenSparse to_eigen(const SparseMatrix& A)
{
    std::vector<Eigen::Triplet<double, int>> t;
    t.reserve(A.nnz());
    const auto rows = A.row_offsets();
    const auto cols = A.col_indices();
    const auto vals = A.values();
    for (int r = 0; r < A.size(); ++r) {
        for (int k = rows[r]; k < rows[r + 1]; ++k) t.emplace_back(r, cols[k], vals[k]);
    }
    EigenSparse m(A.size(), A.size());
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

int trailing_index(const std::string& message)
{
    static const std::regex number(R"((\d+)\s*$)");
    std::smatch m;
    if (std::regex_search(message, m, number)) return std::stoi(m[1].str());
    return -1;
}

}  // namespace

struct Factorization::Impl {
    MatrixKind kind;
    int n;
    Eigen::SimplicialLLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
    Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>> lu;
};

Factorization Factorization::factor(const SparseMatrix& A, MatrixKind kind)
{
    const auto rows = A.row_offsets();
    const auto vals = A.values();
    for (int r = 0; r < A.size(); ++r) {
        bool nonzero = false;
        for (int k = rows[r]; k < rows[r + 1] && !nonzero; ++k) nonzero = vals[k] != 0.0;
        if (!nonzero) {
            std::ostringstream msg;
            msg << "matrix is singular: row " << r << " is zero";
            throw SingularMatrixError(msg.str(), r);
        }
    }

    auto impl = std::make_shared<Impl>();
    impl->kind = kind;
    impl->n = A.size();
    const EigenSparse m = to_eigen(A);
    if (kind == MatrixKind::SymmetricPositiveDefinite) {
        impl->llt.compute(m);
        if (impl->llt.info() != Eigen::Success) {
            throw SingularMatrixError("Cholesky factorization failed: matrix is not positive definite", -1);
        }
    } else {
        impl->lu.analyzePattern(m);
        impl->lu.factorize(m);
        if (impl->lu.info() != Eigen::Success) {
            const std::string why = impl->lu.lastErrorMessage();
            throw SingularMatrixError("LU factorization failed: " + why, trailing_index(why));
        }
    }
    Factorization f;
    f.impl_ = std::move(impl);
    return f;
}

int Factorization::size() const { return impl_->n; }
MatrixKind Factorization::kind() const { return impl_->kind; }

std::vector<double> Factorization::solve(std::span<const double> b) const
{
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = impl_->kind == MatrixKind::SymmetricPositiveDefinite ? Eigen::VectorXd(impl_->llt.solve(rhs))
                                                                             : Eigen::VectorXd(impl_->lu.solve(rhs));
    return {x.data(), x.data() + x.size()};
}

std::vector<double> Factorization::solve_transpose(std::span<const double> b) const
{
    if (impl_->kind == MatrixKind::SymmetricPositiveDefinite) return solve(b);
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    // The transpose view only reads the factors.
    auto& lu = const_cast<Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>>&>(impl_->lu);
    Eigen::VectorXd x = lu.transpose().solve(rhs);
    return {x.data(), x.data() + x.size()};
}

namespace {

double norm1(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

std::vector<double> signs(std::span<const double> v)
{
    std::vector<double> s(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i] >= 0.0 ? 1.0 : -1.0;
    return s;
}

std::size_t argmax_abs(std::span<const double> v)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    }
    return best;
}

// Estimate of ||A^{-1}||_1 following LAPACK's xLACN2.
double inverse_norm1_estimate(const Factorization& F)
{
    const std::size_t n = static_cast<std::size_t>(F.size());
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    std::vector<double> y = F.solve(x);
    if (n == 1) return std::abs(y[0]);

    double est = norm1(y);
    std::vector<double> xi = signs(y);
    x = F.solve_transpose(xi);
    std::size_t j = argmax_abs(x);

    constexpr int max_iterations = 5;
    for (int iter = 2; iter <= max_iterations; ++iter) {
        std::fill(x.begin(), x.end(), 0.0);
        x[j] = 1.0;
        y = F.solve(x);
        const double est_old = est;
        est = norm1(y);
        std::vector<double> xi_new = signs(y);
        if (xi_new == xi || est <= est_old) {
            est = std::max(est, est_old);
            break;
        }
        xi = std::move(xi_new);
        x = F.solve_transpose(xi);
        const std::size_t j_last = j;
        j = argmax_abs(x);
        if (std::abs(x[j_last]) == std::abs(x[j])) break;
    }

    // Alternating-sign test vector guards against unlucky sign patterns.
    for (std::size_t i = 0; i < n; ++i) {
        const double sgn = (i % 2 == 0) ? 1.0 : -1.0;
        x[i] = sgn * (1.0 + static_cast<double>(i) / static_cast<double>(n - 1));
    }
    y = F.solve(x);
    const double alt = 2.0 * norm1(y) / (3.0 * static_cast<double>(n));
    return std::max(est, alt);
}

}  // namespace

double condest_1norm(const SparseMatrix& A, const Factorization& F)
{
    return A.norm1() * inverse_norm1_estimate(F);
}

double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double diff_norm2(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace dfflow
