#pragma once

// Compressed-row sparse matrices, direct factorizations and the 1-norm
// condition estimator.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfflow {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Square CSR matrix with sorted, unique column indices in each row.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Duplicate (row, col) entries are summed. Explicit zeros are kept so the
    /// sparsity pattern does not depend on values.
    static SparseMatrix from_triplets(int n, std::vector<Triplet> entries);

    int size() const { return n_; }
    std::size_t nnz() const { return values_.size(); }
    std::span<const int> row_offsets() const { return row_offsets_; }
    std::span<const int> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

    /// Entry (r, c), 0 if not stored.
    double at(int r, int c) const;

    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> multiply_transpose(std::span<const double> x) const;

    /// Maximum absolute column sum.
    double norm1() const;
    bool is_symmetric(double tol) const;
    /// Row-major dense copy; only meant for small matrices in tests.
    std::vector<double> to_dense() const;

private:
    int n_ = 0;
    std::vector<int> row_offsets_{0};
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

enum class MatrixKind { General, SymmetricPositiveDefinite };

class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, int pivot)
        : std::runtime_error(what), pivot_(pivot) {}
    /// Row or pivot where singularity was detected, -1 if unknown.
    int pivot() const { return pivot_; }

private:
    int pivot_;
};

/// Immutable factorization handle; concurrent solves are safe.
class Factorization {
public:
    /// Cholesky for MatrixKind::SymmetricPositiveDefinite, otherwise LU;
    /// both with a fill-reducing ordering. Throws SingularMatrixError.
    static Factorization factor(const SparseMatrix& A, MatrixKind kind = MatrixKind::General);

    int size() const;
    MatrixKind kind() const;
    std::vector<double> solve(std::span<const double> b) const;
    /// Solves A^T x = b.
    std::vector<double> solve_transpose(std::span<const double> b) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Lower-bound estimate of ||A||_1 ||A^{-1}||_1 (Hager's method with Higham's
/// refinements), starting from e/n.
double condest_1norm(const SparseMatrix& A, const Factorization& F);

double norm2(std::span<const double> v);
double diff_norm2(std::span<const double> a, std::span<const double> b);

}  // namespace dfflow
