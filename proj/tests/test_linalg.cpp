#include <gtest/gtest.h>

#include <random>

#include "dfflow/linalg.hpp"
#include "support/dense.hpp"

using namespace dfflow;

namespace {

SparseMatrix identity(int n)
{
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return SparseMatrix::from_triplets(n, t);
}

double rel_residual(const SparseMatrix& A, std::span<const double> x, std::span<const double> b)
{
    const std::vector<double> Ax = A.multiply(x);
    return diff_norm2(Ax, b) / norm2(b);
}

}  // namespace

TEST(SparseMatrix, TripletsAreSortedAndSummed)
{
    const SparseMatrix A = SparseMatrix::from_triplets(3, {{2, 0, 1.0}, {0, 2, 4.0}, {0, 0, 1.0}, {0, 2, -1.0}});
    EXPECT_EQ(A.nnz(), 3u);
    EXPECT_DOUBLE_EQ(A.at(0, 2), 3.0);
    EXPECT_DOUBLE_EQ(A.at(1, 1), 0.0);
    const auto cols = A.col_indices();
    EXPECT_EQ(cols[0], 0);
    EXPECT_EQ(cols[1], 2);
}

TEST(SparseMatrix, ProductsAndNorm)
{
    std::mt19937_64 rng(7);
    const oracle::Dense D = oracle::random_matrix(12, rng);
    const SparseMatrix A = D.to_sparse();
    std::vector<double> x(12);
    for (int i = 0; i < 12; ++i) x[i] = 0.1 * i - 0.4;
    const std::vector<double> y = A.multiply(x);
    const std::vector<double> z = A.multiply_transpose(x);
    for (int r = 0; r < 12; ++r) {
        double s = 0.0, t = 0.0;
        for (int c = 0; c < 12; ++c) {
            s += D(r, c) * x[c];
            t += D(c, r) * x[c];
        }
        EXPECT_NEAR(y[r], s, 1e-14);
        EXPECT_NEAR(z[r], t, 1e-14);
    }
    EXPECT_NEAR(A.norm1(), oracle::norm1(D), 1e-14);
    EXPECT_EQ(A.to_dense(), D.a);
}

TEST(Factorization, IdentitySolve)
{
    const Factorization F = Factorization::factor(identity(4));
    const std::vector<double> b{1, -2, 3, 0.5};
    EXPECT_EQ(F.solve(b), b);
}

TEST(Factorization, ZeroRightHandSide)
{
    std::mt19937_64 rng(3);
    const SparseMatrix A = oracle::random_matrix(10, rng).to_sparse();
    const Factorization F = Factorization::factor(A);
    for (double x : F.solve(std::vector<double>(10, 0.0))) EXPECT_EQ(x, 0.0);
}

TEST(Factorization, Diagonal)
{
    const SparseMatrix A = SparseMatrix::from_triplets(3, {{0, 0, 2.0}, {1, 1, -4.0}, {2, 2, 0.5}});
    const std::vector<double> x = Factorization::factor(A).solve(std::vector<double>{1.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(x[0], 0.5);
    EXPECT_DOUBLE_EQ(x[1], -0.25);
    EXPECT_DOUBLE_EQ(x[2], 2.0);
}

TEST(Factorization, PoissonMatchesDenseElimination)
{
    const int n = 5;
    oracle::Dense D(n);
    for (int i = 0; i < n; ++i) {
        D(i, i) = 2.0;
        if (i > 0) D(i, i - 1) = -1.0;
        if (i + 1 < n) D(i, i + 1) = -1.0;
    }
    const std::vector<double> b{1.0, 0.0, 2.0, -1.0, 0.5};
    const std::vector<double> ref = oracle::solve(D, b);
    for (MatrixKind kind : {MatrixKind::General, MatrixKind::SymmetricPositiveDefinite}) {
        const std::vector<double> x = Factorization::factor(D.to_sparse(), kind).solve(b);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-13);
    }
}

TEST(Factorization, RandomSpdMatchesDenseOracle)
{
    std::mt19937_64 rng(11);
    const oracle::Dense D = oracle::random_spd(50, rng);
    std::vector<double> b(50);
    std::uniform_real_distribution<double> u(-1, 1);
    for (double& v : b) v = u(rng);
    const std::vector<double> ref = oracle::solve(D, b);
    for (MatrixKind kind : {MatrixKind::General, MatrixKind::SymmetricPositiveDefinite}) {
        const std::vector<double> x = Factorization::factor(D.to_sparse(), kind).solve(b);
        EXPECT_LT(diff_norm2(x, ref) / norm2(ref), 1e-11);
    }
}

TEST(Factorization, TransposeSolve)
{
    std::mt19937_64 rng(5);
    const oracle::Dense D = oracle::random_matrix(20, rng);
    oracle::Dense Dt(20);
    for (int r = 0; r < 20; ++r)
        for (int c = 0; c < 20; ++c) Dt(r, c) = D(c, r);
    std::vector<double> b(20, 1.0);
    const std::vector<double> ref = oracle::solve(Dt, b);
    const std::vector<double> x = Factorization::factor(D.to_sparse()).solve_transpose(b);
    EXPECT_LT(diff_norm2(x, ref) / norm2(ref), 1e-11);
}

TEST(Factorization, RoundTripResidual)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const oracle::Dense D = oracle::random_matrix(40, rng);
        if (oracle::cond1(D) > 1e8) continue;
        const SparseMatrix A = D.to_sparse();
        std::vector<double> b(40);
        std::uniform_real_distribution<double> u(-1, 1);
        for (double& v : b) v = u(rng);
        EXPECT_LT(rel_residual(A, Factorization::factor(A).solve(b), b), 1e-10);
    }
}

TEST(Factorization, ZeroRowReportsRow)
{
    const SparseMatrix A = SparseMatrix::from_triplets(3, {{0, 0, 1.0}, {0, 1, 2.0}, {2, 2, 3.0}, {1, 1, 0.0}});
    try {
        Factorization::factor(A);
        FAIL() << "expected SingularMatrixError";
    } catch (const SingularMatrixError& e) {
        EXPECT_EQ(e.pivot(), 1);
    }
    EXPECT_THROW(Factorization::factor(A, MatrixKind::SymmetricPositiveDefinite), SingularMatrixError);
}

TEST(Factorization, IndefiniteRejectedByCholesky)
{
    const SparseMatrix A = SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {1, 1, -1.0}});
    EXPECT_THROW(Factorization::factor(A, MatrixKind::SymmetricPositiveDefinite), SingularMatrixError);
    EXPECT_NO_THROW(Factorization::factor(A, MatrixKind::General));
}

TEST(Condest, Identity)
{
    const SparseMatrix I = identity(6);
    EXPECT_DOUBLE_EQ(condest_1norm(I, Factorization::factor(I)), 1.0);
}

TEST(Condest, DiagonalIsExact)
{
    const SparseMatrix A = SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {1, 1, 1e-6}});
    EXPECT_NEAR(condest_1norm(A, Factorization::factor(A)), 1e6, 1e6 * 1e-12);
}

TEST(Condest, WithinFactorTenOfDenseKappa)
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const oracle::Dense D = oracle::random_matrix(30, rng);
        const double exact = oracle::cond1(D);
        const SparseMatrix A = D.to_sparse();
        const double est = condest_1norm(A, Factorization::factor(A));
        EXPECT_LE(est, exact * (1 + 1e-10));
        EXPECT_GE(est, exact / 10);
    }
}

TEST(Condest, SpdPathIsDeterministic)
{
    std::mt19937_64 rng(9);
    const SparseMatrix A = oracle::random_spd(25, rng).to_sparse();
    const Factorization F = Factorization::factor(A, MatrixKind::SymmetricPositiveDefinite);
    EXPECT_EQ(condest_1norm(A, F), condest_1norm(A, F));
}
