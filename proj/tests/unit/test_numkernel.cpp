#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kreisslab/errors.hpp"
#include "kreisslab/numkernel.hpp"
#include "test_support.hpp"

using namespace kreisslab;
using kreisslab::testing::mat;
using kreisslab::testing::random_matrix;
using kreisslab::testing::random_stable;

TEST(Expm, DiagonalMatchesScalarExponentials) {
    const Matrix A = mat({{-1, 0}, {0, -2}});
    const Matrix E = expm(A, 0.7);
    EXPECT_NEAR(E(0, 0), std::exp(-0.7), 1e-14);
    EXPECT_NEAR(E(1, 1), std::exp(-1.4), 1e-14);
    EXPECT_NEAR(E(0, 1), 0.0, 1e-15);
}

TEST(Expm, NilpotentJordanBlock) {
    const Matrix N = mat({{0, 1}, {0, 0}});
    const Matrix E = expm(N, 3.0);
    EXPECT_NEAR(E(0, 1), 3.0, 1e-13);
    EXPECT_NEAR(E(0, 0), 1.0, 1e-14);
}

TEST(Expm, RotationGenerator) {
    const Matrix S = mat({{0, -1}, {1, 0}});
    const Matrix E = expm(S, M_PI / 3);
    EXPECT_NEAR(E(0, 0), 0.5, 1e-13);
    EXPECT_NEAR(E(1, 0), std::sqrt(3.0) / 2, 1e-13);
}

TEST(Expm, SemigroupProperty) {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10; ++k) {
        const Matrix A = random_matrix(rng, 5, 5);
        const Matrix lhs = expm(A, 0.3) * expm(A, 0.9);
        const Matrix rhs = expm(A, 1.2);
        EXPECT_LT((lhs - rhs).norm() / rhs.norm(), 1e-11);
    }
}

TEST(Expm, LargeNormScaling) {
    const Matrix A = mat({{-50, 40}, {0, -60}});
    const Matrix E = expm(A, 1.0);
    EXPECT_TRUE(E.allFinite());
    EXPECT_LT(E.norm(), 1e-15);
}

TEST(Eig, CompanionEigenvaluesReproduceCharacteristicPolynomial) {
    const Matrix A = kreisslab::testing::example4_companion();
    const CVector ev = eigenvalues(A);
    ASSERT_EQ(ev.size(), 3);
    for (Eigen::Index i = 0; i < 3; ++i) {
        const cplx s = ev(i);
        const cplx p = s * s * s + s * s + s + 0.9608;
        EXPECT_LT(std::abs(p), 1e-12);
    }
}

TEST(Eig, EigenvectorsSatisfyDefinition) {
    std::mt19937_64 rng(11);
    const Matrix A = random_matrix(rng, 6, 6);
    const Spectrum s = eig(A, true);
    ASSERT_TRUE(s.eigenvectors.has_value());
    const CMatrix Ac = A.cast<cplx>();
    for (Eigen::Index i = 0; i < 6; ++i) {
        const CVector v = s.eigenvectors->col(i);
        EXPECT_LT((Ac * v - s.eigenvalues(i) * v).norm(), 1e-10 * v.norm());
    }
}

TEST(Svd, SigmaMaxAndClusters) {
    const Matrix M = mat({{3, 0, 0}, {0, 3, 0}, {0, 0, 1}});
    const SvdTriple t = svd(M);
    EXPECT_DOUBLE_EQ(t.sigma_max, 3.0);
    EXPECT_EQ(t.Q.cols(), 2);
    EXPECT_EQ(t.P.cols(), 2);
    EXPECT_NEAR(sigma_max(M), 3.0, 1e-15);
}

TEST(Svd, ComplexMatrix) {
    CMatrix M(2, 2);
    M << cplx(0, 1), 0, 0, cplx(0.5, 0);
    EXPECT_NEAR(sigma_max(M), 1.0, 1e-15);
    const Vector sv = singular_values(M);
    EXPECT_NEAR(sv(1), 0.5, 1e-15);
}

TEST(Lyapunov, MatchesKroneckerSolve) {
    std::mt19937_64 rng(3);
    for (int n : {1, 2, 4, 7}) {
        const Matrix A = random_stable(rng, n);
        Matrix W = random_matrix(rng, n, n);
        W = (W * W.transpose()).eval();
        const Matrix Q = solve_lyapunov(A, W);
        const Matrix I = Matrix::Identity(n, n);
        // vec(A Q + Q A^T) = (I (x) A + A (x) I) vec(Q) in column-major order
        Matrix L = Matrix::Zero(n * n, n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                L.block(j * n, j * n, n, n) += (i == j ? A : Matrix::Zero(n, n));
                L.block(i * n, j * n, n, n) += A(i, j) * I;
            }
        const Vector w = Eigen::Map<const Vector>(W.data(), n * n);
        const Vector q = L.partialPivLu().solve(-w);
        const Matrix Qk = Eigen::Map<const Matrix>(q.data(), n, n);
        EXPECT_LT((Q - Qk).norm() / Qk.norm(), 1e-9) << "n=" << n;
        EXPECT_LT((A * Q + Q * A.transpose() + W).norm(), 1e-9 * W.norm());
    }
}

TEST(Lyapunov, RejectsUnstable) {
    const Matrix A = mat({{1, 0}, {0, -1}});
    EXPECT_THROW(solve_lyapunov(A, Matrix::Identity(2, 2)), StabilityError);
}

TEST(Abscissa, SpectralBelowNumerical) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        const Matrix A = random_matrix(rng, 5, 5);
        EXPECT_LE(spectral_abscissa(A), numerical_abscissa(A) + 1e-12);
    }
}

TEST(Abscissa, Example3Values) {
    const Matrix A = mat({{-1, 0}, {0, -2}});
    EXPECT_DOUBLE_EQ(spectral_abscissa(A), -1.0);
    EXPECT_NEAR(numerical_abscissa(A), -1.0, 1e-14);
    EXPECT_TRUE(is_hurwitz(A));
    EXPECT_FALSE(is_hurwitz(A, 1.5));
}

TEST(Abscissa, NonNormalNumericalAbscissaPositive) {
    const Matrix A = mat({{-1, 10}, {0, -1}});
    EXPECT_NEAR(numerical_abscissa(A), 4.0, 1e-12);
    EXPECT_NEAR(spectral_abscissa(A), -1.0, 1e-12);
}

TEST(Symmetric, ExtremeEigenvalues) {
    const Matrix S = mat({{2, 1}, {1, 2}});
    EXPECT_NEAR(lambda_max_sym(S), 3.0, 1e-14);
    EXPECT_NEAR(lambda_min_sym(S), 1.0, 1e-14);
    const Matrix R = sqrtm_psd(S);
    EXPECT_LT((R * R - S).norm(), 1e-13);
    const Matrix Ri = inv_sqrtm_pd(S);
    EXPECT_LT((Ri * S * Ri - Matrix::Identity(2, 2)).norm(), 1e-13);
}

TEST(NullSpace, RankDeficient) {
    const Matrix M = mat({{1, 2, 3}, {2, 4, 6}});
    const Matrix N = null_space(M);
    EXPECT_EQ(N.cols(), 2);
    EXPECT_LT((M * N).norm(), 1e-12);
    EXPECT_EQ(numerical_rank(M, 1e-10), 1);
}

TEST(Balance, ScalingIsPowerOfTwo) {
    const Matrix M = mat({{1, 1e6}, {1e-6, 1}});
    const Vector d = balance_scaling(M);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        int e = 0;
        EXPECT_EQ(std::frexp(d(i), &e), 0.5);
    }
    const Matrix B = d.asDiagonal().inverse() * M * d.asDiagonal();
    EXPECT_LT(std::abs(B(0, 1)) / std::abs(B(1, 0)), 4.0 + 1e-12);
}

TEST(Guards, NonSquareAndNonFinite) {
    EXPECT_THROW(require_square(Matrix::Zero(2, 3), "M"), DimensionError);
    Matrix M = Matrix::Zero(2, 2);
    M(0, 0) = std::nan("");
    EXPECT_THROW(require_finite(M, "M"), NumericalError);
}
