#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace kreisslab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using cplx = std::complex<double>;

struct Spectrum {
    CVector eigenvalues;
    std::optional<CMatrix> eigenvectors;
};

// Maximal singular block of a (real or complex) matrix.
// Q, P span the left/right singular subspaces of all singular values
// within the clustering tolerance of sigma_max.
template <typename Mat>
struct SvdTripleT {
    Mat Q;
    Mat P;
    double sigma_max = 0.0;
    Vector singular_values;
    Mat U;
    Mat V;
};

using SvdTriple = SvdTripleT<Matrix>;
using CSvdTriple = SvdTripleT<CMatrix>;

inline constexpr double kSvdClusterTol = 1e-8;

Matrix expm(const Matrix& M, double t = 1.0);

Spectrum eig(const Matrix& M, bool with_vectors = false);
CVector eigenvalues(const Matrix& M);

SvdTriple svd(const Matrix& M, double cluster_tol = kSvdClusterTol);
CSvdTriple svd(const CMatrix& M, double cluster_tol = kSvdClusterTol);

double sigma_max(const Matrix& M);
double sigma_max(const CMatrix& M);
Vector singular_values(const CMatrix& M);

// Solves A Q + Q A^T + W = 0 for Hurwitz A.
Matrix solve_lyapunov(const Matrix& A, const Matrix& W);

double spectral_abscissa(const Matrix& M);
double numerical_abscissa(const Matrix& M);
bool is_hurwitz(const Matrix& M, double margin = 0.0);

double lambda_max_sym(const Matrix& S);
double lambda_min_sym(const Matrix& S);
Matrix sqrtm_psd(const Matrix& S);
Matrix inv_sqrtm_pd(const Matrix& S);

// Parlett-Reinsch diagonal balancing with power-of-two scalings:
// returns d such that diag(d)^{-1} M diag(d) is balanced.
Vector balance_scaling(const Matrix& M);

Matrix null_space(const Matrix& M, double rel_tol = 1e-10);
int numerical_rank(const Matrix& M, double rel_tol);

void require_square(const Matrix& M, const char* what);
void require_finite(const Matrix& M, const char* what);

} // namespace kreisslab
