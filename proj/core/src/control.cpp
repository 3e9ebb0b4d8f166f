#include "kreisslab/control.hpp"

#include <sstream>

#include "kreisslab/errors.hpp"

namespace kreisslab {

void Plant::validate() const {
    std::ostringstream os;
    if (A.rows() != A.cols()) os << "A not square; ";
    if (Bw.size() && Bw.rows() != A.rows()) os << "B_w rows != n; ";
    if (Bu.rows() != A.rows()) os << "B_u rows != n; ";
    if (Cy.cols() != A.rows()) os << "C_y cols != n; ";
    if (!os.str().empty()) throw DimensionError("Plant: " + os.str());
}

ControllerRealization::ControllerRealization(Matrix ak, Matrix bk, Matrix ck, Matrix dk)
    : AK(std::move(ak)), BK(std::move(bk)), CK(std::move(ck)), DK(std::move(dk)) {
    mask = Mask::Constant(AK.rows() + CK.rows(), AK.cols() + BK.cols(), true);
    validate();
}

ControllerRealization::ControllerRealization(Matrix ak, Matrix bk, Matrix ck, Matrix dk, Mask m)
    : AK(std::move(ak)), BK(std::move(bk)), CK(std::move(ck)), DK(std::move(dk)), mask(std::move(m)) {
    validate();
    Matrix T = Theta();
    for (Eigen::Index i = 0; i < T.rows(); ++i)
        for (Eigen::Index j = 0; j < T.cols(); ++j)
            if (!mask(i, j)) T(i, j) = 0.0;
    set_Theta(T);
}

void ControllerRealization::validate() const {
    const Eigen::Index nK = AK.rows();
    std::ostringstream os;
    if (AK.cols() != nK) os << "A_K not square; ";
    if (BK.rows() != nK) os << "B_K rows != n_K; ";
    if (CK.cols() != nK) os << "C_K cols != n_K; ";
    if (DK.rows() != CK.rows() || DK.cols() != BK.cols()) os << "D_K shape mismatch; ";
    if (mask.rows() != nK + DK.rows() || mask.cols() != nK + DK.cols()) os << "mask shape mismatch; ";
    if (!os.str().empty()) throw DimensionError("ControllerRealization: " + os.str());
}

Matrix ControllerRealization::Theta() const {
    const Eigen::Index nK = AK.rows();
    Matrix T(nK + DK.rows(), nK + DK.cols());
    T.topLeftCorner(nK, nK) = AK;
    T.topRightCorner(nK, DK.cols()) = BK;
    T.bottomLeftCorner(DK.rows(), nK) = CK;
    T.bottomRightCorner(DK.rows(), DK.cols()) = DK;
    return T;
}

void ControllerRealization::set_Theta(const Matrix& T) {
    const Eigen::Index nK = AK.rows();
    AK = T.topLeftCorner(nK, nK);
    BK = T.topRightCorner(nK, DK.cols());
    CK = T.bottomLeftCorner(DK.rows(), nK);
    DK = T.bottomRightCorner(DK.rows(), DK.cols());
}

Vector ControllerRealization::theta() const {
    const Matrix T = Theta();
    Vector x(free_count());
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < T.cols(); ++j)
        for (Eigen::Index i = 0; i < T.rows(); ++i)
            if (mask(i, j)) x(k++) = T(i, j);
    return x;
}

void ControllerRealization::set_theta(const Vector& x) {
    if (x.size() != free_count()) throw DimensionError("set_theta: length does not match free entries");
    Matrix T = Theta();
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < T.cols(); ++j)
        for (Eigen::Index i = 0; i < T.rows(); ++i)
            T(i, j) = mask(i, j) ? x(k++) : 0.0;
    set_Theta(T);
}

Vector ControllerRealization::mask_gradient(const Matrix& g) const {
    Vector x(free_count());
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            if (mask(i, j)) x(k++) = g(i, j);
    return x;
}

StateSpace ControllerRealization::as_state_space() const { return StateSpace(AK, BK, CK, DK); }

ControllerRealization ControllerRealization::static_gain(const Matrix& DK) {
    return ControllerRealization(Matrix(0, 0), Matrix(0, DK.cols()), Matrix(DK.rows(), 0), DK);
}

ControllerRealization ControllerRealization::from_transfer(const std::vector<double>& num,
                                                           const std::vector<double>& den) {
    const StateSpace s = tf2ss(num, den);
    return ControllerRealization(s.A, s.B, s.C, s.D);
}

ControllerRealization ControllerRealization::zeros(Eigen::Index nK, Eigen::Index p, Eigen::Index m) {
    return ControllerRealization(Matrix::Zero(nK, nK), Matrix::Zero(nK, m), Matrix::Zero(p, nK), Matrix::Zero(p, m));
}

ClosedLoop assemble_closed_loop(const Plant& plant, const ControllerRealization& K) {
    plant.validate();
    K.validate();
    const Eigen::Index n = plant.n();
    const Eigen::Index nK = K.order();
    const Eigen::Index p = plant.inputs();
    const Eigen::Index m = plant.measurements();
    if (K.outputs() != p || K.inputs() != m) {
        std::ostringstream os;
        os << "assemble_closed_loop: controller is " << K.outputs() << "x" << K.inputs() << ", plant needs " << p
           << "x" << m;
        throw DimensionError(os.str());
    }
    ClosedLoop cl;
    const Eigen::Index N = n + nK;
    cl.A0 = Matrix::Zero(N, N);
    cl.A0.topLeftCorner(n, n) = plant.A;
    cl.Bt = Matrix::Zero(N, nK + p);
    cl.Bt.bottomLeftCorner(nK, nK) = Matrix::Identity(nK, nK);
    cl.Bt.topRightCorner(n, p) = plant.Bu;
    cl.Ct = Matrix::Zero(nK + m, N);
    cl.Ct.topRightCorner(nK, nK) = Matrix::Identity(nK, nK);
    cl.Ct.bottomLeftCorner(m, n) = plant.Cy;
    cl.A_cl = cl.A0 + cl.Bt * K.Theta() * cl.Ct;
    cl.J = Matrix::Zero(N, n);
    cl.J.topRows(n) = Matrix::Identity(n, n);
    const Eigen::Index nw = plant.Bw.cols();
    cl.B_wcl = Matrix::Zero(N, nw);
    if (nw) cl.B_wcl.topRows(n) = plant.Bw;
    return cl;
}

StateSpace weighted_complementary_sensitivity(const Plant& plant, const ControllerRealization& K,
                                              const StateSpace& W) {
    const ClosedLoop cl = assemble_closed_loop(plant, K);
    const Eigen::Index n = plant.n();
    const Eigen::Index nK = K.order();
    const Eigen::Index m = plant.measurements();
    const Eigen::Index N = n + nK;
    Matrix Bn(N, m);
    Bn.topRows(n) = plant.Bu * K.DK;
    Bn.bottomRows(nK) = K.BK;
    Matrix Ct = Matrix::Zero(m, N);
    Ct.leftCols(n) = plant.Cy;
    const StateSpace T(cl.A_cl, Bn, Ct);
    if (W.inputs() != 1 || W.outputs() != 1) throw DimensionError("weighted_complementary_sensitivity: W must be SISO");
    // W (x) I_m
    const Eigen::Index nw = W.n();
    Matrix Aw = Matrix::Zero(nw * m, nw * m), Bw = Matrix::Zero(nw * m, m), Cw = Matrix::Zero(m, nw * m);
    for (Eigen::Index k = 0; k < m; ++k) {
        Aw.block(k * nw, k * nw, nw, nw) = W.A;
        Bw.block(k * nw, k, nw, 1) = W.B;
        Cw.block(k, k * nw, 1, nw) = W.C;
    }
    const StateSpace Wm(Aw, Bw, Cw, W.D(0, 0) * Matrix::Identity(m, m));
    return series(T, Wm);
}

} // namespace kreisslab
