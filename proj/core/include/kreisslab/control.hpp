#pragma once

#include <string>
#include <vector>

#include "kreisslab/numkernel.hpp"
#include "kreisslab/state_space.hpp"

namespace kreisslab {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Linear part of a controlled plant: x' = A x + B_w w + B_u u, y = C_y x.
struct Plant {
    Matrix A;
    Matrix Bw;
    Matrix Bu;
    Matrix Cy;

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index inputs() const { return Bu.cols(); }
    Eigen::Index measurements() const { return Cy.rows(); }
    void validate() const;
};

// u = K(s) y with x_K' = A_K x_K + B_K y, u = C_K x_K + D_K y.
// Theta = [A_K B_K; C_K D_K]; the mask marks free entries of Theta and the
// decision vector theta lists them in column-major order.
struct ControllerRealization {
    Matrix AK;
    Matrix BK;
    Matrix CK;
    Matrix DK;
    Mask mask;

    ControllerRealization() = default;
    ControllerRealization(Matrix ak, Matrix bk, Matrix ck, Matrix dk);
    ControllerRealization(Matrix ak, Matrix bk, Matrix ck, Matrix dk, Mask m);

    Eigen::Index order() const { return AK.rows(); }
    Eigen::Index inputs() const { return BK.cols(); }  // measurements m
    Eigen::Index outputs() const { return CK.rows(); } // plant inputs p

    Matrix Theta() const;
    void set_Theta(const Matrix& theta);
    Vector theta() const;
    void set_theta(const Vector& x);
    Eigen::Index free_count() const { return mask.count(); }
    Vector mask_gradient(const Matrix& gTheta) const;

    StateSpace as_state_space() const;
    void validate() const;

    static ControllerRealization static_gain(const Matrix& DK);
    static ControllerRealization from_transfer(const std::vector<double>& num, const std::vector<double>& den);
    static ControllerRealization zeros(Eigen::Index nK, Eigen::Index p, Eigen::Index m);
};

// Closed loop x_cl' = A_cl x_cl + B_wcl w; performance channel J^T (sI - A_cl)^{-1} J.
struct ClosedLoop {
    Matrix A_cl;
    Matrix B_wcl;
    Matrix J;
    // Affine parametrization A_cl = A0 + Bt Theta Ct.
    Matrix A0;
    Matrix Bt;
    Matrix Ct;

    StateSpace performance() const { return StateSpace(A_cl, J, J.transpose()); }
    Eigen::Index plant_order() const { return J.cols(); }
};

ClosedLoop assemble_closed_loop(const Plant& plant, const ControllerRealization& K);

// Weighted complementary sensitivity W T with T the sensor-noise-to-output map
// of the u = K y loop; W is SISO (applied per channel) and is placed in series.
StateSpace weighted_complementary_sensitivity(const Plant& plant, const ControllerRealization& K,
                                              const StateSpace& W);

} // namespace kreisslab
