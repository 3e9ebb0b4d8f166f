#pragma once

#include <vector>

#include "kreisslab/numkernel.hpp"

namespace kreisslab {

// G(s) = C (sI - A)^{-1} B + D with n states, p inputs, m outputs.
struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    StateSpace() = default;
    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d = Matrix());

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index inputs() const { return B.cols(); }
    Eigen::Index outputs() const { return C.rows(); }
    bool strictly_proper() const { return D.size() == 0 || D.isZero(0.0); }

    void validate() const;
    CMatrix eval(cplx s) const;
    // Frequency response of the family member A - x I.
    CMatrix eval_shifted(double x, double omega) const;
};

// Controllable canonical realization of num(s)/den(s), coefficients in
// descending powers. Numerator degree must not exceed denominator degree.
StateSpace tf2ss(const std::vector<double>& num, const std::vector<double>& den);

// Cascade: output of `first` feeds `second`.
StateSpace series(const StateSpace& first, const StateSpace& second);

StateSpace similarity(const StateSpace& sys, const Matrix& T);

// Diagonal power-of-two state scaling that balances [A B; C 0].
StateSpace balance_realization(const StateSpace& sys);

} // namespace kreisslab
