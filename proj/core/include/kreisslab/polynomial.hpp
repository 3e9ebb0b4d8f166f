#pragma once

#include <map>
#include <string>
#include <vector>

#include "kreisslab/numkernel.hpp"

namespace kreisslab {

// Sparse real polynomial in a fixed number of variables; terms keyed by exponent tuples.
class Polynomial {
public:
    using Exponents = std::vector<int>;

    Polynomial() = default;
    explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

    // x^T Q x for symmetric Q.
    static Polynomial quadratic_form(const Matrix& Q);

    std::size_t variables() const { return nvars_; }
    const std::map<Exponents, double>& terms() const { return terms_; }

    // Adds c to the coefficient of the monomial; zero results are dropped.
    void add_term(const Exponents& e, double c);
    double coefficient(const Exponents& e) const;
    int degree() const;
    bool homogeneous(int d) const;
    bool finite() const;

    double operator()(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    Matrix hessian(const Vector& x) const;

    std::string to_string(const std::vector<std::string>& names = {}) const;

private:
    std::size_t nvars_ = 0;
    std::map<Exponents, double> terms_;
};

} // namespace kreisslab
