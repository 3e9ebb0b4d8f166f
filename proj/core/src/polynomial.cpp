#include "kreisslab/polynomial.hpp"

#include <cmath>
#include <sstream>

#include "kreisslab/errors.hpp"

namespace kreisslab {

namespace {

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

double monomial(const Polynomial::Exponents& e, const Vector& x) {
    double v = 1.0;
    for (std::size_t i = 0; i < e.size(); ++i) v *= ipow(x(static_cast<Eigen::Index>(i)), e[i]);
    return v;
}

} // namespace

Polynomial Polynomial::quadratic_form(const Matrix& Q) {
    if (Q.rows() != Q.cols()) throw DimensionError("quadratic_form: Q must be square");
    const auto n = static_cast<std::size_t>(Q.rows());
    Polynomial p(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            Exponents e(n, 0);
            e[i] += 1;
            e[j] += 1;
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            p.add_term(e, i == j ? Q(a, a) : Q(a, b) + Q(b, a));
        }
    }
    return p;
}

void Polynomial::add_term(const Exponents& e, double c) {
    if (e.size() != nvars_) throw DimensionError("Polynomial: exponent tuple has wrong length");
    for (int k : e)
        if (k < 0) throw DimensionError("Polynomial: negative exponent");
    const double v = coefficient(e) + c;
    if (v == 0.0)
        terms_.erase(e);
    else
        terms_[e] = v;
}

double Polynomial::coefficient(const Exponents& e) const {
    const auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int k : e) s += k;
        d = std::max(d, s);
    }
    return d;
}

bool Polynomial::homogeneous(int d) const {
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int k : e) s += k;
        if (s != d) return false;
    }
    return true;
}

bool Polynomial::finite() const {
    for (const auto& [e, c] : terms_)
        if (!std::isfinite(c)) return false;
    return true;
}

double Polynomial::operator()(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != nvars_) throw DimensionError("Polynomial: point has wrong dimension");
    double v = 0.0;
    for (const auto& [e, c] : terms_) v += c * monomial(e, x);
    return v;
}

Vector Polynomial::gradient(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != nvars_) throw DimensionError("Polynomial: point has wrong dimension");
    Vector g = Vector::Zero(x.size());
    for (const auto& [e, c] : terms_) {
        for (std::size_t i = 0; i < nvars_; ++i) {
            if (e[i] == 0) continue;
            Exponents d = e;
            d[i] -= 1;
            g(static_cast<Eigen::Index>(i)) += c * e[i] * monomial(d, x);
        }
    }
    return g;
}

Matrix Polynomial::hessian(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != nvars_) throw DimensionError("Polynomial: point has wrong dimension");
    Matrix H = Matrix::Zero(x.size(), x.size());
    for (const auto& [e, c] : terms_) {
        for (std::size_t i = 0; i < nvars_; ++i) {
            if (e[i] == 0) continue;
            Exponents di = e;
            di[i] -= 1;
            for (std::size_t j = 0; j < nvars_; ++j) {
                if (di[j] == 0) continue;
                Exponents dij = di;
                dij[j] -= 1;
                H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    c * e[i] * di[j] * monomial(dij, x);
            }
        }
    }
    return H;
}

std::string Polynomial::to_string(const std::vector<std::string>& names) const {
    std::ostringstream os;
    os.precision(6);
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [e, c] = *it;
        os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ")) << std::abs(c);
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            os << '*' << (i < names.size() ? names[i] : "x" + std::to_string(i + 1));
            if (e[i] > 1) os << '^' << e[i];
        }
        first = false;
    }
    if (first) os << '0';
    return os.str();
}

} // namespace kreisslab
