#pragma once

#include <string>

#include "json.hpp"
#include "kreisslab/errors.hpp"
#include "kreisslab/numkernel.hpp"

namespace kreisslab::detail {

inline nlohmann::json matrix_to_json(const Matrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

// Accepts [[...], ...] (rows), a flat array (column vector) or a scalar (1x1).
inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
    if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
    if (!j.is_array()) throw SchemaError(what + ": expected a matrix (array of rows)");
    if (j.empty()) return Matrix(0, 0);
    if (j[0].is_number()) {
        Matrix M(static_cast<Eigen::Index>(j.size()), 1);
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_number()) throw SchemaError(what + ": non-numeric entry");
            M(static_cast<Eigen::Index>(i), 0) = j[i].get<double>();
        }
        return M;
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw SchemaError(what + ": ragged matrix rows");
        for (std::size_t k = 0; k < cols; ++k) {
            if (!j[i][k].is_number()) throw SchemaError(what + ": non-numeric entry");
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
        }
    }
    return M;
}

inline Vector vector_from_json(const nlohmann::json& j, const std::string& what) {
    const Matrix M = matrix_from_json(j, what);
    if (M.cols() != 1 && M.rows() != 1) throw SchemaError(what + ": expected a vector");
    return M.cols() == 1 ? Vector(M.col(0)) : Vector(M.row(0).transpose());
}

} // namespace kreisslab::detail
