#include "kreisslab/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "json_util.hpp"
#include "kreisslab/errors.hpp"

namespace kreisslab {

const char* to_string(LmiStatus s) {
    switch (s) {
    case LmiStatus::Feasible: return "feasible";
    case LmiStatus::Infeasible: return "infeasible";
    case LmiStatus::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

void LmiProblem::validate() const {
    for (std::size_t b = 0; b < F0.size(); ++b) {
        if (F0[b].rows() != F0[b].cols()) throw DimensionError("LmiProblem: F0 block not square");
        if (!F0[b].isApprox(F0[b].transpose(), 1e-12) && (F0[b] - F0[b].transpose()).norm() > 1e-12)
            throw DimensionError("LmiProblem: F0 block not symmetric");
    }
    for (const auto& Fi : F) {
        if (Fi.size() != F0.size()) throw DimensionError("LmiProblem: coefficient block count mismatch");
        for (std::size_t b = 0; b < Fi.size(); ++b) {
            if (Fi[b].rows() != F0[b].rows() || Fi[b].cols() != F0[b].cols())
                throw DimensionError("LmiProblem: coefficient block shape mismatch");
            if ((Fi[b] - Fi[b].transpose()).norm() > 1e-12 * std::max(1.0, Fi[b].norm()))
                throw DimensionError("LmiProblem: coefficient block not symmetric");
        }
    }
    if (!variable_names.empty() && variable_names.size() != F.size())
        throw DimensionError("LmiProblem: variable name count mismatch");
}

Matrix LmiProblem::block(std::size_t b, const Vector& y) const {
    Matrix M = F0[b];
    for (std::size_t i = 0; i < F.size(); ++i) M += y(static_cast<Eigen::Index>(i)) * F[i][b];
    return M;
}

double LmiProblem::lambda_max(const Vector& y) const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < F0.size(); ++b)
        if (F0[b].rows()) m = std::max(m, lambda_max_sym(block(b, y)));
    return m;
}

double LmiProblem::required_margin() const {
    if (margin >= 0.0) return margin;
    double s = 0.0;
    for (const Matrix& M : F0)
        if (M.size()) s = std::max(s, M.cwiseAbs().maxCoeff() > 0.0 ? sigma_max(M) : 0.0);
    return 1e-7 * std::max(1.0, s);
}

LmiProblem LmiProblem::from_affine(std::size_t nvars, const std::function<std::vector<Matrix>(const Vector&)>& map) {
    LmiProblem p;
    const Vector z = Vector::Zero(static_cast<Eigen::Index>(nvars));
    p.F0 = map(z);
    for (Matrix& M : p.F0) M = (0.5 * (M + M.transpose())).eval();
    p.F.resize(nvars);
    for (std::size_t i = 0; i < nvars; ++i) {
        Vector e = z;
        e(static_cast<Eigen::Index>(i)) = 1.0;
        std::vector<Matrix> Fi = map(e);
        if (Fi.size() != p.F0.size()) throw DimensionError("LmiProblem::from_affine: block count changed");
        for (std::size_t b = 0; b < Fi.size(); ++b) {
            Fi[b] = (0.5 * (Fi[b] + Fi[b].transpose()) - p.F0[b]).eval();
        }
        p.F[i] = std::move(Fi);
    }
    return p;
}

namespace {

struct Smoothed {
    double f = 0.0;
    double lmax = 0.0;
    Vector g;
};

// f_mu(y) = mu log sum_k exp(lambda_k / mu) over all block eigenvalues.
Smoothed smoothed_lmax(const LmiProblem& p, const Vector& y, double mu) {
    std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> es;
    es.reserve(p.blocks());
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < p.blocks(); ++b) {
        es.emplace_back(p.block(b, y));
        const Vector& ev = es.back().eigenvalues();
        if (ev.size()) lmax = std::max(lmax, ev.maxCoeff());
    }
    Smoothed s;
    s.lmax = lmax;
    s.g = Vector::Zero(static_cast<Eigen::Index>(p.variables()));
    double S = 0.0;
    for (const auto& e : es) S += ((e.eigenvalues().array() - lmax) / mu).exp().sum();
    s.f = lmax + mu * std::log(S);
    for (std::size_t b = 0; b < p.blocks(); ++b) {
        const auto& e = es[b];
        if (!e.eigenvalues().size()) continue;
        const Vector w = ((e.eigenvalues().array() - lmax) / mu).exp() / S;
        const Matrix Z = e.eigenvectors() * w.asDiagonal() * e.eigenvectors().transpose();
        for (std::size_t i = 0; i < p.variables(); ++i)
            s.g(static_cast<Eigen::Index>(i)) += p.F[i][b].cwiseProduct(Z).sum();
    }
    return s;
}

} // namespace

LmiResult sdp_feasibility(const LmiProblem& prob, const LmiOptions& opts) {
    prob.validate();
    LmiResult r;
    r.required = prob.required_margin();
    const auto m = static_cast<Eigen::Index>(prob.variables());
    std::size_t total_dim = 0;
    for (const Matrix& M : prob.F0) total_dim += static_cast<std::size_t>(M.rows());
    if (total_dim == 0) {
        r.status = LmiStatus::Feasible;
        r.y = Vector::Zero(m);
        r.lambda_max = -std::numeric_limits<double>::infinity();
        return r;
    }
    if (total_dim > 50) throw PreconditionError("sdp_feasibility: total block dimension exceeds 50");
    double fscale = 0.0;
    for (const Matrix& M : prob.F0) fscale = std::max(fscale, M.norm());
    double gscale = 0.0;
    for (const auto& Fi : prob.F)
        for (const Matrix& M : Fi) gscale = std::max(gscale, M.norm());
    const double scale = std::max({fscale, 1e-3});
    const double logN = std::log(static_cast<double>(total_dim));

    Vector y = Vector::Zero(m);
    Vector best_y = y;
    double best = prob.lambda_max(y);
    double mu = 0.1 * std::max(scale, std::abs(best));
    Matrix H = Matrix::Identity(m, m);
    double residual = std::numeric_limits<double>::infinity();
    // f_mu - mu log N <= min lambda_max at a stationary point of the smoothed function
    double lower = -std::numeric_limits<double>::infinity();
    bool stop = false;
    for (int stage = 0; stage < opts.stages && !stop && m > 0; ++stage) {
        Smoothed cur = smoothed_lmax(prob, y, mu);
        for (int it = 0; it < opts.max_iter; ++it) {
            ++r.iterations;
            Vector d = -(H * cur.g);
            double gd = cur.g.dot(d);
            if (!(gd < 0.0)) {
                H.setIdentity();
                d = -cur.g;
                gd = -cur.g.squaredNorm();
            }
            if (!(gd < 0.0)) break;
            double t = 1.0;
            Smoothed nxt;
            bool ok = false;
            for (int ls = 0; ls < 60; ++ls) {
                nxt = smoothed_lmax(prob, y + t * d, mu);
                if (std::isfinite(nxt.f) && nxt.f <= cur.f + 1e-4 * t * gd) {
                    ok = true;
                    break;
                }
                t *= 0.5;
            }
            if (!ok) {
                if (!H.isIdentity()) {
                    H.setIdentity();
                    continue;
                }
                break;
            }
            const Vector s = t * d;
            const Vector yv = nxt.g - cur.g;
            const double sy = s.dot(yv);
            if (sy > 1e-14 * s.norm() * yv.norm()) {
                const double rr = 1.0 / sy;
                const Matrix I = Matrix::Identity(m, m);
                H = (I - rr * s * yv.transpose()) * H * (I - rr * yv * s.transpose()) + rr * s * s.transpose();
            }
            const double df = cur.f - nxt.f;
            y += s;
            cur = std::move(nxt);
            if (cur.lmax < best) {
                best = cur.lmax;
                best_y = y;
            }
            if (best <= -opts.stop_margin * scale) {
                stop = true;
                break;
            }
            if (cur.g.norm() <= 1e-10 * std::max(gscale, 1e-300) || df <= 1e-15 * std::max(1.0, std::abs(cur.f))) break;
        }
        residual = cur.g.norm();
        if (residual <= 1e-6 * std::max(gscale, 1.0)) lower = std::max(lower, cur.f - mu * logN);
        if (stop) break;
        mu *= 0.1;
    }
    r.y = best_y;
    r.lambda_max = best;
    r.dual_residual = residual;
    if (best <= -r.required) {
        r.status = LmiStatus::Feasible;
    } else if (m == 0) {
        r.status = best > r.required ? LmiStatus::Infeasible : LmiStatus::Indeterminate;
    } else if (lower > r.required) {
        r.status = LmiStatus::Infeasible;
    } else {
        r.status = LmiStatus::Indeterminate;
    }
    return r;
}

std::string lmi_to_json(const LmiProblem& prob) {
    nlohmann::json j;
    j["margin"] = prob.margin;
    j["F0"] = nlohmann::json::array();
    for (const Matrix& M : prob.F0) j["F0"].push_back(detail::matrix_to_json(M));
    j["F"] = nlohmann::json::array();
    for (const auto& Fi : prob.F) {
        nlohmann::json blocks = nlohmann::json::array();
        for (const Matrix& M : Fi) blocks.push_back(detail::matrix_to_json(M));
        j["F"].push_back(blocks);
    }
    j["block_names"] = prob.block_names;
    j["variable_names"] = prob.variable_names;
    return j.dump(2);
}

LmiProblem lmi_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("lmi_from_json: ") + e.what());
    }
    if (!j.contains("F0") || !j["F0"].is_array()) throw SchemaError("lmi_from_json: missing F0");
    LmiProblem p;
    auto as_square = [](Matrix M) {
        if (M.rows() == 1 && M.cols() == 1) return M;
        if (M.cols() == 1 && M.rows() != 1) throw SchemaError("lmi_from_json: blocks must be square matrices");
        return M;
    };
    for (const auto& b : j["F0"]) p.F0.push_back(as_square(detail::matrix_from_json(b, "F0")));
    if (j.contains("F")) {
        for (const auto& Fi : j["F"]) {
            std::vector<Matrix> blocks;
            for (const auto& b : Fi) blocks.push_back(as_square(detail::matrix_from_json(b, "F")));
            p.F.push_back(std::move(blocks));
        }
    }
    p.margin = j.value("margin", -1.0);
    if (j.contains("block_names")) p.block_names = j["block_names"].get<std::vector<std::string>>();
    if (j.contains("variable_names")) p.variable_names = j["variable_names"].get<std::vector<std::string>>();
    p.validate();
    return p;
}

double lossless_value(const NonlinearModel& model, const Vector& x) {
    return x.dot(model.plant().Bw * model.phi(x));
}

double lossless_check(const NonlinearModel& model, std::size_t samples, std::uint64_t seed, double radius) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Eigen::Index n = model.n();
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
        const double nx = x.norm();
        if (nx == 0.0) continue;
        x *= radius * std::pow(unif(rng), 1.0 / static_cast<double>(n)) / nx;
        const double r = x.norm();
        if (r < 1e-12) continue;
        worst = std::max(worst, std::abs(lossless_value(model, x)) / (r * r * r));
    }
    return worst;
}

namespace {

Eigen::Index sym_count(Eigen::Index k) { return k * (k + 1) / 2; }

// Fills a symmetric k x k matrix from y[offset ...].
Matrix sym_from(const Vector& y, Eigen::Index offset, Eigen::Index k) {
    Matrix S(k, k);
    Eigen::Index idx = offset;
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = j; i < k; ++i) {
            S(i, j) = y(idx);
            S(j, i) = y(idx);
            ++idx;
        }
    return S;
}

Matrix full_from(const Vector& y, Eigen::Index offset, Eigen::Index r, Eigen::Index c) {
    Matrix M(r, c);
    Eigen::Index idx = offset;
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) M(i, j) = y(idx++);
    return M;
}

Matrix blkdiag(const Matrix& a, const Matrix& b) {
    Matrix M = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    M.topLeftCorner(a.rows(), a.cols()) = a;
    M.bottomRightCorner(b.rows(), b.cols()) = b;
    return M;
}

// Orthonormal basis of range(B)^perp; canonical unit vectors when B selects coordinates.
Matrix complement_basis(const Matrix& B) {
    const Eigen::Index N = B.rows();
    std::vector<bool> used(static_cast<std::size_t>(N), false);
    bool selection = true;
    for (Eigen::Index j = 0; j < B.cols() && selection; ++j) {
        Eigen::Index hit = -1;
        for (Eigen::Index i = 0; i < N; ++i) {
            if (B(i, j) == 0.0) continue;
            if (B(i, j) != 1.0 || hit >= 0) {
                selection = false;
                break;
            }
            hit = i;
        }
        if (hit < 0 || used[static_cast<std::size_t>(hit)]) selection = false;
        else used[static_cast<std::size_t>(hit)] = true;
    }
    if (!selection) return null_space(B.transpose());
    Matrix Nb = Matrix::Zero(N, N - B.cols());
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < N; ++i)
        if (!used[static_cast<std::size_t>(i)]) Nb(i, c++) = 1.0;
    return Nb;
}

QcCertificate finish_certificate(const ClosedLoop& cl, const Matrix& Xc, const LmiResult& r, double eps) {
    QcCertificate c;
    c.X_cl = 0.5 * (Xc + Xc.transpose());
    c.epsilon = eps;
    c.status = r.status;
    c.n_phi = cl.B_wcl.cols();
    c.n_K = cl.A_cl.rows() - cl.plant_order();
    const Matrix L = cl.A_cl.transpose() * c.X_cl + c.X_cl * cl.A_cl + eps * c.X_cl;
    c.margin = lambda_max_sym(0.5 * (L + L.transpose()));
    c.min_eig = lambda_min_sym(c.X_cl);
    c.feasible = r.status == LmiStatus::Feasible && c.margin < 0.0 && c.min_eig > 0.0;
    return c;
}

} // namespace

QcCertificate qc_analysis(const ClosedLoop& cl, double epsilon) {
    if (!(epsilon > 0.0)) throw PreconditionError("qc_analysis: epsilon must be positive");
    const Matrix& A = cl.A_cl;
    const Eigen::Index N = A.rows();
    const Matrix Bw = cl.B_wcl.size() ? cl.B_wcl : Matrix(N, 0);
    const Eigen::Index nphi = Bw.cols();
    Matrix P = Matrix::Zero(N, N);
    if (nphi) {
        if (numerical_rank(Bw, 1e-12) < nphi) throw PreconditionError("qc_analysis: B_w,cl must have full column rank");
        P = Bw * (Bw.transpose() * Bw).ldlt().solve(Bw.transpose());
    }
    const Matrix Nb = nphi ? complement_basis(Bw) : Matrix(Matrix::Identity(N, N));
    const Eigen::Index r = Nb.cols();
    auto Xof = [&](const Vector& y) { return Matrix(P + Nb * sym_from(y, 0, r) * Nb.transpose()); };
    const LmiProblem prob = LmiProblem::from_affine(static_cast<std::size_t>(sym_count(r)), [&](const Vector& y) {
        const Matrix X = Xof(y);
        // Without a fixed block the inequality is homogeneous; normalize with X >= I.
        const Matrix pos = nphi ? Matrix(-X) : Matrix(Matrix::Identity(N, N) - X);
        return std::vector<Matrix>{A.transpose() * X + X * A + epsilon * X, pos};
    });
    const LmiResult res = sdp_feasibility(prob);
    return finish_certificate(cl, Xof(res.y), res, epsilon);
}

QcCertificate qc_analysis_full(const ClosedLoop& cl, double epsilon, double tau) {
    if (!(epsilon > 0.0) || !(tau > 0.0)) throw PreconditionError("qc_analysis_full: epsilon and tau must be positive");
    const Matrix& A = cl.A_cl;
    const Eigen::Index N = A.rows();
    const Matrix Bw = cl.B_wcl.size() ? cl.B_wcl : Matrix(N, 0);
    const Eigen::Index nphi = Bw.cols();
    const LmiProblem prob = LmiProblem::from_affine(static_cast<std::size_t>(sym_count(N)), [&](const Vector& y) {
        const Matrix X = sym_from(y, 0, N);
        Matrix M = Matrix::Zero(N + nphi, N + nphi);
        M.topLeftCorner(N, N) = A.transpose() * X + X * A + epsilon * X;
        if (nphi) {
            const Matrix off = X * Bw - Bw; // mu0 = -1
            M.topRightCorner(N, nphi) = off;
            M.bottomLeftCorner(nphi, N) = off.transpose();
            M.bottomRightCorner(nphi, nphi) = -tau * Matrix::Identity(nphi, nphi);
        }
        const Matrix pos = nphi ? Matrix(-X) : Matrix(Matrix::Identity(N, N) - X);
        return std::vector<Matrix>{M, pos};
    });
    const LmiResult res = sdp_feasibility(prob);
    return finish_certificate(cl, sym_from(res.y, 0, N), res, epsilon);
}

StateFeedbackResult sf_synthesis(const Matrix& A, const Matrix& B, Eigen::Index n_phi, double epsilon) {
    require_square(A, "sf_synthesis: A");
    const Eigen::Index n = A.rows();
    const Eigen::Index p = B.cols();
    if (B.rows() != n) throw DimensionError("sf_synthesis: B rows != n");
    if (n_phi < 0 || n_phi > n) throw PreconditionError("sf_synthesis: n_phi out of range");
    const Eigen::Index n1 = n - n_phi;
    const Eigen::Index nY = sym_count(n1);
    auto D_of = [&](const Vector& y) { return blkdiag(sym_from(y, 0, n1), Matrix::Identity(n_phi, n_phi)); };
    auto W_of = [&](const Vector& y) { return full_from(y, nY, p, n); };
    const LmiProblem prob = LmiProblem::from_affine(static_cast<std::size_t>(nY + p * n), [&](const Vector& y) {
        const Matrix D = D_of(y);
        const Matrix M = A * D + B * W_of(y);
        std::vector<Matrix> blocks{M + M.transpose() + epsilon * D};
        if (n1) blocks.push_back(-sym_from(y, 0, n1));
        return blocks;
    });
    const LmiResult res = sdp_feasibility(prob);
    StateFeedbackResult out;
    out.status = res.status;
    out.Y = sym_from(res.y, 0, n1);
    out.W = W_of(res.y);
    out.K = out.W * D_of(res.y).inverse();
    Plant pl;
    pl.A = A;
    pl.Bu = B;
    pl.Cy = Matrix::Identity(n, n);
    pl.Bw = Matrix::Zero(n, n_phi);
    pl.Bw.bottomRows(n_phi) = Matrix::Identity(n_phi, n_phi);
    out.verification = qc_analysis(assemble_closed_loop(pl, ControllerRealization::static_gain(out.K)), epsilon);
    if (res.status == LmiStatus::Feasible && !out.verification.feasible) out.status = LmiStatus::Indeterminate;
    return out;
}

ExistenceResult of_existence(const Matrix& A, const Matrix& B, const Matrix& C, Eigen::Index n_phi, double epsilon) {
    require_square(A, "of_existence: A");
    const Eigen::Index n = A.rows();
    if (B.rows() != n || C.cols() != n) throw DimensionError("of_existence: B/C shape mismatch");
    if (n_phi < 0 || n_phi > n) throw PreconditionError("of_existence: n_phi out of range");
    const Eigen::Index n1 = n - n_phi;
    const Eigen::Index k = sym_count(n1);
    const Matrix NC = null_space(C, 1e-10);
    const Matrix NB = null_space(B.transpose(), 1e-10);
    const Matrix In1 = Matrix::Identity(n1, n1);
    const Matrix Iphi = Matrix::Identity(n_phi, n_phi);
    const LmiProblem prob = LmiProblem::from_affine(static_cast<std::size_t>(2 * k), [&](const Vector& y) {
        const Matrix X = sym_from(y, 0, n1);
        const Matrix Y = sym_from(y, k, n1);
        const Matrix Dx = blkdiag(X, Iphi);
        const Matrix Dy = blkdiag(Y, Iphi);
        std::vector<Matrix> blocks;
        if (NC.cols()) blocks.push_back(NC.transpose() * (A.transpose() * Dx + Dx * A + epsilon * Dx) * NC);
        if (NB.cols()) blocks.push_back(NB.transpose() * (A * Dy + Dy * A.transpose() + epsilon * Dy) * NB);
        if (n1) {
            Matrix Cpl(2 * n1, 2 * n1);
            Cpl << X, In1, In1, Y;
            blocks.push_back(-Cpl);
        }
        return blocks;
    });
    const LmiResult res = sdp_feasibility(prob);
    ExistenceResult out;
    out.status = res.status;
    out.X = sym_from(res.y, 0, n1);
    out.Y = sym_from(res.y, k, n1);
    if (n1) {
        const Matrix R = In1 - out.X * out.Y;
        Eigen::JacobiSVD<Matrix> js(R);
        out.coupling_singular_values = js.singularValues();
        const double ref = std::max(1.0, (out.X * out.Y).norm());
        out.max_order = 0;
        for (Eigen::Index i = 0; i < js.singularValues().size(); ++i)
            if (js.singularValues()(i) > 1e-7 * ref) ++out.max_order;
    }
    return out;
}

ReconstructionResult reconstruct_controller(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& X,
                                            const Matrix& Y, Eigen::Index n_K, double epsilon) {
    require_square(A, "reconstruct_controller: A");
    const Eigen::Index n = A.rows();
    const Eigen::Index n1 = X.rows();
    if (X.cols() != n1 || Y.rows() != n1 || Y.cols() != n1 || n1 > n)
        throw DimensionError("reconstruct_controller: X/Y shape mismatch");
    if (n_K < 0) throw PreconditionError("reconstruct_controller: negative order");
    const Eigen::Index n_phi = n - n1;
    const Eigen::Index p = B.cols();
    const Eigen::Index m = C.rows();
    const Matrix Iphi = Matrix::Identity(n_phi, n_phi);
    const Matrix Dx = blkdiag(X, Iphi);
    const Matrix Dy = blkdiag(Y, Iphi);
    const Matrix Mgap = Dx - Dy.inverse();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Mgap + Mgap.transpose()));
    const double ref = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-7 * ref)
        throw ConsistencyError("reconstruct_controller: X - Y^{-1} is not positive semidefinite");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (es.eigenvalues()(i) > 1e-7 * ref) keep.push_back(i);
    const auto rank = static_cast<Eigen::Index>(keep.size());
    if (rank > n_K) {
        std::ostringstream os;
        os << "reconstruct_controller: completion needs order " << rank << " but n_K = " << n_K;
        throw ConsistencyError(os.str());
    }
    Matrix X2 = Matrix::Zero(n, n_K);
    for (Eigen::Index c = 0; c < rank; ++c)
        X2.col(c) = es.eigenvectors().col(keep[static_cast<std::size_t>(c)]) *
                    std::sqrt(es.eigenvalues()(keep[static_cast<std::size_t>(c)]));
    const Eigen::Index N = n + n_K;
    Matrix Xcl(N, N);
    Xcl << Dx, X2, X2.transpose(), Matrix::Identity(n_K, n_K);

    Plant pl;
    pl.A = A;
    pl.Bu = B;
    pl.Cy = C;
    pl.Bw = Matrix::Zero(n, n_phi);
    pl.Bw.bottomRows(n_phi) = Iphi;
    ControllerRealization K = ControllerRealization::zeros(n_K, p, m);
    const ClosedLoop cl0 = assemble_closed_loop(pl, K);
    const Eigen::Index tr = n_K + p, tc = n_K + m;
    const LmiProblem prob = LmiProblem::from_affine(static_cast<std::size_t>(tr * tc), [&](const Vector& y) {
        const Matrix Acl = cl0.A0 + cl0.Bt * full_from(y, 0, tr, tc) * cl0.Ct;
        return std::vector<Matrix>{Acl.transpose() * Xcl + Xcl * Acl + epsilon * Xcl};
    });
    const LmiResult res = sdp_feasibility(prob);
    ReconstructionResult out;
    out.status = res.status;
    out.X_cl = Xcl;
    K.set_Theta(full_from(res.y, 0, tr, tc));
    out.controller = K;
    out.verification = qc_analysis(assemble_closed_loop(pl, K), epsilon);
    if (res.status == LmiStatus::Feasible && !out.verification.feasible) out.status = LmiStatus::Indeterminate;
    return out;
}

} // namespace kreisslab
