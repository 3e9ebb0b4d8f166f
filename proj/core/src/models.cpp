#include "kreisslab/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "kreisslab/errors.hpp"
#include "kreisslab/sysnorms.hpp"

namespace kreisslab {

namespace {

Matrix rotation_block(double s, double w) {
    Matrix M(2, 2);
    M << s, -w, w, s;
    return M;
}

Matrix blkdiag2(const Matrix& a, const Matrix& b) {
    Matrix M = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    M.topLeftCorner(a.rows(), a.cols()) = a;
    M.bottomRightCorner(b.rows(), b.cols()) = b;
    return M;
}

Matrix damping_block(double beta, double gamma) {
    Matrix M(2, 2);
    M << -beta, -gamma, gamma, -beta;
    return M;
}

} // namespace

Brunton4Params load_brunton4(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("load_brunton4: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("load_brunton4: ") + e.what());
    }
    Brunton4Params p;
    auto get = [&](const char* k, double& v) {
        if (!j.contains(k) || !j[k].is_number()) throw SchemaError(std::string("load_brunton4: missing number '") + k + "'");
        v = j[k].get<double>();
    };
    get("sigma_u", p.sigma_u);
    get("omega_u", p.omega_u);
    get("sigma_a", p.sigma_a);
    get("omega_a", p.omega_a);
    get("g", p.g);
    get("alpha_u", p.alpha_u);
    get("alpha_a", p.alpha_a);
    get("beta_uu", p.beta_uu);
    get("gamma_uu", p.gamma_uu);
    get("beta_au", p.beta_au);
    get("gamma_au", p.gamma_au);
    get("beta_ua", p.beta_ua);
    get("gamma_ua", p.gamma_ua);
    get("beta_aa", p.beta_aa);
    get("gamma_aa", p.gamma_aa);
    p.placeholder = j.value("placeholder", true);
    p.note = j.value("note", std::string());
    return p;
}

NonlinearModel NonlinearModel::lorenz(const LorenzParams& p, const Matrix& Cy) {
    if (!(p.p > 0.0) || !(p.b > 0.0)) throw PreconditionError("lorenz: p and b must be positive");
    NonlinearModel m;
    m.kind_ = Kind::Lorenz;
    m.params_ = p;
    m.plant_.A.resize(3, 3);
    m.plant_.A << -p.p, p.p, 0.0, p.R, -1.0, 0.0, 0.0, 0.0, -p.b;
    m.plant_.Bw = Matrix::Zero(3, 2);
    m.plant_.Bw(1, 0) = 1.0;
    m.plant_.Bw(2, 1) = 1.0;
    m.plant_.Bu = Matrix::Zero(3, 1);
    m.plant_.Bu(1, 0) = 1.0;
    m.plant_.Cy = Cy;
    m.plant_.validate();
    return m;
}

NonlinearModel NonlinearModel::lorenz(const LorenzParams& p) {
    Matrix C = Matrix::Zero(1, 3);
    C(0, 0) = 1.0;
    return lorenz(p, C);
}

NonlinearModel NonlinearModel::brunton2(const Brunton2Params& p) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw PreconditionError("brunton2: alpha and beta must be positive");
    NonlinearModel m;
    m.kind_ = Kind::Brunton2;
    m.params_ = p;
    m.plant_.A = rotation_block(p.sigma, p.omega);
    m.plant_.Bw = Matrix::Identity(2, 2);
    m.plant_.Bu = Matrix::Zero(2, 1);
    m.plant_.Bu(1, 0) = p.g;
    m.plant_.Cy = Matrix::Zero(1, 2);
    m.plant_.Cy(0, 1) = 1.0;
    return m;
}

NonlinearModel NonlinearModel::brunton4(const Brunton4Params& p) {
    NonlinearModel m;
    m.kind_ = Kind::Brunton4;
    m.params_ = p;
    m.plant_.A = blkdiag2(rotation_block(p.sigma_u, p.omega_u), rotation_block(p.sigma_a, p.omega_a));
    m.plant_.Bw = Matrix::Identity(4, 4);
    m.plant_.Bu = Matrix::Zero(4, 1);
    m.plant_.Bu(1, 0) = p.g;
    m.plant_.Bu(3, 0) = p.g;
    m.plant_.Cy = Matrix::Zero(1, 4);
    m.plant_.Cy(0, 0) = 1.0;
    m.plant_.Cy(0, 2) = 1.0;
    return m;
}

std::string NonlinearModel::name() const {
    switch (kind_) {
    case Kind::Lorenz: return "lorenz";
    case Kind::Brunton2: return "brunton2";
    case Kind::Brunton4: return "brunton4";
    }
    return "unknown";
}

Vector NonlinearModel::phi(const Vector& x) const {
    if (x.size() != n()) throw DimensionError("phi: state dimension mismatch");
    switch (kind_) {
    case Kind::Lorenz: {
        Vector w(2);
        w << -x(0) * x(2), x(0) * x(1);
        return w;
    }
    case Kind::Brunton2: {
        const auto& p = std::get<Brunton2Params>(params_);
        return p.alpha * x.squaredNorm() * (damping_block(p.beta, p.gamma) * x);
    }
    case Kind::Brunton4: {
        const auto& p = std::get<Brunton4Params>(params_);
        const Matrix A5 = blkdiag2(damping_block(p.beta_uu, p.gamma_uu), damping_block(p.beta_au, p.gamma_au));
        const Matrix A6 = blkdiag2(damping_block(p.beta_ua, p.gamma_ua), damping_block(p.beta_aa, p.gamma_aa));
        const double ru = x(0) * x(0) + x(1) * x(1);
        const double ra = x(2) * x(2) + x(3) * x(3);
        return (p.alpha_u * ru * A5 + p.alpha_a * ra * A6) * x;
    }
    }
    return Vector();
}

Matrix NonlinearModel::phi_jacobian(const Vector& x) const {
    if (x.size() != n()) throw DimensionError("phi_jacobian: state dimension mismatch");
    switch (kind_) {
    case Kind::Lorenz: {
        Matrix Jm(2, 3);
        Jm << -x(2), 0.0, -x(0), x(1), x(0), 0.0;
        return Jm;
    }
    case Kind::Brunton2: {
        const auto& p = std::get<Brunton2Params>(params_);
        const Matrix M = damping_block(p.beta, p.gamma);
        return p.alpha * (2.0 * (M * x) * x.transpose() + x.squaredNorm() * M);
    }
    case Kind::Brunton4: {
        const auto& p = std::get<Brunton4Params>(params_);
        const Matrix A5 = blkdiag2(damping_block(p.beta_uu, p.gamma_uu), damping_block(p.beta_au, p.gamma_au));
        const Matrix A6 = blkdiag2(damping_block(p.beta_ua, p.gamma_ua), damping_block(p.beta_aa, p.gamma_aa));
        const double ru = x(0) * x(0) + x(1) * x(1);
        const double ra = x(2) * x(2) + x(3) * x(3);
        Vector du = Vector::Zero(4), da = Vector::Zero(4);
        du << 2.0 * x(0), 2.0 * x(1), 0.0, 0.0;
        da << 0.0, 0.0, 2.0 * x(2), 2.0 * x(3);
        return p.alpha_u * ((A5 * x) * du.transpose() + ru * A5) + p.alpha_a * ((A6 * x) * da.transpose() + ra * A6);
    }
    }
    return Matrix();
}

Vector NonlinearModel::rhs(const Vector& x, const Vector& u) const {
    return plant_.A * x + plant_.Bw * phi(x) + plant_.Bu * u;
}

void NonlinearModel::check_origin() const {
    const Vector z = Vector::Zero(n());
    const double v0 = (plant_.Bw * phi(z)).norm();
    const double v1 = (plant_.Bw * phi_jacobian(z)).norm();
    if (v0 > 0.0 || v1 > 0.0) {
        std::ostringstream os;
        os << name() << ": origin conditions violated (|B phi(0)| = " << v0 << ", |B phi'(0)| = " << v1 << ")";
        throw ConsistencyError(os.str());
    }
}

FixedPoints lorenz_fixed_points(const LorenzParams& p) {
    FixedPoints fp;
    fp.points.push_back(Vector::Zero(3));
    if (p.R <= 1.0) {
        fp.degenerate = true;
        return fp;
    }
    const double s = std::sqrt(p.b * (p.R - 1.0));
    Vector a(3), b(3);
    a << s, s, p.R - 1.0;
    b << -s, -s, p.R - 1.0;
    fp.points.push_back(a);
    fp.points.push_back(b);
    return fp;
}

StateSpace model_as_statespace(const NonlinearModel& model) {
    const Plant& pl = model.plant();
    return StateSpace(pl.A, pl.Bw, Matrix::Identity(pl.n(), pl.n()));
}

std::optional<double> limit_cycle_radius(const Brunton2Params& p) {
    if (!(p.sigma > 0.0)) return std::nullopt;
    return std::sqrt(p.sigma / (p.alpha * p.beta));
}

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

struct Segment {
    std::vector<double> t;
    std::vector<Vector> z;
    bool diverged = false;
    std::string message;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// One integration segment on [t0, t1] with FSAL Dormand-Prince 5(4).
Segment dopri(const OdeRhs& f, const Vector& z0, double t0, double t1, const IntegratorOptions& o, bool record_first) {
    Segment seg;
    double t = t0;
    Vector z = z0;
    if (record_first) {
        seg.t.push_back(t);
        seg.z.push_back(z);
    }
    if (!(t1 > t0)) return seg;
    double h = std::min({o.h0, o.h_max, t1 - t0});
    double next_out = o.output_dt > 0.0 ? t0 + o.output_dt : t1;
    Vector k1 = f(t, z);
    std::size_t steps = 0;
    while (t < t1) {
        if (++steps > o.max_steps) {
            seg.diverged = true;
            seg.message = "step budget exhausted at t = " + std::to_string(t);
            break;
        }
        const double target = std::min(next_out, t1);
        double hs = h;
        bool clamped = false;
        if (t + hs >= target) {
            hs = target - t;
            clamped = true;
        }
        const Vector k2 = f(t + c2 * hs, z + hs * (a21 * k1));
        const Vector k3 = f(t + c3 * hs, z + hs * (a31 * k1 + a32 * k2));
        const Vector k4 = f(t + c4 * hs, z + hs * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = f(t + c5 * hs, z + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = f(t + hs, z + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector zn = z + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vector k7 = f(t + hs, zn);
        const Vector err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            const double sc = o.atol + o.rtol * std::max(std::abs(z(i)), std::abs(zn(i)));
            en += (err(i) / sc) * (err(i) / sc);
        }
        en = std::sqrt(en / static_cast<double>(std::max<Eigen::Index>(z.size(), 1)));
        if (!std::isfinite(en)) en = 1e10;
        if (en <= 1.0) {
            t = clamped ? target : t + hs;
            z = zn;
            k1 = k7;
            ++seg.accepted;
            if (!z.allFinite() || z.norm() > o.blowup) {
                seg.t.push_back(t);
                seg.z.push_back(z);
                seg.diverged = true;
                seg.message = "state blow-up at t = " + std::to_string(t);
                break;
            }
            if (o.output_dt <= 0.0 || (clamped && target == next_out) || t >= t1) {
                seg.t.push_back(t);
                seg.z.push_back(z);
                if (clamped && target == next_out) next_out += o.output_dt;
            }
            const double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            if (!clamped || hs >= h) h *= std::min(5.0, std::max(0.2, fac));
        } else {
            ++seg.rejected;
            h = hs * std::max(0.2, 0.9 * std::pow(en, -0.2));
        }
        h = std::min(h, o.h_max);
        if (h < o.h_min * std::max(1.0, std::abs(t))) {
            seg.diverged = true;
            seg.message = "step size underflow at t = " + std::to_string(t);
            break;
        }
    }
    return seg;
}

} // namespace

Trajectory integrate_ode(const OdeRhs& f, const Vector& x0, double t0, double t1, const IntegratorOptions& opts) {
    if (t1 < t0) throw PreconditionError("integrate_ode: t1 < t0");
    Segment s = dopri(f, x0, t0, t1, opts, true);
    Trajectory tr;
    tr.t = std::move(s.t);
    tr.x = std::move(s.z);
    tr.diverged = s.diverged;
    tr.message = s.message;
    tr.accepted_steps = s.accepted;
    tr.rejected_steps = s.rejected;
    tr.t_on = t0;
    return tr;
}

Trajectory simulate_closed_loop(const NonlinearModel& model, const ControllerRealization& K, const Vector& x0,
                                double t_on, double t_final, const IntegratorOptions& opts) {
    const Plant& pl = model.plant();
    const Eigen::Index n = pl.n();
    const Eigen::Index nK = K.order();
    if (x0.size() != n) throw DimensionError("simulate_closed_loop: x0 dimension mismatch");
    if (K.outputs() != pl.inputs() || K.inputs() != pl.measurements())
        throw DimensionError("simulate_closed_loop: controller dimensions do not match the plant");
    if (!(t_on <= t_final) || t_on < 0.0) throw PreconditionError("simulate_closed_loop: need 0 <= t_on <= t_final");

    auto open = [&](double, const Vector& z) {
        Vector dz = Vector::Zero(n + nK);
        dz.head(n) = model.rhs(z.head(n), Vector::Zero(pl.inputs()));
        return dz;
    };
    auto closed = [&](double, const Vector& z) {
        const Vector x = z.head(n);
        const Vector xk = z.tail(nK);
        const Vector y = pl.Cy * x;
        Vector u = K.DK * y;
        if (nK) u += K.CK * xk;
        Vector dz(n + nK);
        dz.head(n) = model.rhs(x, u);
        if (nK) dz.tail(nK) = K.AK * xk + K.BK * y;
        return dz;
    };

    Vector z0 = Vector::Zero(n + nK);
    z0.head(n) = x0;
    Segment a = dopri(open, z0, 0.0, t_on, opts, true);
    Segment b;
    if (!a.diverged) b = dopri(closed, a.z.back(), t_on, t_final, opts, false);

    Trajectory tr;
    tr.t_on = t_on;
    tr.accepted_steps = a.accepted + b.accepted;
    tr.rejected_steps = a.rejected + b.rejected;
    tr.diverged = a.diverged || b.diverged;
    tr.message = a.diverged ? a.message : b.message;
    auto push = [&](double t, const Vector& z, bool on) {
        const Vector x = z.head(n);
        const Vector y = pl.Cy * x;
        Vector u = Vector::Zero(pl.inputs());
        if (on) {
            u = K.DK * y;
            if (nK) u += K.CK * z.tail(nK);
        }
        tr.t.push_back(t);
        tr.x.push_back(x);
        tr.xK.push_back(z.tail(nK));
        tr.u.push_back(u);
        tr.y.push_back(y);
    };
    for (std::size_t i = 0; i < a.t.size(); ++i) push(a.t[i], a.z[i], false);
    for (std::size_t i = 0; i < b.t.size(); ++i) push(b.t[i], b.z[i], true);
    return tr;
}

void Trajectory::write_csv(std::ostream& os) const {
    const Eigen::Index n = x.empty() ? 0 : x.front().size();
    const Eigen::Index nK = xK.empty() ? 0 : xK.front().size();
    const Eigen::Index p = u.empty() ? 0 : u.front().size();
    const Eigen::Index m = y.empty() ? 0 : y.front().size();
    os << "t";
    for (Eigen::Index i = 0; i < n; ++i) os << ",x_" << i + 1;
    for (Eigen::Index i = 0; i < nK; ++i) os << ",x_K" << i + 1;
    for (Eigen::Index i = 0; i < p; ++i) os << (p == 1 ? std::string(",u") : ",u_" + std::to_string(i + 1));
    for (Eigen::Index i = 0; i < m; ++i) os << (m == 1 ? std::string(",y") : ",y_" + std::to_string(i + 1));
    os << '\n';
    os.precision(17);
    for (std::size_t k = 0; k < t.size(); ++k) {
        os << t[k];
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << x[k](i);
        for (Eigen::Index i = 0; i < nK && k < xK.size(); ++i) os << ',' << xK[k](i);
        for (Eigen::Index i = 0; i < p && k < u.size(); ++i) os << ',' << u[k](i);
        for (Eigen::Index i = 0; i < m && k < y.size(); ++i) os << ',' << y[k](i);
        os << '\n';
    }
}

TransientCurve transient_curve(const Matrix& A_cl, const Matrix& J, const std::vector<double>& times) {
    require_hurwitz(A_cl, "transient_curve");
    if (J.rows() != A_cl.rows()) throw DimensionError("transient_curve: J rows != closed-loop order");
    TransientCurve c;
    c.t = times;
    c.sigma.reserve(times.size());
    for (double t : times) {
        if (t < 0.0) throw PreconditionError("transient_curve: negative time");
        const double s = sigma_max(Matrix(J.transpose() * expm(A_cl, t) * J));
        c.sigma.push_back(s);
        if (s > c.peak) {
            c.peak = s;
            c.t_peak = t;
        }
    }
    return c;
}

void TransientCurve::write_csv(std::ostream& os) const {
    os << "t,sigma\n";
    os.precision(17);
    for (std::size_t k = 0; k < t.size(); ++k) os << t[k] << ',' << sigma[k] << '\n';
}

double default_horizon(const Matrix& A_cl, double t_on) {
    const double a = spectral_abscissa(A_cl);
    if (!(a < 0.0)) throw StabilityError("default_horizon: closed loop not Hurwitz", a);
    return t_on + 3.0 / (-a);
}

} // namespace kreisslab
