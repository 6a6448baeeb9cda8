#include "coassoc/charts.hpp"

#include "coassoc/parallel.hpp"

#include <array>
#include <boost/math/tools/roots.hpp>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace coassoc {

namespace {

const double kSqrt5 = std::sqrt(5.0);

Quat qadd(const Quat& a, const Quat& b) { return Quat(a.w() + b.w(), a.x() + b.x(), a.y() + b.y(), a.z() + b.z()); }

Quat qscale(const Quat& a, double s) { return Quat(s * a.w(), s * a.x(), s * a.y(), s * a.z()); }

// Unnormalized quaternion products; Eigen's operator* does not renormalize.
Quat qmul(const Quat& a, const Quat& b) { return a * b; }

Quat qbar(const Quat& a) { return a.conjugate(); }

std::array<Quat, 3> quat_angle_partials(double eta, double xi1, double xi2) {
    const double ce = std::cos(eta), se = std::sin(eta);
    const double c1 = std::cos(xi1), s1 = std::sin(xi1), c2 = std::cos(xi2), s2 = std::sin(xi2);
    return {Quat(-se * c1, -se * s1, ce * c2, ce * s2), Quat(-ce * s1, ce * c1, 0, 0), Quat(0, 0, -se * s2, se * c2)};
}

struct Su2Pieces {
    Eigen::Vector3d x;        // Im(q e qbar)
    Eigen::Vector4d y;        // coords of f qbar
    std::array<Eigen::Vector3d, 3> dx;
    std::array<Eigen::Vector4d, 3> dy;
};

Su2Pieces su2_pieces(const Vec4& u, const Quat& e, const Quat& f, bool with_partials) {
    Su2Pieces out;
    Quat q = quat_from_angles(u(1), u(2), u(3));
    out.x = im_part(qmul(qmul(q, e), qbar(q)));
    out.y = h_coords(qmul(f, qbar(q)));
    if (with_partials) {
        auto dq = quat_angle_partials(u(1), u(2), u(3));
        for (int a = 0; a < 3; ++a) {
            out.dx[a] = im_part(qadd(qmul(qmul(dq[a], e), qbar(q)), qmul(qmul(q, e), qbar(dq[a]))));
            out.dy[a] = h_coords(qmul(f, qbar(dq[a])));
        }
    }
    return out;
}

void check_unit(const Quat& q, const char* what) {
    if (std::abs(q.norm() - 1.0) > 1e-12) throw std::invalid_argument(std::string(what) + " must be a unit quaternion");
}

double sobol_unit(boost::random::sobol& gen) {
    return (static_cast<double>(gen() - gen.min()) + 0.5) / (static_cast<double>(gen.max() - gen.min()) + 1.0);
}

}  // namespace

Mat74 Chart::jacobian(const Vec4& u) const {
    if (partials) return partials(u);
    Mat74 J;
    for (int a = 0; a < 4; ++a) {
        double h = fd_step * std::max(1.0, std::abs(u(a)));
        Vec4 up = u, um = u;
        up(a) += h;
        um(a) -= h;
        J.col(a) = (map(up) - map(um)) / (2 * h);
    }
    return J;
}

FrameData frame_at(const Chart& chart, const Vec4& u) {
    FrameData fr;
    fr.point = chart(u);
    fr.jacobian = chart.jacobian(u);
    Eigen::JacobiSVD<Mat74> svd(fr.jacobian);
    const auto& sv = svd.singularValues();
    if (!(sv(3) > chart.rank_tol * std::max(1.0, sv(0)))) {
        std::ostringstream os;
        os << "singular chart '" << chart.label << "' at u = (" << u.transpose() << ")";
        throw SingularChartError(os.str(), u);
    }
    Eigen::HouseholderQR<Mat74> qr(fr.jacobian);
    Eigen::Matrix<double, 7, 7> Q = qr.householderQ();
    Eigen::Matrix4d R = qr.matrixQR().topLeftCorner<4, 4>().triangularView<Eigen::Upper>();
    for (int a = 0; a < 4; ++a)
        if (R(a, a) < 0) {
            R.row(a) *= -1;
            Q.col(a) *= -1;
        }
    fr.tangent = Q.leftCols<4>();
    fr.tri = R;
    for (int k = 0; k < 3; ++k) {
        Vec7 n = Q.col(4 + k);
        for (int i = 0; i < 7; ++i)
            if (std::abs(n(i)) > 1e-12) {
                if (n(i) < 0) n = -n;
                break;
            }
        fr.normal.col(k) = n;
    }
    fr.metric = fr.jacobian.transpose() * fr.jacobian;
    return fr;
}

double phi_residual_at(const FrameData& fr) {
    static const int tri[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    double s = 0;
    for (auto& t : tri) {
        double v = phi_eval(fr.tangent.col(t[0]), fr.tangent.col(t[1]), fr.tangent.col(t[2]));
        s += v * v;
    }
    return std::sqrt(s);
}

double starphi_at(const FrameData& fr) {
    return star_phi_eval(fr.tangent.col(0), fr.tangent.col(1), fr.tangent.col(2), fr.tangent.col(3));
}

CoassocResidual coassoc_residual(const Chart& chart, const std::vector<Vec4>& samples) {
    std::vector<double> res(samples.size()), sp(samples.size());
    parallel_for(samples.size(), [&](size_t i) {
        FrameData fr = frame_at(chart, samples[i]);
        res[i] = phi_residual_at(fr);
        sp[i] = starphi_at(fr);
    });
    CoassocResidual r{0.0, std::numeric_limits<double>::infinity()};
    for (size_t i = 0; i < samples.size(); ++i) {
        r.max_phi_residual = std::max(r.max_phi_residual, res[i]);
        r.min_starphi = std::min(r.min_starphi, sp[i]);
    }
    return r;
}

const std::array<Mat4, 3>& self_dual_basis() {
    static const std::array<Mat4, 3> basis = [] {
        std::array<Mat4, 3> b;
        auto put = [](Mat4& m, int i, int j, double v) {
            m(i, j) = v;
            m(j, i) = -v;
        };
        for (auto& m : b) m.setZero();
        put(b[0], 0, 1, 1);
        put(b[0], 2, 3, 1);
        put(b[1], 0, 2, 1);
        put(b[1], 1, 3, -1);
        put(b[2], 0, 3, 1);
        put(b[2], 1, 2, 1);
        return b;
    }();
    return basis;
}

Mat4 hodge4(const Mat4& b) {
    Mat4 s = Mat4::Zero();
    auto put = [&](int i, int j, double v) {
        s(i, j) = v;
        s(j, i) = -v;
    };
    put(2, 3, b(0, 1));
    put(1, 3, -b(0, 2));
    put(1, 2, b(0, 3));
    put(0, 3, b(1, 2));
    put(0, 2, -b(1, 3));
    put(0, 1, b(2, 3));
    return s;
}

Form mat_to_form2(const Mat4& b) {
    Form f(2, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) f.add({i + 1, j + 1}, b(i, j));
    return f;
}

Mat4 form2_to_mat(const Form& f) {
    if (f.degree() != 2 || f.dim() != 4) throw std::invalid_argument("expected a 2-form on R^4");
    Mat4 m = Mat4::Zero();
    for (auto& [k, v] : f.coeffs()) {
        m(k[0] - 1, k[1] - 1) = v;
        m(k[1] - 1, k[0] - 1) = -v;
    }
    return m;
}

Mat4 frame_to_param(const FrameData& fr, const Mat4& beta) { return fr.tri.transpose() * beta * fr.tri; }

Mat4 param_to_frame(const FrameData& fr, const Mat4& beta) {
    Mat4 inv = fr.tri.inverse();
    return inv.transpose() * beta * inv;
}

Mat4 jmap(const FrameData& fr, const VecN& v) {
    Eigen::Matrix<double, 7, 7> c = phi_contract(v);
    return fr.tangent.transpose() * c * fr.tangent;
}

Vec7 jmap_inverse(const FrameData& fr, const Mat4& beta, double sd_tol) {
    const double bn = beta.norm();
    if ((beta - hodge4(beta)).norm() > sd_tol * std::max(1.0, bn))
        throw std::invalid_argument("jmap_inverse: input is not self-dual");
    const auto& w = self_dual_basis();
    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    for (int k = 0; k < 3; ++k) {
        Mat4 jk = jmap(fr, fr.normal.col(k));
        for (int i = 0; i < 3; ++i) A(i, k) = (jk.array() * w[i].array()).sum() / 4;
    }
    for (int i = 0; i < 3; ++i) rhs(i) = (beta.array() * w[i].array()).sum() / 4;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(2) > 0) || sv(0) / sv(2) > 1e8) throw std::runtime_error("jmap_inverse: near-degenerate normal map");
    Eigen::Vector3d x = svd.solve(rhs);
    return fr.normal * x;
}

Quat quat_from_angles(double eta, double xi1, double xi2) {
    return Quat(std::cos(eta) * std::cos(xi1), std::cos(eta) * std::sin(xi1), std::sin(eta) * std::cos(xi2),
                std::sin(eta) * std::sin(xi2));
}

Eigen::Vector3d angles_from_quat(const Quat& q) {
    double a = std::hypot(q.w(), q.x()), b = std::hypot(q.y(), q.z());
    return {std::atan2(b, a), std::atan2(q.x(), q.w()), std::atan2(q.z(), q.y())};
}

Eigen::Vector3d im_part(const Quat& q) { return {q.x(), q.y(), q.z()}; }

// The last quaternion coordinate enters with a minus sign; with this choice
// the action below preserves phi.
Eigen::Vector4d h_coords(const Quat& y) { return {y.w(), y.x(), y.y(), -y.z()}; }

Quat h_from_coords(const Eigen::Vector4d& v) { return Quat(v(0), v(1), v(2), -v(3)); }

Vec7 su2_act(const Quat& q, const Vec7& p) {
    Quat x(0, p(0), p(1), p(2));
    Quat y = h_from_coords(p.tail<4>());
    Vec7 out;
    out.head<3>() = im_part(qmul(qmul(q, x), qbar(q)));
    out.tail<4>() = h_coords(qmul(y, qbar(q)));
    return out;
}

double su2_min_radius(double c, Branch branch) {
    switch (branch) {
        case Branch::minus:
        case Branch::minus_upper:
            return std::pow(c / 8.0, 0.2);
        default:
            return 0.0;
    }
}

double su2_profile(double c, double r, Branch branch) {
    using namespace boost::math::tools;
    if (!(c > 0)) throw ParametrizationError("su2_profile: c must be positive on the plus/minus branches");
    if (r < 0) throw ParametrizationError("su2_profile: negative r");
    eps_tolerance<double> tol(30);
    std::uintmax_t iters = 200;
    auto fail = [&](const char* what) {
        std::ostringstream os;
        os << "su2_profile: " << what << " at r = " << r;
        return ParametrizationError(os.str());
    };
    if (branch == Branch::plus) {
        // unknown d = 2s - sqrt5 r > 0, where 4s^2-5r^2 = d(d + 2 sqrt5 r)
        const double a = kSqrt5 * r;
        auto g = [&](double d) { return 0.5 * (d + a) * d * d * (d + 2 * a) * (d + 2 * a) - c; };
        auto gd = [&](double d) {
            double v = 0.5 * (d + a) * d * d * (d + 2 * a) * (d + 2 * a) - c;
            double dv = 0.5 * d * (d + 2 * a) * ((d + 2 * a) * d + 2 * (d + a) * (d + 2 * a) + 2 * (d + a) * d);
            return std::make_pair(v, dv);
        };
        double hi = std::max(2 * std::pow(c, 0.2), 1e-300);
        while (g(hi) < 0) hi *= 2;
        auto br = bisect(g, 0.0, hi, eps_tolerance<double>(20), iters);
        double guess = 0.5 * (br.first + br.second);
        double d = newton_raphson_iterate(gd, guess, br.first, br.second, 52);
        return 0.5 * (d + a);
    }
    const double rmin = su2_min_radius(c, branch);
    if (r < rmin * (1 - 1e-14)) throw fail("no point on the minus branch below the turning radius");
    if (branch == Branch::minus) {
        // lower sheet s in (0, r/2), increasing
        auto g = [&](double s) { return s * std::pow(5 * r * r - 4 * s * s, 2) - c; };
        auto gd = [&](double s) {
            double w = 5 * r * r - 4 * s * s;
            return std::make_pair(s * w * w - c, w * (w - 16 * s * s));
        };
        const double hi = 0.5 * r;
        auto br = bisect(g, 0.0, hi, eps_tolerance<double>(20), iters);
        if (br.second - br.first > 1e-3 * hi && g(br.first) * g(br.second) > 0) throw fail("root not bracketed");
        return newton_raphson_iterate(gd, 0.5 * (br.first + br.second), br.first, br.second, 52);
    }
    if (branch == Branch::minus_upper) {
        // upper sheet, unknown e = sqrt5 r - 2s in (0, (sqrt5-1) r)
        const double a = kSqrt5 * r;
        auto g = [&](double e) { return 0.5 * (a - e) * e * e * (2 * a - e) * (2 * a - e) - c; };
        auto br = bisect(g, 0.0, (kSqrt5 - 1) * r, tol, iters);
        return 0.5 * (a - 0.5 * (br.first + br.second));
    }
    throw fail("branch has no profile curve");
}

double su2_profile_slope(double c, double r, double s) {
    (void)c;
    return 4 * r * s / (4 * s * s - r * r);
}

Chart su2_chart(const SU2Params& p) {
    check_unit(p.f, "f");
    if (std::abs(p.e.w()) > 1e-12) throw std::invalid_argument("e must be imaginary");
    check_unit(p.e, "e");
    const bool conic = p.branch == Branch::plane || p.branch == Branch::cone_plus || p.branch == Branch::cone_minus;
    if (conic && p.c != 0.0) throw std::invalid_argument("plane and cone branches require c = 0");
    if (!conic && !(p.c > 0)) throw std::invalid_argument("plus/minus branches require c > 0");

    Chart ch;
    const double eps = 1e-3;
    double rmin = p.r_min >= 0 ? p.r_min : su2_min_radius(p.c, p.branch);
    ch.domain.lo = Vec4(rmin, eps, -M_PI, -M_PI);
    ch.domain.hi = Vec4(p.r_max, M_PI / 2 - eps, M_PI, M_PI);
    const Quat e = p.e, f = p.f;
    const Branch br = p.branch;
    const double c = p.c;
    // The plane and the lower minus sheet come out negatively oriented in
    // (r, eta, xi1, xi2); reversing xi2 fixes the orientation.
    const double o = (br == Branch::plane || br == Branch::minus) ? -1.0 : 1.0;
    auto inner = [o](Vec4 u) {
        u(3) *= o;
        return u;
    };

    auto profile = [=](double r) -> std::pair<double, double> {
        switch (br) {
            case Branch::plane:
                return {0.0, 0.0};
            case Branch::cone_plus:
                return {0.5 * kSqrt5 * r, 0.5 * kSqrt5};
            case Branch::cone_minus:
                return {-0.5 * kSqrt5 * r, -0.5 * kSqrt5};
            default: {
                double s = su2_profile(c, r, br);
                return {s, su2_profile_slope(c, r, s)};
            }
        }
    };
    ch.map = [=](const Vec4& v) {
        const Vec4 u = inner(v);
        auto pc = su2_pieces(u, e, f, false);
        double s = profile(u(0)).first;
        Vec7 out;
        out.head<3>() = s * pc.x;
        out.tail<4>() = u(0) * pc.y;
        return out;
    };
    ch.partials = [=](const Vec4& v) {
        const Vec4 u = inner(v);
        auto pc = su2_pieces(u, e, f, true);
        auto [s, ds] = profile(u(0));
        Mat74 J;
        J.col(0).head<3>() = ds * pc.x;
        J.col(0).tail<4>() = pc.y;
        for (int a = 0; a < 3; ++a) {
            J.col(a + 1).head<3>() = s * pc.dx[a];
            J.col(a + 1).tail<4>() = u(0) * pc.dy[a];
        }
        J.col(3) *= o;
        return J;
    };
    ch.locate = [=](const Vec7& pt) -> std::optional<Vec4> {
        Quat y = h_from_coords(pt.tail<4>());
        double r = y.norm();
        if (r < 1e-300) return std::nullopt;
        // y = r f qbar  =>  q = conj(fbar y / r)
        Quat q = qbar(qscale(qmul(qbar(f), y), 1.0 / r));
        Eigen::Vector3d ang = angles_from_quat(q);
        return Vec4(r, ang(0), ang(1), o * ang(2));
    };
    std::ostringstream os;
    const char* names[] = {"plus", "minus", "minus_upper", "plane", "cone_plus", "cone_minus"};
    os << "su2:" << names[static_cast<int>(br)] << ":c=" << c;
    ch.label = os.str();
    return ch;
}

Chart affine_chart(const Vec7& origin, const Mat74& dirs, const std::string& label) {
    Chart ch;
    ch.domain.lo = Vec4::Constant(-1e6);
    ch.domain.hi = Vec4::Constant(1e6);
    ch.map = [=](const Vec4& u) -> Vec7 { return origin + dirs * u; };
    ch.partials = [=](const Vec4&) { return dirs; };
    ch.locate = [=](const Vec7& p) -> std::optional<Vec4> {
        return Vec4(dirs.colPivHouseholderQr().solve(p - origin));
    };
    ch.label = label;
    return ch;
}

Chart plane_chart(double scale) {
    Mat74 d = Mat74::Zero();
    for (int a = 0; a < 4; ++a) d(3 + a, a) = scale;
    return affine_chart(Vec7::Zero(), d, "plane");
}

Chart scaled_chart(const Chart& c, double factor) {
    Chart out = c;
    auto m = c.map;
    out.map = [=](const Vec4& u) -> Vec7 { return factor * m(u); };
    if (c.partials) {
        auto pj = c.partials;
        out.partials = [=](const Vec4& u) -> Mat74 { return factor * pj(u); };
    }
    if (c.locate) {
        auto loc = c.locate;
        out.locate = [=](const Vec7& p) { return loc(p / factor); };
    }
    out.label = c.label + "*scaled";
    return out;
}

Chart reparametrized(const Chart& c, std::function<Vec4(const Vec4&)> phi, std::function<Mat4(const Vec4&)> dphi,
                     const Box& domain) {
    Chart out;
    out.domain = domain;
    out.fd_step = c.fd_step;
    out.rank_tol = c.rank_tol;
    out.label = c.label + "*reparam";
    auto m = c.map;
    out.map = [=](const Vec4& v) -> Vec7 { return m(phi(v)); };
    out.partials = [=](const Vec4& v) -> Mat74 { return c.jacobian(phi(v)) * dphi(v); };
    return out;
}

Chart chart_from_spec(const std::string& spec) {
    auto fail = [&]() { return std::invalid_argument("unknown chart spec '" + spec + "'"); };
    if (spec == "plane") return plane_chart();
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() == 2 && parts[0] == "cone") {
        SU2Params p;
        p.c = 0;
        if (parts[1] == "plus") p.branch = Branch::cone_plus;
        else if (parts[1] == "minus") p.branch = Branch::cone_minus;
        else if (parts[1] == "plane") p.branch = Branch::plane;
        else throw fail();
        return su2_chart(p);
    }
    if (parts.size() == 3 && parts[0] == "mc" && parts[2].rfind("c=", 0) == 0) {
        SU2Params p;
        try {
            p.c = std::stod(parts[2].substr(2));
        } catch (...) {
            throw fail();
        }
        if (parts[1] == "plus") p.branch = Branch::plus;
        else if (parts[1] == "minus") p.branch = Branch::minus;
        else if (parts[1] == "minus_upper") p.branch = Branch::minus_upper;
        else throw fail();
        return su2_chart(p);
    }
    throw fail();
}

NearestPoint nearest_point(const Chart& chart, const Vec7& p, const Vec4& seed, int max_iter) {
    // gnorm is the fraction of the residual lying in the tangent space; at the
    // optimum it sits at the rounding floor of chart(u) - p.
    Vec4 u = seed;
    Vec7 res = chart(u) - p;
    double cost = res.squaredNorm();
    double lambda = 1e-12;
    bool converged = false;
    double gnorm = 1;
    for (int it = 0; it < max_iter && !converged; ++it) {
        Mat74 J = chart.jacobian(u);
        Vec4 g = J.transpose() * res;
        double rn = res.norm();
        Eigen::HouseholderQR<Mat74> qr(J);
        Mat74 Q = qr.householderQ() * Mat74::Identity();
        gnorm = rn > 0 ? (Q.transpose() * res).norm() / rn : 0.0;
        const double floor = 1e-10 + 16 * std::numeric_limits<double>::epsilon() * p.norm() / std::max(rn, 1e-300);
        if (gnorm < floor) {
            converged = true;
            break;
        }
        Eigen::Matrix4d H = J.transpose() * J;
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            Eigen::Matrix4d A = H;
            A.diagonal() += lambda * H.diagonal().cwiseMax(1e-300);
            Vec4 step = A.ldlt().solve(-g);
            Vec4 un = u + step;
            Vec7 r2 = chart(un) - p;
            double cn = r2.squaredNorm();
            if (cn <= cost) {
                if (step.norm() <= 1e-15 * std::max(1.0, u.norm())) converged = gnorm < 1e-4;
                u = un;
                res = r2;
                cost = cn;
                lambda = std::max(lambda * 0.1, 1e-15);
                accepted = true;
            } else {
                lambda *= 10;
            }
        }
        if (!accepted) {
            // no descent left: accept only if we sit at the rounding floor
            converged = gnorm < 1e-4;
            break;
        }
    }
    NearestPoint np;
    np.u = u;
    np.point = chart(u);
    np.distance = (np.point - p).norm();
    np.gradient_norm = gnorm;
    np.converged = converged;
    return np;
}

double symmetry_residual(const Chart& chart, const std::vector<Quat>& group, const std::vector<Vec4>& points) {
    double worst = 0;
    for (auto& u : points) {
        Vec7 p = chart(u);
        for (auto& q : group) {
            Vec7 pq = su2_act(q, p);
            Vec4 seed = u;
            if (chart.locate)
                if (auto s = chart.locate(pq)) seed = *s;
            auto np = nearest_point(chart, pq, seed);
            worst = std::max(worst, np.distance);
        }
    }
    return worst;
}

Form exterior_derivative(const Chart& chart, const FormField& field, const Vec4& u) {
    Form center = field(u);
    Form out(center.degree() + 1, 4);
    for (int j = 0; j < 4; ++j) {
        double h = chart.fd_step * std::max(1.0, std::abs(u(j)));
        Vec4 up = u, um = u;
        up(j) += h;
        um(j) -= h;
        if (!chart.domain.contains(up) || !chart.domain.contains(um))
            throw std::out_of_range("exterior_derivative: stencil leaves the chart domain");
        Form diff = (field(up) - field(um)) * (1.0 / (2 * h));
        for (auto& [k, v] : diff.coeffs()) {
            Index idx{j + 1};
            idx.insert(idx.end(), k.begin(), k.end());
            out.add(idx, v);
        }
    }
    return out;
}

std::vector<Quat> sample_quaternions(int n, unsigned skip) {
    boost::random::sobol gen(3);
    gen.discard(3ull * (skip + 1));
    std::vector<Quat> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        double u1 = sobol_unit(gen), u2 = sobol_unit(gen), u3 = sobol_unit(gen);
        double a = std::sqrt(1 - u1), b = std::sqrt(u1);
        out.emplace_back(a * std::sin(2 * M_PI * u2), a * std::cos(2 * M_PI * u2), b * std::sin(2 * M_PI * u3),
                         b * std::cos(2 * M_PI * u3));
    }
    return out;
}

std::vector<Vec4> sample_domain(const Box& box, int n, unsigned skip) {
    boost::random::sobol gen(4);
    gen.discard(4ull * (skip + 1));
    std::vector<Vec4> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec4 u;
        for (int a = 0; a < 4; ++a) u(a) = box.lo(a) + (box.hi(a) - box.lo(a)) * sobol_unit(gen);
        out.push_back(u);
    }
    return out;
}

std::vector<Quat> random_quaternions(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<Quat> out;
    for (int i = 0; i < n; ++i) {
        Quat q(nd(rng), nd(rng), nd(rng), nd(rng));
        q.normalize();
        out.push_back(q);
    }
    return out;
}

}  // namespace coassoc
