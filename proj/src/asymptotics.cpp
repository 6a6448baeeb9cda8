#include "coassoc/asymptotics.hpp"

#include "coassoc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace coassoc {

namespace {

Vec4 params(double r, const Eigen::Vector3d& s) { return Vec4(r, s(0), s(1), s(2)); }

// Fraction of d lying in the column span of J.
double tangential_fraction(const Mat74& J, const Vec7& d) {
    double dn = d.norm();
    if (dn == 0.0) return 0.0;
    Eigen::HouseholderQR<Mat74> qr(J);
    Eigen::Matrix<double, 7, 4> Q = qr.householderQ() * Eigen::Matrix<double, 7, 4>::Identity();
    return (Q.transpose() * d).norm() / dn;
}

double smooth_step(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    auto f = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    return f(t) / (f(t) + f(1 - t));
}

}  // namespace

ConeMatchSample match_point(const Chart& sub, const Chart& cone, double r, const Eigen::Vector3d& sigma) {
    const Vec4 uc = params(r, sigma);
    const Vec7 iota = cone(uc);
    // Both charts use (r, sigma), so the cone parameters are a seed as well;
    // when they are already optimal the shared coordinates cancel exactly.
    std::optional<NearestPoint> best;
    auto consider = [&](const Vec4& seed) {
        if (!sub.domain.contains(seed)) return;
        NearestPoint np = nearest_point(sub, iota, seed);
        if (!np.converged) return;
        if (!best || np.distance < best->distance) best = np;
    };
    consider(uc);
    if (sub.locate)
        if (auto s = sub.locate(iota)) consider(*s);
    if (!best) {
        std::ostringstream os;
        os << "nearest-point search did not converge at r = " << r << ", sigma = (" << sigma.transpose() << ")";
        throw MatchingError(os.str(), r, sigma);
    }
    ConeMatchSample s;
    s.r = r;
    s.sigma_index = -1;
    s.displacement = best->point - iota;
    s.tangential_residual = tangential_fraction(cone.jacobian(uc), s.displacement);
    s.u_sub = best->u;
    return s;
}

ConeMatch cone_match(const Chart& sub, const Chart& cone, const std::vector<double>& radii,
                     const std::vector<Eigen::Vector3d>& link_samples) {
    ConeMatch m;
    m.radii = radii;
    m.link = link_samples;
    if (radii.empty() || link_samples.empty()) throw std::invalid_argument("cone_match: empty sample set");
    m.r_min = *std::min_element(radii.begin(), radii.end());
    m.r_max = *std::max_element(radii.begin(), radii.end());
    for (double r : {m.r_min, m.r_max})
        if (!(r >= cone.domain.lo(0) && r <= cone.domain.hi(0)) || !(r >= sub.domain.lo(0) && r <= sub.domain.hi(0)))
            throw std::invalid_argument("cone_match: radius outside the chart domains");
    // scale invariance of the cone: cone(t r, s) = t cone(r, s)
    for (auto& s : link_samples) {
        Vec7 a = cone(params(m.r_min, s)), b = cone(params(2 * m.r_min, s));
        m.scale_invariance_residual = std::max(m.scale_invariance_residual, (b - 2 * a).norm() / std::max(1.0, b.norm()));
    }
    if (m.scale_invariance_residual > 1e-10) throw std::invalid_argument("cone_match: reference chart is not a cone");
    const size_t nl = link_samples.size();
    m.samples.resize(radii.size() * nl);
    parallel_for(m.samples.size(), [&](size_t k) {
        auto s = match_point(sub, cone, radii[k / nl], link_samples[k % nl]);
        s.sigma_index = static_cast<int>(k % nl);
        m.samples[k] = s;
    });
    return m;
}

PowerFit fit_power_law(const std::vector<double>& r, const std::vector<double>& m) {
    const size_t n = r.size();
    if (n < 3 || m.size() != n) throw std::invalid_argument("fit_power_law: need at least 3 points");
    Eigen::MatrixXd A(n, 2), Q(n, 3);
    Eigen::VectorXd y(n);
    for (size_t i = 0; i < n; ++i) {
        double x = std::log(r[i]);
        A(i, 0) = 1;
        A(i, 1) = x;
        Q(i, 0) = 1;
        Q(i, 1) = x;
        Q(i, 2) = x * x;
        y(i) = std::log(m[i]);
    }
    Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
    Eigen::VectorXd res = y - A * beta;
    double s2 = n > 2 ? res.squaredNorm() / static_cast<double>(n - 2) : 0.0;
    Eigen::Matrix2d cov = s2 * (A.transpose() * A).inverse();
    Eigen::Vector3d quad = Q.colPivHouseholderQr().solve(y);
    return {beta(1), beta(0), std::sqrt(std::max(0.0, cov(1, 1))), quad(2)};
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
    return out;
}

std::vector<Eigen::Vector3d> link_angles(int n, unsigned skip) {
    std::vector<Eigen::Vector3d> out;
    for (auto& q : sample_quaternions(n, skip)) {
        Eigen::Vector3d a = angles_from_quat(q);
        // keep away from the chart's polar circles
        a(0) = std::clamp(a(0), 0.05, M_PI / 2 - 0.05);
        out.push_back(a);
    }
    return out;
}

namespace {

RateFit fit_profile(std::vector<double> r, std::vector<double> m) {
    RateFit f;
    f.n_radii = static_cast<int>(r.size());
    f.r_lo = r.front();
    f.r_hi = r.back();
    if (*std::max_element(m.begin(), m.end()) <= 1e-14 * std::max(1.0, f.r_hi)) {
        f.exact_cone = true;
        return f;
    }
    if (r.size() < 8) throw std::invalid_argument("fit_rate: need at least 8 radii");
    PowerFit pf = fit_power_law(r, m);
    // subleading corrections bend the log-log curve at small r
    if (std::abs(pf.curvature) > 0.02 && r.back() >= 100 * r.front()) {
        std::vector<double> r2, m2;
        for (size_t i = 0; i < r.size(); ++i)
            if (r[i] >= 10 * r.front()) {
                r2.push_back(r[i]);
                m2.push_back(m[i]);
            }
        if (r2.size() >= 8) {
            pf = fit_power_law(r2, m2);
            f.dropped_first_decade = true;
            f.r_lo = r2.front();
            f.n_radii = static_cast<int>(r2.size());
        }
    }
    f.lambda_hat = pf.slope;
    f.stderr_ = pf.stderr_;
    return f;
}

}  // namespace

RateFit fit_rate(const ConeMatch& match) {
    std::map<double, double> worst;
    for (auto& s : match.samples) worst[s.r] = std::max(worst[s.r], s.displacement.norm());
    std::vector<double> r, m;
    for (auto& [k, v] : worst) {
        r.push_back(k);
        m.push_back(v);
    }
    RateFit f = fit_profile(r, m);
    f.per_derivative.push_back(f.lambda_hat);
    return f;
}

RateFit fit_rate(const ConeMatch& match, const Chart& sub, const Chart& cone) {
    RateFit f = fit_rate(match);
    if (f.exact_cone) return f;
    // |grad D|^2 = g^{ab} <d_a D, d_b D> with g the cone metric in (r, sigma)
    std::vector<double> r, m;
    for (double rr : match.radii) {
        double worst = 0;
        for (auto& s : match.link) {
            Vec4 u = params(rr, s);
            Mat74 Jc = cone.jacobian(u);
            Eigen::Matrix4d ginv = (Jc.transpose() * Jc).inverse();
            Eigen::Matrix<double, 7, 4> dD;
            for (int a = 0; a < 4; ++a) {
                double h = a == 0 ? 1e-3 * rr : 1e-3;
                Vec4 up = u, um = u;
                up(a) += h;
                um(a) -= h;
                Eigen::Vector3d sp = up.tail<3>(), sm = um.tail<3>();
                Vec7 Dp = match_point(sub, cone, up(0), sp).displacement;
                Vec7 Dm = match_point(sub, cone, um(0), sm).displacement;
                dD.col(a) = (Dp - Dm) / (2 * h);
            }
            double g2 = (dD * ginv * dD.transpose()).trace();
            worst = std::max(worst, std::sqrt(std::max(0.0, g2)));
        }
        r.push_back(rr);
        m.push_back(worst);
    }
    RateFit f1 = fit_profile(r, m);
    f.per_derivative.push_back(f1.lambda_hat);
    return f;
}

ScalarField radius_function(const Chart& chart, double R) {
    if (R < 1) throw std::invalid_argument("radius_function: core radius must be at least 1");
    if (chart.domain.hi(0) < R + 1) throw std::invalid_argument("radius_function: chart has no end beyond the core");
    return [R](const Vec4& u) {
        double r = u(0), chi = smooth_step(r - R);
        return (1 - chi) + chi * r;
    };
}

double weighted_norm(const std::vector<EndSample>& samples, const WeightedNormSpec& spec, int n) {
    const bool sup = std::isinf(spec.p);
    if (!sup && spec.p < 1) throw std::invalid_argument("weighted_norm: p must be at least 1");
    std::vector<double> acc(spec.k + 1, 0.0);
    for (auto& s : samples) {
        if (s.rho < spec.rho_min || s.rho > spec.rho_max) continue;
        if (static_cast<int>(s.deriv_norms.size()) < spec.k + 1)
            throw std::invalid_argument("weighted_norm: missing derivative samples");
        for (int j = 0; j <= spec.k; ++j) {
            double v = std::pow(s.rho, j - spec.mu) * s.deriv_norms[j];
            if (sup) acc[j] = std::max(acc[j], std::abs(v));
            else acc[j] += s.weight * std::pow(std::abs(v), spec.p) * std::pow(s.rho, -n);
        }
    }
    double total = 0;
    for (double a : acc) total += a;
    return sup ? total : std::pow(total, 1.0 / spec.p);
}

std::vector<EndSample> end_quadrature(const Chart& chart, const ScalarField& rho, double r_lo, double r_hi,
                                      int radial_bins, int link_samples,
                                      const std::function<std::vector<double>(const Vec4&)>& field) {
    std::vector<EndSample> out;
    const double dl = std::log(r_hi / r_lo) / radial_bins;
    Box link = chart.domain;
    const double link_vol = (link.hi.tail<3>() - link.lo.tail<3>()).prod();
    Box lb = link;
    lb.lo(0) = 0;
    lb.hi(0) = 1;
    auto pts = sample_domain(lb, link_samples);
    for (int b = 0; b < radial_bins; ++b) {
        double r = r_lo * std::exp((b + 0.5) * dl);
        double dr = r * dl;
        for (auto& p : pts) {
            Vec4 u(r, p(1), p(2), p(3));
            Mat74 J = chart.jacobian(u);
            double vol = std::sqrt(std::max(0.0, (J.transpose() * J).determinant()));
            out.push_back({rho(u), vol * dr * link_vol / link_samples, field(u)});
        }
    }
    return out;
}

}  // namespace coassoc
