#include "coassoc/deform.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>

namespace coassoc {

namespace {

Mat74 fd_jacobian(const Chart& ch, const Vec4& u) {
    Mat74 J;
    for (int a = 0; a < 4; ++a) {
        double h = ch.fd_step * std::max(1.0, std::abs(u(a)));
        Vec4 up = u, um = u;
        up(a) += h;
        um(a) -= h;
        J.col(a) = (ch(up) - ch(um)) / (2 * h);
    }
    return J;
}

Form param_to_frame_form(const FrameData& fr, const Form& f) {
    Mat4 inv = fr.tri.inverse();
    std::vector<VecN> rows(4);
    for (int i = 0; i < 4; ++i) rows[i] = inv.col(i);
    return pullback_linear(rows, f);
}

// phi pulled back through the columns of J.
Form pullback_phi(const Mat74& J) {
    Form out(3, 4);
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            for (int c = b + 1; c < 4; ++c) out.set({a + 1, b + 1, c + 1}, phi_eval(J.col(a), J.col(b), J.col(c)));
    return out;
}

}  // namespace

SelfDualField SelfDualField::scaled(double t) const {
    SelfDualField out = *this;
    out.scale *= t;
    return out;
}

SelfDualField self_dual_field(const Chart& base, std::function<Eigen::Vector3d(const Vec4&)> coeffs) {
    SelfDualField a;
    a.base = base;
    a.values = [coeffs](const Vec4& u) {
        Eigen::Vector3d f = coeffs(u);
        const auto& w = self_dual_basis();
        return Mat4(f(0) * w[0] + f(1) * w[1] + f(2) * w[2]);
    };
    return a;
}

SelfDualField random_self_dual_field(const Chart& base, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> K(-1, 1), A(0.2, 1.0), P(0, 2 * M_PI);
    std::array<Vec4, 3> k;
    std::array<double, 3> a, ph;
    for (int i = 0; i < 3; ++i) {
        k[i] = Vec4(K(rng), K(rng), K(rng), K(rng));
        a[i] = A(rng);
        ph[i] = P(rng);
    }
    return self_dual_field(base, [=](const Vec4& u) {
        Eigen::Vector3d v;
        for (int i = 0; i < 3; ++i) v(i) = a[i] * std::sin(k[i].dot(u) + ph[i]);
        return v;
    });
}

double self_duality_residual(const Mat4& beta) { return (beta - hodge4(beta)).norm() / std::max(1.0, beta.norm()); }

Chart deform_chart(const Chart& base, const SelfDualField& alpha) {
    Chart out = base;
    out.partials = nullptr;
    out.locate = nullptr;
    out.label = base.label + "+alpha";
    out.map = [base, alpha](const Vec4& u) -> Vec7 {
        Mat4 a = alpha(u);
        if (a.isZero(0.0)) return base(u);
        return base(u) + jmap_inverse(frame_at(base, u), a);
    };
    return out;
}

double frame_norm(const FrameData& fr, const Form& param_form) { return param_to_frame_form(fr, param_form).norm(); }

DeformationResult eval_F(const Chart& base, const SelfDualField& alpha, const std::vector<Vec4>& samples) {
    DeformationResult res;
    res.deformed = deform_chart(base, alpha);
    for (auto& u : samples) {
        FrameData fr = frame_at(base, u);
        Form F = pullback_phi(fd_jacobian(res.deformed, u));
        double n = frame_norm(fr, F);
        if (!std::isfinite(n)) throw std::runtime_error("eval_F: non-finite value");
        res.sup_F = std::max(res.sup_F, n);
        res.F_samples.push_back({u, res.deformed(u), F, n});
    }
    return res;
}

Form d_alpha(const SelfDualField& alpha, const Vec4& u) {
    const Chart& base = alpha.base;
    FormField field = [&](const Vec4& v) { return mat_to_form2(frame_to_param(frame_at(base, v), alpha(v))); };
    return exterior_derivative(base, field, u);
}

LinCheck lincheck(const Chart& base, const SelfDualField& alpha, const std::vector<double>& t_values,
                  const std::vector<Vec4>& samples) {
    if (t_values.size() < 5) throw std::invalid_argument("lincheck: need at least 5 amplitudes");
    for (double t : t_values)
        if (!(t > 0 && t <= 0.1)) throw std::invalid_argument("lincheck: amplitudes must lie in (0, 0.1]");
    std::vector<Form> da;
    std::vector<FrameData> frames;
    for (auto& u : samples) {
        da.push_back(d_alpha(alpha, u));
        frames.push_back(frame_at(base, u));
    }
    LinCheck out;
    out.t = t_values;
    for (double t : t_values) {
        auto F = eval_F(base, alpha.scaled(t), samples);
        double R = 0;
        for (size_t i = 0; i < samples.size(); ++i)
            R = std::max(R, frame_norm(frames[i], F.F_samples[i].value - t * da[i]));
        out.R.push_back(R);
        out.C_hat = std::max(out.C_hat, R / (t * t));
    }
    if (*std::max_element(out.R.begin(), out.R.end()) < 1e-13) {
        out.exact_linear = true;
        return out;
    }
    PowerFit pf = fit_power_law(out.t, out.R);
    out.slope = pf.slope;
    out.stderr_ = pf.stderr_;
    return out;
}

SelfDualField alpha_u(const Chart& base, double sd_tol) {
    SelfDualField a;
    a.base = base;
    a.values = [base, sd_tol](const Vec4& u) {
        FrameData fr = frame_at(base, u);
        Mat4 b = jmap(fr, fr.point);
        if (self_duality_residual(b) > sd_tol)
            throw ParametrizationError("alpha_u: not self-dual, chart is not coassociative to tolerance");
        return b;
    };
    return a;
}

double alpha_u_closedness(const SelfDualField& au, const std::vector<Vec4>& samples) {
    double worst = 0;
    for (auto& u : samples) worst = std::max(worst, frame_norm(frame_at(au.base, u), d_alpha(au, u)));
    return worst;
}

Form exterior_derivative_flat(const std::function<Form(const VecN&)>& field, const VecN& p, double h) {
    Form center = field(p);
    Form out(center.degree() + 1, center.dim());
    for (int j = 0; j < p.size(); ++j) {
        VecN pp = p, pm = p;
        pp(j) += h;
        pm(j) -= h;
        Form diff = (field(pp) - field(pm)) * (1.0 / (2 * h));
        for (auto& [k, v] : diff.coeffs()) {
            Index idx{j + 1};
            idx.insert(idx.end(), k.begin(), k.end());
            out.add(idx, v);
        }
    }
    out.normalize();
    return out;
}

LieDilation lie_dilation_check() {
    LieDilation out{0, 0, 0};
    auto pts = sample_domain(Box{Vec4::Constant(-2), Vec4::Constant(2)}, 8);
    auto qs = sample_quaternions(8, 3);
    for (size_t i = 0; i < pts.size(); ++i) {
        VecN p(7);
        p << pts[i], qs[i].w(), qs[i].x(), qs[i].y();
        Form a = exterior_derivative_flat([](const VecN& x) { return interior_product(x, phi()); }, p);
        Form b = exterior_derivative_flat([](const VecN& x) { return interior_product(x, star_phi()); }, p);
        out.phi_residual = std::max(out.phi_residual, (a - 3.0 * phi()).max_abs());
        out.starphi_residual = std::max(out.starphi_residual, (b - 4.0 * star_phi()).max_abs());
        if (i == 0) out.coeff_123 = a.get({1, 2, 3});
    }
    return out;
}

InvariantX invariant_X(const Chart& base, const std::vector<double>& rho_max_values, double r_lo, int bins_per_decade,
                       int link_samples) {
    if (rho_max_values.empty()) throw std::invalid_argument("invariant_X: no truncation radii");
    InvariantX out;
    out.rho_max = rho_max_values;
    SelfDualField au = alpha_u(base);
    ScalarField rho = [](const Vec4& u) { return u(0); };
    auto field = [&](const Vec4& u) { return std::vector<double>{au(u).norm() / std::sqrt(2.0)}; };
    double worst_rms = 0;
    for (double rm : rho_max_values) {
        if (!(rm > r_lo)) throw std::invalid_argument("invariant_X: rho_max must exceed the inner radius");
        int bins = std::max(4, static_cast<int>(std::ceil(bins_per_decade * std::log10(rm / r_lo))));
        auto q = end_quadrature(base, rho, r_lo, rm, bins, link_samples, field);
        double X = 0, vol = 0;
        for (auto& s : q) {
            X += s.weight * s.deriv_norms[0] * s.deriv_norms[0];
            vol += s.weight;
        }
        out.truncated.push_back(X);
        worst_rms = std::max(worst_rms, std::sqrt(X / vol));
    }
    if (worst_rms <= 1e-10) {
        out.convergent = true;
    } else {
        out.convergent = true;
        for (size_t i = 1; i < out.truncated.size(); ++i)
            if (std::abs(out.truncated[i] - out.truncated[i - 1]) >= 0.01 * std::abs(out.truncated[i])) out.convergent = false;
    }
    out.verdict = out.convergent ? "convergent" : "divergent (rate >= -2)";
    return out;
}

namespace {

constexpr double kCycleStep = 1e-6;

template <class F>
Vec7 partial(const F& f, int dir, const Eigen::Vector3d& x) {
    Eigen::Vector3d p = x, m = x;
    p(dir) += kCycleStep;
    m(dir) -= kCycleStep;
    return (f(p) - f(m)) / (2 * kCycleStep);
}

}  // namespace

YPair invariant_Y_pair(const Cycle2& gamma, const Cycle3& disk, int nodes, double boundary_tol) {
    if (nodes != 32) throw std::invalid_argument("invariant_Y_pair: only the 32-node rule is available");
    using GL = boost::math::quadrature::gauss<double, 32>;
    std::vector<double> x, w;
    for (size_t i = 0; i < GL::abscissa().size(); ++i) {
        double a = GL::abscissa()[i], wt = GL::weights()[i];
        x.push_back(0.5 + 0.5 * a);
        w.push_back(0.5 * wt);
        if (a != 0) {
            x.push_back(0.5 - 0.5 * a);
            w.push_back(0.5 * wt);
        }
    }
    auto g = [&](const Eigen::Vector3d& v) { return gamma(v(0), v(1)); };
    auto D = [&](const Eigen::Vector3d& v) { return disk(v(0), v(1), v(2)); };
    double I_gamma = 0, I_D = 0;
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = 0; j < x.size(); ++j) {
            Eigen::Vector3d v(x[i], x[j], 1.0);
            Vec7 p = g(v);
            if ((D(v) - p).norm() > boundary_tol * std::max(1.0, p.norm()))
                throw CycleError("invariant_Y_pair: disk boundary does not match gamma");
            I_gamma += w[i] * w[j] * phi_eval(p, partial(g, 0, v), partial(g, 1, v));
            for (size_t k = 0; k < x.size(); ++k) {
                Eigen::Vector3d y(x[i], x[j], x[k]);
                I_D += w[i] * w[j] * w[k] * phi_eval(partial(D, 0, y), partial(D, 1, y), partial(D, 2, y));
            }
        }
    return {I_D, I_gamma, std::abs(3 * I_D - I_gamma)};
}

Cycle2 sphere_cycle(const Vec7& center, double radius) {
    return [=](double a, double b) {
        double th = M_PI * a, ph = 2 * M_PI * b;
        Vec7 p = center;
        p(0) += radius * std::sin(th) * std::cos(ph);
        p(1) += radius * std::sin(th) * std::sin(ph);
        p(2) += radius * std::cos(th);
        return p;
    };
}

Cycle3 cone_disk(const Cycle2& gamma, const Vec7& apex) {
    return [=](double a, double b, double c) -> Vec7 { return apex + c * (gamma(a, b) - apex); };
}

std::vector<Form> eval_G(const Chart& base, const SelfDualField& alpha, const std::function<double(const Vec4&)>& f,
                         const std::vector<Vec4>& samples) {
    auto F = eval_F(base, alpha, samples);
    std::vector<Form> out;
    for (size_t i = 0; i < samples.size(); ++i) {
        const Vec4& u = samples[i];
        FrameData fr = frame_at(base, u);
        Vec4 grad;
        for (int a = 0; a < 4; ++a) {
            double h = base.fd_step * std::max(1.0, std::abs(u(a)));
            Vec4 up = u, um = u;
            up(a) += h;
            um(a) -= h;
            grad(a) = (f(up) - f(um)) / (2 * h);
        }
        // frame components of df, then d*beta = -*df
        Vec4 df = fr.tri.transpose().inverse() * grad;
        Form dstar(3, 4);
        dstar.set({2, 3, 4}, -df(0));
        dstar.set({1, 3, 4}, df(1));
        dstar.set({1, 2, 4}, -df(2));
        dstar.set({1, 2, 3}, df(3));
        out.push_back(param_to_frame_form(fr, F.F_samples[i].value) + dstar);
    }
    return out;
}

}  // namespace coassoc
