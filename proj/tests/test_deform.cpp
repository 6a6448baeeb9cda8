#include <cmath>

#include "doctest.h"

#include "coassoc/deform.hpp"

using namespace coassoc;

namespace {

Box moderate(const Chart& ch) {
    double r0 = ch.domain.lo(0);
    return Box{Vec4(r0 + 1.0, 0.3, -2, -2), Vec4(r0 + 3.0, 1.2, 2, 2)};
}

SelfDualField constant_field(const Chart& base, const Mat4& b) {
    SelfDualField a;
    a.base = base;
    a.values = [b](const Vec4&) { return b; };
    return a;
}

Vec7 e7(int i) {
    Vec7 v = Vec7::Zero();
    v(i - 1) = 1;
    return v;
}

}  // namespace

TEST_CASE("zero deformation") {
    Chart mc = chart_from_spec("mc:plus:c=1");
    SelfDualField zero = constant_field(mc, Mat4::Zero());
    Chart d = deform_chart(mc, zero);
    auto smp = sample_domain(moderate(mc), 10);
    for (auto& u : smp) CHECK((d(u) - mc(u)).norm() == 0);
    CHECK(eval_F(mc, zero, smp).sup_F <= 1e-8);
}

TEST_CASE("translating the plane") {
    Chart plane = plane_chart();
    FrameData fr = frame_at(plane, Vec4::Zero());
    const double t = 0.3;
    SelfDualField a = constant_field(plane, t * jmap(fr, e7(1)));
    Chart moved = deform_chart(plane, a);
    Box box{Vec4::Constant(-1), Vec4::Constant(1)};
    auto smp = sample_domain(box, 10);
    for (auto& u : smp) CHECK((moved(u) - plane(u) - t * e7(1)).norm() < 1e-12);
    CHECK(eval_F(plane, a, smp).sup_F <= 1e-10);
    LinCheck lc = lincheck(plane, a, {0.1, 0.05, 0.02, 0.01, 0.005}, smp);
    CHECK(lc.exact_linear);
}

TEST_CASE("first-order term of F is d alpha") {
    Chart mc = chart_from_spec("mc:plus:c=1");
    auto smp = sample_domain(moderate(mc), 16, 2);
    SelfDualField a = random_self_dual_field(mc, 17);
    const double t = 1e-4;
    DeformationResult F = eval_F(mc, a.scaled(t), smp);
    double sup_da = 0;
    for (auto& u : smp) sup_da = std::max(sup_da, frame_norm(frame_at(mc, u), d_alpha(a, u)));
    CHECK(F.sup_F / (t * sup_da) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("quadratic remainder on M_c") {
    Chart mc = chart_from_spec("mc:plus:c=1");
    auto smp = sample_domain(moderate(mc), 16, 4);
    for (unsigned seed : {1u, 2u}) {
        LinCheck lc = lincheck(mc, random_self_dual_field(mc, seed), {0.05, 0.02, 0.01, 0.005, 0.002}, smp);
        CHECK(std::abs(lc.slope - 2.0) <= 0.1);
        CHECK(lc.C_hat > 0);
    }
}

TEST_CASE("random self-dual fields are reproducible and self-dual") {
    Chart mc = chart_from_spec("mc:plus:c=1");
    SelfDualField a = random_self_dual_field(mc, 5), b = random_self_dual_field(mc, 5), c = random_self_dual_field(mc, 6);
    Vec4 u(1.5, 0.7, 0.1, -0.4);
    CHECK((a(u) - b(u)).norm() == 0);
    CHECK((a(u) - c(u)).norm() > 0);
    CHECK(self_duality_residual(a(u)) < 1e-14);
    CHECK((a.scaled(2)(u) - 2 * a(u)).norm() < 1e-14);
}

TEST_CASE("Lie derivative of phi and *phi along the dilation field") {
    LieDilation l = lie_dilation_check();
    CHECK(l.coeff_123 == doctest::Approx(3.0));
    CHECK(l.phi_residual < 1e-8);
    CHECK(l.starphi_residual < 1e-8);
}

TEST_CASE("alpha_u") {
    for (const char* spec : {"cone:plus", "cone:minus", "cone:plane"}) {
        Chart ch = chart_from_spec(spec);
        SelfDualField au = alpha_u(ch);
        for (auto& u : sample_domain(ch.domain, 64)) CHECK(au(u).norm() <= 1e-10);
    }
    Chart plane = plane_chart();
    for (auto& u : sample_domain(Box{Vec4::Constant(-3), Vec4::Constant(3)}, 16)) CHECK(alpha_u(plane)(u).norm() == 0);
    Chart mc = chart_from_spec("mc:plus:c=1");
    SelfDualField au = alpha_u(mc);
    double biggest = 0;
    auto smp = sample_domain(moderate(mc), 16);
    for (auto& u : smp) biggest = std::max(biggest, au(u).norm());
    CHECK(biggest > 1e-3);
    CHECK(alpha_u_closedness(au, smp) <= 1e-6);
}

TEST_CASE("invariant X") {
    std::vector<double> rho = {10, 100, 1000};
    for (const char* spec : {"cone:plus", "cone:plane"}) {
        InvariantX x = invariant_X(chart_from_spec(spec), rho);
        CHECK(x.convergent);
        for (double v : x.truncated) CHECK(v < 1e-10);
    }
    InvariantX x = invariant_X(chart_from_spec("mc:plus:c=1"), rho);
    CHECK_FALSE(x.convergent);
    // |alpha_u|^2 ~ rho^-3 against rho^3 drho: linear growth in rho_max
    CHECK(x.truncated[2] / x.truncated[1] == doctest::Approx(10).epsilon(0.1));
    CHECK_THROWS(invariant_X(chart_from_spec("plane"), {}));
}

TEST_CASE("invariant Y pair") {
    Cycle2 point = [](double, double) { return Vec7::Zero(); };
    YPair y0 = invariant_Y_pair(point, cone_disk(point, Vec7::Zero()));
    CHECK(std::abs(y0.int_D_phi) < 1e-14);
    CHECK(std::abs(y0.int_gamma_alpha_u) < 1e-14);

    // 2-sphere in span(e4, e5, e6) coned off inside the plane {x1 = x2 = x3 = 0}
    Cycle2 flat = [](double a, double b) {
        double th = M_PI * a, ph = 2 * M_PI * b;
        Vec7 p = Vec7::Zero();
        p(3) = std::sin(th) * std::cos(ph);
        p(4) = std::sin(th) * std::sin(ph);
        p(5) = std::cos(th);
        return p;
    };
    CHECK(std::abs(invariant_Y_pair(flat, cone_disk(flat, Vec7::Zero())).int_D_phi) < 1e-12);

    const double s0 = std::pow(1.0 / 16, 0.2);
    Cycle2 g = sphere_cycle(Vec7::Zero(), s0);
    YPair y = invariant_Y_pair(g, cone_disk(g, Vec7::Zero()));
    CHECK(std::abs(y.int_gamma_alpha_u) > 0.1);
    CHECK(y.stokes_defect / std::abs(y.int_gamma_alpha_u) <= 1e-4);
    Vec7 apex = Vec7::Zero();
    apex(1) = -0.3;
    apex(6) = 0.4;
    YPair y2 = invariant_Y_pair(g, cone_disk(g, apex));
    CHECK(std::abs(y2.int_D_phi - y.int_D_phi) <= 1e-6 * std::abs(y.int_D_phi));

    Cycle3 wrong = [](double a, double b, double t) {
        Vec7 p = Vec7::Zero();
        p(0) = a + b + t;
        return p;
    };
    CHECK_THROWS_AS(invariant_Y_pair(g, wrong), CycleError);
}
