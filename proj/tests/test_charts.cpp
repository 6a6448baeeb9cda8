#include <random>

#include "doctest.h"

#include "coassoc/charts.hpp"

using namespace coassoc;

namespace {

Mat74 fd_jacobian(const Chart& ch, const Vec4& u, double h = 1e-6) {
    Mat74 J;
    for (int a = 0; a < 4; ++a) {
        Vec4 up = u, um = u;
        up(a) += h;
        um(a) -= h;
        J.col(a) = (ch(up) - ch(um)) / (2 * h);
    }
    return J;
}

Vec7 e7(int i) {
    Vec7 v = Vec7::Zero();
    v(i - 1) = 1;
    return v;
}

Box moderate(const Chart& ch) {
    double r0 = ch.domain.lo(0);
    return Box{Vec4(r0 + 0.5, 0.3, -2, -2), Vec4(r0 + 4, 1.2, 2, 2)};
}

}  // namespace

TEST_CASE("linear plane chart") {
    Chart p = plane_chart();
    FrameData fr = frame_at(p, Vec4(0.3, -1, 2, 0.5));
    for (int a = 0; a < 4; ++a) CHECK((fr.tangent.col(a) - e7(4 + a)).norm() < 1e-14);
    CHECK((fr.metric - Eigen::Matrix4d::Identity()).norm() < 1e-14);
    auto r = coassoc_residual(p, sample_domain(Box{Vec4::Constant(-1), Vec4::Constant(1)}, 20));
    CHECK(r.max_phi_residual < 1e-15);
    CHECK(r.min_starphi == doctest::Approx(1.0));
    FrameData f2 = frame_at(scaled_chart(p, 2.0), Vec4(0.3, -1, 2, 0.5));
    CHECK((f2.metric - 4 * Eigen::Matrix4d::Identity()).norm() < 1e-12);
}

TEST_CASE("M_c metric is positive definite and partials match finite differences") {
    for (const char* spec : {"mc:plus:c=1", "mc:minus:c=1", "mc:plus:c=0.5", "mc:minus:c=2"}) {
        Chart ch = chart_from_spec(spec);
        REQUIRE(ch.has_partials());
        for (auto& u : sample_domain(moderate(ch), 10, 3)) {
            FrameData fr = frame_at(ch, u);
            CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(fr.metric).eigenvalues().minCoeff() > 0);
            Mat74 fd = fd_jacobian(ch, u);
            CHECK((ch.partials(u) - fd).norm() / fd.norm() < 1e-6);
        }
    }
}

TEST_CASE("coassociativity of the SU(2) family and non-coassociative perturbations") {
    for (const char* spec : {"mc:plus:c=1", "mc:minus:c=1", "cone:plus", "cone:minus", "cone:plane"}) {
        Chart ch = chart_from_spec(spec);
        auto r = coassoc_residual(ch, sample_domain(ch.domain, 1000));
        CHECK(r.max_phi_residual <= 1e-8);
        CHECK(r.min_starphi > 0);
    }
    // graph over the plane of a generic normal perturbation, amplitude 0.1
    Chart base = plane_chart();
    Chart g = base;
    g.partials = nullptr;
    g.map = [](const Vec4& u) {
        Vec7 p = Vec7::Zero();
        p.tail<4>() = u;
        p(0) = 0.1 * std::sin(u(0)) * std::cos(u(1));
        p(1) = 0.1 * u(2) * u(3);
        p(2) = 0.1 * std::sin(u(1) + u(3));
        return p;
    };
    auto r = coassoc_residual(g, sample_domain(Box{Vec4::Constant(-1), Vec4::Constant(1)}, 50));
    CHECK(r.max_phi_residual > 1e-3);
}

TEST_CASE("SU(2) profile curve") {
    for (double c : {0.5, 1.0, 2.0}) {
        double s0 = su2_profile(c, 0.0, Branch::plus);
        CHECK(16 * std::pow(s0, 5) == doctest::Approx(c).epsilon(1e-12));
        for (double r : {0.5, 3.0, 40.0}) {
            double s = su2_profile(c, r, Branch::plus);
            CHECK(s * std::pow(4 * s * s - 5 * r * r, 2) == doctest::Approx(c).epsilon(1e-10));
        }
        double rm = su2_min_radius(c, Branch::minus);
        for (double r : {rm * 1.01, rm * 3, rm * 50}) {
            double s = su2_profile(c, r, Branch::minus);
            CHECK(s * std::pow(4 * s * s - 5 * r * r, 2) == doctest::Approx(c).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(su2_profile(-1.0, 1.0, Branch::plus), ParametrizationError);
}

TEST_CASE("cones: |point| / r = 3/2 on M0+, the plane branch is H") {
    Chart cone = chart_from_spec("cone:plus");
    for (auto& u : sample_domain(cone.domain, 50)) CHECK(std::abs(cone(u).norm() / u(0) - 1.5) < 1e-12);
    Chart plane = chart_from_spec("cone:plane");
    for (auto& u : sample_domain(plane.domain, 50)) {
        Vec7 p = plane(u);
        CHECK(p.head<3>().norm() < 1e-14);
        CHECK(p.tail<4>().norm() == doctest::Approx(u(0)));
    }
}

TEST_CASE("jmap on the plane") {
    FrameData fr = frame_at(plane_chart(), Vec4::Zero());
    Mat4 b = jmap(fr, e7(1));
    Form f = mat_to_form2(b);
    Form expect = Form::monomial(4, {1, 2}) + Form::monomial(4, {3, 4});
    CHECK((f - expect).max_abs() < 1e-14);
    CHECK((hodge4(b) - b).norm() < 1e-14);
    CHECK((jmap_inverse(fr, b) - e7(1)).norm() < 1e-14);
    CHECK(jmap_inverse(fr, Mat4::Zero()).norm() == 0);
    for (int a = 4; a <= 7; ++a) CHECK(jmap(fr, e7(a)).norm() < 1e-14);
    Mat4 asd = form2_to_mat(Form::monomial(4, {1, 2}) - Form::monomial(4, {3, 4}));
    CHECK_THROWS(jmap_inverse(fr, asd));
}

TEST_CASE("jmap kills tangent vectors of M_c and inverts on normals") {
    Chart ch = chart_from_spec("mc:plus:c=1");
    for (auto& u : sample_domain(moderate(ch), 5, 1)) {
        FrameData fr = frame_at(ch, u);
        for (int a = 0; a < 4; ++a) CHECK(jmap(fr, fr.tangent.col(a)).norm() < 1e-10);
        for (int k = 0; k < 3; ++k) {
            Vec7 n = fr.normal.col(k);
            CHECK((jmap_inverse(fr, jmap(fr, n)) - n).norm() < 1e-10);
        }
    }
}

TEST_CASE("self-dual basis") {
    const auto& w = self_dual_basis();
    for (int i = 0; i < 3; ++i) {
        CHECK((hodge4(w[i]) - w[i]).norm() < 1e-15);
        for (int j = 0; j < 3; ++j) CHECK((w[i].cwiseProduct(w[j])).sum() / 2 == doctest::Approx(i == j ? 2.0 : 0.0));
    }
}

TEST_CASE("SU(2) symmetry") {
    auto g = random_quaternions(20, 42);
    for (auto& q : g) CHECK(q.norm() == doctest::Approx(1.0));
    for (const char* spec : {"mc:plus:c=1", "mc:minus:c=1"}) {
        Chart ch = chart_from_spec(spec);
        CHECK(symmetry_residual(ch, g, sample_domain(moderate(ch), 8)) <= 1e-8);
    }
    Chart plane = chart_from_spec("cone:plane");
    CHECK(symmetry_residual(plane, g, sample_domain(moderate(plane), 8)) < 1e-12);
    Mat74 dirs = Mat74::Zero();
    dirs(0, 0) = dirs(1, 1) = dirs(4, 2) = dirs(5, 3) = 1;
    Vec7 origin = Vec7::Zero();
    origin(2) = 1.0;
    origin(6) = 0.5;
    Chart aff = affine_chart(origin, dirs, "affine");
    CHECK(symmetry_residual(aff, g, sample_domain(Box{Vec4::Constant(-1), Vec4::Constant(1)}, 8)) > 1e-2);
}

TEST_CASE("exterior derivative on charts") {
    Chart p = plane_chart();
    Vec4 u(0.2, -0.4, 0.1, 0.3);
    FormField constant = [](const Vec4&) { return Form::monomial(4, {1, 3}) * 2.0; };
    CHECK(exterior_derivative(p, constant, u).max_abs() < 1e-10);
    FormField lin = [](const Vec4& v) { return Form::monomial(4, {2}) * v(0); };
    CHECK((exterior_derivative(p, lin, u) - Form::monomial(4, {1, 2})).max_abs() < 1e-10);
    // d(d f) for f = sin(u1) u2 u4
    FormField df = [](const Vec4& v) {
        Form f(1, 4);
        f.set({1}, std::cos(v(0)) * v(1) * v(3));
        f.set({2}, std::sin(v(0)) * v(3));
        f.set({4}, std::sin(v(0)) * v(1));
        return f;
    };
    CHECK(exterior_derivative(p, df, u).max_abs() < 1e-8);
}

TEST_CASE("chart specs") {
    CHECK(chart_from_spec("plane").domain.contains(Vec4::Zero()));
    CHECK_THROWS_AS(chart_from_spec("mc:plus"), std::invalid_argument);
    CHECK_THROWS_AS(chart_from_spec("cone:sideways"), std::invalid_argument);
    CHECK_THROWS_AS(chart_from_spec("mc:plus:c=abc"), std::invalid_argument);
}

TEST_CASE("sampling is deterministic") {
    Box b{Vec4::Zero(), Vec4::Ones()};
    auto a = sample_domain(b, 16, 5), c = sample_domain(b, 16, 5);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == c[i]);
        CHECK(b.contains(a[i]));
    }
    auto q1 = random_quaternions(4, 9), q2 = random_quaternions(4, 9);
    for (size_t i = 0; i < q1.size(); ++i) CHECK(q1[i].coeffs() == q2[i].coeffs());
}
