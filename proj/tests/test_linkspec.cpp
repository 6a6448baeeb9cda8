#include <cmath>

#include "doctest.h"

#include "coassoc/linkspec.hpp"

using namespace coassoc;

namespace {

const DECOperators& round3() {
    static DECOperators d = build_dec(round_s3(3));
    return d;
}

int count_near(const Eigen::VectorXd& v, double x, double w) {
    int n = 0;
    for (int i = 0; i < v.size(); ++i) n += std::abs(v(i) - x) < w;
    return n;
}

}  // namespace

TEST_CASE("spectra of the round 3-sphere") {
    LinkSpectrum s = link_spectrum(round3(), -5.0, 1.5);
    CHECK(s.b0 == 1);
    CHECK(s.b1 == 0);
    // Delta_0: k(k+2); curl on coexact 1-forms: +-(k+2)
    REQUIRE(s.laplace.size() >= 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(s.laplace(i) - 3) < 0.1);
    CHECK(count_near(s.curl, 2, 0.15) == 3);
    CHECK(count_near(s.curl, -2, 0.15) == 3);
    for (int i = 0; i < s.curl_residual.size(); ++i) CHECK(s.curl_residual(i) < 1e-8);
}

TEST_CASE("discrete walls of the round sphere") {
    LinkSpectrum s = link_spectrum(round3(), -3.5, 1.5);
    auto walls = discrete_walls(s);
    int constants = 0;
    for (auto& w : walls) {
        constants += w.kind == "constant";
        if (w.kind == "laplace+" || w.kind == "laplace-") {
            double l = s.laplace(w.index);
            CHECK(w.mu * (w.mu + 2) == doctest::Approx(l));
        }
    }
    CHECK(constants == s.b0);
}

TEST_CASE("wall residual at 0 and -2") {
    WallResidual at0 = wall_residual(round3(), 0.0);
    CHECK(at0.sigma_min < 0.05);
    CHECK(at0.nullspace_dim >= 4);
    WallResidual at2 = wall_residual(round3(), -2.0);
    CHECK(at2.sigma_min > 0.25);
    CHECK(at2.nullspace_dim == 0);
}

TEST_CASE("walls in an interval") {
    WallScan scan = find_walls(round3(), -1.0, 0.5);
    REQUIRE(scan.walls.size() == 1);
    const WallPoint& w = scan.walls[0];
    CHECK(std::abs(w.mu) < 0.05);
    CHECK(w.multiplicity == 4);
    CHECK_FALSE(w.inconclusive);
    CHECK(w.residual <= 1e-9);
    CHECK(find_walls(round3(), 0.2, 0.4).walls.empty());
    for (auto& p : w.basis) {
        if (p.kind == "constant") {
            CHECK(p.alpha.norm() == 0);
            CHECK(laplace_residual(round3(), p.beta_density, 0) < 1e-12);
        } else {
            CHECK(p.beta.norm() == 0);
        }
    }
}

TEST_CASE("Z space") {
    ZSpace z = z_space(round3());
    CHECK(z.dim == 3);
    CHECK_FALSE(z.inconclusive);
    CHECK(z.residual < 1e-6);
    CHECK(z.basis.size() == 3);
    ZSpace zs = z_space(build_dec(squashed_s3(3)));
    CHECK(zs.dim >= 7);
    CHECK_FALSE(zs.inconclusive);
}

TEST_CASE("laplace residual of an eigenfunction") {
    LinkSpectrum s = link_spectrum(round3(), -3.5, 1.5);
    for (int i = 0; i < 4; ++i) CHECK(laplace_residual(round3(), s.laplace_vecs.col(i), s.laplace(i)) < 1e-8);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(round3().nV);
    CHECK(laplace_residual(round3(), ones, 0) < 1e-12);
    CHECK(laplace_residual(round3(), s.laplace_vecs.col(0), 5.0) > 0.1);
}
