#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"

#include "coassoc/dec.hpp"

using namespace coassoc;

namespace {

int rank_of(const SpMat& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu{Eigen::MatrixXd(m)};
    return static_cast<int>(lu.rank());
}

// Simplicial homology from incidence ranks.
std::array<int, 4> rank_betti(const DECOperators& d) {
    int r0 = rank_of(d.d0), r1 = rank_of(d.d1), r2 = rank_of(d.d2);
    return {d.nV - r0, d.nE - r0 - r1, d.nF - r1 - r2, d.nT - r2};
}

double max_abs(const SpMat& m) {
    double w = 0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) w = std::max(w, std::abs(it.value()));
    return w;
}

}  // namespace

TEST_CASE("boundary of the 4-simplex") {
    TriMesh3 m = round_s3(0);
    CHECK(m.vertices.size() == 5);
    CHECK(m.tets.size() == 5);
    CHECK(is_consistently_oriented(m));
}

TEST_CASE("refined spheres are closed oriented manifolds") {
    for (int level = 0; level <= 2; ++level)
        for (TriMesh3 m : {round_s3(level), squashed_s3(level)}) {
            CHECK(is_consistently_oriented(m));
            DECOperators d = build_dec(m);
            CHECK(d.nV - d.nE + d.nF - d.nT == 0);
            CHECK(d.nT == static_cast<int>(m.tets.size()));
            CHECK(2 * d.nF == 4 * d.nT);
        }
}

TEST_CASE("d o d = 0 exactly and masses are SPD") {
    DECOperators d = build_dec(round_s3(2));
    CHECK(max_abs(d.d1 * d.d0) == 0);
    CHECK(max_abs(d.d2 * d.d1) == 0);
    for (int q = 0; q <= 3; ++q) {
        Eigen::MatrixXd M(d.mass(q));
        CHECK((M - M.transpose()).norm() < 1e-14 * M.norm());
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff() > 0);
    }
}

TEST_CASE("the metric-free pairing K is symmetric and kills exact forms") {
    DECOperators d = build_dec(squashed_s3(2));
    Eigen::MatrixXd K(d.K);
    CHECK((K - K.transpose()).norm() < 1e-12 * K.norm());
    CHECK(Eigen::MatrixXd(d.K * d.d0).norm() < 1e-12 * K.norm());
}

TEST_CASE("betti numbers agree with the incidence-rank oracle") {
    for (TriMesh3 m : {round_s3(2), squashed_s3(2)}) {
        DECOperators d = build_dec(m);
        BettiResult b = betti(d);
        CHECK(b.b == std::array<int, 4>{1, 0, 0, 1});
        CHECK(rank_betti(d) == b.b);
        for (int q = 0; q < 4; ++q) CHECK(b.first_nonzero[q] > 100 * b.tau[q]);
    }
    DECOperators two = build_dec(disjoint_union(round_s3(1), round_s3(1)));
    CHECK(betti(two).b == std::array<int, 4>{2, 0, 0, 2});
    CHECK(rank_betti(two) == betti(two).b);
}

TEST_CASE("volume of the unit 3-sphere") {
    DECOperators d = build_dec(round_s3(3));
    CHECK(std::abs(d.volume / (2 * M_PI * M_PI) - 1) <= 0.02);
    CHECK(d.tet_volume.sum() == doctest::Approx(d.volume));
    CHECK(d.curved_metric);
}

TEST_CASE("Hodge Laplacians") {
    DECOperators d = build_dec(round_s3(1));
    for (int q = 0; q <= 3; ++q) {
        Eigen::MatrixXd L = hodge_laplacian_dense(d, q);
        CHECK((L - L.transpose()).norm() < 1e-10 * L.norm());
        Eigen::MatrixXd M(d.mass(q));
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(L, M);
        CHECK(es.eigenvalues().minCoeff() > -1e-9);
    }
    for (int q = 0; q < 3; ++q) {
        Eigen::MatrixXd D(d.d(q)), Mq(d.mass(q)), Mn(d.mass(q + 1));
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(D.transpose() * Mn * D, Mq);
        CHECK(es.eigenvalues().maxCoeff() <= d.lambda_max_bound[q] * (1 + 1e-9));
    }
    // sparse shift-invert against the dense problem
    DECOperators d2 = build_dec(round_s3(2));
    Eigen::MatrixXd L0 = hodge_laplacian_dense(d2, 0);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(L0, Eigen::MatrixXd(d2.M0));
    SymEigs low = hodge_lowest(d2, 0, 6);
    for (int i = 0; i < 6; ++i) CHECK(low.values(i) == doctest::Approx(dense.eigenvalues()(i)).epsilon(1e-8).scale(1));
    // first nonzero eigenvalue of the unit S^3 is 3, with multiplicity 4
    DECOperators d3 = build_dec(round_s3(3));
    SymEigs s = hodge_lowest(d3, 0, 5);
    for (int i = 1; i < 5; ++i) CHECK(std::abs(s.values(i) - 3) < 0.1);
}

TEST_CASE("Hodge solver") {
    DECOperators d = build_dec(round_s3(2));
    HodgeSolver hs(d, 0, -0.5);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(d.nV, -1, 1);
    Eigen::VectorXd y = hs.solve(x);
    Eigen::MatrixXd A = hodge_laplacian_dense(d, 0) + 0.5 * Eigen::MatrixXd(d.M0);
    CHECK((A * y - x).norm() < 1e-10 * x.norm());
}

TEST_CASE("TET7 round trip and errors") {
    TriMesh3 m = round_s3(1);
    std::stringstream ss;
    write_tet7(ss, m);
    TriMesh3 back = read_tet7(ss);
    REQUIRE(back.vertices.size() == m.vertices.size());
    REQUIRE(back.tets.size() == m.tets.size());
    for (size_t i = 0; i < m.vertices.size(); ++i) CHECK((back.vertices[i] - m.vertices[i]).norm() < 1e-15);
    CHECK(betti(build_dec(back)).b == std::array<int, 4>{1, 0, 0, 1});

    std::stringstream open("TET7\nv 0 0 0 0 0 0 0\nv 1 0 0 0 0 0 0\nv 0 1 0 0 0 0 0\nv 0 0 1 0 0 0 0\nt 0 1 2 3\n");
    CHECK_THROWS_AS(read_tet7(open), MeshError);
    std::stringstream junk("NOPE\n");
    CHECK_THROWS_AS(read_tet7(junk), MeshError);
    CHECK_THROWS(mesh_link("torus:2"));
    CHECK_THROWS(mesh_link("round:x"));
    CHECK_THROWS(mesh_link("file:/nonexistent/mesh.tet7"));
}

TEST_CASE("degenerate tetrahedra are rejected") {
    TriMesh3 m = round_s3(1);
    m.embed = nullptr;
    m.sphere.clear();
    int a = m.tets[0][0], b = m.tets[0][1];
    m.vertices[a] = m.vertices[b];
    CHECK_THROWS_AS(build_dec(m), MeshQualityError);
}
