#include <random>

#include "doctest.h"

#include "coassoc/moduli.hpp"

using namespace coassoc;

namespace {

TopologyInput mc_plus() {
    TopologyInput t;
    t.b_N = {1, 0, 1, 0};
    t.b_Sigma = {1, 0, 0, 1};
    t.ends_nonplanar = 1;
    t.components_nonplanar = 1;
    return t;
}

// Every Betti vector with entries up to 2 and a Poincare-dual link.
std::vector<TopologyInput> small_inputs() {
    std::vector<TopologyInput> out;
    for (int n0 = 1; n0 <= 2; ++n0)
        for (int n1 = 0; n1 <= 2; ++n1)
            for (int n2 = 0; n2 <= 2; ++n2)
                for (int n3 = 0; n3 <= 2; ++n3)
                    for (int s0 = 1; s0 <= 2; ++s0)
                        for (int s1 = 0; s1 <= 2; ++s1) {
                            TopologyInput t;
                            t.b_N = {n0, n1, n2, n3};
                            t.b_Sigma = {s0, s1, s1, s0};
                            t.b2_plus_N = n2 / 2;
                            t.ends_nonplanar = s0 - 1;
                            t.components_nonplanar = n0 - 1;
                            if (exact_sequence_check(t).feasible) out.push_back(t);
                        }
    return out;
}

bool ordered(const Bound& b) { return !(b.lo && b.hi) || *b.lo <= *b.hi; }

}  // namespace

TEST_CASE("exact sequence") {
    ExactSequenceResult r = exact_sequence_check(mc_plus());
    CHECK(r.feasible);
    CHECK(r.dim_im_p2 == 0);
    CHECK(r.violations.empty());

    TopologyInput none = mc_plus();
    none.b_N[0] = 0;
    none.components_nonplanar = 0;
    CHECK_FALSE(exact_sequence_check(none).feasible);

    // H^1(S^3) = 0 forces H^1(N) to come from H^1_cs(N), which is zero here
    TopologyInput bad = mc_plus();
    bad.b_N = {1, 3, 0, 0};
    ExactSequenceResult rb = exact_sequence_check(bad);
    CHECK_FALSE(rb.feasible);
    CHECK_FALSE(rb.violations.empty());

    auto all = small_inputs();
    REQUIRE(all.size() > 20);
    for (auto& t : all) {
        ExactSequenceResult e = exact_sequence_check(t);
        for (int x : e.rank_phi) CHECK(x >= 0);
        CHECK(e.dim_im_p2 >= 0);
        CHECK(e.dim_im_p2 <= t.b_Sigma[1]);
        if (t.b_Sigma[1] == 0) CHECK(e.dim_im_p2 == 0);
    }
}

TEST_CASE("input validation") {
    TopologyInput t = mc_plus();
    CHECK_NOTHROW(t.validate());
    t.ends_nonplanar = 2;
    CHECK_THROWS_AS(t.validate(), TopologyError);
    t = mc_plus();
    t.b2_plus_N = 2;
    CHECK_THROWS_AS(t.validate(), TopologyError);
    t = mc_plus();
    t.b_N[1] = -1;
    CHECK_THROWS_AS(t.validate(), TopologyError);

    WallTable w{{{-1.0, 1}, {-1.5, 1}}, "user", std::nullopt};
    CHECK_THROWS(w.validate());
    WallTable z{{{-1.0, 0}}, "user", std::nullopt};
    CHECK_THROWS(z.validate());
}

TEST_CASE("dimension of the moduli space of M_c+ at rate -3/2") {
    ModuliReport r = dim_moduli(mc_plus(), WallTable{}, -1.5);
    CHECK(r.regime == "minus-two-to-zero");
    CHECK(r.dimension == Bound::exact(0));
    CHECK(r.ledger.dim_Cplus == Bound::exact(0));
    CHECK(ledger_bounds_check(r, mc_plus()).empty());
    WallTable w{{{-1.9, 2}, {-1.2, 5}}, "DEC-level-3", std::nullopt};
    ModuliReport r2 = dim_moduli(mc_plus(), w, -1.5);
    CHECK(r2.dimension == Bound::exact(2));
    CHECK(r2.wall_sum == 2);
    CHECK(r2.provenance == "DEC-level-3");
}

TEST_CASE("b1(Sigma) = 0 on [-2, 0) gives b2+(N)") {
    TopologyInput t;
    t.b_N = {1, 0, 3, 0};
    t.b2_plus_N = 2;
    t.b_Sigma = {1, 0, 0, 1};
    REQUIRE(exact_sequence_check(t).feasible);
    for (double lam : {-2.0, -1.3, -0.1}) CHECK(dim_moduli(t, WallTable{}, lam).dimension == Bound::exact(2));
}

TEST_CASE("below -2 the expected dimension is bounded from below") {
    WallTable w{{{-2.5, 1}}, "user", std::nullopt};
    ModuliReport r = dim_moduli(mc_plus(), w, -3.0);
    CHECK(r.regime == "below-minus-two");
    // b2+ - b0(S) + b0(N) - b1(N) + b3(N) - sum d = 0 - 1 + 1 - 0 + 0 - 1
    CHECK(r.dimension.lo == -1);
    CHECK(r.ledger.index == Bound::exact(-1));
    CHECK(dim_moduli(mc_plus(), WallTable{}, -3.0).dimension.lo == 0);
}

TEST_CASE("rates on walls are rejected") {
    WallTable w{{{-1.8, 1}}, "user", std::nullopt};
    CHECK_THROWS_AS(dim_moduli(mc_plus(), w, -1.8), WallCollisionError);
    CHECK_THROWS_AS(dim_moduli(mc_plus(), w, 0.0), WallCollisionError);
    CHECK_THROWS_AS(index_ledger(mc_plus(), w, -1.0, -1.8), WallCollisionError);
    TopologyInput t = mc_plus();
    t.b_Sigma = {1, 1, 1, 1};
    t.b_N = {1, 1, 0, 0};
    if (exact_sequence_check(t).feasible) CHECK_THROWS_AS(dim_moduli(t, WallTable{}, -2.0), WallCollisionError);
}

TEST_CASE("index ledger") {
    WallTable z{{}, "user", 7};
    IndexLedger none = index_ledger(mc_plus(), z, -0.5, -1.5);
    CHECK(none.index_jump == 0);
    CHECK(none.crossings.empty());
    CHECK(none.kernel_start == none.kernel_end);
    CHECK(none.cokernel_start == none.cokernel_end);

    IndexLedger at0 = index_ledger(mc_plus(), z, 0.5, -1.0);
    REQUIRE(at0.crossings.size() == 1);
    CHECK(at0.index_jump == 8);
    CHECK(at0.crossings[0].d == 8);
    CHECK(at0.crossings[0].kernel_gain == Bound::exact(8));

    for (auto& t : small_inputs()) {
        WallTable w{{{-3.0, 2}, {-0.7, 1}, {0.3, 3}}, "user", 3 * t.b_Sigma[0] + 4 * t.ends_nonplanar};
        ExactSequenceResult e = exact_sequence_check(t);
        IndexLedger m2 = index_ledger(t, w, -1.5, -2.5);
        CHECK(m2.index_jump == t.b_Sigma[1]);
        if (t.b_Sigma[1] > 0) {
            REQUIRE(m2.crossings.size() == 1);
            CHECK(m2.crossings[0].kernel_gain == Bound::exact(e.dim_im_p2));
            CHECK(m2.crossings[0].cokernel_loss == Bound::exact(t.b_Sigma[1] - e.dim_im_p2));
        }
        IndexLedger z0 = index_ledger(t, w, 0.1, -0.1);
        REQUIRE(z0.crossings.size() == 1);
        CHECK(z0.index_jump == t.b_Sigma[0] + *w.dim_Z);
        CHECK(z0.crossings[0].cokernel_loss.lo == t.b_Sigma[0] - t.b_N[0]);
        for (auto& c : z0.crossings) {
            CHECK(ordered(c.kernel_gain));
            CHECK(ordered(c.cokernel_loss));
        }
        int whole = index_ledger(t, w, 0.9, -3.5).index_jump;
        for (double mid : {-3.2, -2.2, -1.0, -0.2, 0.5})
            CHECK(index_ledger(t, w, 0.9, mid).index_jump + index_ledger(t, w, mid, -3.5).index_jump == whole);
    }
}

TEST_CASE("obstructions vanish on [-2, 1) and bounds are ordered") {
    for (auto& t : small_inputs()) {
        WallTable w{{{-1.0, 1}}, "user", 3 * t.b_Sigma[0] + 4 * t.ends_nonplanar};
        const double start = t.b_Sigma[1] > 0 ? -1.999 : -2.0;  // -2 is a wall when b1(Sigma) > 0
        for (double lam : {start, -1.5, -0.5, 0.25, 0.99}) {
            ModuliReport r = dim_moduli(t, w, lam);
            CHECK(r.ledger.dim_O == Bound::exact(0));
            for (const Bound* b : {&r.dimension, &r.ledger.dim_K, &r.ledger.dim_Cplus, &r.ledger.dim_B})
                CHECK(ordered(*b));
            CHECK(ledger_bounds_check(r, t).empty());
        }
    }
}

TEST_CASE("ledger bounds check flags violations") {
    ModuliReport r = dim_moduli(mc_plus(), WallTable{}, -3.0);
    TopologyInput t = mc_plus();
    t.b_N = {1, 0, 2, 0};
    t.b2_plus_N = 1;
    ModuliReport low = dim_moduli(t, WallTable{}, -3.0);
    low.ledger.dim_K = Bound::exact(0);
    CHECK_FALSE(ledger_bounds_check(low, t).empty());
    r.ledger.dim_O = Bound::exact(-1);
    CHECK_FALSE(ledger_bounds_check(r, mc_plus()).empty());
}

TEST_CASE("JSON") {
    nlohmann::json j = mc_plus();
    TopologyInput back = j.get<TopologyInput>();
    CHECK(back.b_N == mc_plus().b_N);
    CHECK(back.b_Sigma == mc_plus().b_Sigma);
    CHECK(back.ends_nonplanar == 1);

    WallTable w{{{-1.5, 2}, {0.25, 1}}, "DEC-level-4", 7};
    WallTable wb = nlohmann::json(w).get<WallTable>();
    REQUIRE(wb.walls.size() == 2);
    CHECK(wb.walls[1].mu == 0.25);
    CHECK(wb.dim_Z == 7);
    CHECK(wb.provenance == "DEC-level-4");

    CHECK(nlohmann::json(Bound::exact(3)) == 3);
    nlohmann::json range = Bound{2, 5};
    CHECK(range["lower"] == 2);
    CHECK(range["upper"] == 5);

    nlohmann::json rep = dim_moduli(mc_plus(), WallTable{}, -1.5);
    CHECK(rep["dimension"] == 0);
    CHECK(rep["regime"] == "minus-two-to-zero");
    CHECK(format_report(dim_moduli(mc_plus(), WallTable{}, -1.5)).find("dimension") != std::string::npos);
}
