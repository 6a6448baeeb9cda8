#include "coassoc/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coassoc {

namespace {

constexpr double kWallTol = 1e-9;

Bound add(const Bound& a, const Bound& b) {
    Bound r;
    if (a.lo && b.lo) r.lo = *a.lo + *b.lo;
    if (a.hi && b.hi) r.hi = *a.hi + *b.hi;
    return r;
}

Bound sub(const Bound& a, const Bound& b) {
    Bound r;
    if (a.lo && b.hi) r.lo = *a.lo - *b.hi;
    if (a.hi && b.lo) r.hi = *a.hi - *b.lo;
    return r;
}

Bound intersect(const Bound& a, const Bound& b) {
    Bound r = a;
    if (b.lo) r.lo = r.lo ? std::max(*r.lo, *b.lo) : *b.lo;
    if (b.hi) r.hi = r.hi ? std::min(*r.hi, *b.hi) : *b.hi;
    return r;
}

Bound at_least(int v) { return {v, std::nullopt}; }

std::string show(const Bound& b) {
    if (b.is_exact()) return std::to_string(*b.lo);
    return "[" + (b.lo ? std::to_string(*b.lo) : std::string("?")) + ", " +
           (b.hi ? std::to_string(*b.hi) : std::string("?")) + "]";
}

void check_off_walls(const std::vector<WallEntry>& eff, double lambda) {
    for (auto& w : eff)
        if (std::abs(w.mu - lambda) <= kWallTol) {
            std::ostringstream os;
            os << "rate " << lambda << " lies on the wall mu = " << w.mu << "; choose a rate off the wall set";
            throw WallCollisionError(os.str());
        }
}

// Sum of d(mu) for walls strictly inside (lo, hi).
int wall_sum(const std::vector<WallEntry>& eff, double lo, double hi) {
    int s = 0;
    for (auto& w : eff) {
        if (w.mu > lo + kWallTol && w.mu < hi - kWallTol) {
            if (w.d < 0) throw std::invalid_argument("the wall at 0 needs dim Z (supply dim_Z or a wall entry at 0)");
            s += w.d;
        }
    }
    return s;
}

int required_d0(const std::vector<WallEntry>& eff) {
    for (auto& w : eff)
        if (std::abs(w.mu) <= kWallTol) {
            if (w.d < 0) throw std::invalid_argument("rates above 0 need dim Z (supply dim_Z or a wall entry at 0)");
            return w.d;
        }
    throw std::logic_error("effective wall list has no entry at 0");
}

}  // namespace

void TopologyInput::validate() const {
    for (int v : b_N)
        if (v < 0) throw TopologyError("Betti numbers of N must be nonnegative");
    for (int v : b_Sigma)
        if (v < 0) throw TopologyError("Betti numbers of Sigma must be nonnegative");
    if (b2_plus_N < 0 || b2_plus_N > b_N[2]) throw TopologyError("b2+(N) must lie in [0, b2(N)]");
    if (ends_nonplanar < 0 || ends_nonplanar > b_Sigma[0]) throw TopologyError("k' must lie in [0, b0(Sigma)]");
    if (components_nonplanar < 0 || components_nonplanar > b_N[0]) throw TopologyError("k must lie in [0, b0(N)]");
}

ExactSequenceResult exact_sequence_check(const TopologyInput& top) {
    top.validate();
    ExactSequenceResult r;
    const auto& bN = top.b_N;
    const auto& bS = top.b_Sigma;
    auto cs = [&](int m) { return m >= 1 && m <= 4 ? bN[4 - m] : 0; };
    auto need = [&](bool ok, const std::string& what) {
        if (!ok) r.violations.push_back(what);
    };
    need(bN[0] >= 1, "b0(N) = 0: N has no components");
    need(bS[0] == bS[3] && bS[1] == bS[2], "Betti numbers of Sigma violate Poincare duality");
    // chase ranks: phi_m then p_m then boundary_m
    int prev_boundary = 0;  // rank of boundary_{m-1} into H^m_cs
    for (int m = 0; m <= 3; ++m) {
        int phi = cs(m) - prev_boundary;
        int p = bN[m] - phi;
        int bd = bS[m] - p;
        r.rank_phi[m] = phi;
        r.rank_p[m] = p;
        r.rank_boundary[m] = bd;
        need(phi >= 0 && phi <= std::min(cs(m), bN[m]), "rank of phi_" + std::to_string(m) + " out of range");
        need(p >= 0 && p <= std::min(bN[m], bS[m]), "rank of p_" + std::to_string(m) + " out of range");
        need(bd >= 0 && bd <= std::min(bS[m], cs(m + 1)), "rank of boundary_" + std::to_string(m) + " out of range");
        prev_boundary = bd;
    }
    // H^4_cs(N) -> H^4(N) = 0 must vanish
    r.rank_phi[4] = cs(4) - prev_boundary;
    need(r.rank_phi[4] == 0, "H^4_cs(N) is not exhausted by the boundary map");
    r.dim_im_p2 = r.rank_p[2];
    r.dim_im_p1 = r.rank_p[1];
    r.feasible = r.violations.empty();
    return r;
}

void WallTable::validate() const {
    for (size_t i = 0; i < walls.size(); ++i) {
        if (walls[i].d < 1) throw std::invalid_argument("wall multiplicities must be at least 1");
        if (i > 0 && !(walls[i].mu > walls[i - 1].mu)) throw std::invalid_argument("walls must be strictly increasing in mu");
    }
    if (dim_Z && *dim_Z < 0) throw std::invalid_argument("dim Z must be nonnegative");
}

std::vector<WallEntry> effective_walls(const TopologyInput& top, const WallTable& table) {
    table.validate();
    std::vector<WallEntry> eff;
    bool has_m2 = false, has_0 = false;
    for (auto& w : table.walls) {
        if (std::abs(w.mu + 2) <= kWallTol) {
            has_m2 = true;
            if (w.d != top.b_Sigma[1])
                throw std::invalid_argument("recorded d(-2) = " + std::to_string(w.d) + " differs from b1(Sigma) = " +
                                            std::to_string(top.b_Sigma[1]));
        }
        if (std::abs(w.mu) <= kWallTol) {
            has_0 = true;
            if (w.d < top.b_Sigma[0]) throw std::invalid_argument("recorded d(0) is below b0(Sigma)");
            if (table.dim_Z && w.d != top.b_Sigma[0] + *table.dim_Z)
                throw std::invalid_argument("recorded d(0) disagrees with b0(Sigma) + dim Z");
        }
        eff.push_back(w);
    }
    if (!has_m2 && top.b_Sigma[1] > 0) eff.push_back({-2.0, top.b_Sigma[1]});
    if (!has_0) eff.push_back({0.0, table.dim_Z ? top.b_Sigma[0] + *table.dim_Z : -1});
    std::sort(eff.begin(), eff.end(), [](auto& a, auto& b) { return a.mu < b.mu; });
    return eff;
}

ModuliReport dim_moduli(const TopologyInput& top, const WallTable& walls, double lambda, std::optional<int> dim_B) {
    ExactSequenceResult es = exact_sequence_check(top);
    if (!es.feasible) {
        std::string msg = "infeasible topology:";
        for (auto& v : es.violations) msg += " " + v + ";";
        throw TopologyError(msg);
    }
    if (!(lambda < 1)) throw std::invalid_argument("dim_moduli needs lambda < 1");
    auto eff = effective_walls(top, walls);
    check_off_walls(eff, lambda);

    const auto& bN = top.b_N;
    const auto& bS = top.b_Sigma;
    const int b2p = top.b2_plus_N;
    ModuliReport r;
    r.lambda = lambda;
    r.provenance = walls.provenance;
    Ledger& L = r.ledger;

    if (lambda < -2) {
        r.regime = "below-minus-two";
        const int S = wall_sum(eff, lambda, -2);
        r.wall_sum = S;
        const int index = b2p - bS[0] + bN[0] - bN[1] - S;
        L.index = Bound::exact(index);
        L.dim_B = Bound::exact(0);
        if (S == 0) {
            L.dim_K = Bound::exact(b2p);
            L.dim_Cplus = Bound::exact(bS[0] - bN[0] + bN[1]);
        } else {
            L.dim_K = {std::max(0, b2p - S), b2p};
            L.dim_Cplus = sub(L.dim_K, L.index);
            L.dim_Cplus.lo = std::max(0, *L.dim_Cplus.lo);
            r.notes.push_back("kernel/cokernel split across walls below -2 is not determined; reported as an interval");
        }
        L.dim_C = intersect(at_least(bN[3]), {std::nullopt, L.dim_Cplus.hi});
        L.dim_O = sub(L.dim_Cplus, L.dim_C);
        L.dim_O.lo = std::max(0, L.dim_O.lo.value_or(0));
        r.dimension = at_least(index + bN[3]);
        r.notes.push_back("dimension is a lower bound on the expected dimension");
    } else if (lambda < 0) {
        r.regime = "minus-two-to-zero";
        const int S = wall_sum(eff, -2, lambda);
        r.wall_sum = S;
        const int K = b2p + es.dim_im_p2 + S;
        L.dim_K = Bound::exact(K);
        L.dim_Cplus = Bound::exact(bN[3]);
        L.dim_C = Bound::exact(bN[3]);
        L.dim_O = Bound::exact(0);
        L.dim_B = Bound::exact(0);
        L.index = Bound::exact(K - bN[3]);
        r.dimension = Bound::exact(K);
    } else {
        r.regime = "zero-to-one";
        const int K0 = b2p + es.dim_im_p2 + wall_sum(eff, -2, 0);
        const int d0 = required_d0(eff);
        const int dimZ = d0 - bS[0];
        const int S = wall_sum(eff, 0, lambda);
        r.wall_sum = S;
        const int index = K0 - bN[3] + d0 + S;
        L.index = Bound::exact(index);
        L.dim_B = dim_B ? Bound::exact(*dim_B) : Bound{0, bN[0]};
        if (!dim_B) r.notes.push_back("dim B not supplied; bounded by [0, b0(N)]");
        const int k_hi = K0 + bN[0] + dimZ + S;
        const int k_lo = K0 + bS[0] + 3 * bN[0] + 4 * top.components_nonplanar - bN[3] + S;
        L.dim_K = {std::max(0, k_lo), k_hi};
        L.dim_Cplus = sub(L.dim_K, L.index);
        L.dim_Cplus.lo = std::max(0, *L.dim_Cplus.lo);
        L.dim_C = L.dim_Cplus;
        L.dim_O = Bound::exact(0);
        r.dimension = sub(L.dim_K, L.dim_B);
        r.dimension.lo = std::max(0, *r.dimension.lo);
    }
    return r;
}

IndexLedger index_ledger(const TopologyInput& top, const WallTable& walls, double lambda1, double lambda2) {
    if (!(lambda2 <= lambda1)) throw std::invalid_argument("index_ledger needs lambda2 <= lambda1");
    if (!(lambda1 < 1)) throw std::invalid_argument("index_ledger needs lambda1 < 1");
    ExactSequenceResult es = exact_sequence_check(top);
    if (!es.feasible) throw TopologyError("infeasible topology");
    auto eff = effective_walls(top, walls);
    check_off_walls(eff, lambda1);
    check_off_walls(eff, lambda2);

    const auto& bN = top.b_N;
    const auto& bS = top.b_Sigma;
    IndexLedger out;
    out.index_jump = wall_sum(eff, lambda2, lambda1);
    ModuliReport start = dim_moduli(top, walls, lambda2);
    out.kernel_start = start.ledger.dim_K;
    out.cokernel_start = start.ledger.dim_Cplus;
    Bound K = out.kernel_start, C = out.cokernel_start;
    for (auto& w : eff) {
        if (!(w.mu > lambda2 + kWallTol && w.mu < lambda1 - kWallTol)) continue;
        Crossing x{w.mu, w.d, {}, {}};
        if (std::abs(w.mu + 2) <= kWallTol) {
            x.kernel_gain = Bound::exact(es.dim_im_p2);
        } else if (std::abs(w.mu) <= kWallTol) {
            // translations add at least 4 b0(N) + 4k; constants on ends without
            // a component leave the cokernel
            int lo = std::max(4 * bN[0] + 4 * top.components_nonplanar, w.d - bN[3]);
            int hi = w.d - (bS[0] - bN[0]);
            x.kernel_gain = {lo, hi};
        } else if (w.mu > -2 && w.mu < 0) {
            x.kernel_gain = Bound::exact(w.d);
        } else {
            x.kernel_gain = {0, w.d};
        }
        x.cokernel_loss = sub(Bound::exact(w.d), x.kernel_gain);
        K = add(K, x.kernel_gain);
        C = sub(C, x.cokernel_loss);
        out.crossings.push_back(x);
    }
    ModuliReport end = dim_moduli(top, walls, lambda1);
    out.kernel_end = intersect(K, end.ledger.dim_K);
    out.cokernel_end = intersect(C, end.ledger.dim_Cplus);
    return out;
}

std::vector<std::string> ledger_bounds_check(const ModuliReport& r, const TopologyInput& top) {
    std::vector<std::string> v;
    const Ledger& L = r.ledger;
    auto range_ok = [&](const Bound& b, const char* name) {
        if (b.lo && b.hi && *b.lo > *b.hi) v.push_back(std::string(name) + " has empty range");
        if (b.hi && *b.hi < 0) v.push_back(std::string(name) + " is negative");
    };
    range_ok(L.dim_K, "dim_K");
    range_ok(L.dim_Cplus, "dim_Cplus");
    range_ok(L.dim_C, "dim_C");
    range_ok(L.dim_O, "dim_O");
    range_ok(L.dim_B, "dim_B");
    if (L.dim_O.lo && *L.dim_O.lo < 0) v.push_back("dim_O < 0");
    if (L.dim_Cplus.is_exact() && L.dim_C.is_exact() && L.dim_O.is_exact() &&
        *L.dim_O.lo != *L.dim_Cplus.lo - *L.dim_C.lo)
        v.push_back("dim_O != dim_Cplus - dim_C");
    if (L.dim_K.is_exact() && L.dim_Cplus.is_exact() && L.index.is_exact() &&
        *L.index.lo != *L.dim_K.lo - *L.dim_Cplus.lo)
        v.push_back("index != dim_K - dim_Cplus");
    const int b2p = top.b2_plus_N, b3 = top.b_N[3];
    if (r.regime == "below-minus-two") {
        if (L.dim_K.lo && *L.dim_K.lo > b2p) v.push_back("dim_K exceeds b2+(N) below -2");
        if (r.wall_sum == 0 && !(L.dim_K == Bound::exact(b2p)))
            v.push_back("dim_K must equal b2+(N) between the last wall below -2 and -2");
    } else {
        if (L.dim_K.hi && *L.dim_K.hi < b2p) v.push_back("dim_K below b2+(N) at rate >= -2");
        if (!(L.dim_O == Bound::exact(0))) v.push_back("obstruction space must vanish for rates in [-2, 1)");
    }
    if (r.regime == "minus-two-to-zero") {
        if (!(L.dim_Cplus == Bound::exact(b3))) v.push_back("dim_Cplus must equal b3(N) in [-2, 0)");
        if (!(L.dim_C == Bound::exact(b3))) v.push_back("dim_C must equal b3(N) in [-2, 0)");
    }
    return v;
}

void to_json(nlohmann::json& j, const TopologyInput& t) {
    j = {{"b_N", t.b_N},
         {"b2_plus_N", t.b2_plus_N},
         {"b_Sigma", t.b_Sigma},
         {"ends_nonplanar", t.ends_nonplanar},
         {"components_nonplanar", t.components_nonplanar}};
}

void from_json(const nlohmann::json& j, TopologyInput& t) {
    j.at("b_N").get_to(t.b_N);
    j.at("b2_plus_N").get_to(t.b2_plus_N);
    j.at("b_Sigma").get_to(t.b_Sigma);
    t.ends_nonplanar = j.value("ends_nonplanar", 0);
    t.components_nonplanar = j.value("components_nonplanar", 0);
}

void to_json(nlohmann::json& j, const WallTable& w) {
    j = {{"provenance", w.provenance}, {"walls", nlohmann::json::array()}};
    for (auto& e : w.walls) j["walls"].push_back({{"mu", e.mu}, {"d", e.d}});
    if (w.dim_Z) j["dim_Z"] = *w.dim_Z;
}

void from_json(const nlohmann::json& j, WallTable& w) {
    w.walls.clear();
    w.provenance = j.value("provenance", std::string("user"));
    for (auto& e : j.value("walls", nlohmann::json::array())) w.walls.push_back({e.at("mu").get<double>(), e.at("d").get<int>()});
    if (j.contains("dim_Z") && !j["dim_Z"].is_null()) w.dim_Z = j["dim_Z"].get<int>();
    else w.dim_Z.reset();
}

void to_json(nlohmann::json& j, const Bound& b) {
    if (b.is_exact()) {
        j = *b.lo;
        return;
    }
    j = {{"lower", b.lo ? nlohmann::json(*b.lo) : nlohmann::json(nullptr)},
         {"upper", b.hi ? nlohmann::json(*b.hi) : nlohmann::json(nullptr)}};
}

void to_json(nlohmann::json& j, const ModuliReport& r) {
    const Ledger& L = r.ledger;
    j = {{"lambda", r.lambda},
         {"regime", r.regime},
         {"dimension", r.dimension},
         {"ledger",
          {{"dim_K", L.dim_K},
           {"dim_Cplus", L.dim_Cplus},
           {"dim_C", L.dim_C},
           {"dim_O", L.dim_O},
           {"dim_B", L.dim_B},
           {"index", L.index}}},
         {"wall_sum", r.wall_sum},
         {"provenance", r.provenance},
         {"notes", r.notes}};
}

void to_json(nlohmann::json& j, const IndexLedger& l) {
    j = {{"index_jump", l.index_jump},
         {"kernel_start", l.kernel_start},
         {"cokernel_start", l.cokernel_start},
         {"kernel_end", l.kernel_end},
         {"cokernel_end", l.cokernel_end},
         {"crossings", nlohmann::json::array()}};
    for (auto& c : l.crossings)
        j["crossings"].push_back(
            {{"mu", c.mu}, {"d", c.d}, {"kernel_gain", c.kernel_gain}, {"cokernel_loss", c.cokernel_loss}});
}

std::string format_report(const ModuliReport& r) {
    std::ostringstream os;
    os << "lambda      " << r.lambda << "  (" << r.regime << ")\n";
    os << "dimension   " << show(r.dimension) << "\n";
    os << "dim_K       " << show(r.ledger.dim_K) << "\n";
    os << "dim_Cplus   " << show(r.ledger.dim_Cplus) << "\n";
    os << "dim_C       " << show(r.ledger.dim_C) << "\n";
    os << "dim_O       " << show(r.ledger.dim_O) << "\n";
    os << "dim_B       " << show(r.ledger.dim_B) << "\n";
    os << "index       " << show(r.ledger.index) << "\n";
    os << "wall sum    " << r.wall_sum << "\n";
    os << "provenance  " << r.provenance << "\n";
    for (auto& n : r.notes) os << "note: " << n << "\n";
    return os.str();
}

}  // namespace coassoc
