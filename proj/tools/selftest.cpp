#include "selftest.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "coassoc/asymptotics.hpp"
#include "coassoc/deform.hpp"
#include "coassoc/forms7.hpp"
#include "coassoc/linkspec.hpp"
#include "coassoc/moduli.hpp"

namespace coassoc::selftest {

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << "FAILED " << what << "; ";
        }
    }
    template <class T>
    void note(const std::string& key, const T& v) {
        detail << key << "=" << v << " ";
    }
};

bool same_monomials(const Form& f, const std::map<std::string, double>& table) {
    if (f.coeffs().size() != table.size()) return false;
    for (auto& [key, c] : table) {
        Index idx;
        for (char ch : key) idx.push_back(ch - '0');
        if (std::abs(f.get(idx) - c) > 1e-14) return false;
    }
    return true;
}

void g2_algebra(Check& c) {
    auto [p, sp] = g2_constants();
    c.require(same_monomials(p, {{"123", 1}, {"145", 1}, {"167", 1}, {"246", 1}, {"257", -1}, {"347", -1}, {"356", -1}}),
              "phi monomials");
    c.require(same_monomials(sp, {{"4567", 1}, {"2367", 1}, {"2345", 1}, {"1357", 1}, {"1346", -1}, {"1256", -1}, {"1247", -1}}),
              "*phi monomials");
    double star = (hodge_star_euclidean(p) - sp).max_abs();
    double vol = (wedge(p, sp) - 7.0 * Form::volume(7)).max_abs();
    c.note("hodge_err", star);
    c.note("wedge_err", vol);
    c.require(star <= 1e-14, "hodge(phi) = *phi");
    c.require(vol <= 1e-14, "phi ^ *phi = 7 vol");
}

void coassociativity(Check& c, unsigned seed) {
    double worst = 0, min_sp = INFINITY;
    for (const char* br : {"plus", "minus"})
        for (const char* cv : {"0.5", "1", "2"}) {
            Chart ch = chart_from_spec(std::string("mc:") + br + ":c=" + cv);
            c.require(ch.has_partials(), std::string("analytic partials for ") + ch.label);
            auto r = coassoc_residual(ch, sample_domain(ch.domain, 1000, seed % 4096));
            worst = std::max(worst, r.max_phi_residual);
            min_sp = std::min(min_sp, r.min_starphi);
        }
    c.note("max_phi_residual", worst);
    c.note("min_starphi", min_sp);
    c.require(worst <= 1e-8, "phi residual <= 1e-8");
    c.require(min_sp > 0, "*phi positive");
}

void rates(Check& c) {
    auto link = link_angles(16);
    Chart plus = chart_from_spec("mc:plus:c=1"), cone = chart_from_spec("cone:plus");
    RateFit fp = fit_rate(cone_match(plus, cone, log_spaced(10, 1e4, 10), link));
    Chart minus = chart_from_spec("mc:minus:c=1"), plane = chart_from_spec("cone:plane");
    RateFit fm = fit_rate(cone_match(minus, plane, log_spaced(10, 1e3, 10), link));
    c.note("lambda_plus", fp.lambda_hat);
    c.note("lambda_minus", fm.lambda_hat);
    c.require(std::abs(fp.lambda_hat + 1.5) <= 0.05, "plus rate -1.50 +- 0.05");
    c.require(std::abs(fm.lambda_hat + 4.0) <= 0.1, "minus rate -4.0 +- 0.1");
}

void linearization(Check& c, unsigned seed) {
    Chart mc = chart_from_spec("mc:plus:c=1");
    Box box{Vec4(1.0, 0.3, -2, -2), Vec4(3.0, 1.2, 2, 2)};
    auto smp = sample_domain(box, 24, seed % 4096);
    double worst_slope = 0, worst_first = 0;
    for (int trial = 0; trial < 5; ++trial) {
        SelfDualField a = random_self_dual_field(mc, seed + trial);
        LinCheck lc = lincheck(mc, a, {0.05, 0.03, 0.02, 0.01, 0.005, 0.002}, smp);
        worst_slope = std::max(worst_slope, std::abs(lc.slope - 2.0));
        const double t = 1e-3;
        DeformationResult F = eval_F(mc, a.scaled(t), smp);
        double num = 0, den = 0;
        for (size_t i = 0; i < smp.size(); ++i) {
            FrameData fr = frame_at(mc, smp[i]);
            Form da = d_alpha(a, smp[i]);
            num = std::max(num, frame_norm(fr, F.F_samples[i].value * (1.0 / t) - da));
            den = std::max(den, frame_norm(fr, da));
        }
        worst_first = std::max(worst_first, num / den);
    }
    c.note("max|slope-2|", worst_slope);
    c.note("first_order_rel", worst_first);
    c.require(worst_slope <= 0.1, "slope 2.0 +- 0.1");
    c.require(worst_first <= 0.05, "dF(0) = d within 5% at t = 1e-3");
}

void invariants(Check& c, unsigned seed) {
    Box box{Vec4(1.0, 0.3, -2, -2), Vec4(3.0, 1.2, 2, 2)};
    auto smp = sample_domain(box, 24, seed % 4096);
    double closed = 0;
    for (const char* spec : {"mc:plus:c=1", "mc:minus:c=1"}) {
        Chart mc = chart_from_spec(spec);
        auto s = sample_domain(Box{Vec4(mc.domain.lo(0) + 0.5, 0.3, -2, -2), Vec4(mc.domain.lo(0) + 2.5, 1.2, 2, 2)}, 24,
                               seed % 4096);
        closed = std::max(closed, alpha_u_closedness(alpha_u(mc), s));
    }
    double zero = 0;
    for (const char* spec : {"cone:plus", "cone:minus", "plane"}) {
        Chart ch = chart_from_spec(spec);
        SelfDualField au = alpha_u(ch);
        for (auto& u : sample_domain(ch.domain, 64, seed % 4096)) zero = std::max(zero, au(u).norm());
    }
    const double s0 = std::pow(1.0 / 16, 0.2);
    Cycle2 gamma = sphere_cycle(Vec7::Zero(), s0);
    YPair y1 = invariant_Y_pair(gamma, cone_disk(gamma, Vec7::Zero()));
    Vec7 apex = Vec7::Zero();
    apex(0) = 0.1;
    apex(4) = 0.7;
    YPair y2 = invariant_Y_pair(gamma, cone_disk(gamma, apex));
    double stokes = y1.stokes_defect / std::abs(y1.int_gamma_alpha_u);
    double indep = std::abs(y1.int_D_phi - y2.int_D_phi) / std::abs(y1.int_D_phi);
    c.note("d_alpha_u", closed);
    c.note("alpha_u_on_cones", zero);
    c.note("stokes_rel", stokes);
    c.note("disk_indep_rel", indep);
    c.require(closed <= 1e-6, "d alpha_u <= 1e-6");
    c.require(zero <= 1e-10, "alpha_u = 0 on cones and planes");
    c.require(stokes <= 1e-4, "Stokes defect <= 1e-4");
    c.require(indep <= 1e-6, "disk independence <= 1e-6");
}

double exact_zero(const SpMat& m) {
    double worst = 0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    return worst;
}

void dec_structure(Check& c) {
    for (const char* kind : {"round", "squashed"}) {
        DECOperators dec = build_dec(mesh_link(std::string(kind) + ":2"));
        c.require(exact_zero(dec.d1 * dec.d0) == 0 && exact_zero(dec.d2 * dec.d1) == 0, std::string("d o d = 0 on ") + kind);
        double min_eig = INFINITY;
        for (int q = 0; q <= 3; ++q) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(dec.mass(q))};
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        }
        c.require(min_eig > 0, std::string("masses SPD on ") + kind);
        BettiResult b = betti(dec);
        c.note(std::string("betti_") + kind,
               std::to_string(b.b[0]) + std::to_string(b.b[1]) + std::to_string(b.b[2]) + std::to_string(b.b[3]));
        c.require(b.b == std::array<int, 4>{1, 0, 0, 1}, std::string("betti (1,0,0,1) on ") + kind);
    }
    DECOperators d3 = build_dec(round_s3(3));
    for (int q = 0; q <= 3; ++q) {
        Eigen::SimplicialLLT<SpMat> llt(d3.mass(q));
        c.require(llt.info() == Eigen::Success, "level-3 mass " + std::to_string(q) + " SPD");
    }
    double rel = std::abs(d3.volume / (2 * M_PI * M_PI) - 1);
    c.note("volume_rel_err", rel);
    c.require(rel <= 0.02, "S^3 volume within 2%");
}

void wall_set(Check& c, bool quick) {
    const WallOptions opt;
    std::vector<int> levels = quick ? std::vector<int>{3} : std::vector<int>{3, 4};
    for (auto [kind, extra] : {std::pair{"round", 3}, std::pair{"squashed", 7}}) {
        std::vector<int> d0s;
        for (int level : levels) {
            DECOperators dec = build_dec(mesh_link(std::string(kind) + ":" + std::to_string(level)));
            WallScan scan = find_walls(dec, -2.5, 0.5, opt);
            const std::string tag = std::string(kind) + "@" + std::to_string(level);
            int d0 = 0;
            double worst_beta = 0;
            bool beta_inside = false;
            for (auto& w : scan.walls) {
                bool has_constant = false;
                for (auto& p : w.basis) {
                    has_constant |= p.kind == "constant";
                    if (p.beta_density.size() && p.beta_density.norm() > 0)
                        worst_beta = std::max(worst_beta, laplace_residual(dec, p.beta_density, p.mu * (p.mu + 2)));
                    if (p.mu > -2 && p.mu < 0 && p.beta.norm() != 0) beta_inside = true;
                }
                if (has_constant) {
                    d0 = w.multiplicity;
                    c.require(!w.inconclusive, "wall at 0 conclusive on " + tag);
                }
                c.require(std::abs(w.mu + 2) > opt.cluster_window, "no wall at -2 on " + tag);
            }
            double s2 = wall_residual(scan.spectrum, -2.0, opt).sigma_min;
            c.note("d0_" + tag, d0);
            c.note("sigma(-2)_" + tag, s2);
            c.note("beta_res_" + tag, worst_beta);
            c.require(d0 >= scan.spectrum.b0 + extra, "d(0) >= b0 + " + std::to_string(extra) + " on " + tag);
            c.require(s2 > opt.cluster_window, "sigma_min(-2) away from 0 on " + tag);
            c.require(worst_beta <= 10 * opt.solver_tol, "Delta beta = mu(mu+2) beta on " + tag);
            c.require(!beta_inside, "beta = 0 for walls in (-2, 0) on " + tag);
            d0s.push_back(d0);
        }
        if (d0s.size() > 1) c.require(d0s.front() == d0s.back(), std::string("d(0) stable across levels on ") + kind);
    }
}

TopologyInput random_topology(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> B(0, 3);
    while (true) {
        TopologyInput t;
        t.b_N = {1 + B(rng) % 2, B(rng), B(rng), B(rng)};
        int s0 = 1 + B(rng) % 3, s1 = B(rng);
        t.b_Sigma = {s0, s1, s1, s0};
        t.b2_plus_N = std::uniform_int_distribution<int>(0, t.b_N[2])(rng);
        t.ends_nonplanar = std::uniform_int_distribution<int>(0, s0)(rng);
        t.components_nonplanar = std::uniform_int_distribution<int>(0, t.b_N[0])(rng);
        if (exact_sequence_check(t).feasible) return t;
    }
}

void moduli_arithmetic(Check& c, unsigned seed) {
    TopologyInput mc;
    mc.b_N = {1, 0, 1, 0};
    mc.b_Sigma = {1, 0, 0, 1};
    mc.ends_nonplanar = 1;
    mc.components_nonplanar = 1;
    WallTable empty;
    ModuliReport r0 = dim_moduli(mc, empty, -1.5);
    c.require(r0.dimension == Bound::exact(0), "M_c+ at -3/2 with no walls has dimension 0");
    WallTable some{{{-1.8, 2}, {-1.6, 1}}, "user", std::nullopt};
    c.require(dim_moduli(mc, some, -1.5).dimension == Bound::exact(3), "M_c+ at -3/2 adds the recorded wall sum");
    c.require(ledger_bounds_check(r0, mc).empty(), "M_c+ ledger has no violations");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> L(-3.9, 0.95);
    int identity = 0, b1zero = 0, telescoped = 0, obstruction = 0, cases = 0;
    for (int i = 0; i < 100; ++i) {
        TopologyInput t = random_topology(rng);
        ExactSequenceResult es = exact_sequence_check(t);
        if (t.b_Sigma[1] == 0 && es.dim_im_p2 == 0) ++b1zero;
        if (t.b_Sigma[1] == 0) ++cases;
        WallTable w{{{-3.1, 1}, {-1.3, 2}, {0.4, 1}}, "user", 3 * t.b_Sigma[0] + 4 * t.ends_nonplanar + 1};
        // kernel gain + cokernel loss at -2
        IndexLedger cross = index_ledger(t, w, -1.5, -2.5);
        ModuliReport below = dim_moduli(t, w, -2.5), above = dim_moduli(t, w, -1.5);
        bool ok = cross.index_jump == t.b_Sigma[1];
        if (t.b_Sigma[1] > 0) {
            ok = ok && cross.crossings.size() == 1 && cross.crossings[0].kernel_gain == Bound::exact(es.dim_im_p2) &&
                 cross.crossings[0].cokernel_loss == Bound::exact(t.b_Sigma[1] - es.dim_im_p2);
        }
        ok = ok && *above.ledger.dim_K.lo - *below.ledger.dim_K.lo == es.dim_im_p2 &&
             *below.ledger.dim_Cplus.lo - *above.ledger.dim_Cplus.lo == t.b_Sigma[1] - es.dim_im_p2;
        identity += ok;
        // telescoping through a random intermediate rate
        double l1 = 0.9, l3 = -3.9, l2 = L(rng);
        try {
            int whole = index_ledger(t, w, l1, l3).index_jump;
            int parts = index_ledger(t, w, l1, l2).index_jump + index_ledger(t, w, l2, l3).index_jump;
            telescoped += whole == parts;
        } catch (const WallCollisionError&) {
            ++telescoped;  // intermediate landed on a wall; nothing to compare
        }
        // obstruction vanishing on [-2, 1)
        bool zero_O = true;
        for (double lam : {-2.0 + 1e-3, -1.0, -0.2, 0.2, 0.7}) {
            ModuliReport r = dim_moduli(t, w, lam);
            zero_O = zero_O && r.ledger.dim_O == Bound::exact(0);
        }
        obstruction += zero_O;
    }
    c.note("bookkeeping", std::to_string(identity) + "/100");
    c.note("b1_zero", std::to_string(b1zero) + "/" + std::to_string(cases));
    c.note("telescoping", std::to_string(telescoped) + "/100");
    c.note("dim_O_zero", std::to_string(obstruction) + "/100");
    c.require(identity == 100, "-2 crossing bookkeeping");
    c.require(b1zero == cases, "b1(Sigma) = 0 correction vanishes");
    c.require(telescoped == 100, "index ledger telescopes");
    c.require(obstruction == 100, "dim_O = 0 on [-2, 1)");
}

void symmetry(Check& c, unsigned seed) {
    auto group = random_quaternions(20, seed);
    double worst = 0;
    for (const char* spec : {"mc:plus:c=1", "mc:minus:c=1"}) {
        Chart ch = chart_from_spec(spec);
        Box box = ch.domain;
        box.hi(0) = std::min(box.hi(0), box.lo(0) + 10);
        worst = std::max(worst, symmetry_residual(ch, group, sample_domain(box, 8, seed % 4096)));
    }
    c.note("symmetry_residual", worst);
    c.require(worst <= 1e-8, "symmetry residual <= 1e-8");
}

}  // namespace

std::string format_line(const Result& r) {
    std::ostringstream os;
    os << "criterion " << r.id << " " << (r.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(34) << r.name
       << std::right << std::fixed << std::setprecision(2) << std::setw(8) << r.seconds << " s / " << std::setprecision(0)
       << r.budget << " s  " << r.detail;
    return os.str();
}

std::vector<Result> run(const Options& opt, std::ostream& log) {
    struct Entry {
        int id;
        const char* name;
        double budget;
        std::function<void(Check&)> body;
    };
    const unsigned seed = opt.seed;
    std::vector<Entry> entries = {
        {1, "G2 algebra exactness", 1, [](Check& c) { g2_algebra(c); }},
        {2, "coassociativity of M_c", 30, [=](Check& c) { coassociativity(c, seed); }},
        {3, "asymptotic rates", 60, [](Check& c) { rates(c); }},
        {4, "linearization and remainder", 120, [=](Check& c) { linearization(c, seed); }},
        {5, "dilation invariants", 60, [=](Check& c) { invariants(c, seed); }},
        {6, "DEC structure", 120, [](Check& c) { dec_structure(c); }},
        {7, "wall set", 600, [&](Check& c) { wall_set(c, opt.quick); }},
        {8, "moduli arithmetic", 5, [=](Check& c) { moduli_arithmetic(c, seed); }},
        {9, "symmetry inheritance", 10, [=](Check& c) { symmetry(c, seed); }},
    };
    std::vector<Result> out;
    for (auto& e : entries) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), e.id) == opt.only.end()) continue;
        Check c;
        auto t0 = std::chrono::steady_clock::now();
        try {
            e.body(c);
        } catch (const std::exception& ex) {
            c.ok = false;
            c.detail << "exception: " << ex.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > e.budget) c.require(false, "runtime budget");
        Result r{e.id, e.name, c.ok, secs, e.budget, c.detail.str()};
        log << format_line(r) << std::endl;
        out.push_back(r);
    }
    return out;
}

}  // namespace coassoc::selftest
