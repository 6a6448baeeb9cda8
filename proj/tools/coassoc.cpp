#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coassoc/asymptotics.hpp"
#include "coassoc/deform.hpp"
#include "coassoc/linkspec.hpp"
#include "coassoc/moduli.hpp"
#include "selftest.hpp"

using namespace coassoc;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kError = 1, kUnknownVerb = 2, kBadSpec = 3, kTolerance = 4 };

const std::vector<std::string> kVerbs = {"check-coassoc", "fit-rate", "lincheck", "invariants", "walls",
                                         "zspace",        "moduli-dim", "ledger", "selftest"};

struct BadSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Chart resolve_chart(const std::string& spec) {
    try {
        return chart_from_spec(spec);
    } catch (const std::exception& e) {
        throw BadSpec(e.what());
    }
}

DECOperators resolve_mesh(const std::string& spec) {
    TriMesh3 m;
    try {
        m = mesh_link(spec);
    } catch (const std::exception& e) {
        throw BadSpec(e.what());
    }
    return build_dec(m);
}

struct Common {
    std::string format;  // empty picks the verb's default
    std::string output;
    unsigned seed = 20240611;
    std::vector<std::string> tol;

    unsigned skip() const { return seed % 4096; }

    double tolerance(const std::string& key, double fallback) const {
        for (auto& kv : tol) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw CLI::ValidationError("--tol", "expected key=value, got '" + kv + "'");
            if (kv.substr(0, eq) == key) return std::stod(kv.substr(eq + 1));
        }
        return fallback;
    }
};

void add_common(CLI::App* sub, Common& c, const std::string& formats = "csv,json") {
    std::vector<std::string> allowed;
    std::stringstream ss(formats);
    for (std::string f; std::getline(ss, f, ',');) allowed.push_back(f);
    sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember(allowed));
    sub->add_option("--output,-o", c.output, "Report file (default stdout)");
    sub->add_option("--seed", c.seed, "Seed for all sampling");
    sub->add_option("--tol", c.tol, "Tolerance override key=value")->take_all();
}

void emit(const Common& c, const std::string& text) {
    if (c.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.output);
    if (!out) throw std::runtime_error("cannot write " + c.output);
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// Moderate parameter box away from the core and the link poles; plane charts get a unit cube.
Box moderate_box(const Chart& ch) {
    if (ch.domain.lo(0) < -1e5) return Box{Vec4::Constant(-2), Vec4::Constant(2)};
    double r0 = std::max(ch.domain.lo(0), 0.0);
    return Box{Vec4(r0 + 1.0, 0.3, -2, -2), Vec4(r0 + 3.0, 1.2, 2, 2)};
}

std::optional<double> chart_parameter_c(const std::string& spec) {
    auto pos = spec.find(":c=");
    if (spec.rfind("mc:", 0) != 0 || pos == std::string::npos) return std::nullopt;
    return std::stod(spec.substr(pos + 3));
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return json::parse(in);
}

WallTable load_walls(const std::string& arg) {
    if (arg.empty() || arg == "empty") return WallTable{};
    WallTable w = load_json(arg).get<WallTable>();
    w.validate();
    return w;
}

WallOptions wall_options(const Common& c) {
    WallOptions o;
    o.scan_resolution = c.tolerance("scan_resolution", o.scan_resolution);
    o.polish_tol = c.tolerance("polish_tol", o.polish_tol);
    o.cluster_window = c.tolerance("cluster_window", o.cluster_window);
    o.kappa_cluster = c.tolerance("kappa_cluster", o.kappa_cluster);
    o.solver_tol = c.tolerance("solver_tol", o.solver_tol);
    return o;
}

// Flags named in the JSON config are appended unless already on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return args;
    std::set<std::string> given;
    for (auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    json cfg = load_json(path);
    for (auto& [key, value] : cfg.items()) {
        if (given.count(key)) continue;
        auto push = [&](const json& v) {
            args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        };
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back("--" + key);
        } else if (value.is_array()) {
            args.push_back("--" + key);
            for (auto& v : value) push(v);
        } else if (value.is_object() && key == "tol") {
            for (auto& [k, v] : value.items()) {
                args.push_back("--tol");
                args.push_back(k + "=" + (v.is_string() ? v.get<std::string>() : num(v.get<double>())));
            }
        } else {
            args.push_back("--" + key);
            push(value);
        }
    }
    return args;
}

int run_check_coassoc(const Common& c, const std::string& spec, int n, const std::string& dump_form) {
    if (!dump_form.empty()) {
        auto [p, sp] = g2_constants();
        if (dump_form == "phi") emit(c, p.to_text());
        else if (dump_form == "starphi") emit(c, sp.to_text());
        else throw CLI::ValidationError("--dump-form", "expected phi or starphi");
        return kOk;
    }
    Chart ch = resolve_chart(spec);
    auto samples = sample_domain(ch.domain, n, c.skip());
    std::vector<double> res(samples.size()), sp(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        FrameData fr = frame_at(ch, samples[i]);
        res[i] = phi_residual_at(fr);
        sp[i] = starphi_at(fr);
    }
    double worst = *std::max_element(res.begin(), res.end());
    double least = *std::min_element(sp.begin(), sp.end());
    const double tol = c.tolerance("phi_residual", 1e-8);
    if (c.format == "csv") {
        std::ostringstream os;
        os << "u1,u2,u3,u4,phi_residual,starphi\n";
        for (size_t i = 0; i < samples.size(); ++i)
            os << num(samples[i](0)) << "," << num(samples[i](1)) << "," << num(samples[i](2)) << "," << num(samples[i](3))
               << "," << num(res[i]) << "," << num(sp[i]) << "\n";
        emit(c, os.str());
    } else {
        emit(c, dump({{"chart", spec},
                      {"samples", samples.size()},
                      {"analytic_partials", ch.has_partials()},
                      {"max_phi_residual", worst},
                      {"min_starphi", least},
                      {"tolerance", tol}}));
    }
    return worst <= tol && least > 0 ? kOk : kTolerance;
}

int run_fit_rate(const Common& c, const std::string& spec, const std::string& cone_spec, double r_lo, double r_hi,
                 int radii, int link, std::optional<double> expect) {
    Chart sub = resolve_chart(spec), cone = resolve_chart(cone_spec);
    ConeMatch m = cone_match(sub, cone, log_spaced(r_lo, r_hi, radii), link_angles(link, c.skip()));
    if (c.format == "csv") {
        std::ostringstream os;
        os << "r,sigma_index,displacement,tangential_residual\n";
        for (auto& s : m.samples)
            os << num(s.r) << "," << s.sigma_index << "," << num(s.displacement.norm()) << ","
               << num(s.tangential_residual) << "\n";
        emit(c, os.str());
        return kOk;
    }
    RateFit f = fit_rate(m, sub, cone);
    json j = {{"chart", spec},
              {"cone", cone_spec},
              {"lambda_hat", f.lambda_hat},
              {"stderr", f.stderr_},
              {"r_lo", f.r_lo},
              {"r_hi", f.r_hi},
              {"n_radii", f.n_radii},
              {"exact_cone", f.exact_cone},
              {"dropped_first_decade", f.dropped_first_decade},
              {"per_derivative", f.per_derivative},
              {"scale_invariance_residual", m.scale_invariance_residual}};
    int status = kOk;
    if (expect) {
        double tol = c.tolerance("rate", 0.05);
        j["expected"] = *expect;
        j["tolerance"] = tol;
        if (f.exact_cone || std::abs(f.lambda_hat - *expect) > tol) status = kTolerance;
    }
    emit(c, dump(j));
    return status;
}

int run_lincheck(const Common& c, const std::string& spec, int n) {
    Chart ch = resolve_chart(spec);
    auto samples = sample_domain(moderate_box(ch), n, c.skip());
    SelfDualField a = random_self_dual_field(ch, c.seed);
    LinCheck lc = lincheck(ch, a, {0.05, 0.03, 0.02, 0.01, 0.005, 0.002}, samples);
    const double tol = c.tolerance("slope", 0.1);
    bool ok = lc.exact_linear || std::abs(lc.slope - 2.0) <= tol;
    if (c.format == "csv") {
        std::ostringstream os;
        os << "t,R\n";
        for (size_t i = 0; i < lc.t.size(); ++i) os << num(lc.t[i]) << "," << num(lc.R[i]) << "\n";
        emit(c, os.str());
    } else {
        json pts = json::array();
        for (size_t i = 0; i < lc.t.size(); ++i) pts.push_back({{"t", lc.t[i]}, {"R", lc.R[i]}});
        emit(c, dump({{"chart", spec},
                      {"slope", lc.slope},
                      {"stderr", lc.stderr_},
                      {"C_hat", lc.C_hat},
                      {"exact_linear", lc.exact_linear},
                      {"samples", pts}}));
    }
    return ok ? kOk : kTolerance;
}

int run_invariants(const Common& c, const std::string& spec, const std::vector<double>& rho_max,
                   std::optional<double> sphere_radius) {
    Chart ch = resolve_chart(spec);
    InvariantX x = invariant_X(ch, rho_max);
    double closed = alpha_u_closedness(alpha_u(ch), sample_domain(moderate_box(ch), 24, c.skip()));
    json j = {{"chart", spec},
              {"rho_max", x.rho_max},
              {"X_truncated", x.truncated},
              {"convergent", x.convergent},
              {"verdict", x.verdict},
              {"d_alpha_u", closed}};
    bool ok = closed <= c.tolerance("closedness", 1e-6);
    if (!sphere_radius) {
        if (auto cv = chart_parameter_c(spec)) sphere_radius = std::pow(*cv / 16, 0.2);
    }
    if (sphere_radius) {
        Cycle2 gamma = sphere_cycle(Vec7::Zero(), *sphere_radius);
        YPair y = invariant_Y_pair(gamma, cone_disk(gamma, Vec7::Zero()));
        j["sphere_radius"] = *sphere_radius;
        j["int_D_phi"] = y.int_D_phi;
        j["int_gamma_alpha_u"] = y.int_gamma_alpha_u;
        j["stokes_defect"] = y.stokes_defect;
        double denom = std::max(std::abs(y.int_gamma_alpha_u), 1e-300);
        ok = ok && y.stokes_defect / denom <= c.tolerance("stokes", 1e-4);
    } else {
        j["stokes_defect"] = nullptr;
    }
    if (c.format == "csv") {
        std::ostringstream os;
        os << "rho_max,X_truncated\n";
        for (size_t i = 0; i < x.rho_max.size(); ++i) os << num(x.rho_max[i]) << "," << num(x.truncated[i]) << "\n";
        emit(c, os.str());
    } else {
        emit(c, dump(j));
    }
    return ok ? kOk : kTolerance;
}

int run_walls(const Common& c, const std::string& mesh, double a, double b, const std::string& table_path) {
    DECOperators dec = resolve_mesh(mesh);
    WallOptions opt = wall_options(c);
    WallScan scan = find_walls(dec, a, b, opt);
    bool ok = true;
    for (auto& w : scan.walls) ok = ok && !w.inconclusive && w.residual <= 10 * opt.solver_tol;
    for (auto& w : scan.warnings) std::cerr << "warning: " << w << "\n";
    if (c.format == "csv") {
        std::ostringstream os;
        os << "mu,d_mu,sigma_min,residual\n";
        for (auto& w : scan.walls)
            os << num(w.mu) << "," << w.multiplicity << "," << num(wall_residual(scan.spectrum, w.mu, opt).sigma_min) << ","
               << num(w.residual) << "\n";
        emit(c, os.str());
    } else {
        json walls = json::array();
        for (auto& w : scan.walls) {
            json kinds = json::array();
            for (auto& p : w.basis) kinds.push_back({{"mu", p.mu}, {"kind", p.kind}, {"residual", p.residual}});
            walls.push_back({{"mu", w.mu},
                             {"d_mu", w.multiplicity},
                             {"sigma_min", wall_residual(scan.spectrum, w.mu, opt).sigma_min},
                             {"residual", w.residual},
                             {"spread", w.spread},
                             {"gap", w.gap},
                             {"inconclusive", w.inconclusive},
                             {"members", kinds}});
        }
        emit(c, dump({{"mesh", mesh},
                      {"interval", {a, b}},
                      {"walls", walls},
                      {"warnings", scan.warnings},
                      {"b0", scan.spectrum.b0},
                      {"b1", scan.spectrum.b1}}));
    }
    if (!table_path.empty()) {
        WallTable t;
        auto level = mesh.substr(mesh.find(':') + 1);
        t.provenance = "DEC-level-" + level;
        for (auto& w : scan.walls) t.walls.push_back({w.mu, w.multiplicity});
        std::ofstream out(table_path);
        if (!out) throw std::runtime_error("cannot write " + table_path);
        out << json(t).dump(2) << "\n";
    }
    return ok ? kOk : kTolerance;
}

int run_zspace(const Common& c, const std::string& mesh) {
    DECOperators dec = resolve_mesh(mesh);
    WallOptions opt = wall_options(c);
    ZSpace z = z_space(dec, opt);
    if (c.format == "csv") {
        std::ostringstream os;
        os << "c\n";
        for (double v : z.eigenvalues) os << num(v) << "\n";
        emit(c, os.str());
    } else {
        emit(c, dump({{"mesh", mesh},
                      {"dim_Z", z.dim},
                      {"eigenvalues", z.eigenvalues},
                      {"residual", z.residual},
                      {"gap", z.gap},
                      {"inconclusive", z.inconclusive}}));
    }
    return z.inconclusive ? kTolerance : kOk;
}

TopologyInput load_topology(const std::string& path) {
    TopologyInput t = load_json(path).get<TopologyInput>();
    t.validate();
    return t;
}

int run_moduli_dim(const Common& c, const std::string& topo, const std::string& walls, double lambda,
                   std::optional<int> dim_B) {
    TopologyInput t = load_topology(topo);
    ModuliReport r = dim_moduli(t, load_walls(walls), lambda, dim_B);
    auto violations = ledger_bounds_check(r, t);
    if (c.format == "text") {
        std::string text = format_report(r);
        for (auto& v : violations) text += "violation: " + v + "\n";
        emit(c, text);
    } else {
        json j = r;
        j["violations"] = violations;
        emit(c, dump(j));
    }
    return violations.empty() ? kOk : kTolerance;
}

int run_ledger(const Common& c, const std::string& topo, const std::string& walls, double from, double to) {
    TopologyInput t = load_topology(topo);
    IndexLedger l = index_ledger(t, load_walls(walls), from, to);
    if (c.format == "csv") {
        std::ostringstream os;
        os << "mu,d,kernel_gain_lo,kernel_gain_hi,cokernel_loss_lo,cokernel_loss_hi\n";
        auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
        for (auto& x : l.crossings)
            os << num(x.mu) << "," << x.d << "," << opt(x.kernel_gain.lo) << "," << opt(x.kernel_gain.hi) << ","
               << opt(x.cokernel_loss.lo) << "," << opt(x.cokernel_loss.hi) << "\n";
        emit(c, os.str());
    } else {
        emit(c, dump(json(l)));
    }
    return kOk;
}

int run_selftest(const Common& c, bool quick, const std::vector<int>& only) {
    selftest::Options opt;
    opt.seed = c.seed;
    opt.quick = quick;
    opt.only = only;
    auto results = selftest::run(opt, std::cerr);
    int failed = 0;
    json arr = json::array();
    for (auto& r : results) {
        failed += !r.pass;
        arr.push_back({{"criterion", r.id},
                       {"name", r.name},
                       {"pass", r.pass},
                       {"seconds", r.seconds},
                       {"budget", r.budget},
                       {"detail", r.detail}});
    }
    if (c.format == "csv") {
        std::ostringstream os;
        os << "criterion,pass,seconds,budget\n";
        for (auto& r : results) os << r.id << "," << (r.pass ? 1 : 0) << "," << num(r.seconds) << "," << r.budget << "\n";
        emit(c, os.str());
    } else {
        emit(c, dump({{"results", arr}, {"passed", results.size() - failed}, {"total", results.size()}}));
    }
    return failed ? kTolerance : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config(std::move(args));
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kError;
    }
    if (!args.empty() && args[0][0] != '-' && std::find(kVerbs.begin(), kVerbs.end(), args[0]) == kVerbs.end()) {
        std::cerr << "unknown verb '" << args[0] << "'\n";
        return kUnknownVerb;
    }

    CLI::App app{"Numerical checks for asymptotically conical coassociative 4-folds"};
    app.require_subcommand(1);
    Common common;
    std::string chart = "mc:plus:c=1", cone = "cone:plus", mesh = "round:3", topology, walls = "empty", dump_form,
                table_out;
    int samples = 1000, lin_samples = 24, radii = 10, link = 16;
    double r_lo = 10, r_hi = 1e4, lambda = 0, from = 0, to = 0;
    std::vector<double> interval = {-2.5, 0.5};
    std::vector<double> rho_max = {10, 100, 1000, 10000};
    std::optional<double> expect, sphere_radius;
    std::optional<int> dim_B;
    bool quick = false;
    std::vector<int> only;

    auto* check = app.add_subcommand("check-coassoc", "Sampled phi-residual and *phi positivity of a chart");
    add_common(check, common);
    check->add_option("--chart", chart, "Chart spec");
    check->add_option("--samples", samples)->check(CLI::PositiveNumber);
    check->add_option("--dump-form", dump_form, "Print phi or starphi in text form and exit");

    auto* fit = app.add_subcommand("fit-rate", "Decay rate of a chart towards its asymptotic cone");
    add_common(fit, common);
    fit->add_option("--chart", chart);
    fit->add_option("--cone", cone);
    fit->add_option("--r-lo", r_lo);
    fit->add_option("--r-hi", r_hi);
    fit->add_option("--radii", radii)->check(CLI::Range(8, 1000));
    fit->add_option("--link", link)->check(CLI::PositiveNumber);
    fit->add_option("--expect", expect, "Expected rate; checked against tolerance key 'rate'");

    auto* lin = app.add_subcommand("lincheck", "Quadratic remainder of the deformation map");
    add_common(lin, common);
    lin->add_option("--chart", chart);
    lin->add_option("--samples", lin_samples)->check(CLI::PositiveNumber);

    auto* inv = app.add_subcommand("invariants", "Dilation invariants X and Y");
    add_common(inv, common);
    inv->add_option("--chart", chart);
    inv->add_option("--rho-max", rho_max)->take_all();
    inv->add_option("--sphere-radius", sphere_radius, "Radius of the 2-sphere cycle (default: core of M_c)");

    auto* wal = app.add_subcommand("walls", "Critical rates of the link");
    add_common(wal, common);
    wal->add_option("--mesh", mesh, "round:L, squashed:L or file:PATH");
    wal->add_option("--interval", interval)->expected(2)->delimiter(',');
    wal->add_option("--emit-table", table_out, "Also write a wall table JSON for moduli-dim");

    auto* zs = app.add_subcommand("zspace", "Kernel of d* - 2 on 2-forms of the link");
    add_common(zs, common);
    zs->add_option("--mesh", mesh);

    auto* mod = app.add_subcommand("moduli-dim", "Expected dimension of the moduli space");
    add_common(mod, common, "json,text");
    mod->add_option("--topology", topology)->required();
    mod->add_option("--walls", walls, "Wall table JSON or 'empty'");
    mod->add_option("--lambda", lambda)->required();
    mod->add_option("--dim-B", dim_B);

    auto* led = app.add_subcommand("ledger", "Index changes across walls between two rates");
    add_common(led, common);
    led->add_option("--topology", topology)->required();
    led->add_option("--walls", walls);
    led->add_option("--from", from)->required();
    led->add_option("--to", to)->required();

    auto* st = app.add_subcommand("selftest", "Acceptance criteria");
    add_common(st, common);
    st->add_flag("--quick", quick, "Wall checks at one refinement level");
    st->add_option("--only", only, "Criterion ids")->take_all();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    if (common.format.empty()) common.format = (*check || *wal) ? "csv" : "json";
    try {
        if (*check) return run_check_coassoc(common, chart, samples, dump_form);
        if (*fit) return run_fit_rate(common, chart, cone, r_lo, r_hi, radii, link, expect);
        if (*lin) return run_lincheck(common, chart, lin_samples);
        if (*inv) return run_invariants(common, chart, rho_max, sphere_radius);
        if (*wal) {
            if (!(interval[0] < interval[1])) throw CLI::ValidationError("--interval", "need a < b");
            return run_walls(common, mesh, interval[0], interval[1], table_out);
        }
        if (*zs) return run_zspace(common, mesh);
        if (*mod) return run_moduli_dim(common, topology, walls, lambda, dim_B);
        if (*led) return run_ledger(common, topology, walls, from, to);
        if (*st) return run_selftest(common, quick, only);
    } catch (const BadSpec& e) {
        std::cerr << "bad spec: " << e.what() << "\n";
        return kBadSpec;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}
