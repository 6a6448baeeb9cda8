#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "coassoc/asymptotics.hpp"
#include "coassoc/deform.hpp"
#include "coassoc/linkspec.hpp"
#include "coassoc/moduli.hpp"

namespace py = pybind11;
using namespace coassoc;
using nlohmann::json;

namespace {

py::dict rate_dict(const RateFit& f) {
    py::dict d;
    d["lambda_hat"] = f.lambda_hat;
    d["stderr"] = f.stderr_;
    d["r_lo"] = f.r_lo;
    d["r_hi"] = f.r_hi;
    d["n_radii"] = f.n_radii;
    d["exact_cone"] = f.exact_cone;
    d["per_derivative"] = f.per_derivative;
    return d;
}

WallTable walls_from(const std::string& s) {
    if (s.empty()) return WallTable{};
    WallTable w = json::parse(s).get<WallTable>();
    w.validate();
    return w;
}

TopologyInput topology_from(const std::string& s) {
    TopologyInput t = json::parse(s).get<TopologyInput>();
    t.validate();
    return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Coassociative 4-fold checks (C++ core)";

    auto topo_err = py::register_exception<TopologyError>(m, "TopologyError", PyExc_ValueError);
    py::register_exception<WallCollisionError>(m, "WallCollisionError", PyExc_ValueError);
    (void)topo_err;

    m.def("g2_forms", [] {
        auto [p, sp] = g2_constants();
        return py::make_tuple(p.to_text(), sp.to_text());
    }, "phi and *phi in `indices:coefficient` text form");

    m.def("coassoc_residual", [](const std::string& chart, int samples, unsigned seed) {
        Chart ch = chart_from_spec(chart);
        auto r = coassoc_residual(ch, sample_domain(ch.domain, samples, seed % 4096));
        return py::make_tuple(r.max_phi_residual, r.min_starphi);
    }, py::arg("chart"), py::arg("samples") = 1000, py::arg("seed") = 0);

    m.def("chart_point", [](const std::string& chart, const Eigen::Vector4d& u) {
        return Eigen::VectorXd(chart_from_spec(chart)(u));
    }, py::arg("chart"), py::arg("u"));

    m.def("fit_rate", [](const std::string& chart, const std::string& cone, double r_lo, double r_hi, int radii, int link) {
        Chart sub = chart_from_spec(chart), c = chart_from_spec(cone);
        RateFit f;
        {
            py::gil_scoped_release nogil;
            f = fit_rate(cone_match(sub, c, log_spaced(r_lo, r_hi, radii), link_angles(link)), sub, c);
        }
        return rate_dict(f);
    }, py::arg("chart"), py::arg("cone"), py::arg("r_lo") = 10.0, py::arg("r_hi") = 1e4, py::arg("radii") = 10,
       py::arg("link") = 16);

    m.def("lincheck", [](const std::string& chart, unsigned seed, int samples) {
        Chart ch = chart_from_spec(chart);
        double r0 = std::max(ch.domain.lo(0), 0.0);
        Box box{Vec4(r0 + 1.0, 0.3, -2, -2), Vec4(r0 + 3.0, 1.2, 2, 2)};
        LinCheck lc = lincheck(ch, random_self_dual_field(ch, seed), {0.05, 0.03, 0.02, 0.01, 0.005, 0.002},
                               sample_domain(box, samples, seed % 4096));
        py::dict d;
        d["slope"] = lc.slope;
        d["C_hat"] = lc.C_hat;
        d["t"] = lc.t;
        d["R"] = lc.R;
        d["exact_linear"] = lc.exact_linear;
        return d;
    }, py::arg("chart"), py::arg("seed") = 0, py::arg("samples") = 24);

    m.def("betti", [](const std::string& mesh) { return betti(build_dec(mesh_link(mesh))).b; }, py::arg("mesh"));

    m.def("find_walls", [](const std::string& mesh, double a, double b) {
        WallScan scan;
        {
            py::gil_scoped_release nogil;
            scan = find_walls(build_dec(mesh_link(mesh)), a, b);
        }
        py::list out;
        for (auto& w : scan.walls) {
            py::dict d;
            d["mu"] = w.mu;
            d["d"] = w.multiplicity;
            d["residual"] = w.residual;
            d["spread"] = w.spread;
            d["gap"] = w.gap;
            d["inconclusive"] = w.inconclusive;
            out.append(d);
        }
        return out;
    }, py::arg("mesh"), py::arg("a"), py::arg("b"));

    m.def("z_space", [](const std::string& mesh) {
        ZSpace z;
        {
            py::gil_scoped_release nogil;
            z = z_space(build_dec(mesh_link(mesh)));
        }
        py::dict d;
        d["dim"] = z.dim;
        d["eigenvalues"] = z.eigenvalues;
        d["gap"] = z.gap;
        d["inconclusive"] = z.inconclusive;
        return d;
    }, py::arg("mesh"));

    // JSON strings in and out; the Python package converts to and from dicts.
    m.def("dim_moduli_json", [](const std::string& topology, const std::string& walls, double lambda,
                                std::optional<int> dim_B) {
        return json(dim_moduli(topology_from(topology), walls_from(walls), lambda, dim_B)).dump();
    }, py::arg("topology"), py::arg("walls"), py::arg("lam"), py::arg("dim_B") = py::none());

    m.def("index_ledger_json", [](const std::string& topology, const std::string& walls, double l1, double l2) {
        return json(index_ledger(topology_from(topology), walls_from(walls), l1, l2)).dump();
    }, py::arg("topology"), py::arg("walls"), py::arg("lambda1"), py::arg("lambda2"));

    m.def("exact_sequence_check_json", [](const std::string& topology) {
        ExactSequenceResult r = exact_sequence_check(json::parse(topology).get<TopologyInput>());
        json j = {{"feasible", r.feasible}, {"dim_im_p2", r.dim_im_p2}, {"dim_im_p1", r.dim_im_p1},
                  {"violations", r.violations}};
        return j.dump();
    }, py::arg("topology"));
}
