#pragma once

#include <functional>
#include <string>
#include <vector>

#include "coassoc/asymptotics.hpp"
#include "coassoc/charts.hpp"

namespace coassoc {

// Self-dual 2-form on a chart, given in the orthonormal tangent frame of frame_at.
struct SelfDualField {
    Chart base;
    std::function<Mat4(const Vec4&)> values;
    double scale = 1.0;

    Mat4 operator()(const Vec4& u) const { return scale * values(u); }
    SelfDualField scaled(double t) const;
};

// Combination sum_i f_i(u) w_i of the self-dual basis.
SelfDualField self_dual_field(const Chart& base, std::function<Eigen::Vector3d(const Vec4&)> coeffs);
// Coefficients a_i sin(k_i . u + p_i) with a_i in [0.2, 1], k_i in [-1, 1]^4, drawn from seed.
SelfDualField random_self_dual_field(const Chart& base, unsigned seed);
double self_duality_residual(const Mat4& beta);

struct FSample {
    Vec4 u;
    Vec7 point;
    Form value;  // 3-form in base parameter coordinates
    double norm;  // induced-metric norm
};

struct DeformationResult {
    Chart deformed;
    std::vector<FSample> F_samples;
    double sup_F = 0;
};

// u -> base(u) + jmap_inverse(frame(u), alpha(u)).
Chart deform_chart(const Chart& base, const SelfDualField& alpha);
DeformationResult eval_F(const Chart& base, const SelfDualField& alpha, const std::vector<Vec4>& samples);

// d alpha at u, in base parameter coordinates.
Form d_alpha(const SelfDualField& alpha, const Vec4& u);
// Induced-metric norm of a form given in parameter coordinates.
double frame_norm(const FrameData& fr, const Form& param_form);

struct LinCheck {
    std::vector<double> t, R;
    double slope = 0;
    double stderr_ = 0;
    double C_hat = 0;  // max R(t)/t^2
    bool exact_linear = false;
};
LinCheck lincheck(const Chart& base, const SelfDualField& alpha, const std::vector<double>& t_values,
                  const std::vector<Vec4>& samples);

// (p _| phi)|_TN with p the position vector.
SelfDualField alpha_u(const Chart& base, double sd_tol = 1e-6);
// Largest exterior derivative of alpha_u (induced norm) over the samples.
double alpha_u_closedness(const SelfDualField& au, const std::vector<Vec4>& samples);

struct LieDilation {
    double phi_residual;      // sup |d(u.phi) - 3 phi|
    double starphi_residual;  // sup |d(u.*phi) - 4 *phi|
    double coeff_123;
};
LieDilation lie_dilation_check();
// Central-difference exterior derivative of a form field on R^n at p.
Form exterior_derivative_flat(const std::function<Form(const VecN&)>& field, const VecN& p, double h = 1e-3);

struct InvariantX {
    std::vector<double> rho_max;
    std::vector<double> truncated;
    bool convergent;
    std::string verdict;
};
// Truncated L^2 norms of alpha_u over {rho <= rho_max}, radial parameter from r_lo.
InvariantX invariant_X(const Chart& base, const std::vector<double>& rho_max_values, double r_lo = 1e-3,
                       int bins_per_decade = 16, int link_samples = 256);

struct CycleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// gamma: [0,1]^2 -> R^7; disk: [0,1]^3 -> R^7 with disk(a, b, 1) = gamma(a, b).
using Cycle2 = std::function<Vec7(double, double)>;
using Cycle3 = std::function<Vec7(double, double, double)>;

struct YPair {
    double int_D_phi;
    double int_gamma_alpha_u;
    double stokes_defect;
};
YPair invariant_Y_pair(const Cycle2& gamma, const Cycle3& disk, int nodes = 32, double boundary_tol = 1e-8);

// 2-sphere {center + radius * x : x in S^2 of span(e1, e2, e3)} and the cone over it from apex.
Cycle2 sphere_cycle(const Vec7& center, double radius);
Cycle3 cone_disk(const Cycle2& gamma, const Vec7& apex);

// G(alpha, beta) = F(alpha) + d*beta with beta = f vol_N; returned in the tangent frame.
std::vector<Form> eval_G(const Chart& base, const SelfDualField& alpha, const std::function<double(const Vec4&)>& f,
                         const std::vector<Vec4>& samples);

}  // namespace coassoc
