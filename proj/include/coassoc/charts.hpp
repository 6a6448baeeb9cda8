#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coassoc/forms7.hpp"

namespace coassoc {

using Vec4 = Eigen::Vector4d;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat74 = Eigen::Matrix<double, 7, 4>;
using Quat = Eigen::Quaterniond;

struct SingularChartError : std::runtime_error {
    Vec4 at;
    SingularChartError(const std::string& msg, const Vec4& u) : std::runtime_error(msg), at(u) {}
};

struct ParametrizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Box {
    Vec4 lo, hi;
    bool contains(const Vec4& u) const { return (u.array() >= lo.array()).all() && (u.array() <= hi.array()).all(); }
};

struct Chart {
    Box domain;
    std::function<Vec7(const Vec4&)> map;
    std::function<Mat74(const Vec4&)> partials;  // optional
    double fd_step = 1e-5;
    std::string label;
    // Optional parameter guess for a point near the image, used to seed nearest-point searches.
    std::function<std::optional<Vec4>(const Vec7&)> locate;
    double rank_tol = 1e-10;

    Vec7 operator()(const Vec4& u) const { return map(u); }
    Mat74 jacobian(const Vec4& u) const;
    bool has_partials() const { return static_cast<bool>(partials); }
};

struct FrameData {
    Vec7 point;
    Eigen::Matrix<double, 7, 4> tangent;
    Eigen::Matrix<double, 7, 3> normal;
    Eigen::Matrix4d metric;
    Mat74 jacobian;
    // jacobian = tangent * tri, tri upper triangular with positive diagonal
    Eigen::Matrix4d tri;
};

FrameData frame_at(const Chart& chart, const Vec4& u);

struct CoassocResidual {
    double max_phi_residual;
    double min_starphi;
};
CoassocResidual coassoc_residual(const Chart& chart, const std::vector<Vec4>& samples);
// Pointwise values at one frame.
double phi_residual_at(const FrameData& fr);
double starphi_at(const FrameData& fr);

// 2-forms on R^4 in the orthonormal tangent frame are handled as 4x4 antisymmetric matrices.
using Mat4 = Eigen::Matrix4d;
Mat4 jmap(const FrameData& fr, const VecN& v);
Vec7 jmap_inverse(const FrameData& fr, const Mat4& beta, double sd_tol = 1e-6);
// Orthonormal self-dual basis e12+e34, e13-e24, e14+e23.
const std::array<Mat4, 3>& self_dual_basis();
Mat4 hodge4(const Mat4& beta);
Form mat_to_form2(const Mat4& beta);
Mat4 form2_to_mat(const Form& f);
// Converts a 2-form between the orthonormal tangent frame and chart parameters.
Mat4 frame_to_param(const FrameData& fr, const Mat4& beta);
Mat4 param_to_frame(const FrameData& fr, const Mat4& beta);

// SU(2) family and cones.
enum class Branch { plus, minus, minus_upper, plane, cone_plus, cone_minus };

struct SU2Params {
    double c = 1.0;
    Quat e = Quat(0, 0, 0, 1);  // unit imaginary
    Quat f = Quat(1, 0, 0, 0);  // unit
    Branch branch = Branch::plus;
    double r_min = -1;  // <0 picks a branch default
    double r_max = 1e5;
};

// Solves s(4s^2-5r^2)^2 = c on the requested branch.
double su2_profile(double c, double r, Branch branch);
// ds/dr along the branch.
double su2_profile_slope(double c, double r, double s);
double su2_min_radius(double c, Branch branch);

Chart su2_chart(const SU2Params& p);
// Unit quaternion from chart angles (eta, xi1, xi2) and back.
Quat quat_from_angles(double eta, double xi1, double xi2);
Eigen::Vector3d angles_from_quat(const Quat& q);
// Im H -> R^3 and H -> (x4..x7) with the sign convention used throughout.
Eigen::Vector3d im_part(const Quat& q);
Eigen::Vector4d h_coords(const Quat& y);
Quat h_from_coords(const Eigen::Vector4d& v);
// Group action of a unit quaternion on R^7 = Im H + H.
Vec7 su2_act(const Quat& q, const Vec7& p);

Chart plane_chart(double scale = 1.0);
Chart affine_chart(const Vec7& origin, const Mat74& dirs, const std::string& label);
Chart scaled_chart(const Chart& c, double factor);
// Composes with a parameter map u = phi(v) (and its Jacobian).
Chart reparametrized(const Chart& c, std::function<Vec4(const Vec4&)> phi, std::function<Mat4(const Vec4&)> dphi,
                     const Box& domain);

// Catalog lookup: "plane", "cone:plus", "cone:minus", "mc:plus:c=1", "mc:minus:c=0.5".
Chart chart_from_spec(const std::string& spec);

// Nearest point on a chart to p by damped Gauss-Newton from seed.
struct NearestPoint {
    Vec4 u;
    Vec7 point;
    double distance;
    double gradient_norm;
    bool converged;
};
NearestPoint nearest_point(const Chart& chart, const Vec7& p, const Vec4& seed, int max_iter = 100);

double symmetry_residual(const Chart& chart, const std::vector<Quat>& group, const std::vector<Vec4>& points);

// Central-difference exterior derivative of a k-form field given in chart parameters.
using FormField = std::function<Form(const Vec4&)>;
Form exterior_derivative(const Chart& chart, const FormField& field, const Vec4& u);

// Deterministic low-discrepancy samples.
std::vector<Quat> sample_quaternions(int n, unsigned skip = 0);
std::vector<Vec4> sample_domain(const Box& box, int n, unsigned skip = 0);
std::vector<Quat> random_quaternions(int n, unsigned seed);

}  // namespace coassoc
