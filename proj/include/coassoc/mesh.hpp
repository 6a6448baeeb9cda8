#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "coassoc/charts.hpp"

namespace coassoc {

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Tet = std::array<int, 4>;

// Closed oriented tetrahedral 3-manifold with vertices in R^7.
struct TriMesh3 {
    std::vector<Vec7> vertices;
    std::vector<Tet> tets;
    std::string label;
    // When set, vertices[i] = embed(sphere[i]) for points of the unit S^3 in R^4,
    // and the metric is taken from the smooth embedding instead of the chords.
    std::vector<Eigen::Vector4d> sphere;
    std::function<Vec7(const Eigen::Vector4d&)> embed;

    bool curved() const { return static_cast<bool>(embed) && sphere.size() == vertices.size(); }
};

// Boundary of the 4-simplex on S^3, refined `level` times (1 -> 8 split, shortest diagonal).
TriMesh3 round_s3(int level);
// Link of the cone M_0^+: q -> (2/3)(sqrt5/2 q e q^-1, f q^-1).
TriMesh3 squashed_s3(int level, const Quat& e = Quat(0, 0, 0, 1), const Quat& f = Quat(1, 0, 0, 0));

// Text format: header TET7, "v x1 ... x7" lines, "t i j k l" lines (0-based).
TriMesh3 read_tet7(std::istream& in, const std::string& label = "file");
TriMesh3 load_tet7(const std::string& path);
void write_tet7(std::ostream& out, const TriMesh3& mesh);

// "round:L", "squashed:L" or "file:PATH".
TriMesh3 mesh_link(const std::string& spec);

TriMesh3 disjoint_union(const TriMesh3& a, const TriMesh3& b);

// Throws MeshError unless every face is shared by exactly two tetrahedra and
// the tetrahedra can be oriented coherently; then orients them.
void orient_consistently(TriMesh3& mesh);
// Global orientation: the cone over the link is positive for *phi.
void orient_by_cone(TriMesh3& mesh);
bool is_consistently_oriented(const TriMesh3& mesh);

}  // namespace coassoc
