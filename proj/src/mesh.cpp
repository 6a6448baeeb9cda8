#include "coassoc/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

namespace coassoc {

namespace {

using V4 = Eigen::Vector4d;

void base_simplex(std::vector<V4>& V, std::vector<Tet>& T) {
    V = {V4(1, 0, 0, 0), V4(0, 1, 0, 0), V4(0, 0, 1, 0), V4(0, 0, 0, 1), V4(1, 1, 1, 1)};
    V4 mean = V4::Zero();
    for (auto& v : V) mean += v / 5.0;
    for (auto& v : V) v = (v - mean).normalized();
    T.clear();
    for (int skip = 4; skip >= 0; --skip) {
        Tet t{};
        int k = 0;
        for (int i = 0; i < 5; ++i)
            if (i != skip) t[k++] = i;
        T.push_back(t);
    }
}

void refine(std::vector<V4>& V, std::vector<Tet>& T) {
    std::map<std::pair<int, int>, int> mid;
    auto m = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = mid.find(key);
        if (it != mid.end()) return it->second;
        V.push_back((V[a] + V[b]).normalized());
        int id = static_cast<int>(V.size()) - 1;
        mid[key] = id;
        return id;
    };
    std::vector<Tet> out;
    out.reserve(8 * T.size());
    for (auto& t : T) {
        int x0 = t[0], x1 = t[1], x2 = t[2], x3 = t[3];
        int a01 = m(x0, x1), a02 = m(x0, x2), a03 = m(x0, x3), a12 = m(x1, x2), a13 = m(x1, x3), a23 = m(x2, x3);
        out.push_back({x0, a01, a02, a03});
        out.push_back({a01, x1, a12, a13});
        out.push_back({a02, a12, x2, a23});
        out.push_back({a03, a13, a23, x3});
        // inner octahedron split along its shortest diagonal
        std::array<std::pair<int, int>, 3> diags{{{a01, a23}, {a02, a13}, {a03, a12}}};
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if ((V[diags[i].first] - V[diags[i].second]).norm() < (V[diags[best].first] - V[diags[best].second]).norm())
                best = i;
        auto [p, q] = diags[best];
        std::map<int, int> anti{{a01, a23}, {a23, a01}, {a02, a13}, {a13, a02}, {a03, a12}, {a12, a03}};
        std::vector<int> others;
        for (int x : {a01, a02, a03, a12, a13, a23})
            if (x != p && x != q) others.push_back(x);
        std::vector<int> cyc{others[0]};
        while (cyc.size() < 4)
            for (int x : others)
                if (std::find(cyc.begin(), cyc.end(), x) == cyc.end() && anti[cyc.back()] != x) {
                    cyc.push_back(x);
                    break;
                }
        for (int i = 0; i < 4; ++i) out.push_back({p, q, cyc[i], cyc[(i + 1) % 4]});
    }
    T = std::move(out);
}

TriMesh3 sphere_mesh(int level, std::function<Vec7(const V4&)> embed, const std::string& label) {
    if (level < 0) throw std::invalid_argument("mesh level must be non-negative");
    std::vector<V4> V;
    std::vector<Tet> T;
    base_simplex(V, T);
    for (int i = 0; i < level; ++i) refine(V, T);
    TriMesh3 m;
    m.sphere = V;
    m.embed = embed;
    m.tets = T;
    m.label = label;
    for (auto& v : V) m.vertices.push_back(embed(v));
    orient_consistently(m);
    orient_by_cone(m);
    return m;
}

// Face key -> list of (tet, local index of the opposite vertex).
std::map<std::array<int, 3>, std::vector<std::pair<int, int>>> face_map(const TriMesh3& m) {
    std::map<std::array<int, 3>, std::vector<std::pair<int, int>>> faces;
    for (int t = 0; t < static_cast<int>(m.tets.size()); ++t)
        for (int k = 0; k < 4; ++k) {
            std::array<int, 3> f;
            int j = 0;
            for (int i = 0; i < 4; ++i)
                if (i != k) f[j++] = m.tets[t][i];
            std::sort(f.begin(), f.end());
            faces[f].push_back({t, k});
        }
    return faces;
}

// Orientation that tet t induces on its face opposite local vertex k, relative to the sorted face.
int induced_sign(const Tet& t, int k) {
    Index idx;
    for (int i = 0; i < 4; ++i)
        if (i != k) idx.push_back(t[i]);
    int s = sort_sign(idx);
    return (k % 2 == 0 ? 1 : -1) * s;
}

}  // namespace

bool is_consistently_oriented(const TriMesh3& mesh) {
    for (auto& [f, inc] : face_map(mesh)) {
        if (inc.size() != 2) return false;
        if (induced_sign(mesh.tets[inc[0].first], inc[0].second) + induced_sign(mesh.tets[inc[1].first], inc[1].second) != 0)
            return false;
    }
    return true;
}

void orient_consistently(TriMesh3& mesh) {
    const int nV = static_cast<int>(mesh.vertices.size());
    for (auto& t : mesh.tets) {
        for (int v : t)
            if (v < 0 || v >= nV) throw MeshError("tetrahedron references a missing vertex");
        Tet s = t;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw MeshError("tetrahedron with repeated vertex");
    }
    auto faces = face_map(mesh);
    for (auto& [f, inc] : faces)
        if (inc.size() != 2) throw MeshError("mesh is not closed: a face is shared by " + std::to_string(inc.size()) + " tetrahedra");
    const int nT = static_cast<int>(mesh.tets.size());
    // neighbours with the vertices opposite the shared face (positions change when a tet is flipped)
    std::vector<std::vector<std::pair<int, std::pair<int, int>>>> adj(nT);
    for (auto& [f, inc] : faces) {
        int o0 = mesh.tets[inc[0].first][inc[0].second], o1 = mesh.tets[inc[1].first][inc[1].second];
        adj[inc[0].first].push_back({inc[1].first, {o0, o1}});
        adj[inc[1].first].push_back({inc[0].first, {o1, o0}});
    }
    auto pos = [&](int t, int v) { return static_cast<int>(std::find(mesh.tets[t].begin(), mesh.tets[t].end(), v) - mesh.tets[t].begin()); };
    std::vector<int> done(nT, 0);
    for (int start = 0; start < nT; ++start) {
        if (done[start]) continue;
        done[start] = 1;
        std::queue<int> q;
        q.push(start);
        while (!q.empty()) {
            int t = q.front();
            q.pop();
            for (auto& [u, ks] : adj[t]) {
                // after fixing t, u must induce the opposite sign on the shared face
                int st = induced_sign(mesh.tets[t], pos(t, ks.first));
                int su = induced_sign(mesh.tets[u], pos(u, ks.second));
                if (!done[u]) {
                    if (st + su != 0) std::swap(mesh.tets[u][0], mesh.tets[u][1]);
                    done[u] = 1;
                    q.push(u);
                } else if (st + su != 0) {
                    throw MeshError("mesh is not orientable");
                }
            }
        }
    }
}

void orient_by_cone(TriMesh3& mesh) {
    // per connected component, majority vote of *phi(p, e1, e2, e3) at centroids
    const int nT = static_cast<int>(mesh.tets.size());
    std::vector<int> comp(nT, -1);
    std::vector<std::vector<int>> vt(mesh.vertices.size());
    for (int t = 0; t < nT; ++t)
        for (int v : mesh.tets[t]) vt[v].push_back(t);
    int nc = 0;
    for (int s = 0; s < nT; ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> q;
        q.push(s);
        comp[s] = nc;
        while (!q.empty()) {
            int t = q.front();
            q.pop();
            for (int v : mesh.tets[t])
                for (int u : vt[v])
                    if (comp[u] < 0) {
                        comp[u] = nc;
                        q.push(u);
                    }
        }
        ++nc;
    }
    std::vector<double> vote(nc, 0.0);
    for (int t = 0; t < nT; ++t) {
        const auto& T = mesh.tets[t];
        Vec7 c = Vec7::Zero();
        for (int v : T) c += mesh.vertices[v] / 4.0;
        Vec7 e1 = mesh.vertices[T[1]] - mesh.vertices[T[0]], e2 = mesh.vertices[T[2]] - mesh.vertices[T[0]],
             e3 = mesh.vertices[T[3]] - mesh.vertices[T[0]];
        double s = star_phi_eval(c, e1, e2, e3);
        vote[comp[t]] += s > 0 ? 1 : (s < 0 ? -1 : 0);
    }
    for (int t = 0; t < nT; ++t)
        if (vote[comp[t]] < 0) std::swap(mesh.tets[t][0], mesh.tets[t][1]);
}

TriMesh3 round_s3(int level) {
    auto embed = [](const V4& q) {
        Vec7 p = Vec7::Zero();
        p.tail<4>() = q;
        return p;
    };
    return sphere_mesh(level, embed, "round_s3:" + std::to_string(level));
}

TriMesh3 squashed_s3(int level, const Quat& e, const Quat& f) {
    const double a = std::sqrt(5.0) / 3.0, b = 2.0 / 3.0;
    auto embed = [=](const V4& v) {
        Quat q(v(0), v(1), v(2), v(3));
        Vec7 p;
        p.head<3>() = a * im_part(q * e * q.conjugate());
        p.tail<4>() = b * h_coords(f * q.conjugate());
        return p;
    };
    return sphere_mesh(level, embed, "squashed_s3:" + std::to_string(level));
}

TriMesh3 read_tet7(std::istream& in, const std::string& label) {
    std::string line;
    bool header = false;
    TriMesh3 m;
    m.label = label;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (!header) {
            if (tag != "TET7") throw MeshError("missing TET7 header");
            header = true;
            continue;
        }
        if (tag == "v") {
            Vec7 p;
            for (int i = 0; i < 7; ++i)
                if (!(ls >> p(i))) throw MeshError("malformed vertex line: " + line);
            m.vertices.push_back(p);
        } else if (tag == "t") {
            Tet t;
            for (int i = 0; i < 4; ++i)
                if (!(ls >> t[i])) throw MeshError("malformed tetrahedron line: " + line);
            m.tets.push_back(t);
        } else {
            throw MeshError("unknown record '" + tag + "'");
        }
    }
    if (!header) throw MeshError("missing TET7 header");
    if (m.tets.empty()) throw MeshError("mesh has no tetrahedra");
    orient_consistently(m);
    orient_by_cone(m);
    return m;
}

TriMesh3 load_tet7(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file " + path);
    return read_tet7(in, path);
}

void write_tet7(std::ostream& out, const TriMesh3& mesh) {
    out << "TET7\n";
    out.precision(17);
    for (auto& v : mesh.vertices) {
        out << "v";
        for (int i = 0; i < 7; ++i) out << ' ' << v(i);
        out << '\n';
    }
    for (auto& t : mesh.tets) out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

TriMesh3 mesh_link(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("mesh spec must be round:L, squashed:L or file:PATH");
    std::string kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
    if (kind == "file") return load_tet7(arg);
    int level;
    try {
        size_t used = 0;
        level = std::stoi(arg, &used);
        if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad mesh level in '" + spec + "'");
    }
    if (kind == "round") return round_s3(level);
    if (kind == "squashed") return squashed_s3(level);
    throw std::invalid_argument("unknown mesh kind '" + kind + "'");
}

TriMesh3 disjoint_union(const TriMesh3& a, const TriMesh3& b) {
    TriMesh3 m = a;
    m.label = a.label + "+" + b.label;
    const int off = static_cast<int>(a.vertices.size());
    m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (auto t : b.tets) {
        for (int& v : t) v += off;
        m.tets.push_back(t);
    }
    // the smooth embedding is kept only when both pieces come from the same construction
    if (a.curved() && b.curved() && a.label == b.label) {
        m.sphere.insert(m.sphere.end(), b.sphere.begin(), b.sphere.end());
    } else {
        m.sphere.clear();
        m.embed = nullptr;
    }
    return m;
}

}  // namespace coassoc
