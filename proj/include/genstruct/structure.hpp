#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"

namespace genstruct {

using Vertex = std::string;
using VertexSet = std::set<Vertex>;
// An edge is kept sorted, with `arity` distinct members.
using Edge = std::vector<Vertex>;
using EdgeSet = std::set<Edge>;
using VertexMap = std::map<Vertex, Vertex>;

// A finite structure with one symmetric anti-reflexive relation of arity 2 or
// 3, represented as a set of arity-sized vertex subsets. Equality is set
// equality of vertices and edges, not isomorphism.
class Structure {
public:
    explicit Structure(int arity) : arity_(arity) {
        if (arity != 2 && arity != 3)
            throw InputError("arity must be 2 or 3, got " + std::to_string(arity));
    }

    int arity() const { return arity_; }
    const VertexSet& vertex_set() const { return vertices_; }
    const EdgeSet& edge_set() const { return edges_; }
    std::size_t size() const { return vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool empty() const { return vertices_.empty(); }

    std::vector<Vertex> vertices() const {
        return std::vector<Vertex>(vertices_.begin(), vertices_.end());
    }
    std::vector<Edge> edges() const {
        return std::vector<Edge>(edges_.begin(), edges_.end());
    }

    bool has_vertex(const Vertex& v) const { return vertices_.count(v) > 0; }
    bool has_edge(Edge e) const {
        std::sort(e.begin(), e.end());
        return edges_.count(e) > 0;
    }

    void add_vertex(const Vertex& v) {
        if (v.empty()) throw InputError("empty vertex id");
        vertices_.insert(v);
    }

    void add_edge(Edge e) {
        if (static_cast<int>(e.size()) != arity_)
            throw InputError("edge size does not match arity " + std::to_string(arity_));
        std::sort(e.begin(), e.end());
        if (std::adjacent_find(e.begin(), e.end()) != e.end())
            throw InputError("edge with repeated vertex");
        for (const Vertex& v : e)
            if (!vertices_.count(v)) throw InputError("edge uses unknown vertex: " + v);
        edges_.insert(std::move(e));
    }

    std::size_t degree(const Vertex& v) const {
        std::size_t d = 0;
        for (const Edge& e : edges_)
            if (std::binary_search(e.begin(), e.end(), v)) ++d;
        return d;
    }

    friend bool operator==(const Structure& a, const Structure& b) {
        return a.arity_ == b.arity_ && a.vertices_ == b.vertices_ && a.edges_ == b.edges_;
    }
    friend bool operator!=(const Structure& a, const Structure& b) { return !(a == b); }

private:
    int arity_;
    VertexSet vertices_;
    EdgeSet edges_;
};

inline Structure make_structure(int arity, const std::vector<Vertex>& verts,
                                const std::vector<Edge>& edges) {
    Structure s(arity);
    for (const Vertex& v : verts) s.add_vertex(v);
    for (const Edge& e : edges) s.add_edge(e);
    return s;
}

// Substructure induced on V. Every member of V must be a vertex of S.
inline Structure induced(const Structure& s, const VertexSet& v) {
    Structure out(s.arity());
    for (const Vertex& x : v) {
        if (!s.has_vertex(x)) throw InputError("induced: unknown vertex id: " + x);
        out.add_vertex(x);
    }
    for (const Edge& e : s.edge_set()) {
        bool inside = true;
        for (const Vertex& x : e)
            if (!v.count(x)) { inside = false; break; }
        if (inside) out.add_edge(e);
    }
    return out;
}

// Relabels every vertex through `m`, which must be injective and cover all
// of S's vertices.
inline Structure renamed(const Structure& s, const VertexMap& m) {
    Structure out(s.arity());
    std::set<Vertex> images;
    for (const Vertex& v : s.vertex_set()) {
        auto it = m.find(v);
        if (it == m.end()) throw InputError("renamed: no image for vertex " + v);
        if (!images.insert(it->second).second)
            throw InputError("renamed: map is not injective at " + it->second);
        out.add_vertex(it->second);
    }
    for (const Edge& e : s.edge_set()) {
        Edge img;
        for (const Vertex& v : e) img.push_back(m.at(v));
        out.add_edge(std::move(img));
    }
    return out;
}

inline VertexSet set_union(const VertexSet& a, const VertexSet& b) {
    VertexSet r = a;
    r.insert(b.begin(), b.end());
    return r;
}

inline VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
    VertexSet r;
    for (const Vertex& v : a)
        if (!b.count(v)) r.insert(v);
    return r;
}

inline VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
    VertexSet r;
    for (const Vertex& v : a)
        if (b.count(v)) r.insert(v);
    return r;
}

inline bool is_subset(const VertexSet& a, const VertexSet& b) {
    for (const Vertex& v : a)
        if (!b.count(v)) return false;
    return true;
}

// True iff `m`, total on B's vertices, is injective and an isomorphism onto
// the substructure of N induced by its image.
inline bool is_embedding_map(const Structure& b, const Structure& n, const VertexMap& m) {
    if (b.arity() != n.arity()) return false;
    std::set<Vertex> image;
    for (const Vertex& v : b.vertex_set()) {
        auto it = m.find(v);
        if (it == m.end() || !n.has_vertex(it->second)) return false;
        if (!image.insert(it->second).second) return false;
    }
    for (const Edge& e : b.edge_set()) {
        Edge img;
        for (const Vertex& v : e) img.push_back(m.at(v));
        if (!n.has_edge(img)) return false;
    }
    for (const Edge& e : n.edge_set()) {
        bool inside = true;
        for (const Vertex& v : e)
            if (!image.count(v)) { inside = false; break; }
        if (!inside) continue;
        Edge pre;
        for (const Vertex& v : e)
            for (const auto& [src, dst] : m)
                if (dst == v) { pre.push_back(src); break; }
        if (!b.has_edge(pre)) return false;
    }
    return true;
}

// An injective vertex map that is an isomorphism onto its induced image.
// Source and target are shared immutably so copies stay cheap even when the
// target is a large ambient structure.
class Embedding {
public:
    Embedding(Structure source, Structure target, VertexMap map)
        : source_(std::make_shared<const Structure>(std::move(source))),
          target_(std::make_shared<const Structure>(std::move(target))),
          map_(std::move(map)) {}
    Embedding(std::shared_ptr<const Structure> source,
              std::shared_ptr<const Structure> target, VertexMap map)
        : source_(std::move(source)), target_(std::move(target)), map_(std::move(map)) {}

    const Structure& source() const { return *source_; }
    const Structure& target() const { return *target_; }
    const VertexMap& map() const { return map_; }

    VertexSet image() const {
        VertexSet img;
        for (const auto& [s, t] : map_) img.insert(t);
        return img;
    }

    bool valid() const { return is_embedding_map(*source_, *target_, map_); }

private:
    std::shared_ptr<const Structure> source_;
    std::shared_ptr<const Structure> target_;
    VertexMap map_;
};

namespace detail {

struct EmbeddingSearch {
    const Structure& b;
    const Structure& n;
    std::vector<Vertex> order;    // unassigned source vertices, sorted
    std::vector<Vertex> targets;  // target vertices, sorted
    std::map<Vertex, std::vector<const Edge*>> edges_at_b;
    std::map<Vertex, std::vector<const Edge*>> edges_at_n;
    VertexMap assign;
    VertexMap inverse;
    const std::function<bool(const VertexMap&)>& visit;
    bool stopped = false;

    EmbeddingSearch(const Structure& b_, const Structure& n_,
                    const std::function<bool(const VertexMap&)>& visit_)
        : b(b_), n(n_), visit(visit_) {
        for (const Vertex& v : b.vertex_set()) edges_at_b[v];
        for (const Vertex& v : n.vertex_set()) edges_at_n[v];
        for (const Edge& e : b.edge_set())
            for (const Vertex& v : e) edges_at_b[v].push_back(&e);
        for (const Edge& e : n.edge_set())
            for (const Vertex& v : e) edges_at_n[v].push_back(&e);
        targets = n.vertices();
    }

    // Checks the two edge directions touching the newly assigned pair v -> w:
    // every source edge at v whose members are all assigned must land on a
    // target edge, and every target edge at w inside the current image must
    // pull back to a source edge.
    bool consistent(const Vertex& v, const Vertex& w) const {
        for (const Edge* e : edges_at_b.at(v)) {
            Edge img;
            bool ready = true;
            for (const Vertex& x : *e) {
                if (x == v) img.push_back(w);
                else {
                    auto it = assign.find(x);
                    if (it == assign.end()) { ready = false; break; }
                    img.push_back(it->second);
                }
            }
            if (!ready) continue;
            std::sort(img.begin(), img.end());
            if (!n.edge_set().count(img)) return false;
        }
        for (const Edge* e : edges_at_n.at(w)) {
            Edge pre;
            bool inside = true;
            for (const Vertex& x : *e) {
                if (x == w) { pre.push_back(v); continue; }
                auto it = inverse.find(x);
                if (it == inverse.end()) { inside = false; break; }
                pre.push_back(it->second);
            }
            if (!inside) continue;
            std::sort(pre.begin(), pre.end());
            if (!b.edge_set().count(pre)) return false;
        }
        return true;
    }

    // Any valid image of v must co-occur, inside some target edge, with the
    // images of v's already-assigned edge mates. Candidates are read off the
    // most-constrained such source edge; vertices skipped here would fail
    // the consistency check once that edge completes, so the sequence of
    // visited embeddings is unchanged. Falls back to every target vertex
    // when no edge at v has assigned mates yet.
    std::vector<Vertex> candidates_for(const Vertex& v) const {
        const Edge* best = nullptr;
        std::size_t best_assigned = 0;
        for (const Edge* e : edges_at_b.at(v)) {
            std::size_t count = 0;
            for (const Vertex& x : *e)
                if (x != v && assign.count(x)) ++count;
            if (count > best_assigned) {
                best_assigned = count;
                best = e;
            }
        }
        if (!best) return targets;

        // Walk the target edges at one assigned mate's image and collect the
        // slots not taken by the other assigned images.
        Vertex anchor;
        std::set<Vertex> mates;
        for (const Vertex& x : *best) {
            if (x == v || !assign.count(x)) continue;
            anchor = assign.at(x);
            mates.insert(anchor);
        }
        std::set<Vertex> seen;
        for (const Edge* e : edges_at_n.at(anchor)) {
            std::size_t found = 0;
            for (const Vertex& y : *e)
                if (mates.count(y)) ++found;
            if (found < mates.size()) continue;
            for (const Vertex& y : *e)
                if (!mates.count(y)) seen.insert(y);
        }
        return std::vector<Vertex>(seen.begin(), seen.end());
    }

    void run(std::size_t pos) {
        if (stopped) return;
        if (pos == order.size()) {
            if (!visit(assign)) stopped = true;
            return;
        }
        const Vertex& v = order[pos];
        std::size_t vdeg = edges_at_b.at(v).size();
        for (const Vertex& w : candidates_for(v)) {
            if (inverse.count(w)) continue;
            if (edges_at_n.at(w).size() < vdeg) continue;
            if (!consistent(v, w)) continue;
            assign[v] = w;
            inverse[w] = v;
            run(pos + 1);
            inverse.erase(w);
            assign.erase(v);
            if (stopped) return;
        }
    }
};

}  // namespace detail

// Visits every embedding of B into N extending `fix`, in lexicographic order
// of the assignment of B's sorted vertices. The callback returns false to
// stop early; the function returns true iff visitation ran to completion.
inline bool for_each_embedding(const Structure& b, const Structure& n, const VertexMap& fix,
                               const std::function<bool(const VertexMap&)>& visit) {
    if (b.arity() != n.arity())
        throw InputError("embedding between structures of different arity");
    detail::EmbeddingSearch search(b, n, visit);
    std::set<Vertex> fixed_images;
    for (const auto& [src, dst] : fix) {
        if (!b.has_vertex(src))
            throw InputError("embedding fix names unknown source vertex: " + src);
        if (!n.has_vertex(dst))
            throw InputError("embedding fix names unknown target vertex: " + dst);
        if (!fixed_images.insert(dst).second)
            throw InputError("embedding fix is not injective at " + dst);
    }
    // Seed assignments one at a time so the incremental consistency check
    // also validates the fixed part against both structures.
    for (const auto& [src, dst] : fix) {
        if (search.edges_at_n.at(dst).size() < search.edges_at_b.at(src).size()) return true;
        if (!search.consistent(src, dst)) return true;
        search.assign[src] = dst;
        search.inverse[dst] = src;
    }
    for (const Vertex& v : b.vertex_set())
        if (!fix.count(v)) search.order.push_back(v);
    search.run(0);
    return !search.stopped;
}

// All embeddings of B into N extending `fix`, in deterministic (lexicographic)
// order. Intended for desk-scale calls; hot paths use for_each_embedding.
inline std::vector<Embedding> enumerate_embeddings(const Structure& b, const Structure& n,
                                                   const VertexMap& fix = {}) {
    auto bs = std::make_shared<const Structure>(b);
    auto ns = std::make_shared<const Structure>(n);
    std::vector<Embedding> out;
    for_each_embedding(b, n, fix, [&](const VertexMap& m) {
        out.emplace_back(bs, ns, m);
        return true;
    });
    return out;
}

// Lexicographically least isomorphism between S and T, if one exists.
inline std::optional<Embedding> isomorphism_witness(const Structure& s, const Structure& t) {
    if (s.arity() != t.arity())
        throw InputError("isomorphism between structures of different arity");
    if (s.size() != t.size() || s.edge_count() != t.edge_count()) return std::nullopt;
    std::multiset<std::size_t> sd, td;
    for (const Vertex& v : s.vertex_set()) sd.insert(s.degree(v));
    for (const Vertex& v : t.vertex_set()) td.insert(t.degree(v));
    if (sd != td) return std::nullopt;
    std::optional<VertexMap> found;
    for_each_embedding(s, t, {}, [&](const VertexMap& m) {
        found = m;
        return false;
    });
    if (!found) return std::nullopt;
    return Embedding(s, t, *found);
}

inline bool is_isomorphic(const Structure& s, const Structure& t) {
    return isomorphism_witness(s, t).has_value();
}

namespace detail {

// Connected components under "share an edge"; isolated vertices come out as
// singletons. Deterministic: components ordered by least vertex.
inline std::vector<VertexSet> edge_components(const Structure& s) {
    std::map<Vertex, Vertex> parent;
    std::function<Vertex(const Vertex&)> find = [&](const Vertex& v) -> Vertex {
        Vertex r = v;
        while (parent[r] != r) r = parent[r];
        Vertex c = v;
        while (parent[c] != c) { Vertex nx = parent[c]; parent[c] = r; c = nx; }
        return r;
    };
    for (const Vertex& v : s.vertex_set()) parent[v] = v;
    for (const Edge& e : s.edge_set()) {
        Vertex r = find(e[0]);
        for (std::size_t i = 1; i < e.size(); ++i) {
            Vertex ri = find(e[i]);
            if (ri != r) parent[ri] = r;
        }
    }
    std::map<Vertex, VertexSet> groups;
    for (const Vertex& v : s.vertex_set()) groups[find(v)].insert(v);
    std::vector<VertexSet> out;
    for (auto& [root, grp] : groups) out.push_back(std::move(grp));
    return out;
}

inline bool is_acyclic_binary_component(const Structure& s, const VertexSet& comp) {
    if (s.arity() != 2) return false;
    std::size_t inside = 0;
    for (const Edge& e : s.edge_set())
        if (comp.count(e[0]) && comp.count(e[1])) ++inside;
    return inside + 1 == comp.size();
}

// Rooted tree encoding: leaf = "()", otherwise children encodings sorted and
// concatenated inside parentheses.
inline std::string ahu_encode(const std::map<Vertex, std::vector<Vertex>>& adj,
                              const Vertex& root, const Vertex& from) {
    std::vector<std::string> kids;
    for (const Vertex& w : adj.at(root))
        if (w != from) kids.push_back(ahu_encode(adj, w, root));
    std::sort(kids.begin(), kids.end());
    std::string out = "(";
    for (const std::string& k : kids) out += k;
    out += ")";
    return out;
}

// Canonical string of one acyclic binary component, rooted at its center
// (one center) or at the sorted pair of center encodings (two centers).
inline std::string tree_component_canon(const Structure& s, const VertexSet& comp) {
    if (comp.size() == 1) return "v";
    std::map<Vertex, std::vector<Vertex>> adj;
    for (const Vertex& v : comp) adj[v] = {};
    for (const Edge& e : s.edge_set())
        if (comp.count(e[0]) && comp.count(e[1])) {
            adj[e[0]].push_back(e[1]);
            adj[e[1]].push_back(e[0]);
        }
    // Strip leaves layer by layer until one or two centers remain.
    std::map<Vertex, std::size_t> deg;
    for (auto& [v, nb] : adj) deg[v] = nb.size();
    VertexSet alive(comp);
    std::vector<Vertex> layer;
    for (const Vertex& v : comp)
        if (deg[v] <= 1) layer.push_back(v);
    while (alive.size() > 2) {
        std::vector<Vertex> next;
        for (const Vertex& v : layer) {
            alive.erase(v);
            for (const Vertex& w : adj[v])
                if (alive.count(w) && --deg[w] == 1) next.push_back(w);
        }
        layer = std::move(next);
    }
    std::vector<Vertex> centers(alive.begin(), alive.end());
    if (centers.size() == 1) return "t1:" + ahu_encode(adj, centers[0], centers[0]);
    std::string a = ahu_encode(adj, centers[0], centers[1]);
    std::string b = ahu_encode(adj, centers[1], centers[0]);
    if (b < a) std::swap(a, b);
    return "t2:" + a + b;
}

// Exact lexicographically-least adjacency encoding over all orderings of the
// component, with prefix pruning. Row i lists, for each edge whose latest
// member is position i, the earlier positions it touches.
struct LexMinOrdering {
    int arity;
    std::vector<std::vector<int>> edges;  // edges as index lists into verts
    std::size_t nverts;
    std::vector<std::vector<std::vector<int>>> best;  // best[i] = row i
    bool have_best = false;
    std::vector<int> pos_of;   // vertex index -> position, -1 if unplaced
    std::vector<int> vert_at;  // position -> vertex index
    std::vector<std::vector<std::vector<int>>> rows;

    std::vector<std::vector<int>> row_for(int vidx, std::size_t position) const {
        std::vector<std::vector<int>> row;
        for (const auto& e : edges) {
            bool has_v = false, all_placed = true;
            int latest = -1;
            for (int m : e) {
                if (m == vidx) { has_v = true; continue; }
                if (pos_of[m] < 0) { all_placed = false; break; }
                latest = std::max(latest, pos_of[m]);
            }
            if (!has_v || !all_placed) continue;
            (void)position;
            std::vector<int> touched;
            for (int m : e)
                if (m != vidx) touched.push_back(pos_of[m]);
            std::sort(touched.begin(), touched.end());
            row.push_back(std::move(touched));
        }
        std::sort(row.begin(), row.end());
        return row;
    }

    // cmp < 0: current prefix already better than best; 0: equal so far.
    void search(std::size_t position, int cmp) {
        if (position == nverts) {
            if (!have_best || cmp < 0) {
                best = rows;
                have_best = true;
            }
            return;
        }
        for (std::size_t vidx = 0; vidx < nverts; ++vidx) {
            if (pos_of[vidx] >= 0) continue;
            auto row = row_for(static_cast<int>(vidx), position);
            int here = cmp;
            if (here == 0 && have_best) {
                if (row < best[position]) here = -1;
                else if (best[position] < row) continue;
            }
            pos_of[vidx] = static_cast<int>(position);
            vert_at[position] = static_cast<int>(vidx);
            rows[position] = std::move(row);
            search(position + 1, here);
            pos_of[vidx] = -1;
        }
    }
};

inline std::string general_component_canon(const Structure& s, const VertexSet& comp) {
    std::vector<Vertex> verts(comp.begin(), comp.end());
    std::map<Vertex, int> idx;
    for (std::size_t i = 0; i < verts.size(); ++i) idx[verts[i]] = static_cast<int>(i);
    LexMinOrdering lm;
    lm.arity = s.arity();
    lm.nverts = verts.size();
    for (const Edge& e : s.edge_set()) {
        bool inside = true;
        for (const Vertex& v : e)
            if (!comp.count(v)) { inside = false; break; }
        if (!inside) continue;
        std::vector<int> ei;
        for (const Vertex& v : e) ei.push_back(idx[v]);
        lm.edges.push_back(std::move(ei));
    }
    lm.pos_of.assign(lm.nverts, -1);
    lm.vert_at.assign(lm.nverts, -1);
    lm.rows.assign(lm.nverts, {});
    lm.search(0, 0);
    std::string out = "g" + std::to_string(lm.nverts) + ":";
    for (std::size_t i = 0; i < lm.nverts; ++i) {
        out += "[";
        for (const auto& touched : lm.best[i]) {
            out += "(";
            for (std::size_t j = 0; j < touched.size(); ++j) {
                if (j) out += ",";
                out += std::to_string(touched[j]);
            }
            out += ")";
        }
        out += "]";
    }
    return out;
}

}  // namespace detail

// Isomorphism-invariant encoding: equal strings exactly when the structures
// are isomorphic. Acyclic binary components use rooted-tree encodings; other
// components use an exact least-ordering search, so keep those at desk scale.
inline std::string canonical_form(const Structure& s) {
    if (s.empty()) return "a" + std::to_string(s.arity()) + "|empty";
    std::vector<std::string> parts;
    for (const VertexSet& comp : detail::edge_components(s)) {
        if (comp.size() == 1) parts.push_back("v");
        else if (detail::is_acyclic_binary_component(s, comp))
            parts.push_back(detail::tree_component_canon(s, comp));
        else parts.push_back(detail::general_component_canon(s, comp));
    }
    std::sort(parts.begin(), parts.end());
    std::string out = "a" + std::to_string(s.arity()) + "|";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ";";
        out += parts[i];
    }
    return out;
}

}  // namespace genstruct
