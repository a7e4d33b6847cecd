#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "predimension.hpp"
#include "report.hpp"
#include "structure.hpp"

namespace genstruct {

namespace detail {

inline void require_binary(const Structure& g, const std::string& who) {
    if (g.arity() != 2) throw InputError(who + ": expected a binary structure");
}

// The vertex names in sorted order plus integer union-find state.
struct IndexedForestView {
    std::vector<Vertex> verts;
    std::map<Vertex, int> id;
    std::vector<int> parent;
    bool acyclic = true;

    explicit IndexedForestView(const Structure& g) {
        verts.assign(g.vertex_set().begin(), g.vertex_set().end());
        for (std::size_t i = 0; i < verts.size(); ++i) id[verts[i]] = static_cast<int>(i);
        parent.resize(verts.size());
        for (std::size_t i = 0; i < verts.size(); ++i) parent[i] = static_cast<int>(i);
        for (const Edge& e : g.edge_set()) {
            if (e[0] == e[1]) {
                acyclic = false;
                continue;
            }
            int ra = find(id[e[0]]), rb = find(id[e[1]]);
            if (ra == rb) acyclic = false;
            else parent[static_cast<std::size_t>(ra)] = rb;
        }
    }

    int find(int v) {
        int root = v;
        while (parent[static_cast<std::size_t>(root)] != root)
            root = parent[static_cast<std::size_t>(root)];
        while (parent[static_cast<std::size_t>(v)] != root) {
            int next = parent[static_cast<std::size_t>(v)];
            parent[static_cast<std::size_t>(v)] = root;
            v = next;
        }
        return root;
    }

    std::size_t component_count() {
        std::set<int> roots;
        for (std::size_t i = 0; i < verts.size(); ++i)
            roots.insert(find(static_cast<int>(i)));
        return roots.size();
    }
};

}  // namespace detail

inline bool is_forest(const Structure& g) {
    detail::require_binary(g, "is_forest");
    return detail::IndexedForestView(g).acyclic;
}

inline long long delta_components(const Structure& g) {
    detail::require_binary(g, "delta_components");
    detail::IndexedForestView view(g);
    if (!view.acyclic) throw InputError("delta_components: not a forest");
    return static_cast<long long>(view.component_count());
}

// True when no vertex outside the tuple is adjacent to a tuple vertex; in a
// binary structure this is exactly closedness of the tuple, because minimal
// pairs have singleton extensions there.
inline bool gamma_cl_eval(const VertexSet& abar, const Structure& n) {
    detail::require_binary(n, "gamma_cl_eval");
    for (const Vertex& v : abar)
        if (!n.has_vertex(v)) throw InputError("gamma_cl_eval: unknown vertex " + v);
    for (const Edge& e : n.edge_set()) {
        bool in0 = abar.count(e[0]) > 0;
        bool in1 = abar.count(e[1]) > 0;
        if (in0 != in1) return false;
    }
    return true;
}

inline std::vector<VertexSet> components(const Structure& g) {
    detail::require_binary(g, "components");
    detail::VertexUnion uf(g);
    for (const Edge& e : g.edge_set()) uf.join(e[0], e[1]);
    std::map<Vertex, VertexSet> groups;
    for (const Vertex& v : g.vertex_set()) groups[uf.find(v)].insert(v);
    std::vector<VertexSet> out;
    for (auto& [_, comp] : groups) out.push_back(std::move(comp));
    return out;
}

// Canonical form of a tree, hung from its center; a bicentral tree is split
// at the central edge and the two halves are combined orientation-free. Two
// trees get the same string exactly when they are isomorphic.
inline std::string canonical_tree_form(const Structure& tree) {
    detail::require_binary(tree, "canonical_tree_form");
    if (!is_forest(tree)) throw InputError("canonical_tree_form: not a forest");
    if (tree.size() == 0) throw InputError("canonical_tree_form: empty tree");
    if (delta_components(tree) != 1)
        throw InputError("canonical_tree_form: more than one component");

    std::map<Vertex, std::vector<Vertex>> adj;
    for (const Vertex& v : tree.vertex_set()) adj[v];
    for (const Edge& e : tree.edge_set()) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }

    // Peel leaves until one or two centers remain.
    std::map<Vertex, std::size_t> degree;
    for (const auto& [v, nb] : adj) degree[v] = nb.size();
    std::set<Vertex> alive(tree.vertex_set().begin(), tree.vertex_set().end());
    std::vector<Vertex> layer;
    for (const auto& [v, d] : degree)
        if (d <= 1) layer.push_back(v);
    while (alive.size() > 2) {
        std::vector<Vertex> next;
        for (const Vertex& v : layer) {
            alive.erase(v);
            for (const Vertex& w : adj[v])
                if (alive.count(w) && --degree[w] == 1) next.push_back(w);
        }
        layer = std::move(next);
    }

    std::function<std::string(const Vertex&, const Vertex&)> hang =
        [&](const Vertex& v, const Vertex& parent) {
            std::vector<std::string> kids;
            for (const Vertex& w : adj[v])
                if (w != parent) kids.push_back(hang(w, v));
            std::sort(kids.begin(), kids.end());
            std::string out = "(";
            for (const std::string& k : kids) out += k;
            return out + ")";
        };

    std::vector<Vertex> centers(alive.begin(), alive.end());
    if (centers.size() == 1) return "C" + hang(centers[0], centers[0]);
    std::string s1 = hang(centers[0], centers[1]);
    std::string s2 = hang(centers[1], centers[0]);
    if (s2 < s1) std::swap(s1, s2);
    return "E" + s1 + s2;
}

// Multiset of component types, keyed by canonical form.
inline std::map<std::string, std::size_t> forest_type_counts(const Structure& g) {
    if (!is_forest(g)) throw InputError("forest_type_counts: not a forest");
    std::map<std::string, std::size_t> counts;
    for (const VertexSet& comp : components(g))
        ++counts[canonical_tree_form(induced(g, comp))];
    return counts;
}

// True when N contains a closed copy of A. Closed subsets of a forest are
// exactly the unions of whole components, so a closed copy exists precisely
// when every component type of A is available in N at least as often.
inline bool theta_eval(const Structure& a, const Structure& n) {
    detail::require_binary(a, "theta_eval");
    detail::require_binary(n, "theta_eval");
    if (!is_forest(a)) throw InputError("theta_eval: the pattern is not a forest");
    if (!is_forest(n)) throw InputError("theta_eval: the host is not a forest");
    auto need = forest_type_counts(a);
    auto have = forest_type_counts(n);
    for (const auto& [type, cnt] : need) {
        auto it = have.find(type);
        if (it == have.end() || it->second < cnt) return false;
    }
    return true;
}

// All tree isomorphism types, grown one leaf at a time and deduplicated by
// canonical form. Stage s holds every type with at most s+1 vertices, so the
// stages are cumulative by construction.
class TreeCatalog {
public:
    // Trees with exactly `size` vertices, ordered by canonical form.
    const std::vector<Structure>& trees_of_size(std::size_t size) {
        if (size == 0) throw InputError("TreeCatalog: trees have at least one vertex");
        while (by_size_.size() < size) extend();
        return by_size_[size - 1];
    }

    // Every type with at most s+1 vertices.
    std::vector<const Structure*> stage(int s) {
        if (s < 0) throw InputError("TreeCatalog: negative stage");
        std::vector<const Structure*> out;
        for (std::size_t size = 1; size <= static_cast<std::size_t>(s) + 1; ++size)
            for (const Structure& t : trees_of_size(size)) out.push_back(&t);
        return out;
    }

private:
    void extend() {
        if (by_size_.empty()) {
            Structure k1(2);
            k1.add_vertex("t0");
            by_size_.push_back({k1});
            return;
        }
        const std::vector<Structure>& prev = by_size_.back();
        std::map<std::string, Structure> grown;
        for (const Structure& t : prev) {
            Vertex fresh = "t" + std::to_string(t.size());
            for (const Vertex& at : t.vertex_set()) {
                Structure bigger = t;
                bigger.add_vertex(fresh);
                bigger.add_edge({at, fresh});
                grown.emplace(canonical_tree_form(bigger), std::move(bigger));
            }
        }
        std::vector<Structure> next;
        for (auto& [_, t] : grown) next.push_back(std::move(t));
        by_size_.push_back(std::move(next));
    }

    std::vector<std::vector<Structure>> by_size_;
};

// The i-th member of the witness chain: one copy of every stage s ≤ i, so
// each tree type of size σ appears i+2−σ times and every multiplicity grows
// without bound along the chain. An optional schedule overrides how many
// copies of each stage are taken.
inline Structure build_pseudofinite_witness(TreeCatalog& catalog, int i,
                                            const std::vector<int>& schedule = {}) {
    if (i < 0) throw InputError("build_pseudofinite_witness: negative index");
    if (!schedule.empty() && schedule.size() != static_cast<std::size_t>(i) + 1)
        throw InputError("build_pseudofinite_witness: schedule must cover stages 0..i");
    Structure out(2);
    for (int s = 0; s <= i; ++s) {
        int copies = schedule.empty() ? 1 : schedule[static_cast<std::size_t>(s)];
        if (copies < 0)
            throw InputError("build_pseudofinite_witness: negative multiplicity");
        auto stage = catalog.stage(s);
        for (int rep = 0; rep < copies; ++rep)
            for (std::size_t ti = 0; ti < stage.size(); ++ti) {
                std::string prefix = "s" + std::to_string(s) + "r" + std::to_string(rep) +
                                     "t" + std::to_string(ti) + "_";
                VertexMap rename;
                for (const Vertex& v : stage[ti]->vertex_set()) rename[v] = prefix + v;
                const Structure piece = renamed(*stage[ti], rename);
                for (const Vertex& v : piece.vertex_set()) out.add_vertex(v);
                for (const Edge& e : piece.edge_set()) out.add_edge(e);
            }
    }
    return out;
}

namespace detail {

// Forests with at most `bound` vertices, as multisets of catalog trees.
// Deterministic order: lexicographic in the (size, index) sequence.
inline std::vector<std::vector<const Structure*>> forests_up_to(TreeCatalog& catalog,
                                                                int bound) {
    std::vector<const Structure*> types;
    for (int size = 1; size <= bound; ++size)
        for (const Structure& t : catalog.trees_of_size(static_cast<std::size_t>(size)))
            types.push_back(&t);
    std::vector<std::vector<const Structure*>> out;
    std::vector<const Structure*> chosen;
    std::function<void(std::size_t, int)> rec = [&](std::size_t from, int room) {
        if (!chosen.empty()) out.push_back(chosen);
        for (std::size_t ti = from; ti < types.size(); ++ti) {
            int sz = static_cast<int>(types[ti]->size());
            if (sz > room) continue;
            chosen.push_back(types[ti]);
            rec(ti, room - sz);
            chosen.pop_back();
        }
    };
    rec(0, bound);
    return out;
}

inline std::string forest_label(const std::vector<const Structure*>& forest) {
    std::map<std::string, std::size_t> counts;
    for (const Structure* t : forest) ++counts[canonical_tree_form(*t)];
    std::string label;
    for (const auto& [type, cnt] : counts) {
        if (!label.empty()) label += "+";
        if (cnt > 1) label += std::to_string(cnt) + "x";
        label += type;
    }
    return label;
}

}  // namespace detail

// Asserts acyclicity and the presence of a closed copy of every forest with
// at most size_bound vertices.
inline Report check_tuniv(const Structure& n, int size_bound) {
    detail::require_binary(n, "check_tuniv");
    Report report;
    report.title = "forest-universality";
    bool acyclic = is_forest(n);
    report.add("acyclic", acyclic);
    if (!acyclic) return report;

    auto have = forest_type_counts(n);
    TreeCatalog catalog;
    for (const auto& forest : detail::forests_up_to(catalog, size_bound)) {
        std::map<std::string, std::size_t> need;
        for (const Structure* t : forest) ++need[canonical_tree_form(*t)];
        bool okay = true;
        for (const auto& [type, cnt] : need) {
            auto it = have.find(type);
            if (it == have.end() || it->second < cnt) {
                okay = false;
                break;
            }
        }
        report.add("closed-copy[" + detail::forest_label(forest) + "]", okay);
    }
    return report;
}

// For every closed tuple and every closed extension of it within the size
// bound, a closed copy of the extension over the tuple must exist. In a
// forest the tuple is a union of components and the extension adds disjoint
// new components, so the check reduces to counting spare components by type.
inline Report check_star_homogeneity(const Structure& n, int size_bound) {
    detail::require_binary(n, "check_star_homogeneity");
    Report report;
    report.title = "star-homogeneity";
    bool acyclic = is_forest(n);
    report.add("acyclic", acyclic);
    if (!acyclic) return report;

    auto have = forest_type_counts(n);
    TreeCatalog catalog;
    auto extensions = detail::forests_up_to(catalog, size_bound);

    // Base cases: the empty tuple plus every realizable forest type multiset.
    std::vector<std::vector<const Structure*>> bases;
    bases.push_back({});
    for (const auto& base : extensions) {
        std::map<std::string, std::size_t> need;
        int base_size = 0;
        for (const Structure* t : base) {
            ++need[canonical_tree_form(*t)];
            base_size += static_cast<int>(t->size());
        }
        bool realizable = true;
        for (const auto& [type, cnt] : need) {
            auto it = have.find(type);
            if (it == have.end() || it->second < cnt) {
                realizable = false;
                break;
            }
        }
        if (realizable) bases.push_back(base);
    }

    for (const auto& base : bases) {
        std::map<std::string, std::size_t> used;
        int base_size = 0;
        for (const Structure* t : base) {
            ++used[canonical_tree_form(*t)];
            base_size += static_cast<int>(t->size());
        }
        std::string base_label =
            base.empty() ? "empty" : detail::forest_label(base);
        for (const auto& ext : extensions) {
            int ext_size = 0;
            for (const Structure* t : ext) ext_size += static_cast<int>(t->size());
            if (base_size + ext_size > size_bound) continue;
            std::map<std::string, std::size_t> need;
            for (const Structure* t : ext) ++need[canonical_tree_form(*t)];
            bool okay = true;
            for (const auto& [type, cnt] : need) {
                std::size_t avail = have.count(type) ? have.at(type) : 0;
                std::size_t taken = used.count(type) ? used.at(type) : 0;
                if (avail < taken + cnt) {
                    okay = false;
                    break;
                }
            }
            report.add("over[" + base_label + "]+[" + detail::forest_label(ext) + "]",
                       okay);
        }
    }
    return report;
}

// Exact r-round back-and-forth game on two binary structures, memoized on
// the unordered position. Duplicator wins from a position iff it is a
// partial isomorphism and every pick on either side has a matching reply
// that stays winning one round down.
inline bool ef_equivalent(const Structure& g, const Structure& h, int r) {
    detail::require_binary(g, "ef_equivalent");
    detail::require_binary(h, "ef_equivalent");
    if (r < 0) throw InputError("ef_equivalent: negative rank");
    if (r > 4) throw ResourceError("ef_equivalent: rank above the desk-scale budget");

    std::vector<Vertex> gv(g.vertex_set().begin(), g.vertex_set().end());
    std::vector<Vertex> hv(h.vertex_set().begin(), h.vertex_set().end());
    auto adjacency = [](const Structure& s, const std::vector<Vertex>& vs) {
        std::map<Vertex, int> id;
        for (std::size_t i = 0; i < vs.size(); ++i) id[vs[i]] = static_cast<int>(i);
        std::vector<std::vector<char>> adj(vs.size(), std::vector<char>(vs.size(), 0));
        for (const Edge& e : s.edge_set()) {
            adj[static_cast<std::size_t>(id[e[0]])][static_cast<std::size_t>(id[e[1]])] = 1;
            adj[static_cast<std::size_t>(id[e[1]])][static_cast<std::size_t>(id[e[0]])] = 1;
        }
        return adj;
    };
    const auto adj_g = adjacency(g, gv);
    const auto adj_h = adjacency(h, hv);

    using Position = std::vector<std::pair<int, int>>;
    std::map<std::pair<int, Position>, bool> memo;
    constexpr std::size_t kStateBudget = 1u << 20;

    auto consistent = [&](const Position& pos, int a, int b) {
        for (const auto& [x, y] : pos) {
            if ((x == a) != (y == b)) return false;
            bool eg = adj_g[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
            bool eh = adj_h[static_cast<std::size_t>(y)][static_cast<std::size_t>(b)];
            if (eg != eh) return false;
        }
        return true;
    };

    std::function<bool(int, Position&)> wins = [&](int rounds, Position& pos) -> bool {
        if (rounds == 0) return true;
        auto key = std::make_pair(rounds, pos);
        auto found = memo.find(key);
        if (found != memo.end()) return found->second;
        if (memo.size() > kStateBudget)
            throw ResourceError("ef_equivalent: state budget exhausted");

        bool dup = true;
        // Repeating a mapped vertex forces the mapped reply and burns the
        // round, so Spoiler only gains from fresh picks.
        for (std::size_t a = 0; a < gv.size() && dup; ++a) {
            bool mapped = false;
            for (const auto& [x, _] : pos) mapped = mapped || x == static_cast<int>(a);
            if (mapped) continue;
            bool reply = false;
            for (std::size_t b = 0; b < hv.size() && !reply; ++b) {
                if (!consistent(pos, static_cast<int>(a), static_cast<int>(b))) continue;
                pos.emplace_back(static_cast<int>(a), static_cast<int>(b));
                std::sort(pos.begin(), pos.end());
                Position saved = pos;
                reply = wins(rounds - 1, pos);
                pos = std::move(saved);
                pos.erase(std::find(pos.begin(), pos.end(),
                                    std::make_pair(static_cast<int>(a),
                                                   static_cast<int>(b))));
            }
            dup = reply;
        }
        for (std::size_t b = 0; b < hv.size() && dup; ++b) {
            bool mapped = false;
            for (const auto& [_, y] : pos) mapped = mapped || y == static_cast<int>(b);
            if (mapped) continue;
            bool reply = false;
            for (std::size_t a = 0; a < gv.size() && !reply; ++a) {
                if (!consistent(pos, static_cast<int>(a), static_cast<int>(b))) continue;
                pos.emplace_back(static_cast<int>(a), static_cast<int>(b));
                std::sort(pos.begin(), pos.end());
                Position saved = pos;
                reply = wins(rounds - 1, pos);
                pos = std::move(saved);
                pos.erase(std::find(pos.begin(), pos.end(),
                                    std::make_pair(static_cast<int>(a),
                                                   static_cast<int>(b))));
            }
            dup = reply;
        }
        memo.emplace(std::make_pair(rounds, pos), dup);
        return dup;
    };

    Position start;
    return wins(r, start);
}

// A forest in which every tree type with at most s vertices occurs at least
// m times, with extra multiplicities drawn from the generator.
inline Structure sample_spencer_forest(TreeCatalog& catalog, int s, int m,
                                       std::mt19937_64& rng) {
    if (s < 1 || m < 0) throw InputError("sample_spencer_forest: bad parameters");
    Structure out(2);
    std::uniform_int_distribution<int> extra(0, 3);
    int piece = 0;
    for (int size = 1; size <= s; ++size)
        for (const Structure& t : catalog.trees_of_size(static_cast<std::size_t>(size))) {
            int copies = m + extra(rng);
            for (int rep = 0; rep < copies; ++rep) {
                std::string prefix = "p" + std::to_string(piece++) + "_";
                VertexMap rename;
                for (const Vertex& v : t.vertex_set()) rename[v] = prefix + v;
                const Structure named = renamed(t, rename);
                for (const Vertex& v : named.vertex_set()) out.add_vertex(v);
                for (const Edge& e : named.edge_set()) out.add_edge(e);
            }
        }
    return out;
}

// Sweeps multiplicity recipes below (s, m): for each (s', m') it samples
// forest pairs that agree on the recipe but differ in the extra counts, and
// records whether every sampled pair is r-equivalent. The smallest recipe
// with no distinguishable sample is reported.
inline Report spencer_desk_check(int s, int m, int r, int pairs_per_recipe = 5,
                                 unsigned long long seed = 0) {
    if (s < 1 || m < 1) throw InputError("spencer_desk_check: bad sweep bounds");
    if (pairs_per_recipe < 1)
        throw InputError("spencer_desk_check: need at least one pair per recipe");
    Report report;
    report.title = "component-multiplicity-sweep";
    TreeCatalog catalog;
    std::optional<std::pair<int, int>> sufficient;
    for (int sp = 1; sp <= s; ++sp)
        for (int mp = 1; mp <= m; ++mp) {
            std::mt19937_64 rng(seed * 1000003ull +
                                static_cast<unsigned long long>(sp) * 1009ull +
                                static_cast<unsigned long long>(mp));
            int equivalent = 0;
            std::string witness;
            for (int i = 0; i < pairs_per_recipe; ++i) {
                Structure a = sample_spencer_forest(catalog, sp, mp, rng);
                Structure b = sample_spencer_forest(catalog, sp, mp, rng);
                if (ef_equivalent(a, b, r)) ++equivalent;
                else if (witness.empty())
                    witness = "pair " + std::to_string(i) + " distinguished";
            }
            bool all = equivalent == pairs_per_recipe;
            if (all && !sufficient) sufficient = {sp, mp};
            report.add("recipe-s" + std::to_string(sp) + "-m" + std::to_string(mp),
                       true,
                       std::to_string(equivalent) + "/" +
                           std::to_string(pairs_per_recipe) + " equivalent" +
                           (witness.empty() ? "" : "; " + witness));
        }
    report.add("sufficient-recipe-found", sufficient.has_value(),
               sufficient ? "s=" + std::to_string(sufficient->first) +
                                ",m=" + std::to_string(sufficient->second)
                          : "none in range");
    return report;
}

}  // namespace genstruct
