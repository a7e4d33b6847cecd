#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "amalgam.hpp"
#include "json_io.hpp"
#include "minimal_pairs.hpp"
#include "predimension.hpp"
#include "report.hpp"
#include "structure.hpp"

namespace genstruct {

// A realized semantic code: the vertex v and attachment gadgets witnessing
// X = the k-subsets of S whose members relate to v.
struct CodeHandle {
    Vertex code_vertex;
    int k = 0;
    VertexSet scope;                 // S
    std::vector<VertexSet> family;   // X, sorted, duplicates merged
    std::vector<Vertex> own_gadget;  // the code vertex's singleton-base gadget
    std::map<VertexSet, std::vector<Vertex>> gadgets;  // per Y in X
};

struct HomogeneityOutcome {
    std::optional<Embedding> embedding;
    std::string refusal;  // nonempty exactly when no embedding
    std::optional<VertexSet> violator;

    bool accepted() const { return embedding.has_value(); }
};

// A growing chain A0 ≤* A1 ≤* … of class members with a replayable task
// ledger. Every mutation goes through free joins and re-verifies both chain
// invariants on append, so a constructed approximation is closed-correct by
// construction and by check. Single-writer: mutations must be serialized by
// the caller; const queries are safe between mutations.
class Approximation {
public:
    static Approximation new_approximation(Structure seed, ClassParams params) {
        if (seed.arity() != params.arity)
            throw InputError("new_approximation: seed arity does not match params");
        for (const Vertex& v : seed.vertex_set())
            if (!v.empty() && v[0] == '#')
                throw InputError("new_approximation: vertex ids may not start with '#'");
        auto check = is_in_class(seed, params);
        if (!check.in_class)
            throw InputError("new_approximation: seed is not a class member");
        return Approximation(std::move(seed), std::move(params));
    }

    const ClassParams& params() const { return params_; }
    const Structure& current() const { return chain_.back(); }
    const std::vector<Structure>& chain() const { return chain_; }

    struct LedgerEntry {
        std::string kind;  // "universal", "homogeneous", or "code"
        Json payload;
        std::vector<Vertex> new_vertices;
    };
    const std::vector<LedgerEntry>& ledger() const { return ledger_; }
    long long fresh_counter() const { return fresh_counter_; }

    // Returns a closed copy of A in the current structure, inserting a fresh
    // one via a disjoint free join when none exists (or when the caller
    // explicitly wants a fresh disjoint copy). The returned embedding is the
    // lexicographically least among closed copies when searching.
    Embedding ensure_universal(const Structure& a, bool require_fresh = false) {
        if (a.arity() != params_.arity)
            throw InputError("ensure_universal: arity mismatch");
        if (!is_in_class(a, params_).in_class)
            throw InputError("ensure_universal: the requested structure is not a class member");

        if (!require_fresh) {
            std::optional<VertexMap> found = find_closed_copy(a);
            if (found) return Embedding(a, current(), *found);
        }

        VertexMap rename;
        std::vector<Vertex> fresh_ids;
        for (const Vertex& v : a.vertex_set()) {
            Vertex f = fresh_vertex();
            rename[v] = f;
            fresh_ids.push_back(f);
        }
        Structure piece = renamed(a, rename);
        Structure next = free_join(current(), piece, {});
        append_current(std::move(next));
        if (!detail::is_closed_unchecked(piece.vertex_set(), current(), params_).closed)
            throw InternalError("ensure_universal: fresh copy is not closed after joining");

        LedgerEntry entry;
        entry.kind = "universal";
        entry.payload["structure"] = structure_to_json(a);
        entry.payload["require_fresh"] = require_fresh;
        entry.new_vertices = fresh_ids;
        ledger_.push_back(std::move(entry));
        return Embedding(a, current(), rename);
    }

    // Realizes B over an already-closed image of A inside the current
    // structure. The two ordered vertex lists supply the correspondence:
    // a_in_b[i] maps to a_image[i]. Refuses (soft) when A's image is not
    // closed in the current structure; other precondition violations throw.
    HomogeneityOutcome ensure_homogeneous(const std::vector<Vertex>& a_image,
                                          const Structure& b,
                                          const std::vector<Vertex>& a_in_b) {
        if (b.arity() != params_.arity)
            throw InputError("ensure_homogeneous: arity mismatch");
        if (a_image.size() != a_in_b.size())
            throw InputError("ensure_homogeneous: correspondence lists differ in length");
        VertexSet image_set(a_image.begin(), a_image.end());
        VertexSet base_set(a_in_b.begin(), a_in_b.end());
        if (image_set.size() != a_image.size() || base_set.size() != a_in_b.size())
            throw InputError("ensure_homogeneous: correspondence lists repeat a vertex");
        for (const Vertex& v : a_image)
            if (!current().has_vertex(v))
                throw InputError("ensure_homogeneous: unknown vertex in the image list: " + v);
        for (const Vertex& v : a_in_b)
            if (!b.has_vertex(v))
                throw InputError("ensure_homogeneous: unknown vertex in the base list: " + v);
        if (!is_in_class(b, params_).in_class)
            throw InputError("ensure_homogeneous: the extension is not a class member");
        if (!detail::is_closed_unchecked(base_set, b, params_).closed)
            throw InputError("ensure_homogeneous: the base is not closed in the extension");

        VertexMap corr;
        for (std::size_t i = 0; i < a_in_b.size(); ++i) corr[a_in_b[i]] = a_image[i];
        Structure base_in_b = induced(b, base_set);
        Structure base_in_cur = induced(current(), image_set);
        if (!is_embedding_map(base_in_b, base_in_cur, corr) ||
            base_in_b.size() != base_in_cur.size())
            throw InputError(
                "ensure_homogeneous: the supplied correspondence is not an isomorphism "
                "of the base structures");

        auto closed = detail::is_closed_unchecked(image_set, current(), params_);
        if (!closed.closed) {
            HomogeneityOutcome out;
            out.refusal = "the image of the base is not closed in the current structure";
            out.violator = closed.violator;
            return out;
        }

        VertexMap rename = corr;
        std::vector<Vertex> fresh_ids;
        for (const Vertex& v : b.vertex_set()) {
            if (base_set.count(v)) continue;
            Vertex f = fresh_vertex();
            rename[v] = f;
            fresh_ids.push_back(f);
        }
        if (!fresh_ids.empty()) {
            Structure piece = renamed(b, rename);
            Structure next = free_join(current(), piece, image_set);
            append_current(std::move(next));
            if (!detail::is_closed_unchecked(piece.vertex_set(), current(), params_).closed)
                throw InternalError("ensure_homogeneous: extension image is not closed");
        }

        LedgerEntry entry;
        entry.kind = "homogeneous";
        entry.payload["a_image"] = a_image;
        entry.payload["structure"] = structure_to_json(b);
        entry.payload["a_in_b"] = a_in_b;
        entry.new_vertices = fresh_ids;
        ledger_.push_back(std::move(entry));

        HomogeneityOutcome out;
        out.embedding = Embedding(b, current(), rename);
        return out;
    }

    // Attaches a fresh code vertex v witnessing the family X ⊆ [S]^k: v gets
    // its own singleton-base gadget, plus one canonical gadget over Y ∪ {v}
    // per Y in X. Decoding is re-run internally and must return exactly X.
    CodeHandle realize_code(const VertexSet& s, int k, const std::vector<VertexSet>& x) {
        if (params_.arity != 3) throw InputError("realize_code: needs arity 3");
        if (k < 1) throw InputError("realize_code: k must be at least 1");
        for (const Vertex& v : s)
            if (!current().has_vertex(v))
                throw InputError("realize_code: scope names unknown vertex " + v);
        std::set<VertexSet> family;
        for (const VertexSet& y : x) {
            if (y.size() != static_cast<std::size_t>(k))
                throw InputError("realize_code: family member of the wrong size");
            if (!is_subset(y, s))
                throw InputError("realize_code: family member outside the scope");
            family.insert(y);
        }

        CodeHandle handle;
        handle.k = k;
        handle.scope = s;
        handle.family.assign(family.begin(), family.end());
        handle.code_vertex = fresh_vertex();
        const Vertex& v = handle.code_vertex;

        // Shared part: everything the gadget edges will touch besides the
        // fresh vertices.
        VertexSet shared;
        for (const VertexSet& y : handle.family) shared.insert(y.begin(), y.end());
        Structure piece = induced(current(), shared);
        piece.add_vertex(v);
        std::vector<Vertex> fresh_ids = {v};

        auto attach_gadget = [&](const std::vector<Vertex>& base) {
            std::vector<Vertex> cs;
            std::size_t want = (base.size() == 1) ? 3 : base.size();
            for (std::size_t i = 0; i < want; ++i) {
                Vertex f = fresh_vertex();
                piece.add_vertex(f);
                cs.push_back(f);
                fresh_ids.push_back(f);
            }
            if (base.size() == 1) {
                piece.add_edge({base[0], cs[0], cs[1]});
                piece.add_edge({base[0], cs[0], cs[2]});
                piece.add_edge({base[0], cs[1], cs[2]});
            } else {
                for (std::size_t i = 0; i + 1 < base.size(); ++i)
                    piece.add_edge({base[i], cs[i], cs[i + 1]});
                piece.add_edge({base[base.size() - 1], cs[0], cs[base.size() - 1]});
            }
            return cs;
        };

        handle.own_gadget = attach_gadget({v});
        for (const VertexSet& y : handle.family) {
            VertexSet base_set = y;
            base_set.insert(v);
            std::vector<Vertex> base(base_set.begin(), base_set.end());
            handle.gadgets[y] = attach_gadget(base);
        }

        Structure next = free_join(current(), piece, shared);
        append_current(std::move(next));

        auto decoded = decode_code(v, s, k);
        if (decoded != handle.family)
            throw InternalError("realize_code: decoding the fresh code disagrees with "
                                "the requested family");

        LedgerEntry entry;
        entry.kind = "code";
        entry.payload["scope"] = Json::array();
        for (const Vertex& sv : s) entry.payload["scope"].push_back(sv);
        entry.payload["k"] = k;
        entry.payload["family"] = Json::array();
        for (const VertexSet& y : handle.family) {
            Json jy = Json::array();
            for (const Vertex& yv : y) jy.push_back(yv);
            entry.payload["family"].push_back(jy);
        }
        entry.new_vertices = fresh_ids;
        ledger_.push_back(std::move(entry));
        return handle;
    }

    // The k-subsets Y of S for which the current structure contains a
    // zero-biminimal extension of Y ∪ {v} by exactly k+1 extra vertices.
    // The search is body-driven: in a valid extension the extra part is
    // edge-connected and meets an edge at v, so candidate bodies come from
    // bounded connected growth out of v's edge partners. A body survives
    // only if every one of its vertices sits in an edge with a second body
    // vertex and no members outside the scope (such an edge is forced for
    // each vertex, or some proper subset of the body would drop to the base
    // predimension), and base candidates are read off those same edges, so
    // almost every stray body is dismissed by integer arithmetic before any
    // full classification runs.
    std::vector<VertexSet> decode_code(const Vertex& v, const VertexSet& s, int k) const {
        if (!current().has_vertex(v)) throw InputError("decode_code: unknown vertex " + v);
        for (const Vertex& sv : s)
            if (!current().has_vertex(sv))
                throw InputError("decode_code: scope names unknown vertex " + sv);
        if (k < 1) throw InputError("decode_code: k must be at least 1");
        const std::size_t body_size = static_cast<std::size_t>(k) + 1;

        const Structure& cur = current();
        std::vector<Vertex> verts(cur.vertex_set().begin(), cur.vertex_set().end());
        std::map<Vertex, int> vid;
        for (std::size_t i = 0; i < verts.size(); ++i) vid[verts[i]] = static_cast<int>(i);
        const int v_id = vid[v];

        std::vector<char> in_scope(verts.size(), 0);
        for (const Vertex& sv : s)
            if (sv != v) in_scope[static_cast<std::size_t>(vid[sv])] = 1;

        std::vector<std::vector<int>> edges;
        for (const Edge& e : cur.edge_set()) {
            std::vector<int> ids;
            for (const Vertex& a : e) ids.push_back(vid[a]);
            edges.push_back(std::move(ids));
        }
        std::vector<std::vector<int>> nbr(verts.size());
        std::vector<std::vector<int>> edges_at(verts.size());
        for (std::size_t ei = 0; ei < edges.size(); ++ei)
            for (int a : edges[ei]) {
                edges_at[static_cast<std::size_t>(a)].push_back(static_cast<int>(ei));
                for (int b : edges[ei])
                    if (a != b) nbr[static_cast<std::size_t>(a)].push_back(b);
            }
        for (auto& list : nbr) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
        }

        // Partial connected sets are deduplicated as packed sorted index
        // tuples; hosts stay well under the 2^12 id budget per slot.
        if (verts.size() >= (1u << 12))
            throw ResourceError("decode_code: structure too large for the body search");
        auto pack = [](const std::vector<int>& p) {
            unsigned long long key = 0;
            for (int x : p) key = (key << 12) | static_cast<unsigned>(x + 1);
            return key;
        };

        std::vector<char> in_body(verts.size(), 0);
        std::set<VertexSet> accepted;
        const bool unit_alpha = params_.alpha == Rational(1);

        auto process_body = [&](const std::vector<int>& body) {
            for (int u : body) in_body[static_cast<std::size_t>(u)] = 1;
            struct Cleanup {
                const std::vector<int>& b;
                std::vector<char>& flags;
                ~Cleanup() {
                    for (int u : b) flags[static_cast<std::size_t>(u)] = 0;
                }
            } cleanup{body, in_body};

            // At unit alpha, an edge of the extension with a single body
            // vertex u collapses {u} to the base predimension, so every
            // inside edge meets the body twice and every body vertex needs
            // such an edge. These facts admit cheap necessary checks that
            // dismiss almost every stray body by integer arithmetic before
            // any full classification runs. At other alphas the checks are
            // not valid and every touching base set is classified.
            std::vector<const std::vector<int>*> viable;
            std::set<int> seen_edges;
            for (int u : body)
                for (int ei : edges_at[static_cast<std::size_t>(u)]) {
                    if (!seen_edges.insert(ei).second) continue;
                    const std::vector<int>& e = edges[static_cast<std::size_t>(ei)];
                    int members = 0;
                    bool confined = true;
                    for (int a : e) {
                        if (in_body[static_cast<std::size_t>(a)]) ++members;
                        else if (a != v_id && !in_scope[static_cast<std::size_t>(a)])
                            confined = false;
                    }
                    if (members >= 2 && confined) viable.push_back(&e);
                }

            std::vector<VertexSet> needed;
            std::set<Vertex> pool_set;
            if (unit_alpha) {
                if (viable.size() < body_size) return;
                for (int u : body) {
                    bool covered = false;
                    for (const auto* e : viable)
                        if (std::find(e->begin(), e->end(), u) != e->end()) {
                            covered = true;
                            break;
                        }
                    if (!covered) return;
                }
                // Base members can only be the scope vertices of the viable
                // edges, and an edge lies inside the extension for Y exactly
                // when all its scope members were chosen.
                for (const auto* e : viable) {
                    VertexSet need;
                    for (int a : *e)
                        if (!in_body[static_cast<std::size_t>(a)] && a != v_id) {
                            need.insert(verts[static_cast<std::size_t>(a)]);
                            pool_set.insert(verts[static_cast<std::size_t>(a)]);
                        }
                    needed.push_back(std::move(need));
                }
            } else {
                for (int u : body)
                    for (int w : nbr[static_cast<std::size_t>(u)])
                        if (in_scope[static_cast<std::size_t>(w)] &&
                            !in_body[static_cast<std::size_t>(w)])
                            pool_set.insert(verts[static_cast<std::size_t>(w)]);
            }
            if (pool_set.size() < static_cast<std::size_t>(k)) return;

            VertexSet body_set;
            for (int u : body) body_set.insert(verts[static_cast<std::size_t>(u)]);
            std::vector<Vertex> pool(pool_set.begin(), pool_set.end());
            for (const VertexSet& y : k_subsets(pool, static_cast<std::size_t>(k))) {
                if (accepted.count(y)) continue;
                if (unit_alpha) {
                    std::size_t inside = 0;
                    for (const VertexSet& need : needed)
                        if (set_difference(need, y).empty()) ++inside;
                    if (inside != body_size) continue;
                }
                VertexSet base = y;
                base.insert(v);
                Structure ext = induced(cur, set_union(base, body_set));
                if (!is_in_class(ext, params_).in_class) continue;
                auto cls = classify_pair(base, ext, params_);
                if (cls.accepted() && cls.certificate->kind == PairKind::zero_biminimal)
                    accepted.insert(y);
            }
        };

        std::set<unsigned long long> grown;
        std::vector<int> partial;
        std::function<void()> grow = [&]() {
            std::vector<int> sorted_p = partial;
            std::sort(sorted_p.begin(), sorted_p.end());
            if (!grown.insert(pack(sorted_p)).second) return;
            if (partial.size() == body_size) {
                process_body(sorted_p);
                return;
            }
            std::vector<int> frontier;
            for (int u : partial)
                for (int w : nbr[static_cast<std::size_t>(u)])
                    if (w != v_id &&
                        std::find(partial.begin(), partial.end(), w) == partial.end())
                        frontier.push_back(w);
            std::sort(frontier.begin(), frontier.end());
            frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
            for (int w : frontier) {
                partial.push_back(w);
                grow();
                partial.pop_back();
            }
        };
        for (int u : nbr[static_cast<std::size_t>(v_id)]) {
            partial = {u};
            grow();
        }
        return std::vector<VertexSet>(accepted.begin(), accepted.end());
    }

    // Re-verifies every stored invariant: chain snapshots are class members,
    // each step is closed in the next, the last step is the current
    // structure, and replaying the ledger from the seed reproduces the chain
    // bit-exactly.
    Report audit() const {
        Report report;
        report.title = "approximation-audit";
        for (std::size_t i = 0; i < chain_.size(); ++i) {
            std::string name = "chain-" + std::to_string(i);
            if (!is_in_class(chain_[i], params_).in_class) {
                report.add(name + "-membership", false, "snapshot left the class");
                continue;
            }
            report.add(name + "-membership", true);
            if (i + 1 < chain_.size()) {
                bool grew = is_subset(chain_[i].vertex_set(), chain_[i + 1].vertex_set());
                auto closed = grew ? detail::is_closed_unchecked(chain_[i].vertex_set(),
                                                                 chain_[i + 1], params_)
                                   : ClosedCheckResult{};
                report.add(name + "-closed-in-next", grew && closed.closed);
            }
        }
        try {
            Approximation fresh = replay(snapshot());
            bool same = fresh.chain_.size() == chain_.size();
            if (same)
                for (std::size_t i = 0; i < chain_.size(); ++i)
                    if (!(fresh.chain_[i] == chain_[i])) { same = false; break; }
            report.add("ledger-replay", same && fresh.current() == current());
        } catch (const std::exception& e) {
            report.add("ledger-replay", false, e.what());
        }
        return report;
    }

    // Serialized form. Replaying re-executes the ledger from the seed and
    // verifies the stored chain matches bit-exactly.
    Json snapshot() const {
        Json j;
        j["params"]["alpha"] = params_.alpha.str();
        j["params"]["arity"] = params_.arity;
        j["chain"] = Json::array();
        for (const Structure& s : chain_) j["chain"].push_back(structure_to_json(s));
        j["ledger"] = Json::array();
        for (const LedgerEntry& e : ledger_) {
            Json je;
            je["kind"] = e.kind;
            je["payload"] = e.payload;
            je["new_vertices"] = e.new_vertices;
            j["ledger"].push_back(je);
        }
        j["fresh_counter"] = fresh_counter_;
        return j;
    }

    std::string snapshot_text() const { return snapshot().dump(2) + "\n"; }

    static Approximation replay(const Json& j) {
        if (!j.is_object() || !j.contains("params") || !j.contains("chain") ||
            !j.contains("ledger") || !j.contains("fresh_counter"))
            throw InputError("snapshot missing required fields");
        ClassParams params(Rational::parse(j["params"]["alpha"].get<std::string>()),
                           j["params"]["arity"].get<int>());
        if (!j["chain"].is_array() || j["chain"].empty())
            throw InputError("snapshot chain must be a nonempty array");

        Approximation out = new_approximation(structure_from_json(j["chain"][0]), params);
        for (const auto& je : j["ledger"]) {
            std::string kind = je.at("kind").get<std::string>();
            const Json& payload = je.at("payload");
            if (kind == "universal") {
                out.ensure_universal(structure_from_json(payload.at("structure")),
                                     payload.at("require_fresh").get<bool>());
            } else if (kind == "homogeneous") {
                std::vector<Vertex> a_image = payload.at("a_image").get<std::vector<Vertex>>();
                std::vector<Vertex> a_in_b = payload.at("a_in_b").get<std::vector<Vertex>>();
                auto r = out.ensure_homogeneous(a_image,
                                                structure_from_json(payload.at("structure")),
                                                a_in_b);
                if (!r.accepted())
                    throw InputError("snapshot replay: a homogeneous task now refuses: " +
                                     r.refusal);
            } else if (kind == "code") {
                VertexSet s;
                for (const auto& sv : payload.at("scope")) s.insert(sv.get<Vertex>());
                std::vector<VertexSet> x;
                for (const auto& jy : payload.at("family")) {
                    VertexSet y;
                    for (const auto& yv : jy) y.insert(yv.get<Vertex>());
                    x.push_back(std::move(y));
                }
                out.realize_code(s, payload.at("k").get<int>(), x);
            } else {
                throw InputError("snapshot ledger has unknown kind: " + kind);
            }
        }

        // The replayed chain must match the stored one exactly.
        if (out.chain_.size() != j["chain"].size())
            throw InputError("snapshot replay: chain length diverged");
        for (std::size_t i = 0; i < out.chain_.size(); ++i)
            if (!(structure_to_json(out.chain_[i]) == j["chain"][i]))
                throw InputError("snapshot replay: chain step " + std::to_string(i) +
                                 " diverged");
        if (out.fresh_counter_ != j["fresh_counter"].get<long long>())
            throw InputError("snapshot replay: fresh counter diverged");
        return out;
    }

    static Approximation replay_text(const std::string& text) {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("invalid snapshot JSON: ") + e.what());
        }
        return replay(j);
    }

    Vertex fresh_vertex() { return "#" + std::to_string(fresh_counter_++); }

    static std::vector<VertexSet> k_subsets(const std::vector<Vertex>& pool, std::size_t k) {
        std::vector<VertexSet> out;
        if (k > pool.size()) return out;
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            VertexSet y;
            for (std::size_t i : idx) y.insert(pool[i]);
            out.push_back(std::move(y));
            std::size_t i = k;
            while (i > 0) {
                --i;
                if (idx[i] + (k - i) < pool.size()) break;
                if (i == 0) return out;
            }
            ++idx[i];
            for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }

private:
    Approximation(Structure seed, ClassParams params)
        : params_(std::move(params)) {
        chain_.push_back(std::move(seed));
    }

    // Lexicographically least embedding of `a` whose image is closed.
    std::optional<VertexMap> find_closed_copy(const Structure& a) const {
        std::optional<VertexMap> found;
        std::map<VertexSet, bool> closed_cache;
        for_each_embedding(a, current(), {}, [&](const VertexMap& m) {
            VertexSet image;
            for (const auto& [src, dst] : m) image.insert(dst);
            auto it = closed_cache.find(image);
            if (it == closed_cache.end()) {
                bool ok = detail::is_closed_unchecked(image, current(), params_).closed;
                it = closed_cache.emplace(image, ok).first;
            }
            if (!it->second) return true;
            found = m;
            return false;
        });
        return found;
    }

    void append_current(Structure next) {
        auto in_class = is_in_class(next, params_);
        if (!in_class.in_class)
            throw InternalError("approximation step would leave the class");
        auto closed = detail::is_closed_unchecked(current().vertex_set(), next, params_);
        if (!closed.closed)
            throw InternalError("approximation step would not be a closed extension");
        chain_.push_back(std::move(next));
    }

    ClassParams params_;
    std::vector<Structure> chain_;
    std::vector<LedgerEntry> ledger_;
    long long fresh_counter_ = 0;
};

}  // namespace genstruct
