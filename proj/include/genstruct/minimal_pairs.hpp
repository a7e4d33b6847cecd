#pragma once

#include <optional>
#include <string>
#include <vector>

#include "predimension.hpp"
#include "structure.hpp"

namespace genstruct {

enum class PairKind { minimal, zero_minimal, biminimal, zero_biminimal };

inline std::string pair_kind_name(PairKind k) {
    switch (k) {
        case PairKind::minimal: return "minimal";
        case PairKind::zero_minimal: return "zero-minimal";
        case PairKind::biminimal: return "biminimal";
        case PairKind::zero_biminimal: return "zero-biminimal";
    }
    return "?";
}

struct IntermediateEvidence {
    VertexSet set;   // a strict intermediate C with A ⊊ C ⊊ vertices(B)
    Rational value;  // δ(C)
};

struct MinimalPairCertificate {
    VertexSet base;
    Structure extension;
    PairKind kind;
    Rational delta_base;
    Rational delta_full;
    std::vector<IntermediateEvidence> evidence;  // every strict intermediate
};

struct ClassifyOutcome {
    std::optional<MinimalPairCertificate> certificate;
    std::string refusal;                 // nonempty exactly when no certificate
    std::optional<VertexSet> refusal_witness;

    bool accepted() const { return certificate.has_value(); }
};

// Decides whether (A, B) is a minimal pair and, if so, the strongest
// applicable kind: δ(B/A) ≤ 0 while every strict intermediate keeps δ above
// δ(A); zero- variants have δ(B/A) = 0 exactly; bi- variants require every
// base vertex to lie on an edge that meets B∖A. The sweep is exhaustive over
// intermediates, so the extension must stay at desk scale.
inline ClassifyOutcome classify_pair(const VertexSet& a, const Structure& b,
                                     const ClassParams& params) {
    for (const Vertex& v : a)
        if (!b.has_vertex(v)) throw InputError("classify_pair: base names unknown vertex " + v);
    if (b.arity() != params.arity)
        throw InputError("classify_pair: structure arity does not match params");
    if (!is_in_class(b, params).in_class)
        throw InputError("classify_pair: extension is not a class member");

    ClassifyOutcome out;
    std::vector<Vertex> added;
    for (const Vertex& v : b.vertex_set())
        if (!a.count(v)) added.push_back(v);
    if (added.empty()) {
        out.refusal = "extension adds no vertices";
        return out;
    }
    if (added.size() > 16)
        throw ResourceError("classify_pair: more than 16 new vertices in the extension");

    Rational base_delta = delta_subset(b, a, params);

    // Sweep strict intermediates smallest first; the first δ drop refutes.
    std::vector<IntermediateEvidence> evidence;
    std::vector<std::vector<VertexSet>> by_size(added.size());
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << added.size()); ++mask) {
        VertexSet x;
        for (std::size_t i = 0; i < added.size(); ++i)
            if (mask & (std::size_t{1} << i)) x.insert(added[i]);
        by_size[x.size() - 1].push_back(std::move(x));
    }
    for (auto& bucket : by_size)
        for (const VertexSet& x : bucket) {
            VertexSet c = set_union(a, x);
            Rational d = delta_subset(b, c, params);
            if (!(base_delta < d)) {
                out.refusal = "base is not closed in a proper substructure";
                out.refusal_witness = c;
                return out;
            }
            evidence.push_back({c, d});
        }

    Rational full_delta = delta(b, params);
    if (base_delta < full_delta) {
        out.refusal = "base is closed in the extension";
        return out;
    }

    bool zero = (full_delta == base_delta);
    bool bi = true;
    for (const Vertex& av : a) {
        bool touches = false;
        for (const Edge& e : b.edge_set()) {
            if (!std::binary_search(e.begin(), e.end(), av)) continue;
            for (const Vertex& w : e)
                if (!a.count(w)) { touches = true; break; }
            if (touches) break;
        }
        if (!touches) { bi = false; break; }
    }

    PairKind kind = zero ? (bi ? PairKind::zero_biminimal : PairKind::zero_minimal)
                         : (bi ? PairKind::biminimal : PairKind::minimal);
    out.certificate = MinimalPairCertificate{a,          b,          kind,
                                             base_delta, full_delta, std::move(evidence)};
    return out;
}

struct GadgetResult {
    Structure extension;               // the base structure plus the new part
    std::vector<Vertex> new_vertices;  // in construction order
};

// Ternary extension family over a nonempty base: for a single base vertex,
// three new vertices carrying all pairs {a, c_i, c_j}; for n base vertices
// a1 < … < an, new vertices c1..cn with edges {a_i, c_i, c_{i+1}} and the
// wrap-around edge {a_n, c_1, c_n}. Adds n (or 3) vertices and exactly as
// many edges, so δ is unchanged; the outcome is re-classified internally and
// must come back zero-biminimal.
inline GadgetResult build_zero_biminimal_detail(const Structure& a) {
    if (a.arity() != 3) throw InputError("the extension family needs arity 3");
    if (a.empty()) throw InputError("the extension family needs a nonempty base");
    ClassParams params = ClassParams::unit(3);
    if (!is_in_class(a, params).in_class)
        throw InputError("the extension family needs a class-member base");

    GadgetResult out{a, {}};
    std::size_t n = a.size();
    std::size_t want = (n == 1) ? 3 : n;
    int next = 1;
    while (out.new_vertices.size() < want) {
        Vertex cand = "c" + std::to_string(next++);
        if (a.has_vertex(cand)) continue;
        out.extension.add_vertex(cand);
        out.new_vertices.push_back(cand);
    }
    std::vector<Vertex> base = a.vertices();
    const auto& c = out.new_vertices;
    if (n == 1) {
        out.extension.add_edge({base[0], c[0], c[1]});
        out.extension.add_edge({base[0], c[0], c[2]});
        out.extension.add_edge({base[0], c[1], c[2]});
    } else {
        for (std::size_t i = 0; i + 1 < n; ++i)
            out.extension.add_edge({base[i], c[i], c[i + 1]});
        out.extension.add_edge({base[n - 1], c[0], c[n - 1]});
    }

    auto check = classify_pair(a.vertex_set(), out.extension, params);
    if (!check.accepted() || check.certificate->kind != PairKind::zero_biminimal)
        throw InternalError("extension family output failed its own classification");
    return out;
}

inline Structure build_zero_biminimal(const Structure& a) {
    return build_zero_biminimal_detail(a).extension;
}

// All embeddings of B into N that are the identity on A. Injectivity already
// keeps the image of B∖A outside A.
inline std::vector<Embedding> enumerate_copies_over(const VertexSet& a, const Structure& b,
                                                    const Structure& n) {
    VertexMap fix;
    for (const Vertex& v : a) {
        if (!b.has_vertex(v))
            throw InputError("enumerate_copies_over: base vertex missing from B: " + v);
        if (!n.has_vertex(v))
            throw InputError("enumerate_copies_over: base vertex missing from N: " + v);
        fix[v] = v;
    }
    return enumerate_embeddings(b, n, fix);
}

namespace detail {

inline void max_disjoint_family(const std::vector<VertexSet>& images, const VertexSet& a,
                                std::size_t idx, VertexSet used, std::size_t count,
                                std::size_t& best) {
    if (count + (images.size() - idx) <= best) return;
    if (idx == images.size()) {
        best = std::max(best, count);
        return;
    }
    const VertexSet& img = images[idx];
    bool can = true;
    for (const Vertex& v : img)
        if (!a.count(v) && used.count(v)) { can = false; break; }
    if (can) {
        VertexSet next_used = used;
        for (const Vertex& v : img)
            if (!a.count(v)) next_used.insert(v);
        max_disjoint_family(images, a, idx + 1, std::move(next_used), count + 1, best);
    }
    max_disjoint_family(images, a, idx + 1, std::move(used), count, best);
}

}  // namespace detail

// Size of a largest family of copies of B over A in N whose images pairwise
// intersect exactly in A. Exact branch-and-bound over the distinct images.
inline int chi(const VertexSet& a, const Structure& b, const Structure& n) {
    VertexMap fix;
    for (const Vertex& v : a) {
        if (!b.has_vertex(v)) throw InputError("chi: base vertex missing from B: " + v);
        if (!n.has_vertex(v)) throw InputError("chi: base vertex missing from N: " + v);
        fix[v] = v;
    }
    std::set<VertexSet> seen;
    for_each_embedding(b, n, fix, [&](const VertexMap& m) {
        VertexSet img;
        for (const auto& [s, t] : m) img.insert(t);
        seen.insert(std::move(img));
        return true;
    });
    std::vector<VertexSet> images(seen.begin(), seen.end());
    std::size_t best = 0;
    detail::max_disjoint_family(images, a, 0, {}, 0, best);
    return static_cast<int>(best);
}

}  // namespace genstruct
