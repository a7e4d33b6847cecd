#pragma once

#include <optional>
#include <string>
#include <vector>

#include "generic_builder.hpp"
#include "minimal_pairs.hpp"
#include "structure.hpp"

namespace genstruct {

// A base structure with two non-isomorphic zero-minimal extensions of it,
// certificates included. The rational p/q realized by a configuration is
// read off as the ratio of B-copy to C-copy counts over a base copy.
struct ABCTriple {
    Structure a;
    Structure b;
    Structure c;
    MinimalPairCertificate b_certificate;
    MinimalPairCertificate c_certificate;
};

// A copy of A in a host approximation together with its attached B- and
// C-copies and the counts they certify.
struct ConfigurationWitness {
    VertexSet abar;
    int p = 0;
    int q = 0;
    std::vector<Embedding> b_copies;
    std::vector<Embedding> c_copies;
    const Approximation* host = nullptr;
    ABCTriple triple;
};

// One chosen vertex per copy, always outside the base.
struct BasisSelection {
    VertexSet xb;  // one vertex per B-copy
    VertexSet yc;  // one vertex per C-copy
};

inline ABCTriple canonical_triple() {
    ClassParams params(Rational(1), 3);

    Structure a(3);
    a.add_vertex("a");

    Structure b = a;
    for (const Vertex& v : {"b1", "b2", "b3"}) b.add_vertex(v);
    b.add_edge({"a", "b1", "b2"});
    b.add_edge({"a", "b1", "b3"});
    b.add_edge({"a", "b2", "b3"});

    Structure c = a;
    for (const Vertex& v : {"c1", "c2", "c3", "c4"}) c.add_vertex(v);
    c.add_edge({"a", "c1", "c2"});
    c.add_edge({"a", "c2", "c3"});
    c.add_edge({"a", "c3", "c4"});
    c.add_edge({"a", "c1", "c4"});

    auto b_check = classify_pair({"a"}, b, params);
    auto c_check = classify_pair({"a"}, c, params);
    if (!b_check.accepted() || b_check.certificate->kind != PairKind::zero_biminimal)
        throw InternalError("canonical_triple: B certificate failed");
    if (!c_check.accepted() || c_check.certificate->kind != PairKind::zero_biminimal)
        throw InternalError("canonical_triple: C certificate failed");
    if (is_isomorphic(b, c)) throw InternalError("canonical_triple: B and C must differ");

    return ABCTriple{std::move(a), std::move(b), std::move(c),
                     std::move(*b_check.certificate), std::move(*c_check.certificate)};
}

namespace detail {

// All copies of `shape` over the base vertex, as images including the base.
inline std::vector<VertexSet> copies_over_base(const Vertex& base_image,
                                               const Structure& shape,
                                               const Vertex& base_in_shape,
                                               const Structure& host) {
    std::set<VertexSet> images;
    for_each_embedding(shape, host, {{base_in_shape, base_image}},
                       [&](const VertexMap& m) {
                           VertexSet img;
                           for (const auto& [src, dst] : m) img.insert(dst);
                           images.insert(std::move(img));
                           return true;
                       });
    return std::vector<VertexSet>(images.begin(), images.end());
}

struct RecomputedConfiguration {
    std::vector<VertexSet> b_images;
    std::vector<VertexSet> c_images;
    bool pairwise_ok = false;   // distinct same-shape copies meet exactly in abar
    bool cross_ok = false;      // B-copies meet C-copies exactly in abar
};

inline RecomputedConfiguration recompute_configuration(const ConfigurationWitness& w) {
    const Structure& host = w.host->current();
    const Vertex& av = *w.abar.begin();
    RecomputedConfiguration out;
    out.b_images = copies_over_base(av, w.triple.b, "a", host);
    out.c_images = copies_over_base(av, w.triple.c, "a", host);
    auto meets_only_in_base = [&](const VertexSet& x, const VertexSet& y) {
        return set_intersection(x, y) == w.abar;
    };
    out.pairwise_ok = true;
    for (std::size_t i = 0; i < out.b_images.size() && out.pairwise_ok; ++i)
        for (std::size_t j = i + 1; j < out.b_images.size(); ++j)
            if (!meets_only_in_base(out.b_images[i], out.b_images[j])) {
                out.pairwise_ok = false;
                break;
            }
    for (std::size_t i = 0; i < out.c_images.size() && out.pairwise_ok; ++i)
        for (std::size_t j = i + 1; j < out.c_images.size(); ++j)
            if (!meets_only_in_base(out.c_images[i], out.c_images[j])) {
                out.pairwise_ok = false;
                break;
            }
    out.cross_ok = true;
    for (const VertexSet& x : out.b_images) {
        for (const VertexSet& y : out.c_images)
            if (!meets_only_in_base(x, y)) {
                out.cross_ok = false;
                break;
            }
        if (!out.cross_ok) break;
    }
    return out;
}

inline VertexSet region_of(const ConfigurationWitness& w) {
    VertexSet out = w.abar;
    for (const Embedding& e : w.b_copies) out = set_union(out, e.image());
    for (const Embedding& e : w.c_copies) out = set_union(out, e.image());
    return out;
}

}  // namespace detail

// Builds D = A + p B-copies + q C-copies freely joined over A, embeds it as
// a fresh closed copy, and certifies the copy counts by recomputing them
// from the host.
inline ConfigurationWitness build_configuration(const ABCTriple& triple, int p, int q,
                                                Approximation& approx) {
    if (p < 1 || q < 1)
        throw InputError("build_configuration: copy counts must be at least 1");
    if (approx.params().arity != 3 || approx.params().alpha != Rational(1))
        throw InputError("build_configuration: the host must use ternary unit parameters");

    Structure d = triple.a;
    for (int i = 1; i <= p; ++i) {
        VertexMap rename = {{"a", "a"}};
        for (const Vertex& v : triple.b.vertex_set())
            if (v != "a") rename[v] = "b" + std::to_string(i) + "_" + v;
        d = free_join(d, renamed(triple.b, rename), {"a"});
    }
    for (int i = 1; i <= q; ++i) {
        VertexMap rename = {{"a", "a"}};
        for (const Vertex& v : triple.c.vertex_set())
            if (v != "a") rename[v] = "c" + std::to_string(i) + "_" + v;
        d = free_join(d, renamed(triple.c, rename), {"a"});
    }

    Embedding into_host = approx.ensure_universal(d, true);
    const Vertex av = into_host.map().at("a");

    ConfigurationWitness w{{av}, p, q, {}, {}, &approx, triple};
    for (int i = 1; i <= p; ++i) {
        VertexMap m;
        for (const Vertex& v : triple.b.vertex_set())
            m[v] = v == "a" ? av : into_host.map().at("b" + std::to_string(i) + "_" + v);
        w.b_copies.emplace_back(triple.b, approx.current(), m);
    }
    for (int i = 1; i <= q; ++i) {
        VertexMap m;
        for (const Vertex& v : triple.c.vertex_set())
            m[v] = v == "a" ? av : into_host.map().at("c" + std::to_string(i) + "_" + v);
        w.c_copies.emplace_back(triple.c, approx.current(), m);
    }

    auto re = detail::recompute_configuration(w);
    if (re.b_images.size() != static_cast<std::size_t>(p) ||
        re.c_images.size() != static_cast<std::size_t>(q))
        throw InternalError("build_configuration: recomputed copy counts disagree with "
                            "the requested ones");
    if (!re.pairwise_ok || !re.cross_ok)
        throw InternalError("build_configuration: copies overlap outside the base");
    return w;
}

namespace detail {

inline void require_comparable(const ConfigurationWitness& w1,
                               const ConfigurationWitness& w2) {
    if (w1.host == nullptr || w2.host == nullptr)
        throw InputError("configuration witnesses must carry a host");
    if (w1.host != w2.host)
        throw InputError("configuration witnesses live in different approximations");
    if (!set_intersection(region_of(w1), region_of(w2)).empty())
        throw InputError("configuration witnesses must occupy disjoint regions");
}

struct RecomputedCounts {
    long long p = 0;
    long long q = 0;
};

inline RecomputedCounts recount(const ConfigurationWitness& w) {
    auto re = recompute_configuration(w);
    return {static_cast<long long>(re.b_images.size()),
            static_cast<long long>(re.c_images.size())};
}

}  // namespace detail

// The equivalence: equal cross products of recomputed copy counts.
inline bool eval_equiv(const ConfigurationWitness& w1, const ConfigurationWitness& w2) {
    detail::require_comparable(w1, w2);
    auto r1 = detail::recount(w1);
    auto r2 = detail::recount(w2);
    return r1.p * r2.q == r2.p * r1.q;
}

// The strict order on classes via the same cross products.
inline bool eval_order(const ConfigurationWitness& w1, const ConfigurationWitness& w2) {
    detail::require_comparable(w1, w2);
    auto r1 = detail::recount(w1);
    auto r2 = detail::recount(w2);
    return r1.p * r2.q < r2.p * r1.q;
}

// {{x,y} : x in a, y in b} for disjoint nonempty sets; its size is |a|*|b|.
inline std::vector<VertexSet> unordered_product(const VertexSet& a, const VertexSet& b) {
    if (a.empty() || b.empty())
        throw InputError("unordered_product: both sides must be nonempty");
    if (!set_intersection(a, b).empty())
        throw InputError("unordered_product: the sides must be disjoint");
    std::set<VertexSet> out;
    for (const Vertex& x : a)
        for (const Vertex& y : b) out.insert(VertexSet{x, y});
    return std::vector<VertexSet>(out.begin(), out.end());
}

struct EncodeOutcome {
    std::optional<std::vector<VertexSet>> witness;
    std::string refusal;

    bool accepted() const { return witness.has_value(); }
};

namespace detail {

inline VertexSet family_support(const std::vector<VertexSet>& family) {
    VertexSet out;
    for (const VertexSet& m : family) out.insert(m.begin(), m.end());
    return out;
}

// Splits each 4-set of `w` into its P-part and Q-part by support membership
// and returns the matched index pairs. Families with overlapping supports
// cannot be split unambiguously and are rejected outright.
inline std::optional<std::vector<std::pair<std::size_t, std::size_t>>> decompose_pairs(
    const std::vector<VertexSet>& w, const std::vector<VertexSet>& p,
    const std::vector<VertexSet>& q) {
    VertexSet sp = family_support(p);
    VertexSet sq = family_support(q);
    if (!set_intersection(sp, sq).empty())
        throw InputError("pairing families must have disjoint supports");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const VertexSet& quad : w) {
        VertexSet half_p = set_intersection(quad, sp);
        VertexSet half_q = set_intersection(quad, sq);
        if (half_p.size() != 2 || half_q.size() != 2 ||
            set_union(half_p, half_q) != quad)
            return std::nullopt;
        auto ip = std::find(p.begin(), p.end(), half_p);
        auto iq = std::find(q.begin(), q.end(), half_q);
        if (ip == p.end() || iq == q.end()) return std::nullopt;
        out.emplace_back(static_cast<std::size_t>(ip - p.begin()),
                         static_cast<std::size_t>(iq - q.begin()));
    }
    return out;
}

inline bool pairing_is_function(const std::vector<std::pair<std::size_t, std::size_t>>& m,
                                std::size_t p_size, bool& injective, bool& total,
                                bool& surjective, std::size_t q_size) {
    std::vector<int> p_hits(p_size, 0);
    std::vector<int> q_hits(q_size, 0);
    for (const auto& [i, j] : m) {
        ++p_hits[i];
        ++q_hits[j];
    }
    bool functional = true;
    total = true;
    for (int h : p_hits) {
        if (h > 1) functional = false;
        if (h == 0) total = false;
    }
    injective = true;
    surjective = true;
    for (int h : q_hits) {
        if (h > 1) injective = false;
        if (h == 0) surjective = false;
    }
    return functional;
}

}  // namespace detail

// Matches the i-th member of P with the i-th member of Q (sorted order) and
// emits the union 4-sets. Refuses when the sizes differ.
inline EncodeOutcome encode_bijection_witness(const std::vector<VertexSet>& p,
                                              const std::vector<VertexSet>& q) {
    EncodeOutcome out;
    if (p.size() != q.size()) {
        out.refusal = "families of different sizes admit no bijection";
        return out;
    }
    std::vector<VertexSet> pp(p), qq(q);
    std::sort(pp.begin(), pp.end());
    std::sort(qq.begin(), qq.end());
    std::vector<VertexSet> w;
    for (std::size_t i = 0; i < pp.size(); ++i) w.push_back(set_union(pp[i], qq[i]));
    out.witness = std::move(w);
    return out;
}

// Matches every member of P with a distinct member of Q, leaving some of Q
// unmatched; requires strictly fewer P members.
inline EncodeOutcome encode_injection_witness(const std::vector<VertexSet>& p,
                                              const std::vector<VertexSet>& q) {
    EncodeOutcome out;
    if (p.size() >= q.size()) {
        out.refusal = "a strict injection needs strictly fewer left members";
        return out;
    }
    std::vector<VertexSet> pp(p), qq(q);
    std::sort(pp.begin(), pp.end());
    std::sort(qq.begin(), qq.end());
    std::vector<VertexSet> w;
    for (std::size_t i = 0; i < pp.size(); ++i) w.push_back(set_union(pp[i], qq[i]));
    out.witness = std::move(w);
    return out;
}

inline bool check_bijection_witness(const std::vector<VertexSet>& w,
                                    const std::vector<VertexSet>& p,
                                    const std::vector<VertexSet>& q) {
    auto pairs = detail::decompose_pairs(w, p, q);
    if (!pairs) return false;
    bool injective = false, total = false, surjective = false;
    bool functional =
        detail::pairing_is_function(*pairs, p.size(), injective, total, surjective, q.size());
    return functional && injective && total && surjective;
}

inline bool check_injection_witness(const std::vector<VertexSet>& w,
                                    const std::vector<VertexSet>& p,
                                    const std::vector<VertexSet>& q) {
    if (p.size() >= q.size()) return false;
    auto pairs = detail::decompose_pairs(w, p, q);
    if (!pairs) return false;
    bool injective = false, total = false, surjective = false;
    bool functional =
        detail::pairing_is_function(*pairs, p.size(), injective, total, surjective, q.size());
    return functional && injective && total && !surjective;
}

// One existential block of the equality or order formula, made concrete:
// the auxiliary configuration, the four bases, the seven realized codes,
// and the verification report for every conjunct.
struct InterpretationBundle {
    ConfigurationWitness third;
    BasisSelection basis_x;      // bases for the first witness
    BasisSelection basis_third;  // bases for the auxiliary configuration
    VertexSet scope;
    CodeHandle u1, u2, u3, u4;
    CodeHandle v1, v2;
    CodeHandle w;
    std::vector<VertexSet> product1;  // xb(x) times yc(third)
    std::vector<VertexSet> product2;  // yc(x) times xb(third)
    Report checks;
};

struct BundleOutcome {
    std::optional<InterpretationBundle> bundle;
    std::string refusal;

    bool accepted() const { return bundle.has_value(); }
};

namespace detail {

inline BasisSelection select_basis(const std::vector<VertexSet>& b_images,
                                   const std::vector<VertexSet>& c_images,
                                   const VertexSet& abar) {
    BasisSelection out;
    for (const VertexSet& img : b_images)
        out.xb.insert(*set_difference(img, abar).begin());
    for (const VertexSet& img : c_images)
        out.yc.insert(*set_difference(img, abar).begin());
    return out;
}

inline std::vector<VertexSet> singleton_family(const VertexSet& s) {
    std::vector<VertexSet> out;
    for (const Vertex& v : s) out.push_back(VertexSet{v});
    return out;
}

// The shared machinery of the equality and order formulas; `strict` selects
// the injection-not-bijection reading of the final conjunct.
inline BundleOutcome construct_witness_bundle(const ConfigurationWitness& w1,
                                              const ConfigurationWitness& w2,
                                              Approximation& approx, bool strict) {
    require_comparable(w1, w2);
    if (w1.host != &approx)
        throw InputError("the witnesses do not live in the supplied approximation");

    auto r1 = recount(w1);
    auto r2 = recount(w2);
    BundleOutcome out;
    bool holds = strict ? r1.p * r2.q < r2.p * r1.q : r1.p * r2.q == r2.p * r1.q;
    if (!holds) {
        out.refusal = strict ? "the witnesses are not strictly ordered"
                             : "the witnesses are not equivalent";
        return out;
    }

    Report rep;
    rep.title = strict ? "order-witness" : "equality-witness";
    auto conjunct = [&rep](const std::string& name, bool okay) {
        rep.add(name, okay);
        if (!okay) throw InternalError("witness conjunct failed: " + name);
    };

    // The auxiliary configuration mirrors the second witness's counts.
    ConfigurationWitness third =
        build_configuration(w1.triple, static_cast<int>(r2.p), static_cast<int>(r2.q), approx);

    auto re1 = recompute_configuration(w1);
    auto re3 = recompute_configuration(third);
    conjunct("first-configuration-valid", re1.pairwise_ok && re1.cross_ok &&
                                              !re1.b_images.empty() && !re1.c_images.empty());
    conjunct("auxiliary-configuration-valid",
             re3.pairwise_ok && re3.cross_ok && !re3.b_images.empty() &&
                 !re3.c_images.empty());
    auto r3 = detail::RecomputedCounts{static_cast<long long>(re3.b_images.size()),
                                       static_cast<long long>(re3.c_images.size())};
    conjunct("auxiliary-counts-match-second", r3.p == r2.p && r3.q == r2.q);
    conjunct("separation", set_intersection(region_of(w1), region_of(third)).empty());

    BasisSelection basis_x = select_basis(re1.b_images, re1.c_images, w1.abar);
    BasisSelection basis_third = select_basis(re3.b_images, re3.c_images, third.abar);

    VertexSet scope;
    for (const VertexSet& img : re1.b_images)
        scope = set_union(scope, set_difference(img, w1.abar));
    for (const VertexSet& img : re1.c_images)
        scope = set_union(scope, set_difference(img, w1.abar));
    for (const VertexSet& img : re3.b_images)
        scope = set_union(scope, set_difference(img, third.abar));
    for (const VertexSet& img : re3.c_images)
        scope = set_union(scope, set_difference(img, third.abar));

    CodeHandle u1 = approx.realize_code(scope, 1, singleton_family(basis_x.xb));
    CodeHandle u2 = approx.realize_code(scope, 1, singleton_family(basis_x.yc));
    CodeHandle u3 = approx.realize_code(scope, 1, singleton_family(basis_third.xb));
    CodeHandle u4 = approx.realize_code(scope, 1, singleton_family(basis_third.yc));

    auto decoded_set = [&](const CodeHandle& h, int k) {
        VertexSet flat;
        for (const VertexSet& y : approx.decode_code(h.code_vertex, scope, k))
            flat.insert(y.begin(), y.end());
        return flat;
    };
    auto is_basis_of = [&](const VertexSet& sel, const std::vector<VertexSet>& images,
                           const VertexSet& abar) {
        if (sel.size() != images.size()) return false;
        for (const VertexSet& img : images) {
            VertexSet inside = set_intersection(sel, set_difference(img, abar));
            if (inside.size() != 1) return false;
        }
        return true;
    };
    conjunct("first-b-basis", decoded_set(u1, 1) == basis_x.xb &&
                                  is_basis_of(basis_x.xb, re1.b_images, w1.abar));
    conjunct("first-c-basis", decoded_set(u2, 1) == basis_x.yc &&
                                  is_basis_of(basis_x.yc, re1.c_images, w1.abar));
    conjunct("auxiliary-b-basis", decoded_set(u3, 1) == basis_third.xb &&
                                      is_basis_of(basis_third.xb, re3.b_images, third.abar));
    conjunct("auxiliary-c-basis", decoded_set(u4, 1) == basis_third.yc &&
                                      is_basis_of(basis_third.yc, re3.c_images, third.abar));

    std::vector<VertexSet> product1 = unordered_product(basis_x.xb, basis_third.yc);
    std::vector<VertexSet> product2 = unordered_product(basis_x.yc, basis_third.xb);
    CodeHandle v1 = approx.realize_code(scope, 2, product1);
    CodeHandle v2 = approx.realize_code(scope, 2, product2);

    std::vector<VertexSet> dec1 = approx.decode_code(v1.code_vertex, scope, 2);
    std::vector<VertexSet> dec2 = approx.decode_code(v2.code_vertex, scope, 2);
    conjunct("first-product", dec1 == product1);
    conjunct("second-product", dec2 == product2);
    conjunct("first-product-cardinality",
             static_cast<long long>(dec1.size()) == r1.p * r3.q);
    conjunct("second-product-cardinality",
             static_cast<long long>(dec2.size()) == r1.q * r3.p);

    EncodeOutcome enc = strict ? encode_injection_witness(product1, product2)
                               : encode_bijection_witness(product1, product2);
    if (!enc.accepted())
        throw InternalError("witness conjunct failed: pairing-encode: " + enc.refusal);
    CodeHandle w = approx.realize_code(scope, 4, *enc.witness);
    std::vector<VertexSet> decw = approx.decode_code(w.code_vertex, scope, 4);
    conjunct("pairing-decodes", decw == *enc.witness);
    conjunct("pairing-shape", strict ? check_injection_witness(decw, dec1, dec2)
                                     : check_bijection_witness(decw, dec1, dec2));

    out.bundle.emplace(InterpretationBundle{
        std::move(third), std::move(basis_x), std::move(basis_third), std::move(scope),
        std::move(u1), std::move(u2), std::move(u3), std::move(u4), std::move(v1),
        std::move(v2), std::move(w), std::move(product1), std::move(product2),
        std::move(rep)});
    return out;
}

}  // namespace detail

// Realizes the existential block of the equality formula for two equivalent
// configurations: an auxiliary configuration matching the second, codes for
// the four bases and the two unordered products, and a code for a bijection
// between the products. Every conjunct is verified semantically.
inline BundleOutcome construct_E_witness(const ConfigurationWitness& w1,
                                         const ConfigurationWitness& w2,
                                         Approximation& approx) {
    return detail::construct_witness_bundle(w1, w2, approx, false);
}

// The order variant: the final code witnesses an injection that is not a
// bijection from the first product family into the second.
inline BundleOutcome construct_O_witness(const ConfigurationWitness& w1,
                                         const ConfigurationWitness& w2,
                                         Approximation& approx) {
    return detail::construct_witness_bundle(w1, w2, approx, true);
}

}  // namespace genstruct
