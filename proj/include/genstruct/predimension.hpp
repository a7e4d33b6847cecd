#pragma once

#include <map>
#include <optional>
#include <vector>

#include "rational.hpp"
#include "structure.hpp"

namespace genstruct {

struct ClassParams {
    Rational alpha;
    int arity;

    ClassParams(Rational a, int ar) : alpha(std::move(a)), arity(ar) {
        if (!alpha.is_positive() || Rational(1) < alpha)
            throw InputError("alpha must lie in (0,1], got " + alpha.str());
        if (arity != 2 && arity != 3)
            throw InputError("arity must be 2 or 3");
    }

    static ClassParams unit(int arity) { return ClassParams(Rational(1), arity); }
};

inline Rational delta(const Structure& s, const ClassParams& params) {
    return Rational(static_cast<long long>(s.size())) -
           params.alpha * Rational(static_cast<long long>(s.edge_count()));
}

// delta of the substructure induced on T, without building it.
inline Rational delta_subset(const Structure& s, const VertexSet& t, const ClassParams& params) {
    long long inside = 0;
    for (const Edge& e : s.edge_set()) {
        bool in = true;
        for (const Vertex& v : e)
            if (!t.count(v)) { in = false; break; }
        if (in) ++inside;
    }
    for (const Vertex& v : t)
        if (!s.has_vertex(v)) throw InputError("delta_subset: unknown vertex " + v);
    return Rational(static_cast<long long>(t.size())) - params.alpha * Rational(inside);
}

inline Rational delta_rel(const Structure& b, const VertexSet& a, const ClassParams& params) {
    for (const Vertex& v : a)
        if (!b.has_vertex(v)) throw InputError("delta_rel: base names unknown vertex " + v);
    return delta(b, params) - delta_subset(b, a, params);
}

namespace detail {

// Exact minimizer for f(T) = q·|T| − Σ{weight(r) : members(r) ⊆ T} over
// subsets T of an index universe. Class membership and closedness both reduce
// to asking whether the minimum over nonempty T stays positive. A flat loop
// over edge subsets is exponential in the edge count, so the recursion
// decomposes instead: requirements whose member sets share no live vertex are
// independent (forced vertices are paid for and drop out of connectivity),
// and within one connected block it branches on the vertex of highest
// residual degree. Everything is integer arithmetic: q = den(alpha),
// weight = num(alpha) per requirement before merging duplicates.
struct Requirement {
    std::vector<int> members;  // sorted indices
    long long weight;
};

struct MinResult {
    bool attained = false;
    long long value = 0;
    std::vector<int> chosen;  // sorted indices
};

class SubsetMinimizer {
public:
    SubsetMinimizer(int universe_size, std::vector<Requirement> reqs, long long q)
        : n_(universe_size), q_(q) {
        std::map<std::vector<int>, long long> merged;
        for (auto& r : reqs) {
            if (r.members.empty()) continue;
            merged[r.members] += r.weight;
        }
        for (auto& [m, w] : merged) reqs_.push_back({m, w});
    }

    // Minimum of f over all subsets including the empty one; always ≤ 0.
    MinResult min_all() const {
        std::vector<char> live(n_, 1);
        std::vector<Requirement> reqs = reqs_;
        MinResult r = solve_all(live, reqs);
        r.attained = true;
        return r;
    }

    // Minimum of f over nonempty subsets; unattained iff the universe is empty.
    MinResult min_nonempty() const {
        std::vector<char> live(n_, 1);
        std::vector<Requirement> reqs = reqs_;
        return solve_nonempty(live, reqs);
    }

private:
    int n_;
    long long q_;
    std::vector<Requirement> reqs_;

    static std::vector<std::vector<int>> components(const std::vector<char>& live,
                                                    const std::vector<Requirement>& reqs) {
        std::map<int, int> parent;
        std::function<int(int)> find = [&](int v) {
            int r = v;
            while (parent[r] != r) r = parent[r];
            while (parent[v] != r) { int nx = parent[v]; parent[v] = r; v = nx; }
            return r;
        };
        for (const auto& r : reqs)
            for (int m : r.members)
                if (live[m] && !parent.count(m)) parent[m] = m;
        for (const auto& r : reqs) {
            int first = -1;
            for (int m : r.members) {
                if (!live[m]) continue;
                if (first < 0) { first = find(m); continue; }
                int rm = find(m);
                if (rm != first) parent[rm] = first;
            }
        }
        std::map<int, std::vector<int>> groups;
        for (auto& [v, p] : parent) groups[find(v)].push_back(v);
        std::vector<std::vector<int>> out;
        for (auto& [root, grp] : groups) {
            std::sort(grp.begin(), grp.end());
            out.push_back(std::move(grp));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    static std::vector<Requirement> reqs_in(const std::vector<int>& comp,
                                            const std::vector<Requirement>& reqs) {
        std::set<int> cs(comp.begin(), comp.end());
        std::vector<Requirement> out;
        for (const auto& r : reqs)
            if (cs.count(r.members[0])) out.push_back(r);
        return out;
    }

    // Branch vertex: highest residual requirement count, ties to least index.
    static int pick_branch(const std::vector<Requirement>& reqs) {
        std::map<int, int> cnt;
        for (const auto& r : reqs)
            for (int m : r.members) ++cnt[m];
        int best = -1, bestc = -1;
        for (auto& [v, c] : cnt)
            if (c > bestc) { best = v; bestc = c; }
        return best;
    }

    struct Branches {
        std::vector<Requirement> incl;
        long long credit = 0;  // weights of requirements completed by including v
        std::vector<Requirement> excl;
    };

    static Branches split_on(int v, const std::vector<Requirement>& reqs) {
        Branches b;
        for (const auto& r : reqs) {
            bool has = std::binary_search(r.members.begin(), r.members.end(), v);
            if (!has) {
                b.incl.push_back(r);
                b.excl.push_back(r);
                continue;
            }
            if (r.members.size() == 1) {
                b.credit += r.weight;
                continue;
            }
            Requirement res;
            res.weight = r.weight;
            for (int m : r.members)
                if (m != v) res.members.push_back(m);
            b.incl.push_back(std::move(res));
        }
        return b;
    }

    // Live vertices touched by some requirement, in index order.
    MinResult solve_all(std::vector<char>& live, const std::vector<Requirement>& reqs) const {
        MinResult out;
        out.attained = true;
        if (reqs.empty()) return out;
        auto comps = components(live, reqs);
        if (comps.size() > 1) {
            for (const auto& comp : comps) {
                MinResult sub = solve_all_component(live, comp, reqs_in(comp, reqs));
                if (sub.value < 0) {
                    out.value += sub.value;
                    out.chosen.insert(out.chosen.end(), sub.chosen.begin(), sub.chosen.end());
                }
            }
            std::sort(out.chosen.begin(), out.chosen.end());
            return out;
        }
        return solve_all_component(live, comps[0], reqs);
    }

    MinResult solve_all_component(std::vector<char>& live, const std::vector<int>& comp,
                                  const std::vector<Requirement>& reqs) const {
        MinResult out;
        out.attained = true;
        if (reqs.empty()) return out;
        long long total_w = 0;
        for (const auto& r : reqs) total_w += r.weight;
        if (q_ - total_w >= 0) return out;  // no subset can go below 0 here

        int v = pick_branch(reqs);
        Branches b = split_on(v, reqs);

        live[v] = 0;
        MinResult exc = solve_all(live, b.excl);

        // Optimistic include value: pay q for v, claim every remaining weight.
        long long inc_lb = q_ - b.credit;
        for (const auto& r : b.incl) inc_lb -= r.weight;
        MinResult best = exc;
        if (inc_lb < best.value) {
            MinResult inc = solve_all(live, b.incl);
            inc.value += q_ - b.credit;
            inc.chosen.push_back(v);
            std::sort(inc.chosen.begin(), inc.chosen.end());
            if (inc.value < best.value) best = std::move(inc);
        }
        live[v] = 1;
        if (best.value > 0) { best.value = 0; best.chosen.clear(); }
        return best;
    }

    MinResult solve_nonempty(std::vector<char>& live,
                             const std::vector<Requirement>& reqs) const {
        std::vector<int> live_list;
        for (int i = 0; i < n_; ++i)
            if (live[i]) live_list.push_back(i);
        return solve_nonempty_on(live, live_list, reqs);
    }

    MinResult solve_nonempty_on(std::vector<char>& live, const std::vector<int>& live_list,
                                const std::vector<Requirement>& reqs) const {
        MinResult out;
        if (live_list.empty()) return out;
        auto comps = components(live, reqs);
        std::set<int> in_comp;
        std::vector<MinResult> all_res, ne_res;
        long long neg_total = 0;
        for (const auto& comp : comps) {
            auto creqs = reqs_in(comp, reqs);
            all_res.push_back(solve_all_component(live, comp, creqs));
            ne_res.push_back(solve_nonempty_component(live, comp, creqs));
            for (int v : comp) in_comp.insert(v);
            neg_total += std::min(0LL, all_res.back().value);
        }

        // Any nonempty T touches some component (or only requirement-free
        // vertices); the best choice designates one component as nonempty and
        // takes every strictly helpful component alongside.
        std::optional<std::size_t> best_i;
        long long best_val = 0;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (!ne_res[i].attained) continue;
            long long val =
                ne_res[i].value + neg_total - std::min(0LL, all_res[i].value);
            if (!best_i || val < best_val) {
                best_i = i;
                best_val = val;
            }
        }
        std::optional<MinResult> best;
        if (best_i) {
            MinResult cand;
            cand.attained = true;
            cand.value = best_val;
            cand.chosen = ne_res[*best_i].chosen;
            for (std::size_t j = 0; j < comps.size(); ++j) {
                if (j == *best_i || all_res[j].value >= 0) continue;
                cand.chosen.insert(cand.chosen.end(), all_res[j].chosen.begin(),
                                   all_res[j].chosen.end());
            }
            std::sort(cand.chosen.begin(), cand.chosen.end());
            best = std::move(cand);
        }
        for (int v : live_list) {
            if (in_comp.count(v)) continue;
            if (!best || q_ < best->value) {
                MinResult single;
                single.attained = true;
                single.value = q_;
                single.chosen = {v};
                best = std::move(single);
            }
            break;  // all requirement-free vertices are interchangeable
        }
        if (!best) return out;
        return *best;
    }

    MinResult solve_nonempty_component(std::vector<char>& live, const std::vector<int>& comp,
                                       const std::vector<Requirement>& reqs) const {
        int v = pick_branch(reqs);
        Branches b = split_on(v, reqs);

        MinResult inc = solve_all(live, b.incl);
        // solve_all may leave v unavailable implicitly; v is paid here.
        inc.value += q_ - b.credit;
        inc.chosen.push_back(v);
        std::sort(inc.chosen.begin(), inc.chosen.end());
        inc.attained = true;

        live[v] = 0;
        std::vector<int> rest;
        for (int u : comp)
            if (u != v) rest.push_back(u);
        MinResult exc = solve_nonempty_on(live, rest, b.excl);
        live[v] = 1;

        if (!exc.attained || inc.value < exc.value) return inc;
        return exc;
    }
};

// Builds the requirement list for class membership: one requirement per edge.
inline SubsetMinimizer class_minimizer(const Structure& s, long long p, long long q,
                                       std::map<int, Vertex>* names) {
    std::vector<Vertex> verts = s.vertices();
    std::map<Vertex, int> idx;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        idx[verts[i]] = static_cast<int>(i);
        if (names) (*names)[static_cast<int>(i)] = verts[i];
    }
    std::vector<Requirement> reqs;
    for (const Edge& e : s.edge_set()) {
        Requirement r;
        r.weight = p;
        for (const Vertex& v : e) r.members.push_back(idx[v]);
        std::sort(r.members.begin(), r.members.end());
        reqs.push_back(std::move(r));
    }
    return SubsetMinimizer(static_cast<int>(verts.size()), std::move(reqs), q);
}

// Requirements for closedness of `a` in `b`: the residual e∖a of every edge
// leaving a, over the universe b∖a.
inline SubsetMinimizer closedness_minimizer(const Structure& b, const VertexSet& a,
                                            long long p, long long q,
                                            std::map<int, Vertex>* names) {
    std::vector<Vertex> outside;
    for (const Vertex& v : b.vertex_set())
        if (!a.count(v)) outside.push_back(v);
    std::map<Vertex, int> idx;
    for (std::size_t i = 0; i < outside.size(); ++i) {
        idx[outside[i]] = static_cast<int>(i);
        if (names) (*names)[static_cast<int>(i)] = outside[i];
    }
    std::vector<Requirement> reqs;
    for (const Edge& e : b.edge_set()) {
        Requirement r;
        r.weight = p;
        for (const Vertex& v : e)
            if (!a.count(v)) r.members.push_back(idx[v]);
        if (r.members.empty()) continue;
        std::sort(r.members.begin(), r.members.end());
        reqs.push_back(std::move(r));
    }
    return SubsetMinimizer(static_cast<int>(outside.size()), std::move(reqs), q);
}

inline long long small_int(const BigInt& x, const char* what) {
    if (x > BigInt(1000000) || x < BigInt(-1000000))
        throw InputError(std::string(what) + " too large for the exact engine");
    return x.convert_to<long long>();
}

}  // namespace detail

struct ClassCheckResult {
    bool in_class = false;
    // Present exactly when in_class is false: a ⊆-minimal subset with δ ≤ 0.
    std::optional<VertexSet> violator;
};

namespace detail {

// Shrinks a violating vertex set to a ⊆-minimal one by repeatedly searching
// for violations inside T minus one element.
template <typename ViolatorSearch>
VertexSet refine_violator(VertexSet t, const ViolatorSearch& search_inside) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const Vertex& v : std::vector<Vertex>(t.begin(), t.end())) {
            VertexSet smaller = t;
            smaller.erase(v);
            if (smaller.empty()) continue;
            std::optional<VertexSet> inner = search_inside(smaller);
            if (inner) {
                t = std::move(*inner);
                changed = true;
                break;
            }
        }
    }
    return t;
}

}  // namespace detail

inline ClassCheckResult is_in_class(const Structure& s, const ClassParams& params) {
    long long p = detail::small_int(params.alpha.num(), "alpha numerator");
    long long q = detail::small_int(params.alpha.den(), "alpha denominator");

    // Finds a violating subset within `allowed` (whole structure when empty).
    auto find_violator = [&](const VertexSet& allowed) -> std::optional<VertexSet> {
        const Structure* target = &s;
        Structure restricted(s.arity());
        if (!allowed.empty()) {
            restricted = induced(s, allowed);
            target = &restricted;
        }
        std::map<int, Vertex> names;
        auto mz = detail::class_minimizer(*target, p, q, &names);
        auto r = mz.min_nonempty();
        if (!r.attained || r.value > 0) return std::nullopt;
        VertexSet t;
        for (int i : r.chosen) t.insert(names[i]);
        return t;
    };

    auto first = find_violator({});
    if (!first) return {true, std::nullopt};
    VertexSet minimal = detail::refine_violator(
        *first, [&](const VertexSet& inside) { return find_violator(inside); });
    return {false, minimal};
}

struct ClosedCheckResult {
    bool closed = false;
    // Present exactly when closed is false: a ⊆-minimal C with A ⊊ C ⊆ B and
    // δ(C) ≤ δ(A).
    std::optional<VertexSet> violator;
};

namespace detail {

// Core closedness test with no precondition validation; used by callers that
// have already established B ∈ K⁺ (the builder validates once per chain).
inline ClosedCheckResult is_closed_unchecked(const VertexSet& a, const Structure& b,
                                             const ClassParams& params) {
    long long p = small_int(params.alpha.num(), "alpha numerator");
    long long q = small_int(params.alpha.den(), "alpha denominator");

    auto find_violator = [&](const VertexSet& allowed_outside) -> std::optional<VertexSet> {
        const Structure* target = &b;
        Structure restricted(b.arity());
        if (!allowed_outside.empty()) {
            restricted = induced(b, set_union(a, allowed_outside));
            target = &restricted;
        }
        std::map<int, Vertex> names;
        auto mz = closedness_minimizer(*target, a, p, q, &names);
        auto r = mz.min_nonempty();
        if (!r.attained || r.value > 0) return std::nullopt;
        VertexSet x;
        for (int i : r.chosen) x.insert(names[i]);
        return x;
    };

    auto first = find_violator({});
    if (!first) return {true, std::nullopt};
    VertexSet minimal_x = refine_violator(
        *first, [&](const VertexSet& inside) { return find_violator(inside); });
    return {false, set_union(a, minimal_x)};
}

}  // namespace detail

inline ClosedCheckResult is_closed(const VertexSet& a, const Structure& b,
                                   const ClassParams& params) {
    for (const Vertex& v : a)
        if (!b.has_vertex(v)) throw InputError("is_closed: base names unknown vertex " + v);
    if (b.arity() != params.arity)
        throw InputError("is_closed: structure arity does not match params");
    if (!is_in_class(b, params).in_class)
        throw InputError("is_closed: ambient structure is not in the class");
    return detail::is_closed_unchecked(a, b, params);
}

namespace detail {

inline VertexSet closure_unchecked(const VertexSet& a, const Structure& n,
                                   const ClassParams& params) {
    VertexSet s = a;
    while (true) {
        ClosedCheckResult r = is_closed_unchecked(s, n, params);
        if (r.closed) return s;
        s = set_union(s, *r.violator);
    }
}

}  // namespace detail

inline VertexSet closure(const VertexSet& a, const Structure& n, const ClassParams& params) {
    for (const Vertex& v : a)
        if (!n.has_vertex(v)) throw InputError("closure: base names unknown vertex " + v);
    if (n.arity() != params.arity)
        throw InputError("closure: structure arity does not match params");
    if (!is_in_class(n, params).in_class)
        throw InputError("closure: ambient structure is not in the class");
    return detail::closure_unchecked(a, n, params);
}

}  // namespace genstruct
