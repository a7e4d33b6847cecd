#pragma once

#include <tuple>

#include "predimension.hpp"
#include "report.hpp"
#include "structure.hpp"

namespace genstruct {

// Free join of N1 and N2 over the shared part N0: union of vertices, union of
// edges, no new edges across. Vertex ids must already agree: the overlap of
// the two vertex sets must be exactly N0 and both sides must induce the same
// structure on it. Callers join differently-named structures by renaming
// first.
inline Structure free_join(const Structure& n1, const Structure& n2, const VertexSet& n0) {
    if (n1.arity() != n2.arity())
        throw InputError("free_join: arity mismatch");
    VertexSet overlap = set_intersection(n1.vertex_set(), n2.vertex_set());
    if (overlap != n0)
        throw InputError("free_join: vertex overlap differs from the declared shared part");
    if (!(induced(n1, n0) == induced(n2, n0)))
        throw InputError("free_join: the two sides disagree on the shared part");
    Structure out(n1.arity());
    for (const Vertex& v : n1.vertex_set()) out.add_vertex(v);
    for (const Vertex& v : n2.vertex_set()) out.add_vertex(v);
    for (const Edge& e : n1.edge_set()) out.add_edge(e);
    for (const Edge& e : n2.edge_set())
        if (!out.has_edge(e)) out.add_edge(e);
    return out;
}

using AmalgamTriple = std::tuple<Structure, Structure, VertexSet>;

// Checks each (N1, N2, N0) against the amalgamation fact: when the shared
// part is closed in one side and both sides are class members, the free join
// is a class member and the other side sits closed inside it. The join is
// symmetric, so both orientations are tried; a triple whose hypotheses hold
// in neither orientation is skipped with a note rather than failed.
inline Report verify_full_amalgamation(const std::vector<AmalgamTriple>& sample,
                                       const ClassParams& params) {
    Report report;
    report.title = "free-join-amalgamation";
    auto set_text = [](const VertexSet& s) {
        std::string w;
        for (const Vertex& v : s) w += (w.empty() ? "" : ",") + v;
        return "{" + w + "}";
    };
    int idx = 0;
    for (const auto& [n1, n2, n0] : sample) {
        std::string name = "triple-" + std::to_string(idx++);
        if (!is_in_class(n1, params).in_class) {
            report.skip(name, "first side is not a class member");
            continue;
        }
        if (!is_in_class(n2, params).in_class) {
            report.skip(name, "second side is not a class member");
            continue;
        }
        bool hyp1 = detail::is_closed_unchecked(n0, n1, params).closed;
        bool hyp2 = detail::is_closed_unchecked(n0, n2, params).closed;
        if (!hyp1 && !hyp2) {
            report.skip(name, "shared part is not closed in either side");
            continue;
        }
        Structure join = free_join(n1, n2, n0);
        auto in_class = is_in_class(join, params);
        if (!in_class.in_class) {
            report.add(name, false,
                       "join left the class, violator " + set_text(*in_class.violator));
            continue;
        }
        bool good = true;
        if (hyp1) {
            auto closed = detail::is_closed_unchecked(n2.vertex_set(), join, params);
            if (!closed.closed) {
                report.add(name, false, "second side not closed in the join, violator " +
                                            set_text(*closed.violator));
                good = false;
            }
        }
        if (good && hyp2) {
            auto closed = detail::is_closed_unchecked(n1.vertex_set(), join, params);
            if (!closed.closed) {
                report.add(name, false, "first side not closed in the join, violator " +
                                            set_text(*closed.violator));
                good = false;
            }
        }
        if (good) report.add(name, true);
    }
    return report;
}

}  // namespace genstruct
