#include <catch2/catch_amalgamated.hpp>

#include "genstruct/generic_builder.hpp"
#include "test_helpers.hpp"

using namespace genstruct;
using testutil::random_in_class;
using testutil::singleton_gadget;

namespace {

ClassParams ternary_unit() { return ClassParams(Rational(1), 3); }

Structure empty3() { return Structure(3); }

Approximation empty_approx() {
    return Approximation::new_approximation(empty3(), ternary_unit());
}

}  // namespace

TEST_CASE("new approximation accepts class members only") {
    CHECK(empty_approx().current().size() == 0);

    Structure g = singleton_gadget();
    auto from_gadget = Approximation::new_approximation(g, ternary_unit());
    CHECK(from_gadget.current() == g);
    CHECK(from_gadget.chain().size() == 1);
    CHECK(from_gadget.ledger().empty());

    Structure cycle(2);
    for (const Vertex& v : {"x", "y", "z"}) cycle.add_vertex(v);
    cycle.add_edge({"x", "y"});
    cycle.add_edge({"y", "z"});
    cycle.add_edge({"x", "z"});
    CHECK_THROWS_AS(Approximation::new_approximation(cycle, ClassParams(Rational(1), 2)),
                    InputError);

    Structure hash_seed(3);
    hash_seed.add_vertex("#0");
    CHECK_THROWS_AS(Approximation::new_approximation(hash_seed, ternary_unit()), InputError);

    CHECK_THROWS_AS(Approximation::new_approximation(Structure(2), ternary_unit()),
                    InputError);
}

TEST_CASE("ensure_universal inserts, finds, and is idempotent") {
    Approximation approx = empty_approx();

    SECTION("empty request is the identity on the empty structure") {
        Embedding e = approx.ensure_universal(empty3());
        CHECK(e.map().empty());
        CHECK(approx.chain().size() == 1);
        CHECK(approx.ledger().empty());
    }

    SECTION("fresh copy into an empty approximation, then reuse") {
        Structure g = singleton_gadget();
        Embedding first = approx.ensure_universal(g);
        CHECK(approx.current().size() == 4);
        CHECK(approx.chain().size() == 2);
        REQUIRE(approx.ledger().size() == 1);
        CHECK(approx.ledger()[0].kind == "universal");
        CHECK(approx.ledger()[0].new_vertices.size() == 4);
        CHECK(is_closed(first.image(), approx.current(), ternary_unit()).closed);

        Embedding again = approx.ensure_universal(g);
        CHECK(again.map() == first.map());
        CHECK(approx.chain().size() == 2);
        CHECK(approx.ledger().size() == 1);

        Embedding forced = approx.ensure_universal(g, true);
        CHECK(approx.current().size() == 8);
        CHECK(set_intersection(forced.image(), first.image()).empty());
        CHECK(is_closed(forced.image(), approx.current(), ternary_unit()).closed);
    }

    SECTION("non-members are rejected") {
        Structure bad(3);
        for (const Vertex& v : {"x", "y", "z", "w"}) bad.add_vertex(v);
        bad.add_edge({"x", "y", "z"});
        bad.add_edge({"x", "y", "w"});
        bad.add_edge({"x", "z", "w"});
        bad.add_edge({"y", "z", "w"});
        CHECK_THROWS_AS(approx.ensure_universal(bad), InputError);
    }
}

TEST_CASE("ensure_universal returns the least closed copy") {
    // Seed: two disjoint edges. Every single vertex is closed, so a
    // one-vertex request must come back mapped to the alphabetically first.
    Structure seed(3);
    for (const Vertex& v : {"a", "b", "c", "p", "q", "r"}) seed.add_vertex(v);
    seed.add_edge({"a", "b", "c"});
    seed.add_edge({"p", "q", "r"});
    Approximation approx = Approximation::new_approximation(seed, ternary_unit());

    Structure one(3);
    one.add_vertex("x");
    Embedding e = approx.ensure_universal(one);
    CHECK(e.map().at("x") == "a");
    CHECK(approx.chain().size() == 1);
}

TEST_CASE("ensure_homogeneous realizes closed extensions over an image") {
    Structure seed(3);
    seed.add_vertex("a");
    Approximation approx = Approximation::new_approximation(seed, ternary_unit());

    SECTION("the identity task adds nothing") {
        Structure b(3);
        b.add_vertex("base");
        auto out = approx.ensure_homogeneous({"a"}, b, {"base"});
        REQUIRE(out.accepted());
        CHECK(out.embedding->map().at("base") == "a");
        CHECK(approx.current().size() == 1);
        CHECK(approx.ledger().size() == 1);
        CHECK(approx.ledger()[0].kind == "homogeneous");
    }

    SECTION("a pendant edge is realized and keeps everything closed") {
        Structure b(3);
        for (const Vertex& v : {"base", "u", "w"}) b.add_vertex(v);
        b.add_edge({"base", "u", "w"});
        REQUIRE(is_closed({"base"}, b, ternary_unit()).closed);

        auto out = approx.ensure_homogeneous({"a"}, b, {"base"});
        REQUIRE(out.accepted());
        CHECK(approx.current().size() == 3);
        CHECK(approx.current().edge_count() == 1);
        CHECK(is_closed(out.embedding->image(), approx.current(), ternary_unit()).closed);
        CHECK(is_closed({"a"}, approx.current(), ternary_unit()).closed);

        // Same task again: the op always realizes a fresh copy over the image.
        auto out2 = approx.ensure_homogeneous({"a"}, b, {"base"});
        REQUIRE(out2.accepted());
        CHECK(approx.current().size() == 5);
        Structure counted = renamed(b, {{"base", "a"}, {"u", "u"}, {"w", "w"}});
        CHECK(chi({"a"}, counted, approx.current()) == 2);
    }

    SECTION("a minimal-pair extension violates the closed-base requirement") {
        // The gadget keeps its base at equal predimension, so the base is
        // not closed in it and the task must be rejected outright.
        Structure g = singleton_gadget();
        CHECK_FALSE(is_closed({"a"}, g, ternary_unit()).closed);
        CHECK_THROWS_AS(approx.ensure_homogeneous({"a"}, g, {"a"}), InputError);
    }

    SECTION("an unclosed image refuses with a violator") {
        Structure g = singleton_gadget();
        Embedding e = approx.ensure_universal(g, true);
        Vertex image_a = e.map().at("a");

        Structure b(3);
        for (const Vertex& v : {"base", "u", "w"}) b.add_vertex(v);
        b.add_edge({"base", "u", "w"});
        auto out = approx.ensure_homogeneous({image_a}, b, {"base"});
        REQUIRE_FALSE(out.accepted());
        CHECK(out.refusal.find("not closed") != std::string::npos);
        REQUIRE(out.violator.has_value());
        CHECK(out.violator->count(image_a) == 1);
        CHECK(out.violator->size() == 4);
    }

    SECTION("a broken correspondence is rejected") {
        Structure b(3);
        for (const Vertex& v : {"base", "u", "w"}) b.add_vertex(v);
        b.add_edge({"base", "u", "w"});
        CHECK_THROWS_AS(approx.ensure_homogeneous({"a", "a"}, b, {"base", "u"}), InputError);
        CHECK_THROWS_AS(approx.ensure_homogeneous({"missing"}, b, {"base"}), InputError);

        // Base parts that are not isomorphic under the supplied map.
        Structure flat(3);
        for (const Vertex& v : {"p", "q", "r"}) flat.add_vertex(v);
        Approximation approx2 = Approximation::new_approximation(flat, ternary_unit());
        Structure b2(3);
        for (const Vertex& v : {"x", "y", "z", "t"}) b2.add_vertex(v);
        b2.add_edge({"x", "y", "z"});
        REQUIRE(is_closed({"x", "y", "z"}, b2, ternary_unit()).closed);
        CHECK_THROWS_AS(approx2.ensure_homogeneous({"p", "q", "r"}, b2, {"x", "y", "z"}),
                        InputError);
    }
}

TEST_CASE("codes round-trip through realize and decode") {
    Structure seed(3);
    for (const Vertex& v : {"s1", "s2", "s3", "s4"}) seed.add_vertex(v);
    Approximation approx = Approximation::new_approximation(seed, ternary_unit());

    SECTION("the empty family leaves only the anchor gadget") {
        CodeHandle h = approx.realize_code({"s1", "s2"}, 1, {});
        CHECK(h.family.empty());
        CHECK(h.own_gadget.size() == 3);
        CHECK(h.gadgets.empty());
        CHECK(approx.current().size() == 4 + 4);
        CHECK(approx.decode_code(h.code_vertex, {"s1", "s2"}, 1).empty());
        REQUIRE(approx.ledger().size() == 1);
        CHECK(approx.ledger()[0].kind == "code");
    }

    SECTION("a single singleton member") {
        CodeHandle h = approx.realize_code({"s1", "s2"}, 1, {{"s1"}});
        std::vector<VertexSet> want = {{"s1"}};
        CHECK(h.family == want);
        CHECK(h.gadgets.at({"s1"}).size() == 2);
        CHECK(approx.decode_code(h.code_vertex, {"s1", "s2"}, 1) == want);
    }

    SECTION("all two-element subsets of a four-element scope") {
        VertexSet s = {"s1", "s2", "s3", "s4"};
        std::vector<VertexSet> all =
            Approximation::k_subsets({"s1", "s2", "s3", "s4"}, 2);
        REQUIRE(all.size() == 6);
        CodeHandle h = approx.realize_code(s, 2, all);
        CHECK(h.family.size() == 6);
        std::vector<VertexSet> decoded = approx.decode_code(h.code_vertex, s, 2);
        std::vector<VertexSet> want(h.family);
        CHECK(decoded == want);
        // 1 code vertex + 3 anchor vertices + 6 gadgets of 3 vertices each.
        CHECK(approx.current().size() == 4 + 1 + 3 + 18);
    }

    SECTION("a strict subfamily decodes to itself, not the full power set") {
        VertexSet s = {"s1", "s2", "s3"};
        std::vector<VertexSet> x = {{"s1", "s2"}, {"s2", "s3"}};
        CodeHandle h = approx.realize_code(s, 2, x);
        CHECK(approx.decode_code(h.code_vertex, s, 2) == x);
    }

    SECTION("a vertex never used as a code decodes to the empty family") {
        CHECK(approx.decode_code("s3", {"s1", "s2"}, 1).empty());
    }

    SECTION("two codes over overlapping scopes stay independent") {
        CodeHandle h1 = approx.realize_code({"s1", "s2", "s3"}, 1, {{"s1"}, {"s3"}});
        CodeHandle h2 = approx.realize_code({"s1", "s2", "s3"}, 1, {{"s2"}});
        std::vector<VertexSet> w1 = {{"s1"}, {"s3"}};
        std::vector<VertexSet> w2 = {{"s2"}};
        CHECK(approx.decode_code(h1.code_vertex, {"s1", "s2", "s3"}, 1) == w1);
        CHECK(approx.decode_code(h2.code_vertex, {"s1", "s2", "s3"}, 1) == w2);
    }

    SECTION("bad requests are rejected") {
        CHECK_THROWS_AS(approx.realize_code({"s1"}, 0, {}), InputError);
        CHECK_THROWS_AS(approx.realize_code({"nope"}, 1, {}), InputError);
        CHECK_THROWS_AS(approx.realize_code({"s1", "s2"}, 1, {{"s1", "s2"}}), InputError);
        CHECK_THROWS_AS(approx.realize_code({"s1", "s2"}, 1, {{"s3"}}), InputError);
    }
}

TEST_CASE("snapshots replay bit-exactly") {
    SECTION("empty approximation") {
        Approximation a = empty_approx();
        Approximation b = Approximation::replay(a.snapshot());
        CHECK(a.snapshot() == b.snapshot());
        CHECK(a.snapshot_text() == b.snapshot_text());
    }

    SECTION("after a mixed task sequence") {
        Structure seed(3);
        for (const Vertex& v : {"s1", "s2"}) seed.add_vertex(v);
        Approximation a = Approximation::new_approximation(seed, ternary_unit());
        a.ensure_universal(singleton_gadget());
        a.realize_code({"s1", "s2"}, 1, {{"s2"}});
        Structure b(3);
        for (const Vertex& v : {"base", "u", "w"}) b.add_vertex(v);
        b.add_edge({"base", "u", "w"});
        a.ensure_homogeneous({"s1"}, b, {"base"});

        std::string text = a.snapshot_text();
        Approximation r = Approximation::replay_text(text);
        CHECK(r.snapshot_text() == text);
        CHECK(r.current() == a.current());
        CHECK(r.fresh_counter() == a.fresh_counter());
    }

    SECTION("corrupt snapshots fail loudly") {
        Approximation a = empty_approx();
        std::string text = a.snapshot_text();
        CHECK_THROWS_AS(Approximation::replay_text(text.substr(0, text.size() / 2)),
                        InputError);
        CHECK_THROWS_AS(Approximation::replay_text("not json"), InputError);
        Json j = a.snapshot();
        j.erase("chain");
        CHECK_THROWS_AS(Approximation::replay(j), InputError);
    }
}

TEST_CASE("audit re-verifies the whole chain") {
    Structure seed(3);
    for (const Vertex& v : {"s1", "s2"}) seed.add_vertex(v);
    Approximation a = Approximation::new_approximation(seed, ternary_unit());
    a.ensure_universal(singleton_gadget());
    a.realize_code({"s1", "s2"}, 1, {{"s1"}, {"s2"}});

    Report r = a.audit();
    CHECK(r.count("pass") > 0);
    CHECK(r.ok());
}

TEST_CASE("old closed sets stay closed under any growth") {
    std::mt19937 rng(4212);
    ClassParams params = ternary_unit();
    for (int trial = 0; trial < 12; ++trial) {
        Structure seed = random_in_class(rng, 3, 6, 4, params);
        Approximation a = Approximation::new_approximation(seed, params);

        // Record the closure of a random vertex pair, then grow twice.
        std::vector<Vertex> verts(seed.vertex_set().begin(), seed.vertex_set().end());
        VertexSet probe;
        probe.insert(verts[rng() % verts.size()]);
        probe.insert(verts[rng() % verts.size()]);
        VertexSet before = closure(probe, a.current(), params);
        REQUIRE(is_closed(before, a.current(), params).closed);

        a.ensure_universal(singleton_gadget(), true);
        a.realize_code(probe, 1, {{*probe.begin()}});

        CHECK(is_closed(before, a.current(), params).closed);
        CHECK(is_closed(seed.vertex_set(), a.current(), params).closed);
        CHECK(a.audit().ok());
    }
}

TEST_CASE("identical call sequences are deterministic") {
    auto build = [] {
        Structure seed(3);
        for (const Vertex& v : {"s1", "s2", "s3"}) seed.add_vertex(v);
        Approximation a = Approximation::new_approximation(seed, ternary_unit());
        a.ensure_universal(singleton_gadget(), true);
        a.realize_code({"s1", "s2", "s3"}, 2, {{"s1", "s2"}, {"s1", "s3"}});
        Structure b(3);
        for (const Vertex& v : {"base", "u", "w"}) b.add_vertex(v);
        b.add_edge({"base", "u", "w"});
        a.ensure_homogeneous({"s2"}, b, {"base"});
        return a.snapshot_text();
    };
    CHECK(build() == build());
}
