#include <catch2/catch_amalgamated.hpp>

#include "genstruct/interpretation.hpp"
#include "test_helpers.hpp"

using namespace genstruct;

namespace {

ClassParams ternary_unit() { return ClassParams(Rational(1), 3); }

Approximation fresh_host() {
    return Approximation::new_approximation(Structure(3), ternary_unit());
}

}  // namespace

TEST_CASE("the canonical triple carries verified certificates") {
    ABCTriple t = canonical_triple();
    CHECK(t.a.size() == 1);
    CHECK(t.b.size() == 4);
    CHECK(t.c.size() == 5);
    CHECK(t.b_certificate.kind == PairKind::zero_biminimal);
    CHECK(t.c_certificate.kind == PairKind::zero_biminimal);
    CHECK(delta(t.b, ternary_unit()) == delta_subset(t.b, {"a"}, ternary_unit()));
    CHECK(delta(t.c, ternary_unit()) == Rational(1));
    CHECK_FALSE(is_isomorphic(t.b, t.c));
}

TEST_CASE("configurations certify their copy counts") {
    ABCTriple t = canonical_triple();
    Approximation host = fresh_host();

    ConfigurationWitness w11 = build_configuration(t, 1, 1, host);
    CHECK(w11.p == 1);
    CHECK(w11.q == 1);
    CHECK(w11.b_copies.size() == 1);
    CHECK(w11.c_copies.size() == 1);
    CHECK(host.current().size() == 1 + 3 + 4);

    ConfigurationWitness w23 = build_configuration(t, 2, 3, host);
    CHECK(w23.b_copies.size() == 2);
    CHECK(w23.c_copies.size() == 3);
    auto re = detail::recompute_configuration(w23);
    CHECK(re.b_images.size() == 2);
    CHECK(re.c_images.size() == 3);
    CHECK(re.pairwise_ok);
    CHECK(re.cross_ok);

    CHECK_THROWS_AS(build_configuration(t, 0, 1, host), InputError);
    CHECK_THROWS_AS(build_configuration(t, 1, 0, host), InputError);
}

TEST_CASE("copy counts inside the host match counts inside the freestanding shape") {
    ABCTriple t = canonical_triple();
    Approximation host = fresh_host();
    ConfigurationWitness w = build_configuration(t, 2, 3, host);
    const Vertex& av = *w.abar.begin();

    // The same counting run directly on a freestanding D built over "a".
    Structure d = t.a;
    for (int i = 1; i <= 2; ++i) {
        VertexMap rename = {{"a", "a"}};
        for (const Vertex& v : t.b.vertex_set())
            if (v != "a") rename[v] = "b" + std::to_string(i) + "_" + v;
        d = free_join(d, renamed(t.b, rename), {"a"});
    }
    for (int i = 1; i <= 3; ++i) {
        VertexMap rename = {{"a", "a"}};
        for (const Vertex& v : t.c.vertex_set())
            if (v != "a") rename[v] = "c" + std::to_string(i) + "_" + v;
        d = free_join(d, renamed(t.c, rename), {"a"});
    }

    Structure b_host = renamed(t.b, {{"a", av}, {"b1", "b1"}, {"b2", "b2"}, {"b3", "b3"}});
    CHECK(chi(w.abar, b_host, host.current()) == chi({"a"}, t.b, d));
    Structure c_host = renamed(
        t.c, {{"a", av}, {"c1", "c1"}, {"c2", "c2"}, {"c3", "c3"}, {"c4", "c4"}});
    CHECK(chi(w.abar, c_host, host.current()) == chi({"a"}, t.c, d));
}

TEST_CASE("equivalence and order follow the cross products") {
    ABCTriple t = canonical_triple();
    Approximation host = fresh_host();

    ConfigurationWitness w12 = build_configuration(t, 1, 2, host);
    ConfigurationWitness w24 = build_configuration(t, 2, 4, host);
    ConfigurationWitness w23 = build_configuration(t, 2, 3, host);
    ConfigurationWitness w11a = build_configuration(t, 1, 1, host);
    ConfigurationWitness w11b = build_configuration(t, 1, 1, host);

    CHECK(eval_equiv(w12, w24));
    CHECK(eval_equiv(w11a, w11b));
    CHECK_FALSE(eval_equiv(w12, w23));

    CHECK(eval_order(w12, w23));
    CHECK_FALSE(eval_order(w23, w12));
    CHECK_FALSE(eval_order(w11a, w11b));
    CHECK_FALSE(eval_order(w11b, w11a));
    CHECK_FALSE(eval_order(w12, w24));

    SECTION("witnesses from different hosts do not compare") {
        Approximation other = fresh_host();
        ConfigurationWitness foreign = build_configuration(t, 1, 1, other);
        CHECK_THROWS_AS(eval_equiv(w12, foreign), InputError);
        CHECK_THROWS_AS(eval_order(foreign, w12), InputError);
    }

    SECTION("a witness does not occupy a disjoint region from itself") {
        CHECK_THROWS_AS(eval_equiv(w12, w12), InputError);
        CHECK_THROWS_AS(eval_order(w12, w12), InputError);
    }
}

TEST_CASE("a small sweep matches rational arithmetic") {
    ABCTriple t = canonical_triple();
    Approximation host = fresh_host();

    struct Entry {
        int p, q;
        ConfigurationWitness w;
    };
    std::vector<Entry> entries;
    for (int bank = 0; bank < 2; ++bank)
        for (int p = 1; p <= 3; ++p)
            for (int q = 1; q <= 3; ++q)
                entries.push_back({p, q, build_configuration(t, p, q, host)});

    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = 0; j < entries.size(); ++j) {
            if (i == j) continue;
            const Entry& x = entries[i];
            const Entry& y = entries[j];
            Rational rx(x.p, x.q), ry(y.p, y.q);
            CHECK(eval_equiv(x.w, y.w) == (rx == ry));
            CHECK(eval_order(x.w, y.w) == (rx < ry));
        }
    }
}

TEST_CASE("unordered products multiply cardinalities") {
    CHECK(unordered_product({"x"}, {"y"}).size() == 1);
    auto six = unordered_product({"x1", "x2"}, {"y1", "y2", "y3"});
    CHECK(six.size() == 6);
    for (const VertexSet& pair : six) CHECK(pair.size() == 2);
    CHECK_THROWS_AS(unordered_product({"x", "z"}, {"z", "y"}), InputError);
    CHECK_THROWS_AS(unordered_product({}, {"y"}), InputError);
}

TEST_CASE("pairing witnesses encode and check") {
    std::vector<VertexSet> p = {{"p1", "p2"}, {"p3", "p4"}};
    std::vector<VertexSet> q = {{"q1", "q2"}, {"q3", "q4"}};

    SECTION("equal sizes give a bijection") {
        EncodeOutcome enc = encode_bijection_witness(p, q);
        REQUIRE(enc.accepted());
        CHECK(enc.witness->size() == 2);
        for (const VertexSet& quad : *enc.witness) CHECK(quad.size() == 4);
        CHECK(check_bijection_witness(*enc.witness, p, q));
        CHECK_FALSE(check_injection_witness(*enc.witness, p, q));
    }

    SECTION("smaller left side gives an injection, not a bijection") {
        std::vector<VertexSet> q3 = {{"q1", "q2"}, {"q3", "q4"}, {"q5", "q6"}};
        CHECK_FALSE(encode_bijection_witness(p, q3).accepted());
        EncodeOutcome enc = encode_injection_witness(p, q3);
        REQUIRE(enc.accepted());
        CHECK(enc.witness->size() == 2);
        CHECK(check_injection_witness(*enc.witness, p, q3));
        CHECK_FALSE(check_bijection_witness(*enc.witness, p, q3));
    }

    SECTION("empty families are vacuously bijective") {
        EncodeOutcome enc = encode_bijection_witness({}, {});
        REQUIRE(enc.accepted());
        CHECK(enc.witness->empty());
        CHECK(check_bijection_witness(*enc.witness, {}, {}));
    }

    SECTION("a broken pairing fails the check") {
        EncodeOutcome enc = encode_bijection_witness(p, q);
        REQUIRE(enc.accepted());
        std::vector<VertexSet> doubled = {(*enc.witness)[0], (*enc.witness)[0]};
        CHECK_FALSE(check_bijection_witness(doubled, p, q));
    }

    SECTION("overlapping supports are ambiguous") {
        std::vector<VertexSet> overlap = {{"p1", "q1"}};
        CHECK_THROWS_AS(check_bijection_witness({}, p, overlap), InputError);
    }
}

TEST_CASE("equality witnesses assemble and verify") {
    ABCTriple t = canonical_triple();

    SECTION("matching counts") {
        Approximation host = fresh_host();
        ConfigurationWitness w1 = build_configuration(t, 1, 1, host);
        ConfigurationWitness w2 = build_configuration(t, 2, 2, host);
        BundleOutcome out = construct_E_witness(w1, w2, host);
        REQUIRE(out.accepted());
        const InterpretationBundle& b = *out.bundle;
        CHECK(b.checks.ok());
        CHECK(b.product1.size() == 2);
        CHECK(b.product2.size() == 2);
        CHECK(b.basis_x.xb.size() == 1);
        CHECK(b.basis_third.yc.size() == 2);
        CHECK(host.audit().ok());
    }

    SECTION("equivalent but unequal counts") {
        Approximation host = fresh_host();
        ConfigurationWitness w1 = build_configuration(t, 1, 2, host);
        ConfigurationWitness w2 = build_configuration(t, 2, 4, host);
        BundleOutcome out = construct_E_witness(w1, w2, host);
        REQUIRE(out.accepted());
        CHECK(out.bundle->product1.size() == 4);
        CHECK(out.bundle->product2.size() == 4);
        CHECK(out.bundle->w.family.size() == 4);
    }

    SECTION("non-equivalent witnesses refuse") {
        Approximation host = fresh_host();
        ConfigurationWitness w1 = build_configuration(t, 1, 2, host);
        ConfigurationWitness w2 = build_configuration(t, 2, 3, host);
        BundleOutcome out = construct_E_witness(w1, w2, host);
        CHECK_FALSE(out.accepted());
        CHECK(!out.refusal.empty());
    }
}

TEST_CASE("order witnesses assemble and verify") {
    ABCTriple t = canonical_triple();

    SECTION("one-half below two-thirds") {
        Approximation host = fresh_host();
        ConfigurationWitness w1 = build_configuration(t, 1, 2, host);
        ConfigurationWitness w2 = build_configuration(t, 2, 3, host);
        BundleOutcome out = construct_O_witness(w1, w2, host);
        REQUIRE(out.accepted());
        CHECK(out.bundle->checks.ok());
        CHECK(out.bundle->product1.size() == 3);
        CHECK(out.bundle->product2.size() == 4);
        CHECK(out.bundle->w.family.size() == 3);
    }

    SECTION("one below two") {
        Approximation host = fresh_host();
        ConfigurationWitness w1 = build_configuration(t, 1, 1, host);
        ConfigurationWitness w2 = build_configuration(t, 2, 1, host);
        BundleOutcome out = construct_O_witness(w1, w2, host);
        REQUIRE(out.accepted());
        CHECK(out.bundle->product1.size() == 1);
        CHECK(out.bundle->product2.size() == 2);
    }

    SECTION("equivalent witnesses refuse") {
        Approximation host = fresh_host();
        ConfigurationWitness w1 = build_configuration(t, 2, 2, host);
        ConfigurationWitness w2 = build_configuration(t, 1, 1, host);
        BundleOutcome out = construct_O_witness(w1, w2, host);
        CHECK_FALSE(out.accepted());
    }
}

TEST_CASE("recomputed counts never exceed the built ones after growth") {
    ABCTriple t = canonical_triple();
    Approximation host = fresh_host();
    ConfigurationWitness w1 = build_configuration(t, 2, 2, host);
    ConfigurationWitness w2 = build_configuration(t, 1, 1, host);
    BundleOutcome out = construct_E_witness(w1, w2, host);
    REQUIRE(out.accepted());

    for (const ConfigurationWitness* w : {&w1, &w2, &out.bundle->third}) {
        auto r = detail::recount(*w);
        CHECK(r.p == w->p);
        CHECK(r.q == w->q);
    }
}
