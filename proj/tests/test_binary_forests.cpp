#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "genstruct/binary_forests.hpp"
#include "genstruct/minimal_pairs.hpp"
#include "test_helpers.hpp"

using namespace genstruct;

namespace {

Structure graph(std::initializer_list<Vertex> vs,
                std::initializer_list<std::pair<Vertex, Vertex>> es) {
    Structure g(2);
    for (const Vertex& v : vs) g.add_vertex(v);
    for (const auto& [a, b] : es) g.add_edge({a, b});
    return g;
}

Structure random_graph(std::mt19937_64& rng, int max_vertices) {
    std::uniform_int_distribution<int> nv(1, max_vertices);
    int n = nv(rng);
    Structure g(2);
    for (int i = 0; i < n; ++i) g.add_vertex("g" + std::to_string(i));
    std::uniform_int_distribution<int> coin(0, 3);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng) == 0)
                g.add_edge({"g" + std::to_string(i), "g" + std::to_string(j)});
    return g;
}

ClassParams binary_unit() { return ClassParams(Rational(1), 2); }

}  // namespace

TEST_CASE("forests are recognized by traversal") {
    CHECK(is_forest(graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}})));
    CHECK_FALSE(is_forest(graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}})));
    CHECK(is_forest(Structure(2)));
    CHECK_THROWS_AS(is_forest(Structure(3)), InputError);

    SECTION("agrees with class membership at unit alpha") {
        std::mt19937_64 rng(411);
        for (int trial = 0; trial < 300; ++trial) {
            Structure g = random_graph(rng, 8);
            CHECK(is_forest(g) == is_in_class(g, binary_unit()).in_class);
        }
    }
}

TEST_CASE("the predimension of a forest counts its components") {
    CHECK(delta_components(graph({"a", "b", "c", "d"}, {{"a", "b"}, {"c", "d"}})) == 2);
    CHECK(delta_components(graph({"a"}, {})) == 1);
    Structure three = graph({"a", "b", "c", "d", "e", "f", "g"},
                            {{"a", "b"}, {"b", "c"}, {"d", "e"}, {"f", "g"}});
    CHECK(delta_components(three) == 3);
    CHECK_THROWS_AS(
        delta_components(graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}})),
        InputError);

    SECTION("agrees with delta at unit alpha") {
        std::mt19937_64 rng(412);
        int forests = 0;
        while (forests < 100) {
            Structure g = random_graph(rng, 8);
            if (!is_forest(g)) continue;
            ++forests;
            CHECK(Rational(delta_components(g)) == delta(g, binary_unit()));
        }
    }
}

TEST_CASE("the no-outside-neighbor test is closedness in a forest") {
    Structure n = graph({"a", "b", "c", "d"}, {{"a", "b"}, {"c", "d"}});
    CHECK(gamma_cl_eval({"a", "b"}, n));
    CHECK_FALSE(gamma_cl_eval({"a"}, n));
    CHECK(gamma_cl_eval({}, n));
    CHECK_THROWS_AS(gamma_cl_eval({"zz"}, n), InputError);

    SECTION("matches the predimension-based check on random forests") {
        std::mt19937_64 rng(413);
        int forests = 0;
        while (forests < 60) {
            Structure g = random_graph(rng, 7);
            if (!is_forest(g)) continue;
            ++forests;
            std::vector<Vertex> vs(g.vertex_set().begin(), g.vertex_set().end());
            for (int mask = 0; mask < (1 << vs.size()); ++mask) {
                VertexSet abar;
                for (std::size_t i = 0; i < vs.size(); ++i)
                    if (mask & (1 << i)) abar.insert(vs[i]);
                CHECK(gamma_cl_eval(abar, g) ==
                      is_closed(abar, g, binary_unit()).closed);
            }
        }
    }
}

TEST_CASE("canonical tree forms separate isomorphism types") {
    TreeCatalog catalog;
    const std::size_t expected[] = {1, 1, 1, 2, 3, 6, 11, 23, 47, 106};
    for (std::size_t n = 1; n <= 10; ++n)
        CHECK(catalog.trees_of_size(n).size() == expected[n - 1]);

    SECTION("equal forms exactly for isomorphic trees") {
        for (std::size_t n = 4; n <= 6; ++n) {
            const auto& trees = catalog.trees_of_size(n);
            for (std::size_t i = 0; i < trees.size(); ++i)
                for (std::size_t j = i; j < trees.size(); ++j) {
                    bool same_form = canonical_tree_form(trees[i]) ==
                                     canonical_tree_form(trees[j]);
                    CHECK(same_form == is_isomorphic(trees[i], trees[j]));
                }
        }
    }

    SECTION("a relabeled tree keeps its form") {
        const Structure& t = catalog.trees_of_size(6)[2];
        VertexMap shuffle;
        int idx = 9;
        for (const Vertex& v : t.vertex_set()) shuffle[v] = "z" + std::to_string(idx--);
        CHECK(canonical_tree_form(renamed(t, shuffle)) == canonical_tree_form(t));
    }

    SECTION("rejects non-trees") {
        CHECK_THROWS_AS(canonical_tree_form(graph({"a", "b"}, {})), InputError);
        CHECK_THROWS_AS(
            canonical_tree_form(graph({"a", "b", "c"},
                                      {{"a", "b"}, {"b", "c"}, {"a", "c"}})),
            InputError);
    }
}

TEST_CASE("closed copies of forests are matched by component type") {
    Structure n = graph({"i", "a", "b"}, {{"a", "b"}});
    CHECK(theta_eval(graph({"x"}, {}), n));
    CHECK_FALSE(theta_eval(graph({"x", "y"}, {}), n));
    CHECK(theta_eval(Structure(2), n));
    CHECK(theta_eval(graph({"x", "y"}, {{"x", "y"}}), n));
    CHECK_FALSE(theta_eval(graph({"x", "y", "z"}, {{"x", "y"}, {"y", "z"}}), n));
    CHECK_THROWS_AS(
        theta_eval(graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}}), n),
        InputError);
}

TEST_CASE("witness structures repeat every tree type without bound") {
    TreeCatalog catalog;
    Structure b0 = build_pseudofinite_witness(catalog, 0);
    CHECK(b0.size() == 1);
    CHECK(b0.edge_set().empty());

    Structure b1 = build_pseudofinite_witness(catalog, 1);
    CHECK(theta_eval(graph({"x", "y"}, {}), b1));
    CHECK(theta_eval(graph({"x", "y"}, {{"x", "y"}}), b1));

    SECTION("monotone arrival of every small forest") {
        std::vector<Structure> patterns = {
            graph({"x"}, {}),
            graph({"x", "y"}, {}),
            graph({"x", "y", "z"}, {}),
            graph({"x", "y"}, {{"x", "y"}}),
            graph({"x", "y", "p", "q"}, {{"x", "y"}, {"p", "q"}}),
            graph({"x", "y", "z"}, {{"x", "y"}, {"y", "z"}}),
        };
        for (const Structure& a : patterns) {
            bool arrived = false;
            for (int i = 0; i <= 6; ++i) {
                bool now = theta_eval(a, build_pseudofinite_witness(catalog, i));
                if (arrived) CHECK(now);
                arrived = arrived || now;
            }
            CHECK(arrived);
        }
    }

    SECTION("schedules scale the stage multiplicities") {
        Structure doubled = build_pseudofinite_witness(catalog, 1, {2, 2});
        CHECK(theta_eval(graph({"w", "x", "y", "z"}, {}), doubled));
        CHECK_THROWS_AS(build_pseudofinite_witness(catalog, 1, {1}), InputError);
        CHECK_THROWS_AS(build_pseudofinite_witness(catalog, -1), InputError);
    }
}

TEST_CASE("universality reports name the missing forests") {
    TreeCatalog catalog;
    Structure big = build_pseudofinite_witness(catalog, 6);
    Report good = check_tuniv(big, 3);
    CHECK(good.ok());
    CHECK(good.count("pass") > 1);

    Report bad = check_tuniv(graph({"a", "b"}, {{"a", "b"}}), 2);
    CHECK_FALSE(bad.ok());
    bool isolated_pair_flagged = false;
    for (const auto& line : bad.lines)
        if (line.status == "fail" && line.name.find("2xC()") != std::string::npos)
            isolated_pair_flagged = true;
    CHECK(isolated_pair_flagged);

    Report cyclic =
        check_tuniv(graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}}), 2);
    CHECK_FALSE(cyclic.ok());
    CHECK(cyclic.lines.size() == 1);
}

TEST_CASE("models with enough spare components extend every closed tuple") {
    TreeCatalog catalog;
    CHECK(check_star_homogeneity(build_pseudofinite_witness(catalog, 6), 3).ok());
    CHECK_FALSE(check_star_homogeneity(graph({"a", "b"}, {{"a", "b"}}), 2).ok());
    CHECK(check_star_homogeneity(Structure(2), 0).ok());
}

TEST_CASE("the round game solver matches hand analysis") {
    Structure k1 = graph({"a"}, {});
    Structure k2 = graph({"x", "y"}, {{"x", "y"}});
    Structure two_k1 = graph({"a", "b"}, {});
    Structure three_k1 = graph({"a", "b", "c"}, {});

    CHECK(ef_equivalent(k1, k2, 1));
    CHECK_FALSE(ef_equivalent(k1, k2, 2));
    for (int r = 0; r <= 4; ++r) CHECK(ef_equivalent(k2, k2, r));
    CHECK(ef_equivalent(two_k1, three_k1, 2));
    CHECK_FALSE(ef_equivalent(two_k1, three_k1, 3));
    CHECK_THROWS_AS(ef_equivalent(k1, k2, 5), ResourceError);
    CHECK_THROWS_AS(ef_equivalent(k1, k2, -1), InputError);

    SECTION("empty versus nonempty") {
        CHECK(ef_equivalent(Structure(2), Structure(2), 4));
        CHECK_FALSE(ef_equivalent(Structure(2), k1, 1));
    }
}

TEST_CASE("multiplicity sweeps find a sufficient recipe") {
    Report sweep = spencer_desk_check(2, 2, 2, 5, 7);
    CHECK(sweep.ok());
    bool found = false;
    for (const auto& line : sweep.lines)
        if (line.name == "sufficient-recipe-found" && line.status == "pass") found = true;
    CHECK(found);

    SECTION("full recipes are equivalent at rank two") {
        TreeCatalog catalog;
        std::mt19937_64 rng(99);
        for (int i = 0; i < 8; ++i) {
            Structure a = sample_spencer_forest(catalog, 2, 2, rng);
            Structure b = sample_spencer_forest(catalog, 2, 2, rng);
            CHECK(ef_equivalent(a, b, 2));
        }
    }

    SECTION("an undersupplied isolated vertex is caught") {
        CHECK_FALSE(ef_equivalent(graph({"a"}, {}), graph({"a", "b"}, {}), 2));
    }
}
