#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "qdtile/folner.hpp"

using namespace qdtile;
using namespace qdtile::groups;
using namespace qdtile::tiling;
using linalg::make_ratio;
using linalg::Rational;

TEST_CASE("Folner boxes: shapes and sizes") {
    LatticeGroup z(1);
    FolnerSet f = folner_box(z, 4);
    REQUIRE(f.size() == 4);
    for (std::int64_t v : {0, 1, 2, 3}) CHECK(f.contains(z.element({v})));

    LatticeGroup z2(2);
    CHECK(folner_box(z2, 2).size() == 4);

    HeisenbergGroup h;
    CHECK(folner_box(h, 2).size() == 16); // 2*2*4

    FiniteCyclicGroup z12({12});
    CHECK(folner_box(z12, 1).size() == 12);
    CHECK(folner_box(z12, 5).size() == 12); // whole group at every n
}

TEST_CASE("boundary ratios: frozen values") {
    LatticeGroup z(1);
    CHECK(boundary_ratio(folner_box(z, 8), z.element({1})) == make_ratio(1, 4));
    for (int n = 1; n <= 64; ++n)
        CHECK(boundary_ratio(folner_box(z, n), z.element({1})) == make_ratio(2, n));

    LatticeGroup z2(2);
    CHECK(boundary_ratio(folner_box(z2, 4), z2.element({1, 0})) == make_ratio(1, 2));

    HeisenbergGroup h;
    CHECK(boundary_ratio(folner_box(h, 3), h.identity()) == Rational(0));
}

TEST_CASE("boundary ratio agrees with an independent two-sided recount") {
    HeisenbergGroup h;
    FolnerSet f = folner_box(h, 3);
    const GroupElement s = h.element({0, 1, 0});

    ElemSet fs;
    for (const auto& x : f.elements) fs.insert(h.mul(x, s));
    std::size_t f_minus_fs = 0, fs_minus_f = 0;
    for (const auto& x : f.elements)
        if (fs.count(x) == 0) ++f_minus_fs;
    for (const auto& x : fs)
        if (!f.contains(x)) ++fs_minus_f;

    const Rational expect = make_ratio(static_cast<std::int64_t>(f_minus_fs + fs_minus_f),
                                       static_cast<std::int64_t>(f.size()));
    CHECK(boundary_ratio(f, s) == expect);
    CHECK(expect > Rational(0));
}

TEST_CASE("Folner decay towards zero along the box family") {
    // ratio(box(n), s) is nonincreasing past a small n0 and ends well below
    // its start
    HeisenbergGroup h;
    const GroupElement s = h.element({0, 1, 0});
    Rational prev(-1);
    std::vector<Rational> seq;
    for (int n = 2; n <= 8; ++n) seq.push_back(boundary_ratio(folner_box(h, n), s));
    for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] <= seq[i - 1]);
    CHECK(seq.back() < seq.front());
    (void)prev;
}

TEST_CASE("separating subgroup search: frozen minimal members") {
    LatticeGroup z(1);
    FolnerSet f5 = folner_box(z, 5);
    FiniteIndexSubgroup l = separating_subgroup(f5, SubgroupFamily::standard(z));
    CHECK(l.index() == 5); // 5Z is the first separating member for {0..4}

    LatticeGroup z2(2);
    FiniteIndexSubgroup l2 = separating_subgroup(folner_box(z2, 3), SubgroupFamily::standard(z2));
    CHECK(l2.index() == 9); // (3Z)^2

    HeisenbergGroup h;
    FiniteIndexSubgroup lh = separating_subgroup(folner_box(h, 2), SubgroupFamily::standard(h));
    // brute-force minimality oracle: level 4 separates, levels 2 and 3 do not
    CHECK(lh.index() == 64);
    FolnerSet f = folner_box(h, 2);
    auto fif = product_set(h, inverse_set(h, f.elements), f.elements);
    for (std::int64_t level : {2, 3}) {
        FiniteIndexSubgroup small(h, FiniteIndexSubgroup::HeisenbergLevel{level});
        bool separates = true;
        for (const auto& d : fif)
            if (!(d == h.identity()) && small.contains(d)) separates = false;
        CHECK_FALSE(separates);
    }
    for (const auto& d : fif)
        if (!(d == h.identity())) CHECK_FALSE(lh.contains(d));
}

TEST_CASE("separating search fails cleanly when the family runs out") {
    FiniteCyclicGroup z4({4});
    // the only standard member for finite groups is {e}; forbid it via a
    // family that yields nothing
    SubgroupFamily empty("empty", [](std::size_t) { return std::nullopt; });
    CHECK_THROWS_AS(separating_subgroup(folner_box(z4, 1), empty), CertificationError);
}

TEST_CASE("tile completion: frozen tiles on Z") {
    LatticeGroup z(1);
    FolnerSet f = folner_box(z, 5);

    Tiling t5 = complete_tile(f, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{5}}));
    REQUIRE(t5.tile.size() == 5);
    for (std::int64_t v : {0, 1, 2, 3, 4}) CHECK(t5.tile[v] == z.element({v}));

    Tiling t7 = complete_tile(f, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{7}}));
    REQUIRE(t7.tile.size() == 7);
    std::vector<std::int64_t> expect = {-2, -1, 0, 1, 2, 3, 4}; // greedy word-ball fill
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(t7.tile[i] == z.element({expect[i]}));
    CHECK(t7.certificate.contains_folner);
    CHECK(t7.certificate.transversal);
    CHECK(t7.certificate.full_index);
}

TEST_CASE("tile completion rejects a non-separating subgroup") {
    LatticeGroup z(1);
    FolnerSet f = folner_box(z, 5);
    CHECK_THROWS_AS(complete_tile(f, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{3}})),
                    CertificationError);
}

TEST_CASE("Heisenberg completion at level 8: transversal of size 512") {
    HeisenbergGroup h;
    FolnerSet f = folner_box(h, 2);
    Tiling t = complete_tile(f, FiniteIndexSubgroup(h, FiniteIndexSubgroup::HeisenbergLevel{8}));
    CHECK(t.tile.size() == 512);
    CHECK(t.certificate.contains_folner);
    CHECK(t.certificate.transversal);
    CHECK(t.certificate.full_index);

    // exhaustive coset-count oracle
    std::set<std::int64_t> ids;
    for (const auto& k : t.tile) ids.insert(t.quotient->coset_of(k));
    CHECK(ids.size() == 512);
}

TEST_CASE("window factorization: Z, finite group, Heisenberg") {
    LatticeGroup z(1);
    FolnerSet f = folner_box(z, 5);
    Tiling t = complete_tile(f, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{5}}));
    std::vector<GroupElement> window;
    for (std::int64_t v = -10; v <= 10; ++v) window.push_back(z.element({v}));
    auto facts = verify_tiling(t, window);
    REQUIRE(facts.size() == window.size());
    for (const auto& fa : facts) {
        CHECK(z.mul(fa.tile_part, fa.subgroup_part) == fa.window_element);
        CHECK(t.subgroup().contains(fa.subgroup_part));
    }

    FiniteCyclicGroup z12({12});
    Tiling tf = certify_tiling(z12, z12.enumerate(),
                               FiniteIndexSubgroup(z12, FiniteIndexSubgroup::ExplicitFinite{
                                                            {z12.identity()}}));
    for (const auto& fa : verify_tiling(tf, z12.enumerate())) {
        CHECK(fa.subgroup_part == z12.identity());
        CHECK(fa.tile_part == fa.window_element);
    }

    HeisenbergGroup h;
    Tiling th = complete_tile(folner_box(h, 2),
                              FiniteIndexSubgroup(h, FiniteIndexSubgroup::HeisenbergLevel{8}));
    auto ball = word_ball(h, 4);
    auto hfacts = verify_tiling(th, ball);
    for (const auto& fa : hfacts) CHECK(h.mul(fa.tile_part, fa.subgroup_part) == fa.window_element);
}

TEST_CASE("explicit tiles with oversized or undersized lists are rejected") {
    LatticeGroup z(1);
    FiniteIndexSubgroup l(z, FiniteIndexSubgroup::LatticeModuli{{5}});
    CHECK_THROWS_AS(certify_tiling(z, {z.element({0}), z.element({1})},
                                   FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{5}})),
                    CertificationError);
    CHECK_THROWS_AS(certify_tiling(z, {z.element({0}), z.element({5}), z.element({1}),
                                       z.element({2}), z.element({3})},
                                   FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{5}})),
                    CertificationError); // 0 and 5 share a coset
    (void)l;
}

TEST_CASE("box monotonicity and inverse-hull exhaustion") {
    LatticeGroup z(1);
    LatticeGroup z2(2);
    HeisenbergGroup h;
    for (const Group* g : {static_cast<const Group*>(&z), static_cast<const Group*>(&z2),
                           static_cast<const Group*>(&h)}) {
        for (int n = 1; n <= 5; ++n) {
            FolnerSet small = folner_box(*g, n), big = folner_box(*g, n + 1);
            for (const auto& x : small.elements) CHECK(big.contains(x));
        }
        // union of F^{-1}F hulls covers any fixed word ball
        FolnerSet f = folner_box(*g, 8);
        ElemSet hull;
        for (const auto& a : f.elements) {
            const GroupElement ai = g->inv(a);
            for (const auto& b : f.elements) hull.insert(g->mul(ai, b));
        }
        for (const auto& w : word_ball(*g, 6)) CHECK(hull.count(w) == 1);
    }
}

TEST_CASE("tiling serialization round-trips bit-exactly") {
    HeisenbergGroup h;
    Tiling t = complete_tile(folner_box(h, 2),
                             FiniteIndexSubgroup(h, FiniteIndexSubgroup::HeisenbergLevel{4}));
    nlohmann::json j = tiling_to_json(t);
    Tiling t2 = tiling_from_json(h, j);
    CHECK(tiling_to_json(t2).dump() == j.dump());

    LatticeGroup z(1);
    CHECK_THROWS_AS(tiling_from_json(z, j), ConfigError); // wrong group
}
