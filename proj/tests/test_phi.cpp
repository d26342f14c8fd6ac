#include <doctest.h>

#include "qdtile/phi.hpp"

using namespace qdtile;
using namespace qdtile::groups;
using namespace qdtile::qd;
using namespace qdtile::tiling;
using linalg::make_ratio;
using linalg::Rational;

namespace {

PhiTable z_example() {
    static LatticeGroup z(1);
    FolnerSet f = make_folner_set(z, 2, {z.element({0}), z.element({1})});
    std::vector<GroupElement> k;
    for (std::int64_t v = 0; v <= 4; ++v) k.push_back(z.element({v}));
    Tiling t = certify_tiling(z, k, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{5}}));
    return build_phi(f, t);
}

} // namespace

TEST_CASE("phi^2 table on the Z example: frozen values") {
    PhiTable phi = z_example();
    const LatticeGroup& z = static_cast<const LatticeGroup&>(*phi.tiling().group);

    CHECK(phi.phi_squared(z.element({0})) == Rational(1));
    CHECK(phi.phi_squared(z.element({-1})) == make_ratio(1, 2));
    CHECK(phi.phi_squared(z.element({4})) == make_ratio(1, 2));
    CHECK(phi.phi_squared(z.element({5})) == Rational(0));

    // supp phi = F^{-1}K = {-1..4}
    CHECK(phi.support().size() == 6);
    for (const auto& x : phi.support()) {
        CHECK(phi.phi_squared(x) > Rational(0));
        CHECK(phi.phi_squared(x) <= Rational(1));
    }
}

TEST_CASE("exact coset sums equal one") {
    PhiTable phi = z_example();
    const LatticeGroup& z = static_cast<const LatticeGroup&>(*phi.tiling().group);

    CHECK(coset_sum(phi, z.element({4})) == Rational(1)); // 1/2 + 1/2
    CHECK(coset_sum(phi, z.element({0})) == Rational(1)); // single full term
    for (const auto& y : phi.tiling().tile) CHECK(coset_sum(phi, y) == Rational(1));
}

TEST_CASE("coset sums equal one on a finite group where phi is identically 1") {
    FiniteCyclicGroup g({6});
    FolnerSet f = folner_box(g, 1);
    Tiling t = certify_tiling(g, g.enumerate(),
                              FiniteIndexSubgroup(g, FiniteIndexSubgroup::ExplicitFinite{
                                                         {g.identity()}}));
    PhiTable phi = build_phi(f, t);
    for (const auto& x : g.enumerate()) CHECK(phi.phi_squared(x) == Rational(1));
    for (const auto& y : t.tile) CHECK(coset_sum(phi, y) == Rational(1));
    for (const auto& y : t.tile)
        for (const auto& s : g.generators()) CHECK(coset_variation(phi, y, s) == Rational(0));
}

TEST_CASE("coset variation: frozen values and the exact bound") {
    PhiTable phi = z_example();
    const LatticeGroup& z = static_cast<const LatticeGroup&>(*phi.tiling().group);
    const GroupElement one = z.element({1});

    CHECK(coset_variation(phi, z.element({0}), z.identity()) == Rational(0));
    // coset 0+5Z: only x=0 contributes a |1 - 1| term
    CHECK(coset_variation(phi, z.element({0}), one) == Rational(0));
    // coset 4+5Z: |phi^2(-1)-phi^2(0)| + |phi^2(4)-phi^2(5)| = 1/2 + 1/2
    CHECK(coset_variation(phi, z.element({4}), one) == Rational(1));

    const Rational bound = boundary_ratio(phi.folner(), one);
    CHECK(bound == Rational(1)); // |{0,1} delta {1,2}| / 2
    for (const auto& y : phi.tiling().tile) CHECK(coset_variation(phi, y, one) <= bound);
}

TEST_CASE("phi^2 on the Z^2 product example") {
    LatticeGroup z2(2);
    std::vector<GroupElement> fel, kel;
    for (std::int64_t a = 0; a <= 1; ++a)
        for (std::int64_t b = 0; b <= 1; ++b) fel.push_back(z2.element({a, b}));
    for (std::int64_t a = 0; a <= 4; ++a)
        for (std::int64_t b = 0; b <= 4; ++b) kel.push_back(z2.element({a, b}));
    FolnerSet f = make_folner_set(z2, 2, fel);
    Tiling t = certify_tiling(z2, kel, FiniteIndexSubgroup(z2, FiniteIndexSubgroup::LatticeModuli{{5, 5}}));
    PhiTable phi = build_phi(f, t);

    CHECK(phi.phi_squared(z2.element({0, 0})) == Rational(1));
    CHECK(phi.phi_squared(z2.element({-1, 0})) == make_ratio(1, 2));
    CHECK(phi.phi_squared(z2.element({-1, -1})) == make_ratio(1, 4));
    for (const auto& y : t.tile) CHECK(coset_sum(phi, y) == Rational(1));
}

TEST_CASE("full identity verification over a completed Z tiling") {
    LatticeGroup z(1);
    FolnerSet f = folner_box(z, 16);
    Tiling t = complete_tile(f, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{31}}));
    PhiTable phi = build_phi(f, t);
    std::vector<GroupElement> gens = {z.element({1}), z.element({-1})};
    verify_phi_identities(phi, gens); // throws on any failure
}

TEST_CASE("full identity verification over a Heisenberg tiling") {
    HeisenbergGroup h;
    FolnerSet f = folner_box(h, 2);
    Tiling t = complete_tile(f, separating_subgroup(f, SubgroupFamily::standard(h)));
    PhiTable phi = build_phi(f, t);
    std::vector<GroupElement> gens;
    for (const auto& s : h.generators()) {
        gens.push_back(s);
        gens.push_back(h.inv(s));
    }
    verify_phi_identities(phi, gens);
}
