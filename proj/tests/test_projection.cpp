#include <doctest.h>

#include <cmath>

#include "qdtile/projection.hpp"

using namespace qdtile;
using namespace qdtile::groups;
using namespace qdtile::qd;
using namespace qdtile::tiling;
using linalg::Matrix;
using linalg::NormOptions;

namespace {

struct Instance {
    FolnerSet folner;
    Tiling tiling;
    PhiTable phi;
    ProjectionFamily proj;
};

// Z with F = box(n) and L = (2n-1)Z; K completes to {-(n-1)..n-1}.
Instance z_instance(const LatticeGroup& z, int n) {
    FolnerSet f = folner_box(z, n);
    Tiling t = complete_tile(f, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{2 * n - 1}}));
    PhiTable phi = build_phi(f, t);
    ProjectionFamily proj = build_projection(phi);
    return Instance{std::move(f), std::move(t), std::move(phi), std::move(proj)};
}

} // namespace

TEST_CASE("finite group: P is the identity on the whole-group window") {
    FiniteCyclicGroup g({6});
    FolnerSet f = folner_box(g, 1);
    Tiling t = certify_tiling(g, g.enumerate(),
                              FiniteIndexSubgroup(g, FiniteIndexSubgroup::ExplicitFinite{
                                                         {g.identity()}}));
    PhiTable phi = build_phi(f, t);
    ProjectionFamily proj = build_projection(phi);

    Matrix p = proj.materialize();
    CHECK((p - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() == 0.0); // amplitudes are exactly 1

    ProjectionLaws laws = projection_laws(proj);
    CHECK(laws.idempotency <= 1e-12);
    CHECK(laws.trace_dev <= 1e-12);
    CHECK(proj.defect(g.identity()) == 0.0);

    for (const auto& s : g.generators()) {
        CommutatorResult r = lambda_commutator_norm(s, proj);
        CHECK(r.norm <= 1e-12); // lambda(s) is a permutation, commutes with I
    }
}

TEST_CASE("rank-5 projection on the Z example window {-1..4}") {
    LatticeGroup z(1);
    FolnerSet f = make_folner_set(z, 2, {z.element({0}), z.element({1})});
    std::vector<GroupElement> k;
    for (std::int64_t v = 0; v <= 4; ++v) k.push_back(z.element({v}));
    Tiling t = certify_tiling(z, k, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{5}}));
    PhiTable phi = build_phi(f, t);
    ProjectionFamily proj = build_projection(phi);

    CHECK(proj.rank() == 5);
    CHECK(proj.window().size() == 6);
    ProjectionLaws laws = projection_laws(proj);
    CHECK(laws.trace_dev <= 1e-12);
    CHECK(laws.idempotency <= 1e-10);
    CHECK(laws.gram_diag_dev <= 1e-12);
    CHECK(laws.gram_offdiag == 0.0); // disjoint supports give exact zeros
    CHECK(laws.supports_disjoint);
    CHECK(laws.hermiticity == 0.0);

    CHECK(proj.defect(z.element({0})) == 0.0);
    CHECK(proj.defect(z.element({-1})) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(proj.defect(z.element({100})) == doctest::Approx(1.0).epsilon(1e-12)); // off window
}

TEST_CASE("rank-25 projection for the Z^2 product example") {
    LatticeGroup z2(2);
    std::vector<GroupElement> fel, kel;
    for (std::int64_t a = 0; a <= 1; ++a)
        for (std::int64_t b = 0; b <= 1; ++b) fel.push_back(z2.element({a, b}));
    for (std::int64_t a = 0; a <= 4; ++a)
        for (std::int64_t b = 0; b <= 4; ++b) kel.push_back(z2.element({a, b}));
    FolnerSet f = make_folner_set(z2, 2, fel);
    Tiling t = certify_tiling(z2, kel,
                              FiniteIndexSubgroup(z2, FiniteIndexSubgroup::LatticeModuli{{5, 5}}));
    PhiTable phi = build_phi(f, t);
    ProjectionFamily proj = build_projection(phi);
    CHECK(proj.rank() == 25);
    CHECK(projection_laws(proj).trace_dev <= 1e-9);
    CHECK(projection_laws(proj).idempotency <= 1e-10);
}

TEST_CASE("commutator norm on the pinned Lemma-style instance") {
    LatticeGroup z(1);
    FolnerSet f = folner_box(z, 16);
    std::vector<GroupElement> k;
    for (std::int64_t v = 0; v <= 30; ++v) k.push_back(z.element({v}));
    Tiling t = certify_tiling(z, k, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{31}}));
    PhiTable phi = build_phi(f, t);
    ProjectionFamily proj = build_projection(phi);

    CommutatorResult r = lambda_commutator_norm(z.element({1}), proj);
    CHECK(r.ratio == linalg::make_ratio(2, 16));
    CHECK(r.envelope == doctest::Approx(2.0 * std::sqrt(2.0 / 16.0)).epsilon(1e-12));
    CHECK(r.norm <= r.envelope + 1e-9);
    CHECK(r.norm > 0.0);
}

TEST_CASE("commutator norms decay along the Z family") {
    LatticeGroup z(1);
    const GroupElement one = z.element({1});
    double prev = -1.0;
    double first = 0.0, last = 0.0;
    for (int n : {4, 8, 16, 32, 64}) {
        Instance inst = z_instance(z, n);
        CommutatorResult r = lambda_commutator_norm(one, inst.proj);
        CHECK(r.norm <= r.envelope + 1e-9);
        if (prev >= 0.0) CHECK(r.norm < prev);
        prev = r.norm;
        if (n == 4) first = r.norm;
        if (n == 64) last = r.norm;
    }
    CHECK(last < 0.5 * first);
}

TEST_CASE("projection defect at a fixed point decays") {
    LatticeGroup z(1);
    const GroupElement x = z.element({1});
    double prev = 2.0;
    for (int n : {2, 4, 8, 16, 32, 64}) {
        Instance inst = z_instance(z, n);
        const double d = inst.proj.defect(x);
        CHECK(d <= prev + 1e-15);
        prev = d;
    }
    CHECK(prev < 0.2);
}

TEST_CASE("factored, gram and dense routes agree on the n=8 commutator") {
    LatticeGroup z(1);
    Instance inst = z_instance(z, 8);
    const GroupElement s = z.element({1});

    auto [w, op] = commutator_factorization(s, inst.proj);
    (void)w;
    const double dense = linalg::operator_norm(op.materialize());
    const double gram = linalg::gram_norm(op);
    NormOptions tight;
    tight.tol = 1e-12;
    const double power = linalg::lowrank_power_norm(op, tight);
    const double dispatch = lambda_commutator_norm(s, inst.proj).norm;

    CHECK(std::abs(dense - gram) < 1e-9);
    CHECK(std::abs(dense - power) < 1e-9);
    CHECK(std::abs(dense - dispatch) < 1e-12);
}

TEST_CASE("window exactness: one more translate changes nothing") {
    LatticeGroup z(1);
    Instance inst = z_instance(z, 8);
    WindowExactness we = window_exactness(z.element({1}), inst.proj);
    CHECK(we.leaked_base == 0);
    CHECK(we.leaked_enlarged == 0);
    CHECK(we.residual < 1e-12);

    LatticeGroup z2(2);
    FolnerSet f = folner_box(z2, 4);
    Tiling t = complete_tile(f, FiniteIndexSubgroup(z2, FiniteIndexSubgroup::LatticeModuli{{7, 7}}));
    PhiTable phi = build_phi(f, t);
    ProjectionFamily proj = build_projection(phi);
    WindowExactness we2 = window_exactness(z2.element({0, 1}), proj);
    CHECK(we2.leaked_base == 0);
    CHECK(we2.residual < 1e-12);
}

TEST_CASE("Heisenberg n=2 instance end to end") {
    HeisenbergGroup h;
    FolnerSet f = folner_box(h, 2);
    Tiling t = complete_tile(f, separating_subgroup(f, SubgroupFamily::standard(h)));
    PhiTable phi = build_phi(f, t);
    ProjectionFamily proj = build_projection(phi);

    CHECK(proj.rank() == 64);
    ProjectionLaws laws = projection_laws(proj);
    CHECK(laws.idempotency <= 1e-10);
    CHECK(laws.gram_diag_dev <= 1e-12);
    CHECK(laws.trace_dev <= 1e-9);

    for (const auto& s : h.generators()) {
        CommutatorResult r = lambda_commutator_norm(s, proj);
        CHECK(r.norm <= r.envelope + 1e-9);
        WindowExactness we = window_exactness(s, proj);
        CHECK(we.leaked_base == 0);
        CHECK(we.residual < 1e-12);
    }
}
