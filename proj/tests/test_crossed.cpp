#include <doctest.h>

#include <cmath>
#include <random>

#include "qdtile/crossed.hpp"
#include "qdtile/phi.hpp"

using namespace qdtile;
using namespace qdtile::crossed;
using namespace qdtile::groups;
using namespace qdtile::tiling;
using linalg::Complex;
using linalg::Matrix;

namespace {

struct BdSetup {
    std::shared_ptr<LatticeGroup> z = std::make_shared<LatticeGroup>(1);
    ActionInstance alpha;
    FolnerSet folner;
    qd::ProjectionFamily proj;

    static BdSetup make(int n, std::int64_t level_modulus, std::int64_t base_modulus) {
        auto z = std::make_shared<LatticeGroup>(1);
        ActionInstance alpha = bunce_deddens_instance(
            *z, FiniteIndexSubgroup(*z, FiniteIndexSubgroup::LatticeModuli{{base_modulus}}));
        FolnerSet f = folner_box(*z, n);
        Tiling t = complete_tile(
            f, FiniteIndexSubgroup(*z, FiniteIndexSubgroup::LatticeModuli{{level_modulus}}));
        qd::ProjectionFamily proj = qd::build_projection(qd::build_phi(f, t));
        return BdSetup{z, std::move(alpha), std::move(f), std::move(proj)};
    }
};

// Independent brute-force twisted convolution, written against the raw
// definition rather than the CrossedElement implementation.
CrossedElement conv_oracle(const CrossedElement& f, const CrossedElement& g,
                           const ActionInstance& alpha) {
    const Group& gr = f.group();
    CrossedElement out(gr, f.algebra());
    for (const auto& [s, fs] : f.terms()) {
        for (const auto& [u, gu] : g.terms()) {
            // t = s u, g(s^{-1} t) = g(u)
            const GroupElement t = gr.mul(s, u);
            AlgebraElement term = fs * alpha.act(s, gu);
            if (const AlgebraElement* cur = out.at(t))
                out.set(t, *cur + term);
            else
                out.set(t, std::move(term));
        }
    }
    return out;
}

} // namespace

TEST_CASE("sigma compression: scalars, trivial actions, quotient shifts") {
    LatticeGroup z(1);

    // A = C: sigma(c) = c * identity
    FiniteDimAlgebra scalars = FiniteDimAlgebra::diagonal(1);
    AlgebraElement c = AlgebraElement::diagonal(scalars, {0.75});
    ActionInstance trivial(z, scalars, ActionInstance::Trivial{}, {c});
    std::vector<GroupElement> win;
    for (std::int64_t v = -2; v <= 2; ++v) win.push_back(z.element({v}));
    qd::Window w(z, win);
    CompressionOperator sc = sigma_compression(c, trivial, w);
    CHECK((sc.total - 0.75 * Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);

    // translation on C(Z/3): block at x is the (-x)-shift; block(3) = block(0)
    ActionInstance alpha = bunce_deddens_instance(
        z, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{3}}));
    AlgebraElement a = AlgebraElement::diagonal(alpha.algebra(), {1.0, 2.0, 3.0});
    std::vector<GroupElement> win4;
    for (std::int64_t v = 0; v <= 3; ++v) win4.push_back(z.element({v}));
    qd::Window w4(z, win4);
    CompressionOperator sa = sigma_compression(a, alpha, w4);
    CHECK((sa.block(3, 3) - sa.block(0, 0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sa.block(1, 1) - sa.block(0, 0)).cwiseAbs().maxCoeff() != 0.0);
    // x = 1: alpha(-1) shifts (x0,x1,x2) -> (x1,x2,x0): diagonal (2,3,1)
    CHECK(sa.block(1, 1)(0, 0).real() == doctest::Approx(2.0));
    CHECK(sa.block(1, 1)(1, 1).real() == doctest::Approx(3.0));
    CHECK(sa.block(1, 1)(2, 2).real() == doctest::Approx(1.0));
}

TEST_CASE("lambda tensor compression: identity at e, shift blocks") {
    LatticeGroup z(1);
    FiniteDimAlgebra alg = FiniteDimAlgebra::diagonal(2);
    ActionInstance alpha = bunce_deddens_instance(
        z, FiniteIndexSubgroup(z, FiniteIndexSubgroup::LatticeModuli{{2}}));
    (void)alg;
    std::vector<GroupElement> win;
    for (std::int64_t v = 0; v <= 3; ++v) win.push_back(z.element({v}));
    qd::Window w(z, win);

    CompressionOperator ide = lambda_tensor_compression(z.identity(), alpha, w);
    CHECK((ide.total - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() == 0.0);

    CompressionOperator sh = lambda_tensor_compression(z.element({1}), alpha, w);
    int identity_blocks = 0;
    for (int u = 0; u < 4; ++u)
        for (int v = 0; v < 4; ++v) {
            const double dev = (sh.block(u, v) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff();
            if (dev == 0.0) {
                ++identity_blocks;
                CHECK(u == v + 1);
            }
        }
    CHECK(identity_blocks == 3);
}

TEST_CASE("covariance of the regular representation on interior points") {
    LatticeGroup z(1);
    ActionInstance alpha = rotation_instance(z, 0.3);
    const AlgebraElement& a = alpha.test_elements()[0];
    std::vector<GroupElement> win;
    for (std::int64_t v = -3; v <= 3; ++v) win.push_back(z.element({v}));
    qd::Window w(z, win);

    const GroupElement s = z.element({1});
    CompressionOperator sig = sigma_compression(a, alpha, w);
    CompressionOperator lam = lambda_tensor_compression(s, alpha, w);
    CompressionOperator sig_moved = sigma_compression(alpha.act(s, a), alpha, w);
    Matrix conj = lam.total * sig.total * lam.total.adjoint();

    for (std::int32_t x = 0; x < w.size(); ++x) {
        const std::int32_t back = w.find(z.mul(z.inv(s), w.elements()[x]));
        if (back < 0) continue; // boundary: conjugation truncated
        Matrix lhs = conj.block(x * 2, x * 2, 2, 2);
        Matrix rhs = sig_moved.block(x, x);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("crossed elements: star, delta at e, self-adjoint compression") {
    LatticeGroup z(1);
    ActionInstance alpha = rotation_instance(z, (std::sqrt(5.0) - 1.0) / 2.0);
    const FiniteDimAlgebra& alg = alpha.algebra();

    CrossedElement delta(z, alg);
    delta.set(z.identity(), AlgebraElement::identity(alg));
    std::vector<GroupElement> win;
    for (std::int64_t v = -2; v <= 2; ++v) win.push_back(z.element({v}));
    qd::Window w(z, win);
    CHECK((crossed_compression(delta, alpha, w).total - Matrix::Identity(10, 10))
              .cwiseAbs()
              .maxCoeff() < 1e-14); // inner conjugation leaves ~eps dust on the diagonal

    // f = b delta_1 + alpha(-1)(b*) delta_{-1} is self-adjoint
    Matrix braw(2, 2);
    braw << Complex(0.2, 0.1), Complex(0.5, -0.3), Complex(0.0, 0.4), Complex(-0.6, 0.0);
    AlgebraElement b(alg, {braw});
    CrossedElement f(z, alg);
    f.set(z.element({1}), b);
    f.set(z.element({-1}), alpha.act(z.element({-1}), b.adjoint()));

    CrossedElement fstar = f.star(alpha);
    for (const auto& [s, fs] : f.terms()) {
        const AlgebraElement* other = fstar.at(s);
        REQUIRE(other != nullptr);
        CHECK((fs - *other).norm() < 1e-14);
    }

    CompressionOperator cf = crossed_compression(f, alpha, w);
    CHECK((cf.total - cf.total.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("module convolution matches the brute-force oracle and compressions compose") {
    BdSetup setup = BdSetup::make(4, 8, 2);
    const Group& z = *setup.z;
    const FiniteDimAlgebra& alg = setup.alpha.algebra();

    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto random_element = [&] {
        std::vector<Matrix> blocks;
        for (Eigen::Index d : alg.block_sizes) {
            Matrix m(d, d);
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(u(rng), u(rng));
            blocks.push_back(std::move(m));
        }
        return AlgebraElement(alg, std::move(blocks));
    };

    const qd::Window& w = setup.proj.window();
    for (int trial = 0; trial < 5; ++trial) {
        CrossedElement f(z, alg), g(z, alg);
        for (std::int64_t s : {-1, 0, 2}) f.set(z.element({s}), random_element());
        for (std::int64_t s : {-2, 1}) g.set(z.element({s}), random_element());

        CrossedElement prod = f.convolve(g, setup.alpha);
        CrossedElement oracle = conv_oracle(f, g, setup.alpha);
        for (const auto& [s, a] : oracle.terms()) {
            const AlgebraElement* mine = prod.at(s);
            REQUIRE(mine != nullptr);
            CHECK((a - *mine).norm() < 1e-12);
        }
        CHECK(prod.terms().size() == oracle.terms().size());

        // interior columns of the compression of f*g equal the product of
        // compressions
        CrossedElement fg_support(z, alg); // union support for interiority
        for (const auto& [s, a] : f.terms()) fg_support.set(s, AlgebraElement::identity(alg));
        for (const auto& [s, a] : g.terms()) fg_support.set(s, AlgebraElement::identity(alg));
        for (const auto& [s, a] : prod.terms()) fg_support.set(s, AlgebraElement::identity(alg));

        CompressionOperator cf = crossed_compression(f, setup.alpha, w);
        CompressionOperator cg = crossed_compression(g, setup.alpha, w);
        CompressionOperator cfg = crossed_compression(prod, setup.alpha, w);
        Matrix composed = cf.total * cg.total;

        const Eigen::Index d = alg.dim();
        for (std::int32_t col : interior_columns(fg_support, w)) {
            Matrix diff = composed.block(0, col * d, composed.rows(), d) -
                          cfg.total.block(0, col * d, composed.rows(), d);
            CHECK(diff.cwiseAbs().maxCoeff() < 1e-10);
        }
        CHECK_FALSE(interior_columns(fg_support, w).empty());
    }
}

TEST_CASE("commutator chain on an exactly periodic instance is null") {
    BdSetup setup = BdSetup::make(4, 8, 2); // L_n = 8Z inside L_m = 2Z
    const Matrix q = Matrix::Identity(2, 2);
    for (const auto& a : setup.alpha.test_elements()) {
        CrossedCommutatorReport rep =
            crossed_commutator_report(a, setup.alpha, q, setup.proj, setup.folner);
        CHECK(rep.defect == 0.0);
        CHECK(rep.full_norm <= 1e-10);
        CHECK(rep.max_block_norm <= 1e-10);
        CHECK(rep.orthogonality_residual <= 1e-10);
        CHECK(rep.block_vs_full_dev <= 1e-10);
        require_commutator_report_ok(rep);
    }
}

TEST_CASE("commutator chain: dense oracle agreement on the rotation instance") {
    auto z = std::make_shared<LatticeGroup>(1);
    ActionInstance alpha = rotation_instance(*z, (std::sqrt(5.0) - 1.0) / 2.0);
    FolnerSet f = folner_box(*z, 3);
    Tiling t = complete_tile(f, FiniteIndexSubgroup(*z, FiniteIndexSubgroup::LatticeModuli{{5}}));
    qd::ProjectionFamily proj = qd::build_projection(qd::build_phi(f, t));
    const AlgebraElement& a = alpha.test_elements()[0];
    const Matrix q = Matrix::Identity(2, 2);

    CrossedCommutatorReport rep = crossed_commutator_report(a, alpha, q, proj, f);
    require_commutator_report_ok(rep);

    // dense oracle: [sigma(a), Q tensor P] materialized on the window
    const qd::Window& w = proj.window();
    CompressionOperator sig = sigma_compression(a, alpha, w);
    Matrix p = proj.materialize();
    const Eigen::Index d = 2;
    Matrix qp = Matrix::Zero(d * w.size(), d * w.size());
    for (std::int32_t i = 0; i < w.size(); ++i)
        for (std::int32_t j = 0; j < w.size(); ++j)
            qp.block(i * d, j * d, d, d) = p(i, j) * q;
    Matrix comm = sig.total * qp - qp * sig.total;
    CHECK(std::abs(linalg::operator_norm(comm) - rep.full_norm) < 1e-10);

    // dense orthogonality oracle for a pair of cosets
    auto block_of = [&](std::size_t y) {
        const auto& xi = proj.vectors()[y].amplitudes;
        Matrix py = Matrix::Zero(w.size(), w.size());
        for (const auto& [i, zi] : xi.entries)
            for (const auto& [j, zj] : xi.entries) py(i, j) += zi * std::conj(zj);
        Matrix qpy = Matrix::Zero(d * w.size(), d * w.size());
        for (std::int32_t i = 0; i < w.size(); ++i)
            for (std::int32_t j = 0; j < w.size(); ++j)
                qpy.block(i * d, j * d, d, d) = py(i, j) * q;
        return Matrix(sig.total * qpy - qpy * sig.total);
    };
    Matrix b0 = block_of(0), b1 = block_of(1);
    CHECK(linalg::operator_norm(Matrix(b0.adjoint() * b1)) < 1e-12);
    CHECK(std::abs(linalg::operator_norm(b0) - rep.block_norms[0]) < 1e-10);
}

TEST_CASE("window containment is enforced for compressions built elsewhere") {
    BdSetup setup = BdSetup::make(2, 4, 2);
    // a window that misses part of the coset supports
    std::vector<GroupElement> tiny = {setup.z->element({0})};
    qd::Window w(*setup.z, tiny);
    CrossedElement f(*setup.z, setup.alpha.algebra());
    f.set(setup.z->element({5}), AlgebraElement::identity(setup.alpha.algebra()));
    // compressing against a window that cannot see the support is legal for
    // plain compressions (they truncate), but the interior is then empty
    CHECK(interior_columns(f, w).empty());
}
