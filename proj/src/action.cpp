#include "qdtile/action.hpp"

#include <cmath>
#include <numbers>

namespace qdtile::crossed {

using groups::FiniteIndexSubgroup;

ActionInstance::ActionInstance(const Group& g, FiniteDimAlgebra alg, Kind kind,
                               std::vector<AlgebraElement> test_elements)
    : group_(&g), alg_(std::move(alg)), kind_(std::move(kind)), tests_(std::move(test_elements)) {
    for (const auto& a : tests_) {
        if (a.algebra().block_sizes != alg_.block_sizes)
            throw ConfigError("test element lives in a different algebra");
        if (!a.is_self_adjoint())
            throw ConfigError("test elements must be self-adjoint");
    }
    validate();
}

const QuotientMap* ActionInstance::factoring_quotient() const {
    if (const auto* qp = std::get_if<QuotientPermutation>(&kind_)) return qp->quotient.get();
    return nullptr;
}

void ActionInstance::validate() const {
    if (const auto* qp = std::get_if<QuotientPermutation>(&kind_)) {
        const QuotientMap& q = *qp->quotient;
        if (&q.group() != group_) throw GroupMismatchError("action quotient group mismatch");
        if (qp->table.size() != q.index())
            throw ConfigError("permutation table needs one row per quotient element");
        const std::size_t r = alg_.block_count();
        for (const auto& row : qp->table) {
            if (row.size() != r) throw ConfigError("permutation row has the wrong length");
            std::vector<char> hit(r, 0);
            for (std::int32_t s : row) {
                if (s < 0 || static_cast<std::size_t>(s) >= r || hit[s])
                    throw ConfigError("permutation row is not a bijection of blocks");
                hit[s] = 1;
            }
            for (std::size_t i = 0; i < r; ++i)
                if (alg_.block_sizes[i] != alg_.block_sizes[row[i]])
                    throw ConfigError("permutation maps between blocks of different size");
        }
        // identity coset acts trivially
        for (std::size_t i = 0; i < r; ++i)
            if (qp->table[0][i] != static_cast<std::int32_t>(i))
                throw ConfigError("identity coset must act as the identity permutation");
        // exact homomorphism over the whole quotient multiplication table:
        // alpha(t1)alpha(t2) = alpha(t1 t2)
        for (std::int64_t t1 = 0; t1 < static_cast<std::int64_t>(q.index()); ++t1)
            for (std::int64_t t2 = 0; t2 < static_cast<std::int64_t>(q.index()); ++t2) {
                const auto& composed = qp->table[q.mul(t1, t2)];
                for (std::size_t i = 0; i < r; ++i)
                    if (qp->table[t2][qp->table[t1][i]] != composed[i])
                        throw ConfigError("permutation table is not a group homomorphism");
            }
    } else if (const auto* in = std::get_if<Inner>(&kind_)) {
        if (group_->kind() != groups::GroupKind::Lattice)
            throw ConfigError("inner actions are only supported on abelian lattice groups");
        const auto gens = group_->generators();
        if (in->generator_unitaries.size() != gens.size())
            throw ConfigError("inner action needs one unitary per group generator");
        const Eigen::Index d = alg_.dim();
        for (const auto& u : in->generator_unitaries) {
            if (u.rows() != d || u.cols() != d)
                throw ConfigError("implementing unitary has the wrong dimension");
            if ((u * u.adjoint() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12)
                throw ConfigError("non-unitary implementer");
        }
        for (std::size_t i = 0; i < in->generator_unitaries.size(); ++i)
            for (std::size_t j = i + 1; j < in->generator_unitaries.size(); ++j) {
                const Matrix& a = in->generator_unitaries[i];
                const Matrix& b = in->generator_unitaries[j];
                if ((a * b - b * a).cwiseAbs().maxCoeff() > 1e-12)
                    throw ConfigError("implementing unitaries of an abelian group must commute");
            }
    }
    // *-automorphism sanity on generators: norms of test elements preserved
    for (const auto& s : group_->generators())
        for (const auto& a : tests_) {
            const AlgebraElement image = act(s, a);
            if (std::abs(image.norm() - a.norm()) > 1e-12)
                throw CertificationError("action fails to preserve a test-element norm");
            if (!image.adjoint().is_self_adjoint())
                throw CertificationError("action fails to preserve adjoints");
        }
}

Matrix ActionInstance::inner_unitary(const GroupElement& g) const {
    auto it = unitary_cache_.find(g.coords);
    if (it != unitary_cache_.end()) return it->second;
    const auto& in = std::get<Inner>(kind_);
    const Eigen::Index d = alg_.dim();
    Matrix u = Matrix::Identity(d, d);
    for (std::size_t i = 0; i < in.generator_unitaries.size(); ++i) {
        std::int64_t k = g.coords[i];
        const Matrix& base = k >= 0 ? in.generator_unitaries[i]
                                    : Matrix(in.generator_unitaries[i].adjoint());
        for (std::int64_t t = 0; t < std::abs(k); ++t) u = u * base;
    }
    unitary_cache_.emplace(g.coords, u);
    return u;
}

AlgebraElement ActionInstance::act(const GroupElement& g, const AlgebraElement& a) const {
    group_->validate(g);
    if (a.algebra().block_sizes != alg_.block_sizes)
        throw ConfigError("element lives in a different algebra");
    if (std::holds_alternative<Trivial>(kind_)) return a;
    if (const auto* qp = std::get_if<QuotientPermutation>(&kind_)) {
        const auto& row = qp->table[qp->quotient->coset_of(g)];
        std::vector<Matrix> blocks;
        blocks.reserve(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) blocks.push_back(a.block(row[i]));
        return AlgebraElement(alg_, std::move(blocks));
    }
    const Matrix u = inner_unitary(g);
    std::vector<Matrix> blocks;
    Eigen::Index off = 0;
    for (const auto& b : a.blocks()) {
        const Matrix ublk = u.block(off, off, b.rows(), b.cols());
        blocks.push_back(ublk * b * ublk.adjoint());
        off += b.rows();
    }
    return AlgebraElement(alg_, std::move(blocks));
}

double almost_periodicity_defect(const ActionInstance& alpha, const AlgebraElement& a,
                                 const Tiling& t, const FolnerSet& f) {
    const Group& g = alpha.group();
    if (t.group != &g || f.group != &g)
        throw GroupMismatchError("defect inputs belong to different groups");

    // the literal product set K K^{-1} F
    groups::ElemSet window;
    for (const auto& k : t.tile) {
        for (const auto& kp : t.tile) {
            const GroupElement kk = g.mul(k, g.inv(kp));
            for (const auto& x : f.elements) window.insert(g.mul(kk, x));
        }
    }
    const auto& l = t.subgroup();
    double worst = 0.0;
    for (const auto& w : window) {
        if (!l.contains(w)) continue;
        worst = std::max(worst, (alpha.act(w, a) - a).norm());
    }
    return worst;
}

ActionInstance bunce_deddens_instance(const Group& g, FiniteIndexSubgroup l_m,
                                      std::uint64_t index_cap) {
    auto q = std::make_shared<QuotientMap>(g, std::move(l_m), index_cap);
    const std::int64_t r = static_cast<std::int64_t>(q->index());
    FiniteDimAlgebra alg = FiniteDimAlgebra::diagonal(static_cast<std::size_t>(r));

    // translation through the quotient: block i receives block q(g^{-1} rep_i),
    // computable purely on coset indices
    ActionInstance::QuotientPermutation qp;
    qp.quotient = q;
    qp.table.resize(r);
    for (std::int64_t t = 0; t < r; ++t) {
        const std::int64_t tinv = q->inv(t);
        qp.table[t].resize(r);
        for (std::int64_t i = 0; i < r; ++i)
            qp.table[t][i] = static_cast<std::int32_t>(q->mul(tinv, i));
    }

    std::vector<AlgebraElement> tests;
    {
        std::vector<double> indicator(r, 0.0);
        indicator[0] = 1.0;
        tests.push_back(AlgebraElement::diagonal(alg, indicator));
        if (r > 1) {
            std::vector<double> ramp(r);
            for (std::int64_t i = 0; i < r; ++i)
                ramp[i] = static_cast<double>(i) / static_cast<double>(r - 1);
            tests.push_back(AlgebraElement::diagonal(alg, ramp));
        }
    }
    return ActionInstance(g, std::move(alg), std::move(qp), std::move(tests));
}

ActionInstance rotation_instance(const Group& z, double theta) {
    if (z.kind() != groups::GroupKind::Lattice || z.coord_count() != 1)
        throw ConfigError("the rotation instance lives over Z");
    FiniteDimAlgebra alg = FiniteDimAlgebra::full_matrix(2);
    Matrix u = Matrix::Zero(2, 2);
    u(0, 0) = Complex(1.0, 0.0);
    u(1, 1) = std::polar(1.0, 2.0 * std::numbers::pi * theta);

    Matrix sx(2, 2), sz(2, 2);
    sx << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    sz << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
    std::vector<AlgebraElement> tests;
    tests.push_back(AlgebraElement(alg, {sx}));
    tests.push_back(AlgebraElement(alg, {sz}));
    return ActionInstance(z, std::move(alg), ActionInstance::Inner{{u}}, std::move(tests));
}

} // namespace qdtile::crossed
