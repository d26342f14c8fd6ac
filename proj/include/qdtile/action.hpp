#pragma once

#include <map>
#include <memory>
#include <variant>
#include <vector>

#include "qdtile/algebra.hpp"
#include "qdtile/folner.hpp"
#include "qdtile/group.hpp"

namespace qdtile::crossed {

using groups::Group;
using groups::GroupElement;
using groups::QuotientMap;
using tiling::FolnerSet;
using tiling::Tiling;

// Action alpha: G -> Aut A from the instance catalog.
//  - trivial: alpha(g) = id.
//  - quotient permutation: alpha factors through a finite quotient G/L_m and
//    permutes equal-sized blocks; exact arithmetic, verified as a
//    homomorphism over the whole quotient multiplication table.
//  - inner (abelian G only): generators get commuting unitaries u_i in A,
//    alpha(g) = Ad(u_1^{k_1} ... u_m^{k_m}) for g = (k_1..k_m).
class ActionInstance {
public:
    struct Trivial {};
    struct QuotientPermutation {
        std::shared_ptr<const QuotientMap> quotient;
        // table[t][i] = source block index feeding block i under alpha(g),
        // q(g) = t
        std::vector<std::vector<std::int32_t>> table;
    };
    struct Inner {
        std::vector<Matrix> generator_unitaries; // one per group generator
    };
    using Kind = std::variant<Trivial, QuotientPermutation, Inner>;

    ActionInstance(const Group& g, FiniteDimAlgebra alg, Kind kind,
                   std::vector<AlgebraElement> test_elements);

    const Group& group() const { return *group_; }
    const FiniteDimAlgebra& algebra() const { return alg_; }
    const std::vector<AlgebraElement>& test_elements() const { return tests_; }
    const Kind& kind() const { return kind_; }

    bool is_trivial() const { return std::holds_alternative<Trivial>(kind_); }
    // L_m for quotient actions (alpha restricted to it is the identity).
    const QuotientMap* factoring_quotient() const;

    AlgebraElement act(const GroupElement& g, const AlgebraElement& a) const;

private:
    const Group* group_;
    FiniteDimAlgebra alg_;
    Kind kind_;
    std::vector<AlgebraElement> tests_;
    mutable std::map<std::vector<std::int64_t>, Matrix> unitary_cache_; // inner kind

    Matrix inner_unitary(const GroupElement& g) const;
    void validate() const;
};

// max over l in L intersect K K^{-1} F of ||alpha(l) a - a||, with the
// product set K K^{-1} F enumerated literally and membership in L exact.
double almost_periodicity_defect(const ActionInstance& alpha, const AlgebraElement& a,
                                 const Tiling& t, const FolnerSet& f);

// A = C(G/L_m) with G acting by translation through the finite quotient;
// test elements are real diagonal indicator combinations.
ActionInstance bunce_deddens_instance(const Group& g, groups::FiniteIndexSubgroup l_m,
                                      std::uint64_t index_cap = 100000);

// Inner rotation action on M_2: u = diag(1, e^{2 pi i theta}).
ActionInstance rotation_instance(const Group& z, double theta);

} // namespace qdtile::crossed
