#include "qdtile/phi.hpp"

#include <algorithm>

namespace qdtile::qd {

using groups::lex_less;

PhiTable::PhiTable(FolnerSet folner, Tiling tiling)
    : folner_(std::move(folner)), tiling_(std::move(tiling)) {
    const groups::Group& g = *tiling_.group;
    if (folner_.group != &g) throw GroupMismatchError("Folner set and tiling group differ");

    // One pass over (f, k): the multiplicity of x = f^{-1}k equals
    // |K intersect Fx|.
    groups::ElemMap<std::int64_t> counts;
    for (const auto& f : folner_.elements) {
        const GroupElement fi = g.inv(f);
        for (const auto& k : tiling_.tile) counts[g.mul(fi, k)] += 1;
    }
    support_.reserve(counts.size());
    for (const auto& [x, c] : counts) {
        (void)c;
        support_.push_back(x);
    }
    std::sort(support_.begin(), support_.end(), lex_less);

    const auto fsize = static_cast<std::int64_t>(folner_.size());
    values_.reserve(support_.size());
    for (std::size_t i = 0; i < support_.size(); ++i) {
        support_pos_[support_[i]] = static_cast<std::int32_t>(i);
        values_.push_back(linalg::make_ratio(counts.at(support_[i]), fsize));
    }

    // Partition the support by coset, in tile order.
    const auto& q = *tiling_.quotient;
    coset_to_tile_.assign(q.index(), -1);
    for (std::size_t pos = 0; pos < tiling_.tile.size(); ++pos)
        coset_to_tile_[q.coset_of(tiling_.tile[pos])] = static_cast<std::int32_t>(pos);
    cells_.assign(tiling_.tile.size(), {});
    for (std::size_t i = 0; i < support_.size(); ++i) {
        const std::int32_t pos = coset_to_tile_[q.coset_of(support_[i])];
        cells_[pos].push_back(static_cast<std::int32_t>(i));
    }
}

Rational PhiTable::phi_squared(const GroupElement& x) const {
    auto it = support_pos_.find(x);
    if (it == support_pos_.end()) return Rational(0);
    return values_[it->second];
}

std::int32_t PhiTable::tile_pos_of(const GroupElement& x) const {
    return coset_to_tile_[tiling_.quotient->coset_of(x)];
}

std::int32_t PhiTable::support_index(const GroupElement& x) const {
    auto it = support_pos_.find(x);
    return it == support_pos_.end() ? -1 : it->second;
}

PhiTable build_phi(const FolnerSet& f, const Tiling& t) { return PhiTable(f, t); }

Rational coset_sum(const PhiTable& phi, const GroupElement& y) {
    Rational sum(0);
    for (std::int32_t i : phi.coset_cell(phi.tile_pos_of(y)))
        sum += phi.phi_squared(phi.support()[i]);
    return sum;
}

Rational coset_variation(const PhiTable& phi, const GroupElement& y, const GroupElement& s) {
    const groups::Group& g = *phi.tiling().group;
    g.validate(s);
    const GroupElement si = g.inv(s);

    // Terms are nonzero only where phi^2(x) or phi^2(sx) is: that is the
    // support cell of y's coset together with s^{-1} times the cell of sy's.
    groups::ElemSet xs;
    std::vector<GroupElement> order;
    for (std::int32_t i : phi.coset_cell(phi.tile_pos_of(y))) {
        const GroupElement& x = phi.support()[i];
        if (xs.insert(x).second) order.push_back(x);
    }
    const GroupElement sy = g.mul(s, y);
    for (std::int32_t i : phi.coset_cell(phi.tile_pos_of(sy))) {
        GroupElement x = g.mul(si, phi.support()[i]);
        if (xs.insert(x).second) order.push_back(std::move(x));
    }

    Rational sum(0);
    for (const auto& x : order) {
        const Rational d = phi.phi_squared(x) - phi.phi_squared(g.mul(s, x));
        sum += d < 0 ? Rational(-d) : d;
    }

    const Rational bound = tiling::boundary_ratio(phi.folner(), s);
    if (sum > bound)
        throw CertificationError("coset variation " + linalg::fraction_string(sum) +
                                 " exceeds the boundary ratio " + linalg::fraction_string(bound));
    return sum;
}

void verify_phi_identities(const PhiTable& phi, const std::vector<GroupElement>& test_translations) {
    const Rational one(1);
    for (const auto& y : phi.tiling().tile) {
        if (coset_sum(phi, y) != one)
            throw CertificationError("coset sum differs from 1 at a tile element: broken tiling");
        for (const auto& s : test_translations) coset_variation(phi, y, s);
    }
}

} // namespace qdtile::qd
