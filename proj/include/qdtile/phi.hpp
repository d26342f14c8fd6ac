#pragma once

#include <cstdint>
#include <vector>

#include "qdtile/folner.hpp"
#include "qdtile/group.hpp"
#include "qdtile/rational.hpp"

namespace qdtile::qd {

using groups::GroupElement;
using linalg::Rational;
using tiling::FolnerSet;
using tiling::Tiling;

// Exact table of phi^2 on its support F^{-1}K, with the support partitioned
// by coset. phi^2(x) = |K intersect Fx| / |F|; every supported value is a
// positive rational, everything off the support is zero.
class PhiTable {
public:
    PhiTable(FolnerSet folner, Tiling tiling);

    const FolnerSet& folner() const { return folner_; }
    const Tiling& tiling() const { return tiling_; }

    const std::vector<GroupElement>& support() const { return support_; }
    // Zero off the support.
    Rational phi_squared(const GroupElement& x) const;

    // Support indices belonging to the coset of tile element #pos.
    const std::vector<std::int32_t>& coset_cell(std::int32_t tile_pos) const {
        return cells_[tile_pos];
    }
    std::int32_t tile_pos_of(const GroupElement& x) const; // via the quotient
    std::int32_t support_index(const GroupElement& x) const; // -1 if absent

private:
    FolnerSet folner_;
    Tiling tiling_;
    std::vector<GroupElement> support_;
    groups::ElemMap<std::int32_t> support_pos_;
    std::vector<Rational> values_;              // by support index
    std::vector<std::vector<std::int32_t>> cells_; // by tile position
    std::vector<std::int32_t> coset_to_tile_;   // coset id -> tile position
};

PhiTable build_phi(const FolnerSet& f, const Tiling& t);

// Exact coset sum  sum_{x in yL} phi^2(x). Equals 1 for every y when the
// tiling is sound.
Rational coset_sum(const PhiTable& phi, const GroupElement& y);

// Exact coset variation  sum_{x in yL} |phi^2(x) - phi^2(sx)|. Throws
// CertificationError if it exceeds the boundary ratio |F delta Fs|/|F|
// (impossible for a sound tiling; kept as a hard postcondition).
Rational coset_variation(const PhiTable& phi, const GroupElement& y, const GroupElement& s);

// Runs the exact identities over every coset (and every generator for the
// variation bound); throws CertificationError on the first failure.
void verify_phi_identities(const PhiTable& phi, const std::vector<GroupElement>& test_translations);

} // namespace qdtile::qd
