#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qdtile/group.hpp"
#include "qdtile/rational.hpp"

namespace qdtile::tiling {

using groups::ElemSet;
using groups::FiniteIndexSubgroup;
using groups::Group;
using groups::GroupElement;
using groups::QuotientMap;
using linalg::Rational;

// {a * b : a in A, b in B}, deduplicated, lexicographically sorted.
std::vector<GroupElement> product_set(const Group& g, const std::vector<GroupElement>& a,
                                      const std::vector<GroupElement>& b);
std::vector<GroupElement> inverse_set(const Group& g, const std::vector<GroupElement>& a);

// Finite approximately-invariant set, label n. Always contains the identity,
// duplicate-free, sorted lexicographically.
struct FolnerSet {
    const Group* group = nullptr;
    int n = 0;
    std::vector<GroupElement> elements;

    std::size_t size() const { return elements.size(); }
    bool contains(const GroupElement& e) const;

private:
    friend FolnerSet make_folner_set(const Group&, int, std::vector<GroupElement>);
    ElemSet lookup_;
};

// Box-shaped sets: Z^m -> {0..n-1}^m; H3(Z) -> {(a,b,c): 0<=a,b<n, 0<=c<n^2};
// finite groups -> the whole group for every n; direct products -> products
// of factor boxes. Monotone in n, always contains e.
FolnerSet folner_box(const Group& g, int n);

// Wrap an explicit element list (validated, deduplicated, must contain e).
FolnerSet make_folner_set(const Group& g, int n, std::vector<GroupElement> elements);

// |F delta Fs| / |F| as an exact rational, Fs = {f*s}.
Rational boundary_ratio(const FolnerSet& f, const GroupElement& s);

// Ordered family of finite-index normal subgroups for the separating search.
// Members are produced in nondecreasing index order.
class SubgroupFamily {
public:
    using Generator = std::function<std::optional<FiniteIndexSubgroup>(std::size_t)>;

    SubgroupFamily(std::string label, Generator gen) : label_(std::move(label)), gen_(std::move(gen)) {}

    const std::string& label() const { return label_; }
    std::optional<FiniteIndexSubgroup> member(std::size_t k) const { return gen_(k); }

    // Uniform-moduli / congruence-level / trivial-subgroup default per kind.
    static SubgroupFamily standard(const Group& g);

private:
    std::string label_;
    Generator gen_;
};

// First family member L with F^{-1}F intersect L = {e}. The check enumerates
// F^{-1}F exactly. Throws CertificationError if the family is exhausted below
// the index cap.
FiniteIndexSubgroup separating_subgroup(const FolnerSet& f, const SubgroupFamily& family,
                                        std::uint64_t index_cap = 100000);

struct TilingCertificate {
    bool contains_folner = false;     // K contains F
    bool transversal = false;         // K^{-1}K intersect L = {e}, exhaustively
    bool full_index = false;          // |K| = [G:L]
    std::uint64_t window_checked = 0; // elements with verified unique factorization
};

// Certified pair (K, L): K a full coset transversal, so G = K L.
struct Tiling {
    const Group* group = nullptr;
    std::vector<GroupElement> tile; // sorted lexicographically
    std::shared_ptr<const QuotientMap> quotient;
    TilingCertificate certificate;

    const FiniteIndexSubgroup& subgroup() const { return quotient->subgroup(); }
    std::uint64_t index() const { return quotient->index(); }
};

// Complete F to a transversal tile K >= F. Missing cosets get their minimal
// representative under (word length, then lexicographic normal form); the
// greedy scan runs over BFS layers of the word ball. Throws if two
// F-elements share a coset (precondition F^{-1}F intersect L = {e} violated).
Tiling complete_tile(const FolnerSet& f, FiniteIndexSubgroup l, int radius_cap = 64,
                     std::uint64_t index_cap = 100000);

// Certify an explicitly given tile (used by instances that pin K directly).
Tiling certify_tiling(const Group& g, std::vector<GroupElement> tile, FiniteIndexSubgroup l,
                      std::uint64_t index_cap = 100000);

// For every w in the window: the unique (k, l) in K x L with w = k*l.
struct Factorization {
    GroupElement window_element;
    GroupElement tile_part;
    GroupElement subgroup_part;
};
std::vector<Factorization> verify_tiling(const Tiling& t, const std::vector<GroupElement>& window);

nlohmann::json tiling_to_json(const Tiling& t);
Tiling tiling_from_json(const Group& g, const nlohmann::json& j);

} // namespace qdtile::tiling
