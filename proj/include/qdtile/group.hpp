#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qdtile/errors.hpp"

namespace qdtile::groups {

class Group;

// One element in canonical normal form. Coordinates are group-specific:
// rank-m lattice: m integers; Heisenberg H3(Z): (a,b,c); finite cyclic
// product: residue vector; direct product: concatenated factor coordinates.
// Equality of elements is equality of normal forms.
struct GroupElement {
    const Group* group = nullptr;
    std::vector<std::int64_t> coords;

    bool operator==(const GroupElement& o) const {
        return group == o.group && coords == o.coords;
    }
    bool operator!=(const GroupElement& o) const { return !(*this == o); }
};

// Lexicographic order on normal forms (total within one group).
bool lex_less(const GroupElement& a, const GroupElement& b);

struct ElemHash {
    std::size_t operator()(const GroupElement& e) const;
};

using ElemSet = std::unordered_set<GroupElement, ElemHash>;
template <typename V>
using ElemMap = std::unordered_map<GroupElement, V, ElemHash>;

// Overflow-checked int64 arithmetic. Hard failure: a wrapped Heisenberg
// c-coordinate would silently corrupt every certificate downstream.
std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_sub(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

enum class GroupKind { Lattice, Heisenberg, FiniteCyclic, DirectProduct };

// Uniform interface for the concrete group catalog. All values immutable
// after construction; operations are deterministic and exact.
class Group {
public:
    virtual ~Group() = default;

    virtual GroupKind kind() const = 0;
    virtual std::size_t coord_count() const = 0;
    virtual std::string name() const = 0;
    virtual bool is_finite() const = 0;
    // Finite kinds report their order.
    virtual std::uint64_t order() const;
    virtual std::vector<GroupElement> enumerate() const;

    // Generating set as listed in the descriptor (not inverse-closed).
    virtual std::vector<GroupElement> generators() const = 0;

    GroupElement identity() const;
    GroupElement element(std::vector<std::int64_t> coords) const;

    GroupElement mul(const GroupElement& a, const GroupElement& b) const;
    GroupElement inv(const GroupElement& a) const;

    // Coordinate validity for this group (size and residue ranges).
    void validate(const GroupElement& e) const;

    nlohmann::json descriptor_json() const;

protected:
    virtual void raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                         std::vector<std::int64_t>& out) const = 0;
    virtual void raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const = 0;
    virtual void raw_validate(const std::vector<std::int64_t>& a) const = 0;
    virtual void descriptor_fields(nlohmann::json& j) const = 0;

    void check_same_group(const GroupElement& e) const;
};

class LatticeGroup final : public Group {
public:
    explicit LatticeGroup(std::size_t rank);

    GroupKind kind() const override { return GroupKind::Lattice; }
    std::size_t coord_count() const override { return rank_; }
    std::string name() const override;
    bool is_finite() const override { return false; }
    std::vector<GroupElement> generators() const override;

    std::size_t rank() const { return rank_; }

protected:
    void raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                 std::vector<std::int64_t>& out) const override;
    void raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const override;
    void raw_validate(const std::vector<std::int64_t>& a) const override;
    void descriptor_fields(nlohmann::json& j) const override;

private:
    std::size_t rank_;
};

// Discrete Heisenberg group H3(Z): triples (a,b,c) with
// (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b').
class HeisenbergGroup final : public Group {
public:
    HeisenbergGroup() = default;

    GroupKind kind() const override { return GroupKind::Heisenberg; }
    std::size_t coord_count() const override { return 3; }
    std::string name() const override { return "H3(Z)"; }
    bool is_finite() const override { return false; }
    std::vector<GroupElement> generators() const override;

protected:
    void raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                 std::vector<std::int64_t>& out) const override;
    void raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const override;
    void raw_validate(const std::vector<std::int64_t>& a) const override;
    void descriptor_fields(nlohmann::json& j) const override;
};

// Z/k1 x ... x Z/kr with residue-vector normal forms in [0, ki).
class FiniteCyclicGroup final : public Group {
public:
    explicit FiniteCyclicGroup(std::vector<std::int64_t> moduli);

    GroupKind kind() const override { return GroupKind::FiniteCyclic; }
    std::size_t coord_count() const override { return moduli_.size(); }
    std::string name() const override;
    bool is_finite() const override { return true; }
    std::uint64_t order() const override;
    std::vector<GroupElement> enumerate() const override;
    std::vector<GroupElement> generators() const override;

    const std::vector<std::int64_t>& moduli() const { return moduli_; }

protected:
    void raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                 std::vector<std::int64_t>& out) const override;
    void raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const override;
    void raw_validate(const std::vector<std::int64_t>& a) const override;
    void descriptor_fields(nlohmann::json& j) const override;

private:
    std::vector<std::int64_t> moduli_;
};

// Direct product of two catalog groups; coordinates are the concatenation.
class DirectProductGroup final : public Group {
public:
    DirectProductGroup(std::shared_ptr<const Group> first, std::shared_ptr<const Group> second);

    GroupKind kind() const override { return GroupKind::DirectProduct; }
    std::size_t coord_count() const override;
    std::string name() const override;
    bool is_finite() const override;
    std::uint64_t order() const override;
    std::vector<GroupElement> enumerate() const override;
    std::vector<GroupElement> generators() const override;

    const Group& first() const { return *first_; }
    const Group& second() const { return *second_; }

protected:
    void raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                 std::vector<std::int64_t>& out) const override;
    void raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const override;
    void raw_validate(const std::vector<std::int64_t>& a) const override;
    void descriptor_fields(nlohmann::json& j) const override;

private:
    std::shared_ptr<const Group> first_;
    std::shared_ptr<const Group> second_;
};

std::shared_ptr<const Group> make_group(const nlohmann::json& descriptor);

// All elements of word length <= r over the descriptor generators (closed
// under inverses internally), deduplicated via normal forms.
std::vector<GroupElement> word_ball(const Group& g, int radius);

// Same, but organized as BFS layers: layers[r] holds the elements of word
// length exactly r, each layer sorted lexicographically. Used by the greedy
// tile completion.
std::vector<std::vector<GroupElement>> word_ball_layers(const Group& g, int radius);

// Finite-index normal subgroup from a parametrized family. Membership is
// exact; normality is verified on generators at construction.
class FiniteIndexSubgroup {
public:
    struct LatticeModuli {
        std::vector<std::int64_t> moduli; // Ni >= 1 per coordinate
    };
    struct HeisenbergLevel {
        std::int64_t level; // {(a,b,c): a = b = c = 0 mod N}
    };
    struct ExplicitFinite {
        std::vector<GroupElement> elements; // the full subgroup, listed
    };
    struct ProductPair {
        std::shared_ptr<const FiniteIndexSubgroup> first;
        std::shared_ptr<const FiniteIndexSubgroup> second;
    };
    using Params = std::variant<LatticeModuli, HeisenbergLevel, ExplicitFinite, ProductPair>;

    FiniteIndexSubgroup(const Group& g, Params params);

    const Group& group() const { return *group_; }
    const Params& params() const { return params_; }

    bool contains(const GroupElement& e) const;
    std::uint64_t index() const { return index_; }

    // Generators of the subgroup itself (used for the normality check and
    // available to callers that enumerate L within a window).
    std::vector<GroupElement> generating_set() const;

    nlohmann::json params_json() const;
    static FiniteIndexSubgroup from_json(const Group& g, const nlohmann::json& j);

private:
    const Group* group_;
    Params params_;
    std::uint64_t index_;
    ElemSet explicit_members_; // only for ExplicitFinite

    void verify_normal() const;
    std::uint64_t compute_index() const;
};

// Bijective indexing of cosets 0..index-1 with canonical representatives.
// q(e) = 0 always. The quotient group law is computable from indices.
class QuotientMap {
public:
    QuotientMap(const Group& g, FiniteIndexSubgroup sub, std::uint64_t index_cap = 100000);

    const Group& group() const { return *group_; }
    const FiniteIndexSubgroup& subgroup() const { return sub_; }
    std::uint64_t index() const { return index_; }

    std::int64_t coset_of(const GroupElement& e) const;
    const GroupElement& rep(std::int64_t coset) const { return reps_.at(coset); }
    std::int64_t mul(std::int64_t i, std::int64_t j) const;
    std::int64_t inv(std::int64_t i) const;

private:
    const Group* group_;
    FiniteIndexSubgroup sub_;
    std::uint64_t index_;
    std::vector<GroupElement> reps_;
    ElemMap<std::int64_t> finite_lookup_;  // explicit-list path only
    std::unique_ptr<QuotientMap> part1_, part2_; // product path only
    std::vector<std::int64_t> radices_;    // residue-indexed path only

    std::int64_t residue_coset(const std::vector<std::int64_t>& coords) const;
};

} // namespace qdtile::groups
