#include "qdtile/group.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>

namespace qdtile::groups {

using nlohmann::json;

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("int64 overflow in add");
    return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("int64 overflow in sub");
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("int64 overflow in mul");
    return r;
}

bool lex_less(const GroupElement& a, const GroupElement& b) {
    return std::lexicographical_compare(a.coords.begin(), a.coords.end(), b.coords.begin(),
                                        b.coords.end());
}

std::size_t ElemHash::operator()(const GroupElement& e) const {
    // FNV-1a over the coordinate words, mixed with the group identity.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    mix(reinterpret_cast<std::uintptr_t>(e.group));
    for (std::int64_t c : e.coords) mix(static_cast<std::uint64_t>(c));
    return static_cast<std::size_t>(h);
}

std::uint64_t Group::order() const {
    throw ConfigError("order() is only available on finite groups (" + name() + ")");
}

std::vector<GroupElement> Group::enumerate() const {
    throw ConfigError("enumerate() is only available on finite groups (" + name() + ")");
}

GroupElement Group::identity() const {
    return GroupElement{this, std::vector<std::int64_t>(coord_count(), 0)};
}

GroupElement Group::element(std::vector<std::int64_t> coords) const {
    GroupElement e{this, std::move(coords)};
    validate(e);
    return e;
}

GroupElement Group::mul(const GroupElement& a, const GroupElement& b) const {
    check_same_group(a);
    check_same_group(b);
    GroupElement out{this, {}};
    raw_mul(a.coords, b.coords, out.coords);
    return out;
}

GroupElement Group::inv(const GroupElement& a) const {
    check_same_group(a);
    GroupElement out{this, {}};
    raw_inv(a.coords, out.coords);
    return out;
}

void Group::validate(const GroupElement& e) const {
    check_same_group(e);
    if (e.coords.size() != coord_count())
        throw GroupMismatchError("coordinate count mismatch for " + name());
    raw_validate(e.coords);
}

void Group::check_same_group(const GroupElement& e) const {
    if (e.group != this)
        throw GroupMismatchError("element does not belong to " + name());
}

json Group::descriptor_json() const {
    json j;
    descriptor_fields(j);
    return j;
}

// ---------------------------------------------------------------- Lattice

LatticeGroup::LatticeGroup(std::size_t rank) : rank_(rank) {
    if (rank == 0) throw ConfigError("lattice rank must be >= 1");
}

std::string LatticeGroup::name() const {
    return rank_ == 1 ? "Z" : "Z^" + std::to_string(rank_);
}

std::vector<GroupElement> LatticeGroup::generators() const {
    std::vector<GroupElement> gens;
    for (std::size_t i = 0; i < rank_; ++i) {
        std::vector<std::int64_t> c(rank_, 0);
        c[i] = 1;
        gens.push_back(GroupElement{this, std::move(c)});
    }
    return gens;
}

void LatticeGroup::raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                           std::vector<std::int64_t>& out) const {
    out.resize(rank_);
    for (std::size_t i = 0; i < rank_; ++i) out[i] = checked_add(a[i], b[i]);
}

void LatticeGroup::raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const {
    out.resize(rank_);
    for (std::size_t i = 0; i < rank_; ++i) out[i] = checked_sub(0, a[i]);
}

void LatticeGroup::raw_validate(const std::vector<std::int64_t>&) const {}

void LatticeGroup::descriptor_fields(json& j) const {
    j["kind"] = "lattice";
    j["rank"] = rank_;
}

// ------------------------------------------------------------- Heisenberg

std::vector<GroupElement> HeisenbergGroup::generators() const {
    return {GroupElement{this, {1, 0, 0}}, GroupElement{this, {0, 1, 0}}};
}

void HeisenbergGroup::raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                              std::vector<std::int64_t>& out) const {
    out.resize(3);
    out[0] = checked_add(a[0], b[0]);
    out[1] = checked_add(a[1], b[1]);
    out[2] = checked_add(checked_add(a[2], b[2]), checked_mul(a[0], b[1]));
}

void HeisenbergGroup::raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const {
    // (a,b,c)^{-1} = (-a,-b,-c+ab)
    out.resize(3);
    out[0] = checked_sub(0, a[0]);
    out[1] = checked_sub(0, a[1]);
    out[2] = checked_add(checked_sub(0, a[2]), checked_mul(a[0], a[1]));
}

void HeisenbergGroup::raw_validate(const std::vector<std::int64_t>&) const {}

void HeisenbergGroup::descriptor_fields(json& j) const { j["kind"] = "heisenberg"; }

// ----------------------------------------------------------- FiniteCyclic

FiniteCyclicGroup::FiniteCyclicGroup(std::vector<std::int64_t> moduli) : moduli_(std::move(moduli)) {
    if (moduli_.empty()) throw ConfigError("finite cyclic product needs at least one modulus");
    for (std::int64_t k : moduli_)
        if (k < 1) throw ConfigError("finite cyclic moduli must be >= 1");
}

std::string FiniteCyclicGroup::name() const {
    std::string s;
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
        if (i) s += "x";
        s += "Z/" + std::to_string(moduli_[i]);
    }
    return s;
}

std::uint64_t FiniteCyclicGroup::order() const {
    std::uint64_t n = 1;
    for (std::int64_t k : moduli_) n = static_cast<std::uint64_t>(checked_mul(static_cast<std::int64_t>(n), k));
    return n;
}

std::vector<GroupElement> FiniteCyclicGroup::enumerate() const {
    std::vector<GroupElement> all;
    all.reserve(order());
    std::vector<std::int64_t> c(moduli_.size(), 0);
    while (true) {
        all.push_back(GroupElement{this, c});
        std::size_t i = moduli_.size();
        while (i > 0) {
            --i;
            if (++c[i] < moduli_[i]) break;
            c[i] = 0;
            if (i == 0) return all;
        }
    }
}

std::vector<GroupElement> FiniteCyclicGroup::generators() const {
    std::vector<GroupElement> gens;
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
        if (moduli_[i] == 1) continue;
        std::vector<std::int64_t> c(moduli_.size(), 0);
        c[i] = 1;
        gens.push_back(GroupElement{this, std::move(c)});
    }
    return gens;
}

void FiniteCyclicGroup::raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                                std::vector<std::int64_t>& out) const {
    out.resize(moduli_.size());
    for (std::size_t i = 0; i < moduli_.size(); ++i) out[i] = (a[i] + b[i]) % moduli_[i];
}

void FiniteCyclicGroup::raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const {
    out.resize(moduli_.size());
    for (std::size_t i = 0; i < moduli_.size(); ++i) out[i] = (moduli_[i] - a[i]) % moduli_[i];
}

void FiniteCyclicGroup::raw_validate(const std::vector<std::int64_t>& a) const {
    for (std::size_t i = 0; i < moduli_.size(); ++i)
        if (a[i] < 0 || a[i] >= moduli_[i])
            throw GroupMismatchError("residue out of range in " + name());
}

void FiniteCyclicGroup::descriptor_fields(json& j) const {
    j["kind"] = "finite_cyclic";
    j["moduli"] = moduli_;
}

// ---------------------------------------------------------- DirectProduct

DirectProductGroup::DirectProductGroup(std::shared_ptr<const Group> first,
                                       std::shared_ptr<const Group> second)
    : first_(std::move(first)), second_(std::move(second)) {
    if (!first_ || !second_) throw ConfigError("direct product needs two factor groups");
}

std::size_t DirectProductGroup::coord_count() const {
    return first_->coord_count() + second_->coord_count();
}

std::string DirectProductGroup::name() const {
    return "(" + first_->name() + ") x (" + second_->name() + ")";
}

bool DirectProductGroup::is_finite() const { return first_->is_finite() && second_->is_finite(); }

std::uint64_t DirectProductGroup::order() const {
    if (!is_finite()) return Group::order();
    return static_cast<std::uint64_t>(
        checked_mul(static_cast<std::int64_t>(first_->order()), static_cast<std::int64_t>(second_->order())));
}

std::vector<GroupElement> DirectProductGroup::enumerate() const {
    if (!is_finite()) return Group::enumerate();
    std::vector<GroupElement> all;
    all.reserve(order());
    for (const auto& a : first_->enumerate()) {
        for (const auto& b : second_->enumerate()) {
            std::vector<std::int64_t> c = a.coords;
            c.insert(c.end(), b.coords.begin(), b.coords.end());
            all.push_back(GroupElement{this, std::move(c)});
        }
    }
    return all;
}

std::vector<GroupElement> DirectProductGroup::generators() const {
    std::vector<GroupElement> gens;
    const std::size_t n1 = first_->coord_count();
    const std::size_t n2 = second_->coord_count();
    for (const auto& g : first_->generators()) {
        std::vector<std::int64_t> c = g.coords;
        c.resize(n1 + n2, 0);
        gens.push_back(GroupElement{this, std::move(c)});
    }
    for (const auto& g : second_->generators()) {
        std::vector<std::int64_t> c(n1, 0);
        c.insert(c.end(), g.coords.begin(), g.coords.end());
        gens.push_back(GroupElement{this, std::move(c)});
    }
    return gens;
}

void DirectProductGroup::raw_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                                 std::vector<std::int64_t>& out) const {
    const std::size_t n1 = first_->coord_count();
    std::vector<std::int64_t> a1(a.begin(), a.begin() + n1), a2(a.begin() + n1, a.end());
    std::vector<std::int64_t> b1(b.begin(), b.begin() + n1), b2(b.begin() + n1, b.end());
    GroupElement r1 = first_->mul(GroupElement{first_.get(), a1}, GroupElement{first_.get(), b1});
    GroupElement r2 = second_->mul(GroupElement{second_.get(), a2}, GroupElement{second_.get(), b2});
    out = r1.coords;
    out.insert(out.end(), r2.coords.begin(), r2.coords.end());
}

void DirectProductGroup::raw_inv(const std::vector<std::int64_t>& a, std::vector<std::int64_t>& out) const {
    const std::size_t n1 = first_->coord_count();
    std::vector<std::int64_t> a1(a.begin(), a.begin() + n1), a2(a.begin() + n1, a.end());
    GroupElement r1 = first_->inv(GroupElement{first_.get(), a1});
    GroupElement r2 = second_->inv(GroupElement{second_.get(), a2});
    out = r1.coords;
    out.insert(out.end(), r2.coords.begin(), r2.coords.end());
}

void DirectProductGroup::raw_validate(const std::vector<std::int64_t>& a) const {
    const std::size_t n1 = first_->coord_count();
    first_->validate(GroupElement{first_.get(), std::vector<std::int64_t>(a.begin(), a.begin() + n1)});
    second_->validate(GroupElement{second_.get(), std::vector<std::int64_t>(a.begin() + n1, a.end())});
}

void DirectProductGroup::descriptor_fields(json& j) const {
    j["kind"] = "direct_product";
    j["first"] = first_->descriptor_json();
    j["second"] = second_->descriptor_json();
}

std::shared_ptr<const Group> make_group(const json& descriptor) {
    const std::string kind = descriptor.at("kind").get<std::string>();
    if (kind == "lattice") return std::make_shared<LatticeGroup>(descriptor.at("rank").get<std::size_t>());
    if (kind == "heisenberg") return std::make_shared<HeisenbergGroup>();
    if (kind == "finite_cyclic")
        return std::make_shared<FiniteCyclicGroup>(descriptor.at("moduli").get<std::vector<std::int64_t>>());
    if (kind == "direct_product")
        return std::make_shared<DirectProductGroup>(make_group(descriptor.at("first")),
                                                    make_group(descriptor.at("second")));
    throw ConfigError("unknown group kind: " + kind);
}

// -------------------------------------------------------------- word balls

std::vector<std::vector<GroupElement>> word_ball_layers(const Group& g, int radius) {
    if (radius < 0) throw ConfigError("word ball radius must be >= 0");
    std::vector<GroupElement> gens = g.generators();
    {
        ElemSet seen(gens.begin(), gens.end());
        const std::size_t n = gens.size();
        for (std::size_t i = 0; i < n; ++i) {
            GroupElement ginv = g.inv(gens[i]);
            if (seen.insert(ginv).second) gens.push_back(std::move(ginv));
        }
    }
    std::vector<std::vector<GroupElement>> layers;
    ElemSet visited;
    layers.push_back({g.identity()});
    visited.insert(g.identity());
    for (int r = 1; r <= radius; ++r) {
        std::vector<GroupElement> next;
        for (const auto& e : layers[r - 1]) {
            for (const auto& s : gens) {
                GroupElement p = g.mul(e, s);
                if (visited.insert(p).second) next.push_back(std::move(p));
            }
        }
        std::sort(next.begin(), next.end(), lex_less);
        layers.push_back(std::move(next));
        if (layers.back().empty()) break; // finite group exhausted
    }
    return layers;
}

std::vector<GroupElement> word_ball(const Group& g, int radius) {
    std::vector<GroupElement> ball;
    for (auto& layer : word_ball_layers(g, radius))
        for (auto& e : layer) ball.push_back(std::move(e));
    return ball;
}

// ----------------------------------------------------------------subgroup

FiniteIndexSubgroup::FiniteIndexSubgroup(const Group& g, Params params)
    : group_(&g), params_(std::move(params)) {
    if (auto* lm = std::get_if<LatticeModuli>(&params_)) {
        if (g.kind() != GroupKind::Lattice)
            throw ConfigError("moduli subgroup requires a lattice group");
        if (lm->moduli.size() != g.coord_count())
            throw ConfigError("moduli count must match lattice rank");
        for (std::int64_t n : lm->moduli)
            if (n < 1) throw ConfigError("subgroup moduli must be >= 1");
    } else if (auto* hl = std::get_if<HeisenbergLevel>(&params_)) {
        if (g.kind() != GroupKind::Heisenberg)
            throw ConfigError("congruence level subgroup requires the Heisenberg group");
        if (hl->level < 1) throw ConfigError("congruence level must be >= 1");
    } else if (auto* ef = std::get_if<ExplicitFinite>(&params_)) {
        if (!g.is_finite())
            throw ConfigError("explicit-list subgroups are only supported on finite groups");
        for (const auto& e : ef->elements) {
            g.validate(e);
            explicit_members_.insert(e);
        }
        if (explicit_members_.count(g.identity()) == 0)
            throw ConfigError("explicit subgroup must contain the identity");
        // closure under product and inverse, exhaustively
        for (const auto& a : explicit_members_) {
            if (explicit_members_.count(g.inv(a)) == 0)
                throw ConfigError("explicit subgroup list is not closed under inverses");
            for (const auto& b : explicit_members_)
                if (explicit_members_.count(g.mul(a, b)) == 0)
                    throw ConfigError("explicit subgroup list is not closed under products");
        }
    } else if (auto* pp = std::get_if<ProductPair>(&params_)) {
        const auto* dp = dynamic_cast<const DirectProductGroup*>(&g);
        if (!dp) throw ConfigError("pair subgroup requires a direct product group");
        if (&pp->first->group() != &dp->first() || &pp->second->group() != &dp->second())
            throw ConfigError("pair subgroup factors must match the product factors");
    }
    index_ = compute_index();
    verify_normal();
}

bool FiniteIndexSubgroup::contains(const GroupElement& e) const {
    group_->validate(e);
    if (const auto* lm = std::get_if<LatticeModuli>(&params_)) {
        for (std::size_t i = 0; i < lm->moduli.size(); ++i)
            if (e.coords[i] % lm->moduli[i] != 0) return false;
        return true;
    }
    if (const auto* hl = std::get_if<HeisenbergLevel>(&params_)) {
        for (int i = 0; i < 3; ++i)
            if (e.coords[i] % hl->level != 0) return false;
        return true;
    }
    if (std::get_if<ExplicitFinite>(&params_)) return explicit_members_.count(e) > 0;
    const auto& pp = std::get<ProductPair>(params_);
    const auto* dp = static_cast<const DirectProductGroup*>(group_);
    const std::size_t n1 = dp->first().coord_count();
    GroupElement e1{&dp->first(), std::vector<std::int64_t>(e.coords.begin(), e.coords.begin() + n1)};
    GroupElement e2{&dp->second(), std::vector<std::int64_t>(e.coords.begin() + n1, e.coords.end())};
    return pp.first->contains(e1) && pp.second->contains(e2);
}

std::uint64_t FiniteIndexSubgroup::compute_index() const {
    if (const auto* lm = std::get_if<LatticeModuli>(&params_)) {
        std::int64_t n = 1;
        for (std::int64_t k : lm->moduli) n = checked_mul(n, k);
        return static_cast<std::uint64_t>(n);
    }
    if (const auto* hl = std::get_if<HeisenbergLevel>(&params_))
        return static_cast<std::uint64_t>(checked_mul(checked_mul(hl->level, hl->level), hl->level));
    if (std::get_if<ExplicitFinite>(&params_)) {
        const std::uint64_t ord = group_->order();
        const std::uint64_t sz = explicit_members_.size();
        if (ord % sz != 0)
            throw ConfigError("explicit subgroup size does not divide the group order");
        return ord / sz;
    }
    const auto& pp = std::get<ProductPair>(params_);
    return static_cast<std::uint64_t>(checked_mul(static_cast<std::int64_t>(pp.first->index()),
                                                  static_cast<std::int64_t>(pp.second->index())));
}

std::vector<GroupElement> FiniteIndexSubgroup::generating_set() const {
    if (const auto* lm = std::get_if<LatticeModuli>(&params_)) {
        std::vector<GroupElement> gens;
        for (std::size_t i = 0; i < lm->moduli.size(); ++i) {
            std::vector<std::int64_t> c(lm->moduli.size(), 0);
            c[i] = lm->moduli[i];
            gens.push_back(GroupElement{group_, std::move(c)});
        }
        return gens;
    }
    if (const auto* hl = std::get_if<HeisenbergLevel>(&params_)) {
        const std::int64_t n = hl->level;
        return {GroupElement{group_, {n, 0, 0}}, GroupElement{group_, {0, n, 0}},
                GroupElement{group_, {0, 0, n}}};
    }
    if (const auto* ef = std::get_if<ExplicitFinite>(&params_)) return ef->elements;
    const auto& pp = std::get<ProductPair>(params_);
    const auto* dp = static_cast<const DirectProductGroup*>(group_);
    const std::size_t n1 = dp->first().coord_count();
    const std::size_t n2 = dp->second().coord_count();
    std::vector<GroupElement> gens;
    for (const auto& e : pp.first->generating_set()) {
        std::vector<std::int64_t> c = e.coords;
        c.resize(n1 + n2, 0);
        gens.push_back(GroupElement{group_, std::move(c)});
    }
    for (const auto& e : pp.second->generating_set()) {
        std::vector<std::int64_t> c(n1, 0);
        c.insert(c.end(), e.coords.begin(), e.coords.end());
        gens.push_back(GroupElement{group_, std::move(c)});
    }
    return gens;
}

void FiniteIndexSubgroup::verify_normal() const {
    std::vector<GroupElement> gens = group_->generators();
    {
        const std::size_t n = gens.size();
        for (std::size_t i = 0; i < n; ++i) gens.push_back(group_->inv(gens[i]));
    }
    for (const auto& g : gens) {
        const GroupElement gi = group_->inv(g);
        for (const auto& l : generating_set()) {
            if (!contains(group_->mul(group_->mul(g, l), gi)))
                throw ConfigError("subgroup is not normal: conjugate escapes the subgroup");
        }
    }
}

json FiniteIndexSubgroup::params_json() const {
    json j;
    if (const auto* lm = std::get_if<LatticeModuli>(&params_)) {
        j["kind"] = "moduli";
        j["moduli"] = lm->moduli;
    } else if (const auto* hl = std::get_if<HeisenbergLevel>(&params_)) {
        j["kind"] = "congruence_level";
        j["level"] = hl->level;
    } else if (const auto* ef = std::get_if<ExplicitFinite>(&params_)) {
        j["kind"] = "explicit";
        json els = json::array();
        std::vector<GroupElement> sorted = ef->elements;
        std::sort(sorted.begin(), sorted.end(), lex_less);
        for (const auto& e : sorted) els.push_back(e.coords);
        j["elements"] = els;
    } else {
        const auto& pp = std::get<ProductPair>(params_);
        j["kind"] = "pair";
        j["first"] = pp.first->params_json();
        j["second"] = pp.second->params_json();
    }
    return j;
}

FiniteIndexSubgroup FiniteIndexSubgroup::from_json(const Group& g, const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "moduli")
        return FiniteIndexSubgroup(g, LatticeModuli{j.at("moduli").get<std::vector<std::int64_t>>()});
    if (kind == "congruence_level")
        return FiniteIndexSubgroup(g, HeisenbergLevel{j.at("level").get<std::int64_t>()});
    if (kind == "explicit") {
        ExplicitFinite ef;
        for (const auto& row : j.at("elements"))
            ef.elements.push_back(GroupElement{&g, row.get<std::vector<std::int64_t>>()});
        return FiniteIndexSubgroup(g, std::move(ef));
    }
    if (kind == "pair") {
        const auto* dp = dynamic_cast<const DirectProductGroup*>(&g);
        if (!dp) throw ConfigError("pair subgroup requires a direct product group");
        auto s1 = std::make_shared<FiniteIndexSubgroup>(from_json(dp->first(), j.at("first")));
        auto s2 = std::make_shared<FiniteIndexSubgroup>(from_json(dp->second(), j.at("second")));
        return FiniteIndexSubgroup(g, ProductPair{std::move(s1), std::move(s2)});
    }
    throw ConfigError("unknown subgroup kind: " + kind);
}

// ------------------------------------------------------------ QuotientMap

QuotientMap::QuotientMap(const Group& g, FiniteIndexSubgroup sub, std::uint64_t index_cap)
    : group_(&g), sub_(std::move(sub)), index_(sub_.index()) {
    if (&sub_.group() != &g) throw GroupMismatchError("subgroup belongs to a different group");
    if (index_ > index_cap)
        throw ConfigError("quotient index " + std::to_string(index_) + " exceeds the cap " +
                          std::to_string(index_cap));

    if (std::get_if<FiniteIndexSubgroup::ExplicitFinite>(&sub_.params())) {
        // Group cosets by their lexicographically minimal member; the
        // identity's coset gets index 0, the rest follow in key order.
        std::vector<GroupElement> keys;
        ElemSet seen;
        for (const auto& x : group_->enumerate()) {
            GroupElement key = x;
            for (const auto& l : sub_.generating_set()) {
                GroupElement m = group_->mul(x, l);
                if (lex_less(m, key)) key = m;
            }
            if (seen.insert(key).second) keys.push_back(key);
        }
        if (keys.size() != index_)
            throw CertificationError("enumerated coset count disagrees with the subgroup index");
        GroupElement ekey = keys.front();
        {
            // identity coset key
            GroupElement x = group_->identity();
            GroupElement key = x;
            for (const auto& l : sub_.generating_set()) {
                GroupElement m = group_->mul(x, l);
                if (lex_less(m, key)) key = m;
            }
            ekey = key;
        }
        std::sort(keys.begin(), keys.end(), lex_less);
        std::stable_partition(keys.begin(), keys.end(),
                              [&](const GroupElement& k) { return k == ekey; });
        reps_ = keys;
        for (std::size_t i = 0; i < reps_.size(); ++i) finite_lookup_[reps_[i]] = static_cast<std::int64_t>(i);
        return;
    }

    if (const auto* pp = std::get_if<FiniteIndexSubgroup::ProductPair>(&sub_.params())) {
        const auto* dp = static_cast<const DirectProductGroup*>(group_);
        part1_ = std::make_unique<QuotientMap>(dp->first(), *pp->first, index_cap);
        part2_ = std::make_unique<QuotientMap>(dp->second(), *pp->second, index_cap);
        reps_.reserve(index_);
        for (std::uint64_t i = 0; i < part1_->index(); ++i) {
            for (std::uint64_t j = 0; j < part2_->index(); ++j) {
                std::vector<std::int64_t> c = part1_->rep(static_cast<std::int64_t>(i)).coords;
                const auto& r2 = part2_->rep(static_cast<std::int64_t>(j)).coords;
                c.insert(c.end(), r2.begin(), r2.end());
                reps_.push_back(GroupElement{group_, std::move(c)});
            }
        }
        return;
    }

    // Residue-indexed families (lattice moduli, Heisenberg level): canonical
    // representative = nonnegative residues, mixed-radix coset id.
    reps_.reserve(index_);
    if (const auto* lm = std::get_if<FiniteIndexSubgroup::LatticeModuli>(&sub_.params()))
        radices_ = lm->moduli;
    else {
        const auto lvl = std::get<FiniteIndexSubgroup::HeisenbergLevel>(sub_.params()).level;
        radices_ = {lvl, lvl, lvl};
    }
    std::vector<std::int64_t> c(radices_.size(), 0);
    while (true) {
        reps_.push_back(GroupElement{group_, c});
        std::size_t i = radices_.size();
        bool done = true;
        while (i > 0) {
            --i;
            if (++c[i] < radices_[i]) {
                done = false;
                break;
            }
            c[i] = 0;
        }
        if (done) break;
    }
    if (reps_.size() != index_)
        throw CertificationError("residue enumeration disagrees with the subgroup index");
}

std::int64_t QuotientMap::residue_coset(const std::vector<std::int64_t>& coords) const {
    std::int64_t id = 0;
    for (std::size_t i = 0; i < radices_.size(); ++i) {
        const std::int64_t n = radices_[i];
        const std::int64_t r = ((coords[i] % n) + n) % n;
        id = checked_add(checked_mul(id, n), r);
    }
    return id;
}

std::int64_t QuotientMap::coset_of(const GroupElement& e) const {
    group_->validate(e);
    if (std::get_if<FiniteIndexSubgroup::ExplicitFinite>(&sub_.params())) {
        GroupElement key = e;
        for (const auto& l : sub_.generating_set()) {
            GroupElement m = group_->mul(e, l);
            if (lex_less(m, key)) key = m;
        }
        auto it = finite_lookup_.find(key);
        if (it == finite_lookup_.end())
            throw CertificationError("coset key missing from the finite quotient table");
        return it->second;
    }
    if (std::get_if<FiniteIndexSubgroup::ProductPair>(&sub_.params())) {
        const auto* dp = static_cast<const DirectProductGroup*>(group_);
        const std::size_t n1 = dp->first().coord_count();
        GroupElement e1{&dp->first(), std::vector<std::int64_t>(e.coords.begin(), e.coords.begin() + n1)};
        GroupElement e2{&dp->second(), std::vector<std::int64_t>(e.coords.begin() + n1, e.coords.end())};
        return checked_add(checked_mul(part1_->coset_of(e1), static_cast<std::int64_t>(part2_->index())),
                           part2_->coset_of(e2));
    }
    return residue_coset(e.coords);
}

std::int64_t QuotientMap::mul(std::int64_t i, std::int64_t j) const {
    return coset_of(group_->mul(rep(i), rep(j)));
}

std::int64_t QuotientMap::inv(std::int64_t i) const { return coset_of(group_->inv(rep(i))); }

} // namespace qdtile::groups
