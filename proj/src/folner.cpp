#include "qdtile/folner.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace qdtile::tiling {

using groups::checked_mul;
using groups::DirectProductGroup;
using groups::ElemHash;
using groups::GroupKind;
using groups::HeisenbergGroup;
using groups::LatticeGroup;
using groups::lex_less;
using nlohmann::json;

std::vector<GroupElement> product_set(const Group& g, const std::vector<GroupElement>& a,
                                      const std::vector<GroupElement>& b) {
    ElemSet seen;
    std::vector<GroupElement> out;
    for (const auto& x : a)
        for (const auto& y : b) {
            GroupElement p = g.mul(x, y);
            if (seen.insert(p).second) out.push_back(std::move(p));
        }
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

std::vector<GroupElement> inverse_set(const Group& g, const std::vector<GroupElement>& a) {
    std::vector<GroupElement> out;
    out.reserve(a.size());
    for (const auto& x : a) out.push_back(g.inv(x));
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

bool FolnerSet::contains(const GroupElement& e) const { return lookup_.count(e) > 0; }

FolnerSet make_folner_set(const Group& g, int n, std::vector<GroupElement> elements) {
    if (n < 1) throw ConfigError("Folner label n must be >= 1");
    FolnerSet f;
    f.group = &g;
    f.n = n;
    ElemSet seen;
    for (auto& e : elements) {
        g.validate(e);
        if (seen.insert(e).second) f.elements.push_back(std::move(e));
    }
    std::sort(f.elements.begin(), f.elements.end(), lex_less);
    if (seen.count(g.identity()) == 0)
        throw ConfigError("a Folner set must contain the identity");
    f.lookup_ = std::move(seen);
    return f;
}

namespace {

std::vector<GroupElement> box_elements(const Group& g, int n) {
    switch (g.kind()) {
    case GroupKind::Lattice: {
        const auto& lat = static_cast<const LatticeGroup&>(g);
        std::vector<GroupElement> out;
        std::vector<std::int64_t> c(lat.rank(), 0);
        while (true) {
            out.push_back(GroupElement{&g, c});
            std::size_t i = lat.rank();
            bool done = true;
            while (i > 0) {
                --i;
                if (++c[i] < n) {
                    done = false;
                    break;
                }
                c[i] = 0;
            }
            if (done) return out;
        }
    }
    case GroupKind::Heisenberg: {
        std::vector<GroupElement> out;
        const std::int64_t cmax = checked_mul(n, n);
        for (std::int64_t a = 0; a < n; ++a)
            for (std::int64_t b = 0; b < n; ++b)
                for (std::int64_t c = 0; c < cmax; ++c) out.push_back(GroupElement{&g, {a, b, c}});
        return out;
    }
    case GroupKind::FiniteCyclic:
        return g.enumerate();
    case GroupKind::DirectProduct: {
        const auto& dp = static_cast<const DirectProductGroup&>(g);
        std::vector<GroupElement> f1 = box_elements(dp.first(), n);
        std::vector<GroupElement> f2 = box_elements(dp.second(), n);
        std::vector<GroupElement> out;
        out.reserve(f1.size() * f2.size());
        for (const auto& x : f1)
            for (const auto& y : f2) {
                std::vector<std::int64_t> c = x.coords;
                c.insert(c.end(), y.coords.begin(), y.coords.end());
                out.push_back(GroupElement{&g, std::move(c)});
            }
        return out;
    }
    }
    throw ConfigError("unsupported group kind in folner_box");
}

} // namespace

FolnerSet folner_box(const Group& g, int n) {
    if (n < 1) throw ConfigError("Folner box parameter n must be >= 1");
    return make_folner_set(g, n, box_elements(g, n));
}

Rational boundary_ratio(const FolnerSet& f, const GroupElement& s) {
    const Group& g = *f.group;
    g.validate(s);
    std::size_t common = 0;
    for (const auto& x : f.elements)
        if (f.contains(g.mul(x, s))) ++common;
    // |F delta Fs| = |F| + |Fs| - 2|F ^ Fs| with |Fs| = |F|.
    const std::int64_t sym = 2 * (static_cast<std::int64_t>(f.size()) - static_cast<std::int64_t>(common));
    return linalg::make_ratio(sym, static_cast<std::int64_t>(f.size()));
}

SubgroupFamily SubgroupFamily::standard(const Group& g) {
    switch (g.kind()) {
    case GroupKind::Lattice: {
        const std::size_t rank = g.coord_count();
        return SubgroupFamily("uniform-moduli", [&g, rank](std::size_t k) -> std::optional<FiniteIndexSubgroup> {
            const std::int64_t n = static_cast<std::int64_t>(k) + 2; // N = 2, 3, ...
            return FiniteIndexSubgroup(g, FiniteIndexSubgroup::LatticeModuli{
                                              std::vector<std::int64_t>(rank, n)});
        });
    }
    case GroupKind::Heisenberg:
        return SubgroupFamily("congruence-level", [&g](std::size_t k) -> std::optional<FiniteIndexSubgroup> {
            return FiniteIndexSubgroup(g, FiniteIndexSubgroup::HeisenbergLevel{static_cast<std::int64_t>(k) + 2});
        });
    case GroupKind::FiniteCyclic:
        return SubgroupFamily("trivial-subgroup", [&g](std::size_t k) -> std::optional<FiniteIndexSubgroup> {
            if (k > 0) return std::nullopt;
            return FiniteIndexSubgroup(g, FiniteIndexSubgroup::ExplicitFinite{{g.identity()}});
        });
    case GroupKind::DirectProduct: {
        const auto& dp = static_cast<const DirectProductGroup&>(g);
        return SubgroupFamily("factor-pair", [&g, &dp](std::size_t k) -> std::optional<FiniteIndexSubgroup> {
            auto m1 = SubgroupFamily::standard(dp.first()).member(k);
            auto m2 = SubgroupFamily::standard(dp.second()).member(k);
            // A finite factor's family bottoms out at {e}; keep its last member.
            if (!m1) m1 = SubgroupFamily::standard(dp.first()).member(0);
            if (!m2) m2 = SubgroupFamily::standard(dp.second()).member(0);
            if (!m1 || !m2) return std::nullopt;
            if (dp.first().is_finite() && dp.second().is_finite() && k > 0) return std::nullopt;
            return FiniteIndexSubgroup(
                g, FiniteIndexSubgroup::ProductPair{std::make_shared<FiniteIndexSubgroup>(std::move(*m1)),
                                                    std::make_shared<FiniteIndexSubgroup>(std::move(*m2))});
        });
    }
    }
    throw ConfigError("unsupported group kind in SubgroupFamily::standard");
}

FiniteIndexSubgroup separating_subgroup(const FolnerSet& f, const SubgroupFamily& family,
                                        std::uint64_t index_cap) {
    const Group& g = *f.group;
    const std::vector<GroupElement> diffs = product_set(g, inverse_set(g, f.elements), f.elements);
    const GroupElement e = g.identity();
    for (std::size_t k = 0;; ++k) {
        std::optional<FiniteIndexSubgroup> l = family.member(k);
        if (!l) break;
        if (l->index() > index_cap) break;
        bool separating = true;
        for (const auto& d : diffs) {
            if (d == e) continue;
            if (l->contains(d)) {
                separating = false;
                break;
            }
        }
        if (separating) return std::move(*l);
    }
    throw CertificationError("subgroup family '" + family.label() +
                             "' exhausted below the index cap without separating F^{-1}F");
}

namespace {

TilingCertificate certify(const Group& g, const std::vector<GroupElement>& tile,
                          const FiniteIndexSubgroup& l, const FolnerSet* f) {
    TilingCertificate cert;
    if (f) {
        cert.contains_folner = true;
        ElemSet in_tile(tile.begin(), tile.end());
        for (const auto& x : f->elements)
            if (in_tile.count(x) == 0) {
                cert.contains_folner = false;
                break;
            }
    }
    // K^{-1}K intersect L = {e}, by exhaustive pair enumeration.
    cert.transversal = true;
    const GroupElement e = g.identity();
    for (const auto& a : tile) {
        const GroupElement ai = g.inv(a);
        for (const auto& b : tile) {
            if (a == b) continue;
            if (l.contains(g.mul(ai, b))) {
                cert.transversal = false;
                break;
            }
        }
        if (!cert.transversal) break;
    }
    cert.full_index = (static_cast<std::uint64_t>(tile.size()) == l.index());
    return cert;
}

} // namespace

Tiling complete_tile(const FolnerSet& f, FiniteIndexSubgroup l, int radius_cap,
                     std::uint64_t index_cap) {
    const Group& g = *f.group;
    if (&l.group() != &g) throw GroupMismatchError("subgroup belongs to a different group");
    auto q = std::make_shared<QuotientMap>(g, std::move(l), index_cap);

    const std::uint64_t index = q->index();
    std::vector<char> covered(index, 0);
    std::vector<GroupElement> tile;
    tile.reserve(index);
    std::uint64_t remaining = index;
    for (const auto& x : f.elements) {
        const std::int64_t c = q->coset_of(x);
        if (covered[c])
            throw CertificationError(
                "two Folner-set elements share a coset: the subgroup does not separate F^{-1}F");
        covered[c] = 1;
        --remaining;
        tile.push_back(x);
    }

    // Greedy fill over BFS layers: first hit per coset is the minimal-word
    // representative; within a layer the lexicographic scan breaks ties.
    {
        std::vector<GroupElement> gens = g.generators();
        const std::size_t ng = gens.size();
        for (std::size_t i = 0; i < ng; ++i) {
            GroupElement gi = g.inv(gens[i]);
            if (std::find(gens.begin(), gens.end(), gi) == gens.end()) gens.push_back(std::move(gi));
        }
        ElemSet visited;
        std::vector<GroupElement> layer{g.identity()};
        visited.insert(g.identity());
        for (int r = 0; r <= radius_cap && remaining > 0 && !layer.empty(); ++r) {
            for (const auto& x : layer) {
                if (remaining == 0) break;
                const std::int64_t c = q->coset_of(x);
                if (!covered[c]) {
                    covered[c] = 1;
                    --remaining;
                    tile.push_back(x);
                }
            }
            if (remaining == 0) break;
            std::vector<GroupElement> next;
            for (const auto& x : layer)
                for (const auto& s : gens) {
                    GroupElement p = g.mul(x, s);
                    if (visited.insert(p).second) next.push_back(std::move(p));
                }
            std::sort(next.begin(), next.end(), lex_less);
            layer = std::move(next);
        }
    }
    if (remaining > 0)
        throw CertificationError("tile completion exhausted the word-ball radius cap with " +
                                 std::to_string(remaining) + " cosets uncovered");

    std::sort(tile.begin(), tile.end(), lex_less);
    Tiling t;
    t.group = &g;
    t.tile = std::move(tile);
    t.quotient = std::move(q);
    t.certificate = certify(g, t.tile, t.quotient->subgroup(), &f);
    if (!t.certificate.transversal || !t.certificate.full_index)
        throw CertificationError("completed tile failed its transversal certificate");
    return t;
}

Tiling certify_tiling(const Group& g, std::vector<GroupElement> tile, FiniteIndexSubgroup l,
                      std::uint64_t index_cap) {
    for (const auto& e : tile) g.validate(e);
    std::sort(tile.begin(), tile.end(), lex_less);
    tile.erase(std::unique(tile.begin(), tile.end()), tile.end());
    Tiling t;
    t.group = &g;
    t.tile = std::move(tile);
    t.quotient = std::make_shared<QuotientMap>(g, std::move(l), index_cap);
    t.certificate = certify(g, t.tile, t.quotient->subgroup(), nullptr);
    if (!t.certificate.transversal)
        throw CertificationError("tile is not a transversal: K^{-1}K meets L beyond {e}");
    if (!t.certificate.full_index)
        throw CertificationError("tile size " + std::to_string(t.tile.size()) +
                                 " does not equal the subgroup index " + std::to_string(t.index()));
    return t;
}

std::vector<Factorization> verify_tiling(const Tiling& t, const std::vector<GroupElement>& window) {
    const Group& g = *t.group;
    const FiniteIndexSubgroup& l = t.subgroup();
    std::vector<Factorization> out;
    out.reserve(window.size());
    for (const auto& w : window) {
        g.validate(w);
        std::optional<Factorization> found;
        for (const auto& k : t.tile) {
            GroupElement cand = g.mul(g.inv(k), w);
            if (l.contains(cand)) {
                if (found)
                    throw CertificationError("duplicate factorization w = k*l inside the window");
                found = Factorization{w, k, std::move(cand)};
            }
        }
        if (!found) throw CertificationError("window element admits no factorization w = k*l");
        out.push_back(std::move(*found));
    }
    return out;
}

json tiling_to_json(const Tiling& t) {
    json j;
    j["group"] = t.group->descriptor_json();
    j["subgroup"] = t.subgroup().params_json();
    json tile = json::array();
    for (const auto& e : t.tile) tile.push_back(e.coords);
    j["tile"] = tile;
    j["certificate"] = {{"contains_folner", t.certificate.contains_folner},
                        {"transversal", t.certificate.transversal},
                        {"full_index", t.certificate.full_index},
                        {"window_checked", t.certificate.window_checked}};
    return j;
}

Tiling tiling_from_json(const Group& g, const json& j) {
    if (g.descriptor_json() != j.at("group"))
        throw ConfigError("tiling document was produced for a different group");
    FiniteIndexSubgroup l = FiniteIndexSubgroup::from_json(g, j.at("subgroup"));
    std::vector<GroupElement> tile;
    for (const auto& row : j.at("tile"))
        tile.push_back(GroupElement{&g, row.get<std::vector<std::int64_t>>()});
    Tiling t = certify_tiling(g, std::move(tile), std::move(l));
    t.certificate.contains_folner = j.at("certificate").at("contains_folner").get<bool>();
    t.certificate.window_checked = j.at("certificate").at("window_checked").get<std::uint64_t>();
    return t;
}

} // namespace qdtile::tiling
