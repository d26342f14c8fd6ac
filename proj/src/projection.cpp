#include "qdtile/projection.hpp"

#include <algorithm>
#include <cmath>

namespace qdtile::qd {

using groups::lex_less;

Window::Window(const groups::Group& g, std::vector<GroupElement> elements) : group_(&g) {
    for (auto& e : elements) {
        g.validate(e);
        if (pos_.emplace(e, static_cast<std::int32_t>(elements_.size())).second)
            elements_.push_back(std::move(e));
    }
}

std::int32_t Window::find(const GroupElement& e) const {
    auto it = pos_.find(e);
    return it == pos_.end() ? -1 : it->second;
}

void Window::extend_by_translates(const std::vector<GroupElement>& translations) {
    const groups::Group& g = *group_;
    std::vector<GroupElement> fresh;
    groups::ElemSet fresh_seen;
    const std::size_t base = elements_.size();
    for (const auto& s : translations) {
        for (const GroupElement& t : {s, g.inv(s)}) {
            for (std::size_t i = 0; i < base; ++i) {
                GroupElement p = g.mul(t, elements_[i]);
                if (pos_.find(p) == pos_.end() && fresh_seen.insert(p).second)
                    fresh.push_back(std::move(p));
            }
        }
    }
    std::sort(fresh.begin(), fresh.end(), lex_less);
    for (auto& e : fresh) {
        pos_.emplace(e, static_cast<std::int32_t>(elements_.size()));
        elements_.push_back(std::move(e));
    }
}

ProjectionFamily::ProjectionFamily(PhiTable phi)
    : phi_(std::move(phi)), window_(*phi_.tiling().group, phi_.support()) {
    vectors_.reserve(phi_.tiling().tile.size());
    for (std::size_t pos = 0; pos < phi_.tiling().tile.size(); ++pos) {
        CosetVector v;
        v.tile_pos = static_cast<std::int32_t>(pos);
        for (std::int32_t i : phi_.coset_cell(v.tile_pos)) {
            const double amp = std::sqrt(linalg::to_double(phi_.phi_squared(phi_.support()[i])));
            // support indices coincide with window indices: the window is the
            // lexicographically sorted support itself
            v.amplitudes.entries.emplace_back(i, Complex(amp, 0.0));
        }
        v.amplitudes.sort_entries();
        vectors_.push_back(std::move(v));
    }
}

ProjectionFamily build_projection(PhiTable phi) { return ProjectionFamily(std::move(phi)); }

LowRankOperator ProjectionFamily::as_lowrank() const {
    LowRankOperator op;
    op.dim = window_.size();
    for (const auto& v : vectors_) {
        op.left.push_back(v.amplitudes);
        op.right.push_back(v.amplitudes);
    }
    return op;
}

Matrix ProjectionFamily::materialize() const { return as_lowrank().materialize(); }

double ProjectionFamily::defect(const GroupElement& x) const {
    const PhiTable& phi = phi_;
    const groups::Group& g = *phi.tiling().group;
    g.validate(x);
    const linalg::Rational p2 = phi.phi_squared(x);
    const double closed = std::sqrt(std::max(0.0, 1.0 - linalg::to_double(p2)));

    // P delta_x = phi(x) * xi_{coset(x)}; compute || phi(x) xi - delta_x ||
    // directly from the stored amplitudes.
    const double ax = std::sqrt(linalg::to_double(p2));
    const std::int32_t xi = window_.find(x);
    const CosetVector& v = vectors_[phi.tile_pos_of(x)];
    double sum = 0.0, c = 0.0;
    bool hit = false;
    for (const auto& [i, z] : v.amplitudes.entries) {
        double term;
        if (i == xi) {
            term = (ax * z.real() - 1.0) * (ax * z.real() - 1.0);
            hit = true;
        } else {
            term = (ax * z.real()) * (ax * z.real());
        }
        const double t = sum + (term - c);
        c = (t - sum) - (term - c);
        sum = t;
    }
    if (!hit) sum += 1.0; // x outside the support: P delta_x = 0
    const double computed = std::sqrt(sum);
    if (std::abs(computed - closed) > 1e-12)
        throw CertificationError("projection defect disagrees with closed form sqrt(1 - phi^2)");
    return computed;
}

ProjectionLaws projection_laws(const ProjectionFamily& proj, const NormOptions& opts) {
    ProjectionLaws laws;
    std::vector<SparseVec> fam;
    fam.reserve(proj.rank());
    for (const auto& v : proj.vectors()) fam.push_back(v.amplitudes);

    laws.idempotency = linalg::projection_idempotency_residual(fam);

    double trace = 0.0, c = 0.0;
    for (const auto& v : fam) {
        const double term = v.norm2();
        laws.gram_diag_dev = std::max(laws.gram_diag_dev, std::abs(term - 1.0));
        const double t = trace + (term - c);
        c = (t - trace) - (term - c);
        trace = t;
    }
    laws.trace_dev = std::abs(trace - static_cast<double>(proj.rank()));

    // Disjoint supports: exact, so off-diagonal Gram entries are exact zeros.
    std::vector<char> seen(proj.window().size(), 0);
    for (const auto& v : fam)
        for (const auto& [i, z] : v.entries) {
            (void)z;
            if (seen[i]) laws.supports_disjoint = false;
            seen[i] = 1;
        }
    for (std::size_t a = 0; a < fam.size(); ++a)
        for (std::size_t b = a + 1; b < fam.size(); ++b)
            laws.gram_offdiag = std::max(laws.gram_offdiag, std::abs(fam[a].dot(fam[b])));

    if (proj.window().size() <= opts.dense_threshold) {
        const Matrix p = proj.materialize();
        laws.hermiticity = (p - p.adjoint()).cwiseAbs().maxCoeff();
    }
    return laws;
}

namespace {

// Remap a coset vector through left translation by t: entry at x moves to
// index_of(t*x) in the given window. Missing targets are counted (strict
// callers treat any miss as a window assembly failure).
SparseVec translate_into(const groups::Group& g, const Window& w, const GroupElement& t,
                         const SparseVec& v, const std::vector<GroupElement>& support,
                         std::size_t& misses) {
    SparseVec out;
    out.entries.reserve(v.entries.size());
    for (const auto& [i, z] : v.entries) {
        const std::int32_t j = w.find(g.mul(t, support[i]));
        if (j < 0) {
            ++misses;
            continue;
        }
        out.entries.emplace_back(j, z);
    }
    out.sort_entries();
    return out;
}

LowRankOperator commutator_lowrank(const groups::Group& g, const Window& w, const GroupElement& s,
                                   const ProjectionFamily& proj, std::size_t& misses) {
    const auto& support = proj.phi().support();
    const GroupElement si = g.inv(s);
    LowRankOperator op;
    op.dim = w.size();
    for (const auto& v : proj.vectors()) {
        // [lambda(s), P] = sum_y (s xi_y) xi_y^* - xi_y (s^{-1} xi_y)^*
        op.left.push_back(translate_into(g, w, s, v.amplitudes, support, misses));
        op.right.push_back(v.amplitudes);
        SparseVec minus_xi = v.amplitudes;
        for (auto& [i, z] : minus_xi.entries) {
            (void)i;
            z = -z;
        }
        op.left.push_back(std::move(minus_xi));
        op.right.push_back(translate_into(g, w, si, v.amplitudes, support, misses));
    }
    return op;
}

Window commutator_window(const groups::Group& g, const ProjectionFamily& proj,
                         const GroupElement& s) {
    Window w(g, proj.phi().support());
    w.extend_by_translates({s});
    return w;
}

} // namespace

std::pair<Window, LowRankOperator> commutator_factorization(const GroupElement& s,
                                                            const ProjectionFamily& proj) {
    const groups::Group& g = *proj.phi().tiling().group;
    g.validate(s);
    Window w = commutator_window(g, proj, s);
    std::size_t misses = 0;
    LowRankOperator op = commutator_lowrank(g, w, s, proj, misses);
    if (misses != 0)
        throw CertificationError("window assembly failure: a translated coset vector left V");
    return {std::move(w), std::move(op)};
}

CommutatorResult lambda_commutator_norm(const GroupElement& s, const ProjectionFamily& proj,
                                        const NormOptions& opts, double slack) {
    auto [w, op] = commutator_factorization(s, proj);

    CommutatorResult r;
    r.window_size = w.size();
    r.dense_path = w.size() <= opts.dense_threshold;
    r.norm = linalg::lowrank_operator_norm(op, opts);
    r.ratio = tiling::boundary_ratio(proj.phi().folner(), s);
    r.envelope = 2.0 * std::sqrt(linalg::to_double(r.ratio));
    if (r.norm > r.envelope + slack)
        throw CertificationError("commutator norm exceeds the 2*sqrt(boundary ratio) envelope");
    return r;
}

WindowExactness window_exactness(const GroupElement& s, const ProjectionFamily& proj,
                                 const NormOptions& opts) {
    const groups::Group& g = *proj.phi().tiling().group;
    g.validate(s);

    Window base = commutator_window(g, proj, s);
    Window enlarged = commutator_window(g, proj, s);
    enlarged.extend_by_translates({s}); // one extra generator-translate

    NormOptions tight = opts;
    tight.tol = std::min(opts.tol, 1e-13);
    // The power route is used on both windows: the smaller window's start
    // vector is a prefix of the larger's, so a leak-free commutator yields
    // bit-identical iterates.
    WindowExactness we;
    {
        LowRankOperator op = commutator_lowrank(g, base, s, proj, we.leaked_base);
        we.norm_base = linalg::lowrank_power_norm(op, tight);
    }
    {
        LowRankOperator op = commutator_lowrank(g, enlarged, s, proj, we.leaked_enlarged);
        we.norm_enlarged = linalg::lowrank_power_norm(op, tight);
    }
    we.residual = std::abs(we.norm_base - we.norm_enlarged);
    return we;
}

} // namespace qdtile::qd
