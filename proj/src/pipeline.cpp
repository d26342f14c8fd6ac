#include "qdtile/pipeline.hpp"

#include <cmath>
#include <future>

#include "qdtile/phi.hpp"

namespace qdtile::cli {

using groups::GroupElement;
using report::format_double;
using report::format_ratio;

LambdaLevel build_level(const groups::Group& g, const LevelSpec& spec, const Tolerances& tol) {
    tiling::FolnerSet f = tiling::folner_box(g, spec.box_param());
    groups::FiniteIndexSubgroup l =
        spec.subgroup ? groups::FiniteIndexSubgroup::from_json(g, *spec.subgroup)
                      : tiling::separating_subgroup(f, tiling::SubgroupFamily::standard(g),
                                                    tol.index_cap);
    tiling::Tiling t = tiling::complete_tile(f, std::move(l), 64, tol.index_cap);
    qd::PhiTable phi = qd::build_phi(f, t);
    return LambdaLevel{spec.n, spec.box_param(), qd::build_projection(std::move(phi))};
}

std::vector<GroupElement> test_translations(const groups::Group& g, const RunConfig& c) {
    std::vector<GroupElement> out;
    if (!c.generators.empty()) {
        for (const auto& coords : c.generators) out.push_back(g.element(coords));
        return out;
    }
    groups::ElemSet seen;
    for (const auto& s : g.generators()) {
        if (seen.insert(s).second) out.push_back(s);
        GroupElement si = g.inv(s);
        if (seen.insert(si).second) out.push_back(std::move(si));
    }
    return out;
}

namespace {

std::string coords_string(const GroupElement& e) {
    std::string s = "(";
    for (std::size_t i = 0; i < e.coords.size(); ++i) {
        if (i) s += " ";
        s += std::to_string(e.coords[i]);
    }
    return s + ")";
}

template <typename Fn>
auto map_levels(const RunConfig& c, Fn&& per_level)
    -> std::vector<decltype(per_level(c.levels.front()))> {
    using R = decltype(per_level(c.levels.front()));
    std::vector<R> out;
    if (c.threads <= 1) {
        for (const auto& spec : c.levels) out.push_back(per_level(spec));
        return out;
    }
    std::vector<std::future<R>> futs;
    for (const auto& spec : c.levels)
        futs.push_back(std::async(std::launch::async, [&per_level, &spec] { return per_level(spec); }));
    for (auto& f : futs) out.push_back(f.get());
    return out;
}

ordered_json certificate_json(const tiling::TilingCertificate& cert) {
    ordered_json j;
    j["contains_folner"] = cert.contains_folner;
    j["transversal"] = cert.transversal;
    j["full_index"] = cert.full_index;
    j["window_checked"] = cert.window_checked;
    return j;
}

} // namespace

RunResult run_tile(const RunConfig& c) {
    auto g = groups::make_group(c.group_descriptor);

    struct LevelOut {
        ordered_json row;
        nlohmann::json doc;
    };
    auto outs = map_levels(c, [&](const LevelSpec& spec) -> LevelOut {
        tiling::FolnerSet f = tiling::folner_box(*g, spec.box_param());
        groups::FiniteIndexSubgroup l =
            spec.subgroup ? groups::FiniteIndexSubgroup::from_json(*g, *spec.subgroup)
                          : tiling::separating_subgroup(f, tiling::SubgroupFamily::standard(*g),
                                                        c.tol.index_cap);
        tiling::Tiling t = tiling::complete_tile(f, std::move(l), 64, c.tol.index_cap);

        // defense-in-depth window check: unique factorization over F^{-1}K
        // plus a small word ball
        groups::ElemSet wset;
        std::vector<GroupElement> window;
        const GroupElement e = g->identity();
        for (const auto& x : f.elements) {
            const GroupElement xi = g->inv(x);
            for (const auto& k : t.tile)
                if (wset.insert(g->mul(xi, k)).second) window.push_back(g->mul(xi, k));
        }
        for (const auto& w : groups::word_ball(*g, 2))
            if (wset.insert(w).second) window.push_back(w);
        (void)e;
        tiling::verify_tiling(t, window);
        t.certificate.window_checked = window.size();

        LevelOut out;
        out.row["n"] = spec.n;
        out.row["folner_n"] = spec.box_param();
        out.row["folner_size"] = f.size();
        out.row["tile_size"] = t.tile.size();
        out.row["index"] = t.index();
        out.row["subgroup"] = t.subgroup().params_json();
        out.row["certificate"] = certificate_json(t.certificate);
        out.doc = tiling::tiling_to_json(t);
        return out;
    });

    RunResult r;
    r.report["command"] = "tile";
    r.report["group"] = c.group_descriptor;
    r.report["levels"] = ordered_json::array();
    for (auto& o : outs) {
        r.report["levels"].push_back(std::move(o.row));
        r.tiling_documents.push_back(std::move(o.doc));
    }
    r.report["verdict"] = "pass";
    return r;
}

RunResult run_qd_lambda(const RunConfig& c) {
    auto g = groups::make_group(c.group_descriptor);
    const auto translations = test_translations(*g, c);

    struct LevelOut {
        ordered_json row;
        std::vector<report::DecayRow> decay;
        std::vector<std::pair<std::string, double>> norms; // per generator
    };
    auto outs = map_levels(c, [&](const LevelSpec& spec) -> LevelOut {
        LambdaLevel level = build_level(*g, spec, c.tol);
        const auto& phi = level.proj.phi();

        // exact identities, zero tolerance
        qd::verify_phi_identities(phi, translations);

        qd::ProjectionLaws laws = qd::projection_laws(level.proj, c.tol.norms);
        if (laws.idempotency > c.tol.projection_tol)
            throw CertificationError("||P^2 - P|| exceeds tolerance");
        if (laws.gram_diag_dev > c.tol.identity_tol || laws.gram_offdiag > c.tol.identity_tol)
            throw CertificationError("Gram matrix of the coset vectors is not the identity");
        if (!laws.supports_disjoint)
            throw CertificationError("coset vector supports overlap");
        if (laws.trace_dev > c.tol.norm_slack) throw CertificationError("trace(P) differs from |K|");
        if (laws.hermiticity != 0.0) throw CertificationError("P is not exactly self-adjoint");

        LevelOut out;
        out.row["n"] = spec.n;
        out.row["folner_n"] = level.box;
        out.row["folner_size"] = phi.folner().size();
        out.row["tile_size"] = phi.tiling().tile.size();
        out.row["index"] = phi.tiling().index();
        out.row["subgroup"] = phi.tiling().subgroup().params_json();
        out.row["phi_identities_exact"] = true;
        ordered_json lawsj;
        lawsj["idempotency"] = format_double(laws.idempotency);
        lawsj["gram_diag_dev"] = format_double(laws.gram_diag_dev);
        lawsj["gram_offdiag"] = format_double(laws.gram_offdiag);
        lawsj["trace_dev"] = format_double(laws.trace_dev);
        lawsj["hermiticity"] = format_double(laws.hermiticity);
        out.row["projection_laws"] = lawsj;

        ordered_json gens = ordered_json::array();
        for (const auto& s : translations) {
            qd::CommutatorResult cr = qd::lambda_commutator_norm(s, level.proj, c.tol.norms,
                                                                 c.tol.norm_slack);
            qd::WindowExactness we = qd::window_exactness(s, level.proj, c.tol.norms);
            if (we.leaked_base != 0 || we.leaked_enlarged != 0)
                throw CertificationError("commutator support leaked outside the exact window");
            if (we.residual >= c.tol.window_tol)
                throw CertificationError("window enlargement moved the commutator norm");

            ordered_json gj;
            gj["generator"] = coords_string(s);
            gj["boundary_ratio"] = format_ratio(cr.ratio);
            gj["norm"] = format_double(cr.norm);
            gj["envelope"] = format_double(cr.envelope);
            gj["window_size"] = cr.window_size;
            gj["dense_path"] = cr.dense_path;
            gj["window_residual"] = format_double(we.residual);
            gj["defect_at_generator"] = format_double(level.proj.defect(s));
            gens.push_back(std::move(gj));

            out.decay.push_back(report::DecayRow{spec.n, phi.folner().size(),
                                                 phi.tiling().tile.size(), phi.tiling().index(),
                                                 coords_string(s), cr.ratio, cr.norm, cr.envelope});
            out.norms.emplace_back(coords_string(s), cr.norm);
        }
        out.row["generators"] = std::move(gens);
        return out;
    });

    RunResult r;
    r.report["command"] = "qd-lambda";
    r.report["group"] = c.group_descriptor;
    r.report["levels"] = ordered_json::array();
    std::vector<report::DecayRow> rows;
    for (auto& o : outs) {
        r.report["levels"].push_back(std::move(o.row));
        for (auto& d : o.decay) rows.push_back(std::move(d));
    }

    // envelope halving across the configured range, per generator
    ordered_json decay_flags = ordered_json::array();
    bool halving_ok = true;
    if (outs.size() >= 2) {
        for (std::size_t gi = 0; gi < outs.front().norms.size(); ++gi) {
            const double first = outs.front().norms[gi].second;
            const double last = outs.back().norms[gi].second;
            const bool ok = last < 0.5 * first;
            halving_ok = halving_ok && ok;
            ordered_json f;
            f["generator"] = outs.front().norms[gi].first;
            f["first_norm"] = format_double(first);
            f["last_norm"] = format_double(last);
            f["halved"] = ok;
            decay_flags.push_back(std::move(f));
        }
    }
    r.report["decay"] = decay_flags;
    if (c.require_decay && !halving_ok)
        throw CertificationError("commutator norms failed to halve across the configured levels");

    r.report["verdict"] = "pass";
    r.decay_table = report::decay_csv(rows);
    return r;
}

crossed::ActionInstance build_action(const groups::Group& g, const RunConfig& c) {
    if (!c.action) throw ConfigError("this run needs an 'action' section");
    const ActionSpec& a = *c.action;

    auto apply_test_override = [&](crossed::ActionInstance inst) {
        if (a.test_elements.empty()) return inst;
        std::vector<crossed::AlgebraElement> tests;
        for (const auto& tj : a.test_elements) {
            std::vector<linalg::Matrix> blocks;
            for (const auto& bj : tj.at("blocks")) blocks.push_back(parse_matrix(bj));
            tests.push_back(crossed::AlgebraElement(inst.algebra(), std::move(blocks)));
        }
        return crossed::ActionInstance(inst.group(), inst.algebra(), inst.kind(), std::move(tests));
    };

    switch (a.kind) {
    case ActionSpec::Kind::BunceDeddens: {
        auto l_m = groups::FiniteIndexSubgroup::from_json(g, a.subgroup.value());
        return apply_test_override(
            crossed::bunce_deddens_instance(g, std::move(l_m), c.tol.index_cap));
    }
    case ActionSpec::Kind::Rotation:
        return apply_test_override(crossed::rotation_instance(g, a.theta));
    case ActionSpec::Kind::Inner: {
        if (a.unitaries.empty()) throw ConfigError("inner action needs unitaries");
        std::vector<linalg::Matrix> us;
        for (const auto& uj : a.unitaries) us.push_back(parse_matrix(uj));
        const Eigen::Index d = us.front().rows();
        crossed::FiniteDimAlgebra alg = crossed::FiniteDimAlgebra::full_matrix(d);
        std::vector<crossed::AlgebraElement> tests;
        tests.push_back(crossed::AlgebraElement::identity(alg));
        return apply_test_override(crossed::ActionInstance(
            g, std::move(alg), crossed::ActionInstance::Inner{std::move(us)}, std::move(tests)));
    }
    case ActionSpec::Kind::Trivial: {
        crossed::FiniteDimAlgebra alg = crossed::FiniteDimAlgebra::diagonal(1);
        std::vector<crossed::AlgebraElement> tests;
        tests.push_back(crossed::AlgebraElement::identity(alg));
        return apply_test_override(crossed::ActionInstance(
            g, std::move(alg), crossed::ActionInstance::Trivial{}, std::move(tests)));
    }
    }
    throw ConfigError("unreachable action kind");
}

linalg::Matrix build_q(const QSpec& q, Eigen::Index dim, int level_n) {
    switch (q.kind) {
    case QSpec::Kind::Identity:
        return linalg::Matrix::Identity(dim, dim);
    case QSpec::Kind::Explicit:
        return parse_matrix(q.matrix.value());
    case QSpec::Kind::Tilted: {
        if (dim < 2) throw ConfigError("tilted Q needs algebra dimension >= 2");
        // rank-one projection onto (cos t, sin t, 0, ...): its commutator
        // with a unit-gap diagonal has norm sin(2t)/2 = min(1, budget/n)
        const double target = std::min(1.0, q.tilted_budget / static_cast<double>(level_n));
        const double t = 0.5 * std::asin(std::min(1.0, 2.0 * target));
        linalg::Matrix m = linalg::Matrix::Zero(dim, dim);
        const double cs = std::cos(t), sn = std::sin(t);
        m(0, 0) = cs * cs;
        m(0, 1) = cs * sn;
        m(1, 0) = cs * sn;
        m(1, 1) = sn * sn;
        return m;
    }
    }
    throw ConfigError("unreachable Q kind");
}

RunResult run_qd_crossed(const RunConfig& c) {
    auto g = groups::make_group(c.group_descriptor);
    crossed::ActionInstance action = build_action(*g, c);
    const Eigen::Index d = action.algebra().dim();

    struct LevelOut {
        ordered_json row;
        std::vector<report::CrossedRow> rows;
        std::vector<double> defects; // per test element
        std::vector<double> norms;
    };
    auto outs = map_levels(c, [&](const LevelSpec& spec) -> LevelOut {
        LambdaLevel level = build_level(*g, spec, c.tol);
        const linalg::Matrix q = build_q(c.q, d, spec.n);

        // exact periodicity: the level subgroup sits inside the factoring L_m
        bool periodic = false;
        if (const auto* fq = action.factoring_quotient()) {
            periodic = true;
            for (const auto& gen : level.tiling().subgroup().generating_set())
                if (!fq->subgroup().contains(gen)) periodic = false;
        }
        const bool q_is_identity =
            (q - linalg::Matrix::Identity(d, d)).cwiseAbs().maxCoeff() == 0.0;

        LevelOut out;
        out.row["n"] = spec.n;
        out.row["folner_n"] = level.box;
        out.row["folner_size"] = level.folner().size();
        out.row["tile_size"] = level.tiling().tile.size();
        out.row["index"] = level.tiling().index();
        out.row["subgroup"] = level.tiling().subgroup().params_json();
        out.row["periodic_level"] = periodic;
        ordered_json elems = ordered_json::array();

        for (std::size_t i = 0; i < action.test_elements().size(); ++i) {
            const auto& a = action.test_elements()[i];
            crossed::CrossedCommutatorReport rep = crossed::crossed_commutator_report(
                a, action, q, level.proj, level.folner(), c.tol.norms);
            crossed::require_commutator_report_ok(rep, c.tol.projection_tol, c.tol.norm_slack);
            if (periodic && q_is_identity && rep.full_norm > c.tol.projection_tol)
                throw CertificationError(
                    "exact-quotient action with Q = I must have a null commutator");

            ordered_json ej;
            ej["element"] = "a" + std::to_string(i);
            ej["defect"] = format_double(rep.defect);
            ej["norm"] = format_double(rep.full_norm);
            ej["max_block_norm"] = format_double(rep.max_block_norm);
            ej["block_vs_full_dev"] = format_double(rep.block_vs_full_dev);
            ej["orthogonality_residual"] = format_double(rep.orthogonality_residual);
            ej["max_q_commutator"] = format_double(rep.max_q_commutator);
            ej["chain_excess"] = format_double(rep.per_coset_chain_excess);
            ej["proof_bound"] = format_double(rep.proof_bound);
            elems.push_back(std::move(ej));

            out.rows.push_back(report::CrossedRow{spec.n, level.tiling().index(),
                                                  "a" + std::to_string(i), rep.defect,
                                                  rep.full_norm, rep.proof_bound,
                                                  rep.orthogonality_residual,
                                                  rep.block_vs_full_dev});
            out.defects.push_back(rep.defect);
            out.norms.push_back(rep.full_norm);
        }
        out.row["elements"] = std::move(elems);
        return out;
    });

    RunResult r;
    r.report["command"] = "qd-crossed";
    r.report["group"] = c.group_descriptor;
    r.report["finite_test_family"] = true; // desk-scale quantification, made explicit
    r.report["algebra_blocks"] = action.algebra().block_sizes;
    r.report["levels"] = ordered_json::array();
    std::vector<report::CrossedRow> rows;
    for (auto& o : outs) {
        r.report["levels"].push_back(std::move(o.row));
        for (auto& row : o.rows) rows.push_back(std::move(row));
    }

    // decay indicators across levels (recorded; enforcement is per-config)
    if (outs.size() >= 2 && !outs.front().defects.empty()) {
        ordered_json dj;
        bool strict = true;
        for (std::size_t lv = 1; lv < outs.size(); ++lv)
            if (!(outs[lv].defects[0] < outs[lv - 1].defects[0])) strict = false;
        dj["defect_strictly_decreasing"] = strict;
        dj["first_norm"] = format_double(outs.front().norms[0]);
        dj["last_norm"] = format_double(outs.back().norms[0]);
        r.report["decay"] = dj;
    }

    r.report["verdict"] = "pass";
    r.crossed_table = report::crossed_csv(rows);
    return r;
}

} // namespace qdtile::cli
