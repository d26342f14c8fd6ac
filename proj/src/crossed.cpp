#include "qdtile/crossed.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace qdtile::crossed {

using linalg::LowRankOperator;
using linalg::SparseVec;

CrossedElement::CrossedElement(const Group& g, FiniteDimAlgebra alg)
    : group_(&g), alg_(std::move(alg)) {}

void CrossedElement::set(const GroupElement& s, AlgebraElement a) {
    group_->validate(s);
    if (a.algebra().block_sizes != alg_.block_sizes)
        throw ConfigError("crossed-element coefficient lives in a different algebra");
    bool zero = true;
    for (const auto& b : a.blocks())
        if (b.cwiseAbs().maxCoeff() != 0.0) zero = false;
    if (zero)
        terms_.erase(s);
    else
        terms_.insert_or_assign(s, std::move(a));
}

const AlgebraElement* CrossedElement::at(const GroupElement& s) const {
    auto it = terms_.find(s);
    return it == terms_.end() ? nullptr : &it->second;
}

CrossedElement CrossedElement::operator+(const CrossedElement& o) const {
    CrossedElement out = *this;
    for (const auto& [s, a] : o.terms_) {
        if (const AlgebraElement* mine = out.at(s))
            out.set(s, *mine + a);
        else
            out.set(s, a);
    }
    return out;
}

CrossedElement CrossedElement::convolve(const CrossedElement& o, const ActionInstance& alpha) const {
    CrossedElement out(*group_, alg_);
    for (const auto& [s, fs] : terms_) {
        for (const auto& [r, gr] : o.terms_) {
            const GroupElement t = group_->mul(s, r); // s * (s^{-1} t) with r = s^{-1} t
            AlgebraElement term = fs * alpha.act(s, gr);
            if (const AlgebraElement* cur = out.at(t))
                out.set(t, *cur + term);
            else
                out.set(t, std::move(term));
        }
    }
    return out;
}

CrossedElement CrossedElement::star(const ActionInstance& alpha) const {
    CrossedElement out(*group_, alg_);
    for (const auto& [s, fs] : terms_) {
        const GroupElement si = group_->inv(s);
        out.set(si, alpha.act(si, fs.adjoint()));
    }
    return out;
}

Eigen::Block<Matrix> CompressionOperator::block(std::int32_t row_pos, std::int32_t col_pos) {
    return total.block(row_pos * algebra_dim, col_pos * algebra_dim, algebra_dim, algebra_dim);
}

Eigen::Block<const Matrix> CompressionOperator::block(std::int32_t row_pos,
                                                      std::int32_t col_pos) const {
    return total.block(row_pos * algebra_dim, col_pos * algebra_dim, algebra_dim, algebra_dim);
}

namespace {

// rho(alpha(x^{-1}) a) for every window element x.
std::vector<Matrix> sigma_blocks(const AlgebraElement& a, const ActionInstance& alpha,
                                 const Window& window) {
    const Group& g = alpha.group();
    std::vector<Matrix> blocks;
    blocks.reserve(window.elements().size());
    for (const auto& x : window.elements()) blocks.push_back(alpha.act(g.inv(x), a).rho());
    return blocks;
}

} // namespace

CompressionOperator sigma_compression(const AlgebraElement& a, const ActionInstance& alpha,
                                      const Window& window) {
    const Eigen::Index d = alpha.algebra().dim();
    CompressionOperator op{&window, d, Matrix::Zero(d * window.size(), d * window.size())};
    const auto blocks = sigma_blocks(a, alpha, window);
    for (std::int32_t x = 0; x < window.size(); ++x) op.block(x, x) = blocks[x];
    return op;
}

CompressionOperator lambda_tensor_compression(const GroupElement& s, const ActionInstance& alpha,
                                              const Window& window) {
    const Group& g = alpha.group();
    const Eigen::Index d = alpha.algebra().dim();
    CompressionOperator op{&window, d, Matrix::Zero(d * window.size(), d * window.size())};
    for (std::int32_t v = 0; v < window.size(); ++v) {
        const std::int32_t u = window.find(g.mul(s, window.elements()[v]));
        if (u >= 0) op.block(u, v) = Matrix::Identity(d, d);
    }
    return op;
}

CompressionOperator crossed_compression(const CrossedElement& f, const ActionInstance& alpha,
                                        const Window& window) {
    const Group& g = alpha.group();
    const Eigen::Index d = alpha.algebra().dim();
    CompressionOperator op{&window, d, Matrix::Zero(d * window.size(), d * window.size())};
    for (const auto& [s, fs] : f.terms()) {
        for (std::int32_t v = 0; v < window.size(); ++v) {
            const GroupElement target = g.mul(s, window.elements()[v]);
            const std::int32_t u = window.find(target);
            if (u < 0) continue;
            op.block(u, v) += alpha.act(g.inv(target), fs).rho();
        }
    }
    return op;
}

std::vector<std::int32_t> interior_columns(const CrossedElement& f, const Window& window) {
    const Group& g = f.group();
    std::vector<std::int32_t> cols;
    for (std::int32_t v = 0; v < window.size(); ++v) {
        bool interior = true;
        for (const auto& [s, fs] : f.terms()) {
            (void)fs;
            if (window.find(g.mul(s, window.elements()[v])) < 0) {
                interior = false;
                break;
            }
        }
        if (interior) cols.push_back(v);
    }
    return cols;
}

namespace {

// Rank factorization of a projection on C^D: columns with eigenvalue 1.
std::vector<Eigen::VectorXcd> projection_factors(const Matrix& q, double tol) {
    if (q.rows() != q.cols()) throw ConfigError("Q must be square");
    if ((q - q.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw ConfigError("Q must be self-adjoint");
    if ((q * q - q).cwiseAbs().maxCoeff() > 1e-8)
        throw ConfigError("Q must be idempotent");
    Eigen::SelfAdjointEigenSolver<Matrix> es(q);
    std::vector<Eigen::VectorXcd> cols;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()[i];
        if (lam > 0.5) cols.push_back(es.eigenvectors().col(i));
    }
    return cols;
}

SparseVec tensor_with_coset(const Eigen::VectorXcd& qcol, const SparseVec& xi, Eigen::Index d) {
    SparseVec out;
    out.entries.reserve(xi.entries.size() * d);
    for (const auto& [i, amp] : xi.entries)
        for (Eigen::Index h = 0; h < d; ++h)
            out.entries.emplace_back(i * static_cast<std::int32_t>(d) + static_cast<std::int32_t>(h),
                                     qcol[h] * amp);
    out.sort_entries();
    return out;
}

SparseVec apply_blocks(const std::vector<Matrix>& blocks, const SparseVec& xi,
                       const Eigen::VectorXcd& qcol, Eigen::Index d) {
    SparseVec out;
    out.entries.reserve(xi.entries.size() * d);
    for (const auto& [i, amp] : xi.entries) {
        const Eigen::VectorXcd img = blocks[i] * qcol;
        for (Eigen::Index h = 0; h < d; ++h)
            out.entries.emplace_back(i * static_cast<std::int32_t>(d) + static_cast<std::int32_t>(h),
                                     img[h] * amp);
    }
    out.sort_entries();
    return out;
}

SparseVec axpy(const SparseVec& x, linalg::Complex c, const SparseVec& y) {
    // x + c*y over sorted sparse entries
    SparseVec out;
    auto a = x.entries.begin();
    auto b = y.entries.begin();
    while (a != x.entries.end() || b != y.entries.end()) {
        if (b == y.entries.end() || (a != x.entries.end() && a->first < b->first)) {
            out.entries.push_back(*a++);
        } else if (a == x.entries.end() || b->first < a->first) {
            out.entries.emplace_back(b->first, c * b->second);
            ++b;
        } else {
            out.entries.emplace_back(a->first, a->second + c * b->second);
            ++a;
            ++b;
        }
    }
    return out;
}

// Local dense norm of sum_k l_k r_k^*: the terms live on a small shared
// support, so materializing there keeps exact cancellations exact.
double local_pair_norm(const std::vector<SparseVec>& lefts, const std::vector<SparseVec>& rights,
                       const linalg::NormOptions& opts) {
    std::vector<std::int32_t> idx;
    for (const auto& v : lefts)
        for (const auto& [i, z] : v.entries) {
            (void)z;
            idx.push_back(i);
        }
    for (const auto& v : rights)
        for (const auto& [i, z] : v.entries) {
            (void)z;
            idx.push_back(i);
        }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    std::unordered_map<std::int32_t, std::int32_t> to_local;
    for (std::size_t i = 0; i < idx.size(); ++i)
        to_local[idx[i]] = static_cast<std::int32_t>(i);

    LowRankOperator local;
    local.dim = static_cast<std::int32_t>(idx.size());
    for (std::size_t k = 0; k < lefts.size(); ++k) {
        SparseVec l = lefts[k], r = rights[k];
        for (auto& [i, z] : l.entries) {
            (void)z;
            i = to_local[i];
        }
        for (auto& [i, z] : r.entries) {
            (void)z;
            i = to_local[i];
        }
        local.left.push_back(std::move(l));
        local.right.push_back(std::move(r));
    }
    return linalg::lowrank_operator_norm(local, opts);
}

// ||A X B^*|| for factored families A, B and a small middle matrix X.
double triple_product_norm(const std::vector<SparseVec>& a, const Matrix& x,
                           const std::vector<SparseVec>& b) {
    auto gram_of = [](const std::vector<SparseVec>& f) {
        const Eigen::Index k = static_cast<Eigen::Index>(f.size());
        Matrix g(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = i; j < k; ++j) {
                const auto v = f[i].dot(f[j]);
                g(i, j) = v;
                g(j, i) = std::conj(v);
            }
        return g;
    };
    auto sqrt_psd = [](const Matrix& g) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(g);
        Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return Matrix(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint());
    };
    const Matrix sa = sqrt_psd(gram_of(a));
    const Matrix sb = sqrt_psd(gram_of(b));
    Eigen::JacobiSVD<Matrix> svd(sa * x * sb);
    return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()[0];
}

} // namespace

CrossedCommutatorReport crossed_commutator_report(const AlgebraElement& a,
                                                  const ActionInstance& alpha, const Matrix& q_proj,
                                                  const ProjectionFamily& proj,
                                                  const FolnerSet& folner,
                                                  const linalg::NormOptions& opts) {
    const Group& g = alpha.group();
    if (proj.phi().tiling().group != &g)
        throw GroupMismatchError("projection family and action live over different groups");
    if (!a.is_self_adjoint()) throw ConfigError("crossed commutator chain needs a self-adjoint a");
    const Eigen::Index d = alpha.algebra().dim();
    if (q_proj.rows() != d) throw ConfigError("Q has the wrong dimension for this algebra");

    const Window& w = proj.window();
    const auto qcols = projection_factors(q_proj, 1e-10);
    const auto blocks = sigma_blocks(a, alpha, w);
    const Tiling& t = proj.phi().tiling();

    CrossedCommutatorReport rep;
    rep.defect = almost_periodicity_defect(alpha, a, t, folner);

    // per-coset factored commutator blocks B_y = sum_j (w v^* - v w^*)
    std::vector<std::vector<SparseVec>> lefts(proj.rank()), rights(proj.rank());
    LowRankOperator full;
    full.dim = static_cast<std::int32_t>(d) * w.size();
    for (std::size_t y = 0; y < proj.rank(); ++y) {
        const SparseVec& xi = proj.vectors()[y].amplitudes;
        for (const auto& qc : qcols) {
            SparseVec v = tensor_with_coset(qc, xi, d);
            SparseVec wv = apply_blocks(blocks, xi, qc, d);
            SparseVec neg_v = v;
            for (auto& [i, z] : neg_v.entries) {
                (void)i;
                z = -z;
            }
            lefts[y].push_back(wv);
            rights[y].push_back(v);
            lefts[y].push_back(std::move(neg_v));
            rights[y].push_back(std::move(wv));
            full.left.push_back(lefts[y][lefts[y].size() - 2]);
            full.right.push_back(rights[y][rights[y].size() - 2]);
            full.left.push_back(lefts[y].back());
            full.right.push_back(rights[y].back());
        }
    }

    rep.block_norms.resize(proj.rank(), 0.0);
    for (std::size_t y = 0; y < proj.rank(); ++y) {
        rep.block_norms[y] = local_pair_norm(lefts[y], rights[y], opts);
        rep.max_block_norm = std::max(rep.max_block_norm, rep.block_norms[y]);
    }

    rep.full_norm = linalg::lowrank_operator_norm(full, opts);
    rep.block_vs_full_dev = std::abs(rep.full_norm - rep.max_block_norm);

    // orthogonality of distinct blocks: ||B_y^* B_z|| via the factored form
    for (std::size_t y = 0; y < proj.rank(); ++y) {
        for (std::size_t z = y + 1; z < proj.rank(); ++z) {
            for (int dir = 0; dir < 2; ++dir) {
                const auto& ly = dir == 0 ? lefts[y] : lefts[z];
                const auto& ry = dir == 0 ? rights[y] : rights[z];
                const auto& lz = dir == 0 ? lefts[z] : lefts[y];
                const auto& rz = dir == 0 ? rights[z] : rights[y];
                // B_y^* B_z = R_y (L_y^* L_z) R_z^*
                Matrix mid(ly.size(), lz.size());
                double maxabs = 0.0;
                for (std::size_t i = 0; i < ly.size(); ++i)
                    for (std::size_t j = 0; j < lz.size(); ++j) {
                        mid(i, j) = ly[i].dot(lz[j]);
                        maxabs = std::max(maxabs, std::abs(mid(i, j)));
                    }
                if (maxabs == 0.0) continue; // disjoint supports: exactly zero
                rep.orthogonality_residual =
                    std::max(rep.orthogonality_residual, triple_product_norm(ry, mid, rz));
            }
        }
    }

    // proof-chain per coset: c_y = ||[rho(alpha(y^{-1})a), Q]|| and
    // ||(1 - Q tensor P_y) sigma(a) (Q tensor P_y)|| <= c_y + defect
    for (std::size_t y = 0; y < proj.rank(); ++y) {
        const GroupElement& yel = t.tile[y];
        const Matrix ay = alpha.act(g.inv(yel), a).rho();
        const double cy = linalg::operator_norm(Matrix(ay * q_proj - q_proj * ay), opts);
        rep.max_q_commutator = std::max(rep.max_q_commutator, cy);

        // project the w vectors off the range of Q tensor P_y
        std::vector<SparseVec> clipped;
        const SparseVec& xi = proj.vectors()[y].amplitudes;
        std::vector<SparseVec> vs;
        std::vector<SparseVec> ws;
        for (const auto& qc : qcols) {
            vs.push_back(tensor_with_coset(qc, xi, d));
            ws.push_back(apply_blocks(blocks, xi, qc, d));
        }
        for (std::size_t j = 0; j < ws.size(); ++j) {
            SparseVec acc = ws[j];
            for (std::size_t k = 0; k < vs.size(); ++k) {
                const linalg::Complex overlap = vs[k].dot(ws[j]);
                acc = axpy(acc, -overlap, vs[k]);
            }
            clipped.push_back(std::move(acc));
        }
        const double half_norm = local_pair_norm(clipped, vs, opts);
        rep.per_coset_chain_excess =
            std::max(rep.per_coset_chain_excess, half_norm - (cy + rep.defect));
    }

    rep.proof_bound = 2.0 * (rep.max_q_commutator + rep.defect);
    return rep;
}

void require_commutator_report_ok(const CrossedCommutatorReport& r, double identity_tol,
                                  double norm_slack) {
    if (r.block_vs_full_dev > identity_tol)
        throw CertificationError("full commutator norm differs from the max block norm");
    if (r.orthogonality_residual > identity_tol)
        throw CertificationError("commutator blocks of distinct cosets are not orthogonal");
    if (r.per_coset_chain_excess > norm_slack)
        throw CertificationError("per-coset chain inequality violated");
    if (r.full_norm > r.proof_bound + norm_slack)
        throw CertificationError("commutator norm exceeds the proof bound");
}

} // namespace qdtile::crossed
