#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdtile/linalg.hpp"
#include "qdtile/phi.hpp"

namespace qdtile::qd {

using linalg::Complex;
using linalg::LowRankOperator;
using linalg::Matrix;
using linalg::NormOptions;
using linalg::SparseVec;

// Ordered finite index set of group elements. Window operators are matrices
// over this index set. Enlargements append, so a smaller window's indices
// are a prefix of the enlarged window's.
class Window {
public:
    Window(const groups::Group& g, std::vector<GroupElement> elements);

    const groups::Group& group() const { return *group_; }
    std::int32_t size() const { return static_cast<std::int32_t>(elements_.size()); }
    const std::vector<GroupElement>& elements() const { return elements_; }
    std::int32_t find(const GroupElement& e) const; // -1 if absent

    // Append s*W and s^{-1}*W for each s (new elements only, sorted batch).
    void extend_by_translates(const std::vector<GroupElement>& translations);

private:
    const groups::Group* group_;
    std::vector<GroupElement> elements_;
    groups::ElemMap<std::int32_t> pos_;
};

// One unit vector per tile element: xi_y = sum_{x in yL} phi(x) delta_x.
// Real nonnegative amplitudes, supports pairwise disjoint by construction.
struct CosetVector {
    std::int32_t tile_pos = 0;
    SparseVec amplitudes; // indices into the family's window
};

// The finite-rank projection P = sum_y xi_y xi_y^* on the window F^{-1}K,
// kept in factored form. Owns its phi table (and through it the Folner set
// and tiling), so it can be moved and stored freely.
class ProjectionFamily {
public:
    explicit ProjectionFamily(PhiTable phi);

    const PhiTable& phi() const { return phi_; }
    const Window& window() const { return window_; }
    const std::vector<CosetVector>& vectors() const { return vectors_; }
    std::size_t rank() const { return vectors_.size(); }

    LowRankOperator as_lowrank() const;
    Matrix materialize() const;

    // || P delta_x - delta_x ||, via the vectors; certified against the
    // closed form sqrt(1 - phi^2(x)) to 1e-12.
    double defect(const GroupElement& x) const;

private:
    PhiTable phi_;
    Window window_;
    std::vector<CosetVector> vectors_;
};

ProjectionFamily build_projection(PhiTable phi);

struct ProjectionLaws {
    double idempotency = 0.0;      // ||P^2 - P||
    double gram_diag_dev = 0.0;    // max |<xi_y, xi_y> - 1|
    double gram_offdiag = 0.0;     // max |<xi_y, xi_z>|, y != z
    bool supports_disjoint = true; // exact set statement
    double hermiticity = 0.0;      // max entry of |P - P*| (dense windows)
    double trace_dev = 0.0;        // |trace P - |K||
};
ProjectionLaws projection_laws(const ProjectionFamily& proj, const NormOptions& opts = {});

struct CommutatorResult {
    double norm = 0.0;
    linalg::Rational ratio;  // |F delta Fs| / |F|
    double envelope = 0.0;   // 2 sqrt(ratio)
    std::int32_t window_size = 0;
    bool dense_path = false;
};

// Exact-window operator norm of [lambda(s), P] on l2(G): the commutator
// vanishes outside V x V for V = W u sW u s^{-1}W, so the finite computation
// has no truncation error. Asserts norm <= envelope + slack.
CommutatorResult lambda_commutator_norm(const GroupElement& s, const ProjectionFamily& proj,
                                        const NormOptions& opts = {}, double slack = 1e-9);

// The factored commutator itself, on its exact window V (first element).
// Exposed so callers can cross-check the dense, gram and power norm routes
// against one another.
std::pair<Window, LowRankOperator> commutator_factorization(const GroupElement& s,
                                                            const ProjectionFamily& proj);

struct WindowExactness {
    double norm_base = 0.0;    // on V
    double norm_enlarged = 0.0; // on V u sV u s^{-1}V
    double residual = 0.0;     // |difference|
    std::size_t leaked_base = 0;     // vector entries falling outside V
    std::size_t leaked_enlarged = 0; // and outside the enlarged window
};

// Recomputes the commutator norm on the once-more-enlarged window with the
// same deterministic start-vector prefix; any truncation leakage shows up
// both in the entry counts and in the norm difference.
WindowExactness window_exactness(const GroupElement& s, const ProjectionFamily& proj,
                                 const NormOptions& opts = {});

} // namespace qdtile::qd
