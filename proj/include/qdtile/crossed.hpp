#pragma once

#include <optional>

#include "qdtile/action.hpp"
#include "qdtile/projection.hpp"

namespace qdtile::crossed {

using qd::ProjectionFamily;
using qd::Window;

// Finitely supported function G -> A with the twisted-convolution product.
class CrossedElement {
public:
    CrossedElement(const Group& g, FiniteDimAlgebra alg);

    const Group& group() const { return *group_; }
    const FiniteDimAlgebra& algebra() const { return alg_; }
    const groups::ElemMap<AlgebraElement>& terms() const { return terms_; }

    void set(const GroupElement& s, AlgebraElement a); // drops exact zeros
    const AlgebraElement* at(const GroupElement& s) const;

    CrossedElement operator+(const CrossedElement& o) const;
    // alpha-twisted convolution: (f*g)(t) = sum_s f(s) alpha(s)(g(s^{-1}t)).
    CrossedElement convolve(const CrossedElement& o, const ActionInstance& alpha) const;
    // f^*(s) = alpha(s)(f(s^{-1})^*)
    CrossedElement star(const ActionInstance& alpha) const;

private:
    const Group* group_;
    FiniteDimAlgebra alg_;
    groups::ElemMap<AlgebraElement> terms_;
};

// Dense compression of an operator on H tensor l2(G) to a finite window:
// a (D*W) x (D*W) matrix, index x_pos * D + h-coordinate.
struct CompressionOperator {
    const Window* window = nullptr;
    Eigen::Index algebra_dim = 0;
    Matrix total;

    Eigen::Index dim() const { return algebra_dim * window->size(); }
    Eigen::Block<Matrix> block(std::int32_t row_pos, std::int32_t col_pos);
    Eigen::Block<const Matrix> block(std::int32_t row_pos, std::int32_t col_pos) const;
};

// sigma(a) restricted to the window: block-diagonal with x-block
// rho(alpha(x^{-1}) a).
CompressionOperator sigma_compression(const AlgebraElement& a, const ActionInstance& alpha,
                                      const Window& window);

// I tensor lambda(s) restricted to the window.
CompressionOperator lambda_tensor_compression(const GroupElement& s, const ActionInstance& alpha,
                                              const Window& window);

// sum_s sigma(f(s)) (I tensor lambda(s)) restricted to the window.
CompressionOperator crossed_compression(const CrossedElement& f, const ActionInstance& alpha,
                                        const Window& window);

// Window positions x such that s*x stays inside the window for every s in
// the support of f (the columns on which compressions compose exactly).
std::vector<std::int32_t> interior_columns(const CrossedElement& f, const Window& window);

// Everything the crossed-product commutator chain certifies for one
// self-adjoint test element a and one projection Q on C^D.
struct CrossedCommutatorReport {
    double defect = 0.0;               // almost-periodicity defect of a
    double full_norm = 0.0;            // || [sigma(a), Q tensor P] ||
    double max_block_norm = 0.0;       // max_y || [sigma(a), Q tensor P_y] ||
    double block_vs_full_dev = 0.0;    // |full - max block|
    double orthogonality_residual = 0.0; // max_{y != z} ||B_y^* B_z||
    double max_q_commutator = 0.0;     // max_y || [rho(alpha(y^{-1})a), Q] ||
    double per_coset_chain_excess = 0.0; // max_y (||(1-QP)sigma(QP)|| - (c_y + defect))
    double proof_bound = 0.0;          // 2 max_y (c_y + defect)
    std::vector<double> block_norms;   // per tile position
};

// Runs the full block decomposition of [sigma(a), Q tensor P] over the
// projection family's window. Q must be a projection on C^D (checked).
CrossedCommutatorReport crossed_commutator_report(const AlgebraElement& a,
                                                  const ActionInstance& alpha, const Matrix& q_proj,
                                                  const ProjectionFamily& proj,
                                                  const FolnerSet& folner,
                                                  const linalg::NormOptions& opts = {});

// Hard gate used by the pipeline: throws CertificationError if the report
// violates the certified inequalities at the given tolerances.
void require_commutator_report_ok(const CrossedCommutatorReport& r, double identity_tol = 1e-10,
                                  double norm_slack = 1e-9);

} // namespace qdtile::crossed
