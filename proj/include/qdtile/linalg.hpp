#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "qdtile/errors.hpp"
#include "qdtile/rational.hpp"

namespace qdtile::linalg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct NormOptions {
    double tol = 1e-11;         // certified slack of the power route
    int dense_threshold = 2000; // full decomposition up to this dimension
    int iteration_cap = 200000;
};

// Throws CertificationError if the matrix carries NaN/Inf.
void check_finite(const Matrix& m, const char* where);

// Largest singular value. Full decomposition (Hermitian eigensolve of M*M)
// for dim <= opts.dense_threshold, otherwise deterministic power iteration on
// M*M stopped on a Rayleigh residual <= tol * max(1, rho). Throws
// ConvergenceError past the iteration cap.
double operator_norm(const Matrix& m, const NormOptions& opts = {});

// Sparse vector over an abstract index space [0, dim). Entries sorted by
// index, duplicate-free. Used for coset vectors and their translates.
struct SparseVec {
    std::vector<std::pair<std::int32_t, Complex>> entries;

    void sort_entries();
    double norm2() const; // compensated

    // Conjugate-linear in *this: <this, other> = sum conj(this_i) * other_i.
    Complex dot(const SparseVec& other) const;

    Vector densify(std::int32_t dim) const;
};

// Sum of rank-one terms  T = sum_k left_k * right_k^*  on a dim-dimensional
// window space. The factored form is exact; materialization is optional.
struct LowRankOperator {
    std::int32_t dim = 0;
    std::vector<SparseVec> left;
    std::vector<SparseVec> right;

    std::size_t rank() const { return left.size(); }
    Matrix materialize() const;
    void apply(const Vector& in, Vector& out) const;        // out = T in
    void apply_adjoint(const Vector& in, Vector& out) const; // out = T* in
};

// Operator norm of a factored operator via its k x k Gram matrices:
// nonzero spectrum of T*T equals that of G_R^{1/2} G_L G_R^{1/2} with
// G_L = L*L, G_R = R*R. Exact Hermitian eigensolves, no window dependence.
double gram_norm(const LowRankOperator& op);

// Power iteration on T*T with the factored apply. Deterministic fixed-seed
// start; Rayleigh-residual certified. Cost per sweep is O(nnz + k^2)-ish and
// the result does not depend on how large the ambient window is.
double lowrank_power_norm(const LowRankOperator& op, const NormOptions& opts = {});

// Dispatch: dense materialization below the dense threshold, exact gram route
// below the gram threshold, implicit power iteration above.
double lowrank_operator_norm(const LowRankOperator& op, const NormOptions& opts = {});

// Eigenvalues of the Hermitian Gram matrix of a vector family (ascending).
Eigen::VectorXd gram_spectrum(const std::vector<SparseVec>& family);

// max_i |g_i^2 - g_i| over the Gram spectrum: equals ||P^2 - P|| for
// P = sum v_i v_i^*.
double projection_idempotency_residual(const std::vector<SparseVec>& family);

} // namespace qdtile::linalg
