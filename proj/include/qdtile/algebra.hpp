#pragma once

#include <vector>

#include "qdtile/linalg.hpp"

namespace qdtile::crossed {

using linalg::Complex;
using linalg::Matrix;

// Finite-dimensional C*-algebra: a direct sum of full matrix blocks
// M_{d1} + ... + M_{dr}, faithfully represented block-diagonally on C^D,
// D = d1 + ... + dr.
struct FiniteDimAlgebra {
    std::vector<Eigen::Index> block_sizes;

    Eigen::Index dim() const {
        Eigen::Index d = 0;
        for (Eigen::Index b : block_sizes) d += b;
        return d;
    }
    std::size_t block_count() const { return block_sizes.size(); }

    // C(X) on r points: r one-dimensional blocks.
    static FiniteDimAlgebra diagonal(std::size_t r) {
        return FiniteDimAlgebra{std::vector<Eigen::Index>(r, 1)};
    }
    static FiniteDimAlgebra full_matrix(Eigen::Index d) { return FiniteDimAlgebra{{d}}; }
};

// Element of a FiniteDimAlgebra, stored block by block.
class AlgebraElement {
public:
    AlgebraElement(FiniteDimAlgebra alg, std::vector<Matrix> blocks);

    const FiniteDimAlgebra& algebra() const { return alg_; }
    const std::vector<Matrix>& blocks() const { return blocks_; }
    Matrix& block(std::size_t i) { return blocks_[i]; }
    const Matrix& block(std::size_t i) const { return blocks_[i]; }

    AlgebraElement operator+(const AlgebraElement& o) const;
    AlgebraElement operator-(const AlgebraElement& o) const;
    AlgebraElement operator*(const AlgebraElement& o) const;
    AlgebraElement adjoint() const;
    AlgebraElement scaled(Complex c) const;

    // C*-norm: the max over blocks of the block operator norm; the canonical
    // representation is isometric by construction.
    double norm() const;
    bool is_self_adjoint(double tol = 1e-12) const;

    // rho(a): the block-diagonal D x D matrix.
    Matrix rho() const;

    static AlgebraElement zero(const FiniteDimAlgebra& alg);
    static AlgebraElement identity(const FiniteDimAlgebra& alg);
    // Diagonal algebra convenience: r scalars.
    static AlgebraElement diagonal(const FiniteDimAlgebra& alg, const std::vector<double>& values);

private:
    FiniteDimAlgebra alg_;
    std::vector<Matrix> blocks_;
};

} // namespace qdtile::crossed
