#include "qdtile/algebra.hpp"

#include <string>

namespace qdtile::crossed {

AlgebraElement::AlgebraElement(FiniteDimAlgebra alg, std::vector<Matrix> blocks)
    : alg_(std::move(alg)), blocks_(std::move(blocks)) {
    if (blocks_.size() != alg_.block_count())
        throw ConfigError("algebra element has the wrong number of blocks");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].rows() != alg_.block_sizes[i] || blocks_[i].cols() != alg_.block_sizes[i])
            throw ConfigError("algebra element block " + std::to_string(i) + " has the wrong shape");
        linalg::check_finite(blocks_[i], "algebra element");
    }
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& o) const {
    std::vector<Matrix> out = blocks_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += o.blocks_[i];
    return AlgebraElement(alg_, std::move(out));
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& o) const {
    std::vector<Matrix> out = blocks_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= o.blocks_[i];
    return AlgebraElement(alg_, std::move(out));
}

AlgebraElement AlgebraElement::operator*(const AlgebraElement& o) const {
    std::vector<Matrix> out = blocks_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = blocks_[i] * o.blocks_[i];
    return AlgebraElement(alg_, std::move(out));
}

AlgebraElement AlgebraElement::adjoint() const {
    std::vector<Matrix> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_) out.push_back(b.adjoint());
    return AlgebraElement(alg_, std::move(out));
}

AlgebraElement AlgebraElement::scaled(Complex c) const {
    std::vector<Matrix> out = blocks_;
    for (auto& b : out) b *= c;
    return AlgebraElement(alg_, std::move(out));
}

double AlgebraElement::norm() const {
    double n = 0.0;
    for (const auto& b : blocks_) n = std::max(n, linalg::operator_norm(b));
    return n;
}

bool AlgebraElement::is_self_adjoint(double tol) const {
    for (const auto& b : blocks_)
        if ((b - b.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    return true;
}

Matrix AlgebraElement::rho() const {
    const Eigen::Index d = alg_.dim();
    Matrix m = Matrix::Zero(d, d);
    Eigen::Index off = 0;
    for (const auto& b : blocks_) {
        m.block(off, off, b.rows(), b.cols()) = b;
        off += b.rows();
    }
    return m;
}

AlgebraElement AlgebraElement::zero(const FiniteDimAlgebra& alg) {
    std::vector<Matrix> blocks;
    for (Eigen::Index d : alg.block_sizes) blocks.push_back(Matrix::Zero(d, d));
    return AlgebraElement(alg, std::move(blocks));
}

AlgebraElement AlgebraElement::identity(const FiniteDimAlgebra& alg) {
    std::vector<Matrix> blocks;
    for (Eigen::Index d : alg.block_sizes) blocks.push_back(Matrix::Identity(d, d));
    return AlgebraElement(alg, std::move(blocks));
}

AlgebraElement AlgebraElement::diagonal(const FiniteDimAlgebra& alg,
                                        const std::vector<double>& values) {
    if (values.size() != alg.block_count())
        throw ConfigError("diagonal element needs one value per block");
    std::vector<Matrix> blocks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (alg.block_sizes[i] != 1)
            throw ConfigError("diagonal helper is only for one-dimensional blocks");
        Matrix b(1, 1);
        b(0, 0) = Complex(values[i], 0.0);
        blocks.push_back(std::move(b));
    }
    return AlgebraElement(alg, std::move(blocks));
}

} // namespace qdtile::crossed
