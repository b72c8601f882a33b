// numerics.hpp — Dense complex eigendecomposition, SVD, and least-squares kernels
//
// Contracts (binding for every backend):
//   hermitian_eig : M = V diag(values) V†  to 1e-12 relative, V unitary, values ascending
//   general_eig   : M v_k = λ_k v_k with relative residual ≤ 1e-10 per pair
//   psd_sqrt      : Hermitian PSD result R with R·R = M to 1e-10 relative
//   svd           : U Σ V† = M to 1e-12 relative, singular values descending
//   least_squares : minimum-norm minimizer of ‖Ax − b‖₂

#pragma once

#include "pseudofit/types.hpp"

namespace pseudofit {

// Hermitian matrix validated on construction:
// max_ij |M_ij − conj(M_ji)| ≤ 1e-12 · (1 + max|M|)
class HermitianMatrix {
  public:
    explicit HermitianMatrix(Matrix m);

    const Matrix& get() const { return m_; }
    Index rows() const { return m_.rows(); }

    static double hermiticity_defect(const Matrix& m);

  private:
    Matrix m_;
};

struct HermitianEig {
    RealVector values;  // ascending
    Matrix vectors;     // unitary, columns are eigenvectors
};
HermitianEig hermitian_eig(const HermitianMatrix& m);

struct GeneralEig {
    Vector values;
    Matrix right_vectors;  // unit-norm columns
    double max_residual;   // max_k ‖M v_k − λ_k v_k‖ / ‖M‖
};
GeneralEig general_eig(const Matrix& m);

// Principal square root of a numerically PSD Hermitian matrix.
// Eigenvalues in [−1e-10·‖M‖, 0) are clipped to 0; anything lower throws InputError.
Matrix psd_sqrt(const HermitianMatrix& m);

struct Svd {
    Matrix u;
    RealVector singular_values;  // descending, nonnegative
    Matrix v;
};
Svd svd(const Matrix& m);

Vector least_squares(const Matrix& a, const Vector& b);

}  // namespace pseudofit
