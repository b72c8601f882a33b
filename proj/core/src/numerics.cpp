#include "pseudofit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace pseudofit {

bool all_finite(const Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

void require_finite(const Matrix& m, const char* where) {
    if (!all_finite(m)) throw InputError(std::string(where) + ": non-finite entries");
}

TimeSeries::TimeSeries(RealVector t, Vector v) : grid(std::move(t)), values(std::move(v)) {
    if (grid.size() != values.size()) throw InputError("TimeSeries: grid/value length mismatch");
    for (Index i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InputError("TimeSeries: grid must be strictly ascending");
}

double TimeSeries::uniform_step() const {
    if (grid.size() < 2) return -1.0;
    const double dt = grid[1] - grid[0];
    for (Index i = 2; i < grid.size(); ++i)
        if (std::abs(grid[i] - grid[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt))) return -1.0;
    return dt;
}

FreqSeries::FreqSeries(RealVector w, RealVector v) : grid(std::move(w)), values(std::move(v)) {
    if (grid.size() != values.size()) throw InputError("FreqSeries: grid/value length mismatch");
    for (Index i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InputError("FreqSeries: grid must be strictly ascending");
}

RealVector linspace(double a, double b, Index n) {
    if (n < 1) throw InputError("linspace: need n >= 1");
    RealVector x(n);
    if (n == 1) {
        x[0] = a;
        return x;
    }
    const double h = (b - a) / double(n - 1);
    for (Index i = 0; i < n; ++i) x[i] = a + h * double(i);
    x[n - 1] = b;
    return x;
}

double HermitianMatrix::hermiticity_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

HermitianMatrix::HermitianMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InputError("HermitianMatrix: must be square");
    require_finite(m_, "HermitianMatrix");
    const double scale = 1.0 + (m_.size() > 0 ? m_.cwiseAbs().maxCoeff() : 0.0);
    if (m_.size() > 0 && hermiticity_defect(m_) > 1e-12 * scale)
        throw InputError("HermitianMatrix: hermiticity defect above 1e-12*(1+max|M|)");
}

HermitianEig hermitian_eig(const HermitianMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.get());
    if (solver.info() != Eigen::Success) throw SolverError("hermitian_eig: did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

GeneralEig general_eig(const Matrix& m) {
    if (m.rows() != m.cols()) throw InputError("general_eig: must be square");
    require_finite(m, "general_eig");
    Eigen::ComplexEigenSolver<Matrix> solver(m, true);
    if (solver.info() != Eigen::Success) throw SolverError("general_eig: did not converge");
    GeneralEig out{solver.eigenvalues(), solver.eigenvectors(), 0.0};
    const double norm = std::max(m.norm(), 1e-300);
    for (Index k = 0; k < m.rows(); ++k) {
        const double res =
            (m * out.right_vectors.col(k) - out.values[k] * out.right_vectors.col(k)).norm() / norm;
        out.max_residual = std::max(out.max_residual, res);
    }
    return out;
}

Matrix psd_sqrt(const HermitianMatrix& m) {
    auto eig = hermitian_eig(m);
    const double norm = eig.values.size() > 0 ? eig.values.cwiseAbs().maxCoeff() : 0.0;
    RealVector d = eig.values;
    for (Index i = 0; i < d.size(); ++i) {
        if (d[i] < -1e-10 * norm)
            throw InputError("psd_sqrt: matrix is not PSD (eigenvalue below -1e-10*norm)");
        d[i] = d[i] > 0.0 ? std::sqrt(d[i]) : 0.0;
    }
    Matrix r = eig.vectors * d.asDiagonal() * eig.vectors.adjoint();
    // symmetrize away rounding in the triple product
    r = Matrix(0.5 * (r + r.adjoint()));
    return r;
}

Svd svd(const Matrix& m) {
    require_finite(m, "svd");
    Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Vector least_squares(const Matrix& a, const Vector& b) {
    if (a.rows() < 1) throw InputError("least_squares: need at least one row");
    if (a.rows() != b.size()) throw InputError("least_squares: shape mismatch");
    // SVD pseudo-inverse; yields the minimum-norm solution on rank-deficient systems
    Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    solver.setThreshold(1e-13);
    return solver.solve(b);
}

}  // namespace pseudofit
