#include "pseudofit/fockspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pseudofit {

void SparseOp::add(Index row, Index col, Complex val) {
    if (val == Complex(0.0, 0.0)) return;
    rows_.push_back(int32_t(row));
    cols_.push_back(int32_t(col));
    vals_.push_back(val);
    compressed_ = false;
}

void SparseOp::compress() {
    const size_t n = vals_.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t(0));
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return rows_[a] != rows_[b] ? rows_[a] < rows_[b] : cols_[a] < cols_[b];
    });
    std::vector<int32_t> r2, c2;
    std::vector<Complex> v2;
    r2.reserve(n);
    c2.reserve(n);
    v2.reserve(n);
    for (size_t i : order) {
        if (!v2.empty() && r2.back() == rows_[i] && c2.back() == cols_[i]) {
            v2.back() += vals_[i];
        } else {
            r2.push_back(rows_[i]);
            c2.push_back(cols_[i]);
            v2.push_back(vals_[i]);
        }
    }
    // drop entries that cancelled
    rows_.clear();
    cols_.clear();
    vals_.clear();
    for (size_t i = 0; i < v2.size(); ++i) {
        if (std::abs(v2[i]) > 0.0) {
            rows_.push_back(r2[i]);
            cols_.push_back(c2[i]);
            vals_.push_back(v2[i]);
        }
    }
    row_ptr_.assign(size_t(dim_) + 1, 0);
    for (int32_t r : rows_) ++row_ptr_[size_t(r) + 1];
    for (size_t i = 0; i < size_t(dim_); ++i) row_ptr_[i + 1] += row_ptr_[i];

    csc_of_.resize(vals_.size());
    std::iota(csc_of_.begin(), csc_of_.end(), 0);
    std::sort(csc_of_.begin(), csc_of_.end(),
              [&](int32_t a, int32_t b) { return cols_[size_t(a)] < cols_[size_t(b)]; });
    col_ptr_.assign(size_t(dim_) + 1, 0);
    for (int32_t c : cols_) ++col_ptr_[size_t(c) + 1];
    for (size_t i = 0; i < size_t(dim_); ++i) col_ptr_[i + 1] += col_ptr_[i];
    compressed_ = true;
}

void SparseOp::apply_left(Matrix& out, const Matrix& in, Complex alpha) const {
    const Index ncols = in.cols();
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < ncols; ++j) {
        const Complex* src = in.col(j).data();
        Complex* dst = out.col(j).data();
        for (size_t e = 0; e < vals_.size(); ++e)
            dst[rows_[e]] += alpha * vals_[e] * src[cols_[e]];
    }
}

void SparseOp::apply_right(Matrix& out, const Matrix& in, Complex alpha) const {
    // (in·op)(:, c) += val(r, c) · in(:, r)
#pragma omp parallel for schedule(dynamic, 16)
    for (Index c = 0; c < dim_; ++c) {
        for (int64_t k = col_ptr_[size_t(c)]; k < col_ptr_[size_t(c) + 1]; ++k) {
            const size_t e = size_t(csc_of_[size_t(k)]);
            out.col(c) += alpha * vals_[e] * in.col(rows_[e]);
        }
    }
}

void SparseOp::apply_right_adjoint(Matrix& out, const Matrix& in, Complex alpha) const {
    // (in·op†)(:, r) += conj(val(r, c)) · in(:, c)
#pragma omp parallel for schedule(dynamic, 16)
    for (Index r = 0; r < dim_; ++r) {
        for (int64_t k = row_ptr_[size_t(r)]; k < row_ptr_[size_t(r) + 1]; ++k) {
            // entries are row-sorted after compress(), so CSR order is the storage order
            out.col(r) += alpha * std::conj(vals_[size_t(k)]) * in.col(cols_[size_t(k)]);
        }
    }
}

Matrix SparseOp::dense() const {
    Matrix m = Matrix::Zero(dim_, dim_);
    for (size_t e = 0; e < vals_.size(); ++e) m(rows_[e], cols_[e]) += vals_[e];
    return m;
}

double SparseOp::one_norm_bound() const {
    RealVector colsum = RealVector::Zero(dim_);
    for (size_t e = 0; e < vals_.size(); ++e) colsum[cols_[e]] += std::abs(vals_[e]);
    return colsum.size() > 0 ? colsum.maxCoeff() : 0.0;
}

FockSpace::FockSpace(Index system_dim, int modes, int d)
    : dim_s(system_dim), n_modes(modes), cutoff(d) {
    if (system_dim < 1 || d < 2 || modes < 0) throw InputError("FockSpace: bad dimensions");
    dim_bath = 1;
    for (int k = 0; k < modes; ++k) {
        if (dim_bath > (Index(1) << 40) / d) throw ResourceError("FockSpace: dimension overflow");
        dim_bath *= d;
    }
    dim = dim_s * dim_bath;
}

Index FockSpace::stride(int mode) const {
    Index s = 1;
    for (int k = 0; k < mode; ++k) s *= cutoff;
    return s;
}

int FockSpace::occupation(Index bath_idx, int mode) const {
    return int((bath_idx / stride(mode)) % cutoff);
}

SparseOp FockSpace::lift_system(const Matrix& sys_op) const {
    if (sys_op.rows() != dim_s || sys_op.cols() != dim_s)
        throw InputError("FockSpace: system operator dimension mismatch");
    SparseOp op(dim);
    for (Index s = 0; s < dim_s; ++s)
        for (Index sp = 0; sp < dim_s; ++sp) {
            if (sys_op(s, sp) == Complex(0.0, 0.0)) continue;
            for (Index b = 0; b < dim_bath; ++b)
                op.add(s * dim_bath + b, sp * dim_bath + b, sys_op(s, sp));
        }
    op.compress();
    return op;
}

SparseOp FockSpace::one_body(const Matrix& coeff) const {
    if (coeff.rows() != n_modes || coeff.cols() != n_modes)
        throw InputError("FockSpace: one_body coefficient dimension mismatch");
    SparseOp op(dim);
    for (int k = 0; k < n_modes; ++k) {
        const Index sk = stride(k);
        for (int l = 0; l < n_modes; ++l) {
            const Complex c = coeff(k, l);
            if (c == Complex(0.0, 0.0)) continue;
            const Index sl = stride(l);
            for (Index b = 0; b < dim_bath; ++b) {
                const int nk = occupation(b, k);
                const int nl = occupation(b, l);
                if (k == l) {
                    if (nk > 0) {
                        for (Index s = 0; s < dim_s; ++s)
                            op.add(s * dim_bath + b, s * dim_bath + b, c * double(nk));
                    }
                    continue;
                }
                // b†_k b_l |…n_k…n_l…⟩ = √(n_l (n_k+1)) |…n_k+1…n_l−1…⟩
                if (nl == 0 || nk >= cutoff - 1) continue;
                const Index b2 = b + sk - sl;
                const double amp = std::sqrt(double(nl) * double(nk + 1));
                for (Index s = 0; s < dim_s; ++s)
                    op.add(s * dim_bath + b2, s * dim_bath + b, c * amp);
            }
        }
    }
    op.compress();
    return op;
}

SparseOp FockSpace::annihilator_combo(const Vector& coeff) const {
    if (coeff.size() != n_modes) throw InputError("FockSpace: annihilator_combo size mismatch");
    SparseOp op(dim);
    for (int k = 0; k < n_modes; ++k) {
        const Complex c = coeff[k];
        if (c == Complex(0.0, 0.0)) continue;
        const Index sk = stride(k);
        for (Index b = 0; b < dim_bath; ++b) {
            const int nk = occupation(b, k);
            if (nk == 0) continue;
            for (Index s = 0; s < dim_s; ++s)
                op.add(s * dim_bath + b - sk, s * dim_bath + b, c * std::sqrt(double(nk)));
        }
    }
    op.compress();
    return op;
}

SparseOp FockSpace::coupling(const Matrix& sys_op, const Vector& g, int offset) const {
    if (sys_op.rows() != dim_s || sys_op.cols() != dim_s)
        throw InputError("FockSpace: coupling system operator mismatch");
    if (offset < 0 || offset + int(g.size()) > n_modes)
        throw InputError("FockSpace: coupling mode range out of bounds");
    SparseOp op(dim);
    for (Index s = 0; s < dim_s; ++s) {
        for (Index sp = 0; sp < dim_s; ++sp) {
            const Complex smat = sys_op(s, sp);
            if (smat == Complex(0.0, 0.0)) continue;
            for (Index k = 0; k < g.size(); ++k) {
                const int mode = offset + int(k);
                const Index sk = stride(mode);
                for (Index b = 0; b < dim_bath; ++b) {
                    const int nk = occupation(b, mode);
                    // g_k b†_k
                    if (nk < cutoff - 1)
                        op.add(s * dim_bath + b + sk, sp * dim_bath + b,
                               smat * g[k] * std::sqrt(double(nk + 1)));
                    // conj(g_k) b_k
                    if (nk > 0)
                        op.add(s * dim_bath + b - sk, sp * dim_bath + b,
                               smat * std::conj(g[k]) * std::sqrt(double(nk)));
                }
            }
        }
    }
    op.compress();
    return op;
}

}  // namespace pseudofit
