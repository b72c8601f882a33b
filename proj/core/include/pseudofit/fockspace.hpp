// fockspace.hpp — Truncated product Fock register and structured sparse operators
//
// Basis index = s·d^M + Σ_k n_k d^k for system level s and per-mode occupations n_k < d.
// Operators are stored as compressed triples and applied to dense matrices from the
// left/right without ever materializing a superoperator.

#pragma once

#include <vector>

#include "pseudofit/types.hpp"

namespace pseudofit {

class SparseOp {
  public:
    SparseOp() = default;
    explicit SparseOp(Index dim) : dim_(dim) {}

    Index dim() const { return dim_; }
    Index nnz() const { return Index(vals_.size()); }

    void add(Index row, Index col, Complex val);
    void compress();  // sort, merge duplicates, drop exact zeros, build CSR/CSC views

    // out += alpha · op · in
    void apply_left(Matrix& out, const Matrix& in, Complex alpha) const;
    // out += alpha · in · op
    void apply_right(Matrix& out, const Matrix& in, Complex alpha) const;
    // out += alpha · in · op†
    void apply_right_adjoint(Matrix& out, const Matrix& in, Complex alpha) const;

    Matrix dense() const;
    double one_norm_bound() const;  // max column abs sum

  private:
    Index dim_ = 0;
    bool compressed_ = false;
    std::vector<int32_t> rows_, cols_;
    std::vector<Complex> vals_;
    // CSR over rows (row_ptr_, csr_cols_ index into vals order) and CSC permutation
    std::vector<int64_t> row_ptr_, col_ptr_;
    std::vector<int32_t> csc_of_;  // CSC ordering: entry indices sorted by column
};

struct FockSpace {
    Index dim_s = 1;
    int n_modes = 0;
    int cutoff = 2;   // d
    Index dim_bath = 1;
    Index dim = 1;

    FockSpace() = default;
    FockSpace(Index system_dim, int modes, int d);

    Index stride(int mode) const;
    int occupation(Index bath_idx, int mode) const;

    // S ⊗ I_bath
    SparseOp lift_system(const Matrix& sys_op) const;
    // I_S ⊗ Σ_{kl} coeff_{kl} b†_k b_l   (coeff over all modes)
    SparseOp one_body(const Matrix& coeff) const;
    // I_S ⊗ Σ_k coeff_k b_k              (annihilator combination, e.g. a jump operator)
    SparseOp annihilator_combo(const Vector& coeff) const;
    // S ⊗ Σ_k (g_k b†_k + conj(g_k) b_k) over modes [offset, offset + g.size())
    SparseOp coupling(const Matrix& sys_op, const Vector& g, int offset) const;
};

}  // namespace pseudofit
