// realization.hpp — Loewner-pencil rational realization of sampled C̃(ω)
//
// Splits the real-valued samples into left/right partitions, builds the Loewner and
// shifted-Loewner matrices, projects onto the numerical rank, and reads poles off the
// reduced pencil. The lower-half-plane half of the doubled spectrum carries the
// physical decaying modes; halfplane_reduce converts it to a QuasiModel.

#pragma once

#include "pseudofit/expfit.hpp"
#include "pseudofit/types.hpp"

namespace pseudofit {

struct PoleResidue {
    Vector poles;     // pairwise distinct (≥ 1e-10 separation after merging)
    Vector residues;  // F(ω) = Σ_k residues_k / (poles_k - ω)

    Index size() const { return poles.size(); }
    void validate() const;
};

Complex eval_pole_residue(const PoleResidue& pr, double omega);

struct LoewnerOptions {
    double sigma_rel = 1e-12;  // rank cut σ_{r+1}/σ_1
    int rank_cap = 0;          // hard cap on the retained rank (0 = none); the doubled
                               // system carries 2 poles per physical mode
    int partition_offset = 0;  // 0 or 1; result must not depend on it (gauge invariance)
};

struct LoewnerResult {
    PoleResidue pr;
    int rank = 0;
    double sigma_next = 0.0;     // first discarded singular value
    double max_fit_error = 0.0;  // max |F(ω_i) - data_i| over the input grid
};

// requires ≥ 4 samples at distinct frequencies
LoewnerResult loewner_realize(const FreqSeries& samples, const LoewnerOptions& opts = {});

struct HalfplaneResult {
    QuasiModel model;
    int marginal_poles = 0;  // |Im λ| < 1e-12, kept with γ = 0
};

// keeps Im λ < 0 poles; weights w_k = 2i c_k (verified against Im Σ w_k/(λ_k - ω))
HalfplaneResult halfplane_reduce(const PoleResidue& pr);

}  // namespace pseudofit
