// gauge.hpp — Convex gauge solve and physical coupled-mode extraction
//
// Given a quasi model l† e^{-iΛt} r, find Y ⪰ δI with i(YΛ - Λ†Y) ⪰ 0 minimizing
// ‖l - Yr‖₂² (ADMM with two PSD cone projections). The gauge X = √Y then yields the
// physical parameters K = XΛX⁻¹, g = Xr, H = (K + K†)/2, Γ = (K† - K)/2i ⪰ 0,
// whose bath correlation g† e^{-iKt} g matches l† e^{-iΛt} r up to ‖l - Yr‖.

#pragma once

#include "pseudofit/expfit.hpp"
#include "pseudofit/numerics.hpp"
#include "pseudofit/types.hpp"

namespace pseudofit {

struct CoupledModel {
    Vector g;
    Matrix H;      // Hermitian
    Matrix Gamma;  // Hermitian PSD

    Index size() const { return g.size(); }
    Matrix K() const { return H - cplx_i * Gamma; }
    void validate() const;
};

struct GaugeSolution {
    Matrix Y;                     // Hermitian, ⪰ δI by construction
    Vector l, r;                  // factorization the solve ran with
    double equality_residual = 0.0;  // ‖l - Yr‖₂
    double lmi_min_eig = 0.0;        // λ_min(i(YΛ - Λ†Y))
    double y_min_eig = 0.0;
    double delta = 0.0;
    double tol = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct SdpOptions {
    double delta = -1.0;    // strict-positivity shift; < 0 selects 1e-8·max|λ_k|
    double tol = 1e-10;     // primal/dual residual target
    int max_iters = 50000;
    // when positive, minimize the averaged-L²(0, horizon) BCF mismatch
    // (l - Yr)† M (l - Yr) with M the Gram matrix of e^{-iΛt} r, instead of the
    // bare ‖l - Yr‖²; the reported equality_residual stays unweighted
    double horizon = 0.0;
};

struct SdpConvergenceError : SolverError {
    SdpConvergenceError(const std::string& msg, GaugeSolution best_iterate)
        : SolverError(msg), best(std::move(best_iterate)) {}
    GaugeSolution best;
};

// If the model has no (l, r), the starting factorization is l_k = conj(w_k), r_k = 1
// (any split with conj(l)·r = w is gauge-equivalent), or l = r = √w for w ∈ ℝ₊.
GaugeSolution solve_gauge_sdp(const QuasiModel& m, const SdpOptions& opts = {});

CoupledModel extract_coupled(const GaugeSolution& sol, const QuasiModel& m);

// C^c(t) = g† e^{-iKt} g, eigendecomposition path with expm fallback near defectiveness
TimeSeries eval_coupled_bcf(const CoupledModel& cm, const RealVector& t_grid);
Complex eval_coupled_bcf_at(const CoupledModel& cm, double t);

struct FittedDensity {
    FreqSeries series;       // Im(g†(K - ωI)⁻¹ g) on the grid
    double negative_weight;  // ∫_{ω<0} |·| dω / ∫_ℝ |·| dω (trapezoid on the grid)
};
// grid must bracket the support: max|ω| ≥ 2·spectral radius of H
FittedDensity fitted_density(const CoupledModel& cm, const RealVector& omega_grid);

struct RefineOptions {
    int max_iters = 500;
    // escape CP-boundary stalls by a ramped negative-eigenvalue penalty pass over an
    // unconstrained Hermitian Γ, then projecting back and polishing in the CP chart
    bool continuation = true;
};
struct RefineResult {
    CoupledModel model;
    double initial_error = 0.0;  // averaged-L2 of the input model vs target
    double final_error = 0.0;
    int iterations = 0;
};
// Monotone time-domain polish over (g, H, Γ = LL†); never returns a worse model.
RefineResult refine_time_domain(const CoupledModel& cm, const TimeSeries& target,
                                const RefineOptions& opts = {});

struct PhysicalityReport {
    double hermiticity_defect = 0.0;  // max of H and Γ defects
    double gamma_min_eig = 0.0;
    double bcf_t0_imag = 0.0;
    bool pass = false;
};
PhysicalityReport physicality_check(const CoupledModel& cm);

// Refinement chart (exposed for gradient verification): θ packs
// [Re g, Im g, diag H, (Re H_pq, Im H_pq)_{p<q}, diag L, (Re L_ab, Im L_ab)_{a>b}]
namespace refine {
struct Point {
    Vector g;
    Matrix H;  // Hermitian
    Matrix L;  // lower triangular, real diagonal; Γ = LL†
};
Point from_model(const CoupledModel& cm);
CoupledModel to_model(const Point& p);
RealVector pack(const Point& p);
Point unpack(const RealVector& theta, Index n);
double objective(const Point& p, const TimeSeries& target);
RealVector gradient(const Point& p, const TimeSeries& target);
}  // namespace refine

}  // namespace pseudofit
