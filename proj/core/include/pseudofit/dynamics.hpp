// dynamics.hpp — Coupled Lindblad master-equation propagation on a truncated Fock space
//
// dρ/dt = -i[Ĥ_S + Ĥ_A + Σ_i S_i Â_i, ρ] + Σ_{kl} Γ_{kl} (2 b_l ρ b†_k - {b†_k b_l, ρ})
//
// The right-hand side is applied matrix-free to the full D×D density matrix
// (D = dim_S · d^M); the D²×D² superoperator is never materialized. Multi-site
// couplings use independent pseudomode registers (block-diagonal H and Γ).

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pseudofit/gauge.hpp"
#include "pseudofit/types.hpp"

namespace pseudofit {

struct SystemSpec {
    Matrix H_S;
    std::vector<std::pair<Matrix, CoupledModel>> couplings;  // (S_i, model_i)
    Matrix rho0;  // system initial state, PSD with unit trace

    Index dim_s() const { return H_S.rows(); }
    int total_modes() const;
    void validate() const;
};

enum class Integrator { rk4, adaptive_rk45 };

struct SimConfig {
    int fock_cutoff = 4;  // d per mode
    double dt = 0.0;      // ≤ 0 selects 0.1 / ‖generator‖_est
    double horizon = 10.0;
    double out_dt = 0.0;  // output sampling; ≤ 0 selects horizon/200
    Integrator method = Integrator::rk4;
    bool renormalize_trace = true;
    Index dim_cap = 4096;
    double rtol = 1e-8;
    double atol = 1e-10;
    std::optional<Matrix> rho_bath0;  // bath-state override (default: vacuum)
};

struct Trajectory {
    RealVector times;
    std::vector<Matrix> rho_s;
    std::map<std::string, Vector> observables;
    RealVector trace_defect;  // |tr ρ - 1| before renormalization
    RealVector min_eig_rho_s;
    double generator_norm_est = 0.0;
    double dt_used = 0.0;
    bool dephasing_fast_path = false;
};

Trajectory propagate(const SystemSpec& sys, const SimConfig& cfg,
                     const std::vector<std::pair<std::string, Matrix>>& observables = {});

RealVector population(const Trajectory& traj, Index level);

// tr(μ† e^{Lt}[μ ρ_S(0) ⊗ ρ_B(0)]); no trace renormalization on this path
TimeSeries dipole_correlation(const SystemSpec& sys, const Matrix& mu, const SimConfig& cfg);

// S(ω) = ω · Im ∫_0^∞ i C_μ(t) e^{iωt - ηt} dt, by trapezoid or via an ESPRIT tail fit
FreqSeries absorption_spectrum(const TimeSeries& c_mu, const RealVector& omega_grid, double eta,
                               bool use_esprit_tail, const EspritOptions& esprit_opts = {});

}  // namespace pseudofit
