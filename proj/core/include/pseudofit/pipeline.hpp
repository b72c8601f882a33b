// pipeline.hpp — End-to-end construction: bath → (ESPRIT | Loewner) → gauge SDP → coupled model
//
// The time path fits uniform C(t) samples with ESPRIT; the frequency path samples
// C̃(ω) = π J_eff and runs the Loewner realization, then reduces to the lower
// half-plane. Either way the gauge SDP produces a completely positive model,
// optionally polished by time-domain refinement.

#pragma once

#include <optional>

#include "pseudofit/bath.hpp"
#include "pseudofit/gauge.hpp"
#include "pseudofit/realization.hpp"

namespace pseudofit {

enum class FitMethod { time_domain, freq_domain };

struct FitOptions {
    FitMethod method = FitMethod::time_domain;
    int order = -1;            // model order (-1: singular-value threshold)
    double sigma_rel = 1e-12;
    double horizon = 10.0;     // T for sampling and the error metric
    int n_samples = 401;       // C(t) samples on [0, T]
    double omega_lo = 0.0, omega_hi = 0.0;  // freq grid; equal values select defaults
    int n_omega = 1201;
    bool refine = false;
    int refine_iters = 200;
    SdpOptions sdp;
    double quad_tol = 1e-10;
};

struct FitOutcome {
    TimeSeries target;       // reference C(t) used for the error metric
    QuasiModel quasi;
    GaugeSolution gauge;
    CoupledModel model;
    CoupledModel model_extracted;  // gauge output before time-domain refinement
    double epsilon = 0.0;        // averaged-L2 error of the coupled model on [0, T]
    double epsilon_quasi = 0.0;  // same, before the gauge solve
    double negative_weight = 0.0;
    PhysicalityReport phys;
    bool sdp_converged = true;
    int loewner_rank = 0;
};

// bosonic fit of C(t) / C̃(ω) from a bath description
FitOutcome fit_bath(const BathSpec& bath, const FitOptions& opts);

// time-domain fit of given samples (also used for fermionic Δ^< / Δ^> fitting)
FitOutcome fit_series(const TimeSeries& target, const FitOptions& opts);

// quasi model → SDP → coupled model → (optional refinement); shared tail of both paths
FitOutcome finish_fit(QuasiModel quasi, const TimeSeries& target, const FitOptions& opts);

}  // namespace pseudofit
