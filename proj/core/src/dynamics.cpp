#include "pseudofit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "pseudofit/fockspace.hpp"

namespace pseudofit {

int SystemSpec::total_modes() const {
    int m = 0;
    for (const auto& [s, model] : couplings) m += int(model.size());
    return m;
}

void SystemSpec::validate() const {
    const Index n = dim_s();
    if (H_S.rows() != H_S.cols() || n < 1) throw InputError("SystemSpec: H_S must be square");
    if (HermitianMatrix::hermiticity_defect(H_S) > 1e-12 * (1.0 + H_S.cwiseAbs().maxCoeff()))
        throw InputError("SystemSpec: H_S must be Hermitian");
    for (const auto& [s, model] : couplings) {
        if (s.rows() != n || s.cols() != n)
            throw InputError("SystemSpec: coupling operator dimension mismatch");
        if (HermitianMatrix::hermiticity_defect(s) > 1e-12 * (1.0 + s.cwiseAbs().maxCoeff()))
            throw InputError("SystemSpec: coupling operators must be Hermitian");
        model.validate();
    }
    if (rho0.rows() != n || rho0.cols() != n) throw InputError("SystemSpec: rho0 dimension mismatch");
    if (std::abs(rho0.trace() - Complex(1.0, 0.0)) > 1e-12)
        throw InputError("SystemSpec: rho0 must have unit trace");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho0 + rho0.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()[0] < -1e-12) throw InputError("SystemSpec: rho0 must be PSD");
}

namespace {

// W ρ + ρ W† + Σ_m 2γ_m J_m ρ J_m†, with W = -iĤ - Θ and Θ = Σ Γ_kl b†_k b_l
struct Generator {
    Index dim = 0;
    SparseOp w;
    SparseOp w_right;  // optional explicit right factor; empty when W† is used
    bool use_w_right = false;
    std::vector<std::pair<double, SparseOp>> jumps;  // (γ_m, J_m)
    mutable Matrix scratch;

    void rhs(Matrix& out, const Matrix& in) const {
        out.setZero();
        w.apply_left(out, in, 1.0);
        if (use_w_right)
            w_right.apply_right(out, in, 1.0);
        else
            w.apply_right_adjoint(out, in, 1.0);
        for (const auto& [gamma, jump] : jumps) {
            scratch.setZero();
            jump.apply_left(scratch, in, 1.0);
            jump.apply_right_adjoint(out, scratch, 2.0 * gamma);
        }
    }

    // spectral-radius estimate of the superoperator by power iteration
    double norm_est(int iters = 15) const {
        std::mt19937 rng(12345);
        std::normal_distribution<double> dist(0.0, 1.0);
        Matrix x(dim, dim), y(dim, dim);
        for (Index j = 0; j < dim; ++j)
            for (Index i = 0; i < dim; ++i) x(i, j) = Complex(dist(rng), dist(rng));
        x /= x.norm();
        double est = 0.0;
        for (int it = 0; it < iters; ++it) {
            rhs(y, x);
            est = y.norm();
            if (est == 0.0) return 0.0;
            x = y / est;
        }
        return est;
    }
};

struct BlockDiag {
    Matrix h;       // block-diagonal mode Hamiltonian over all registers
    Matrix gamma;   // block-diagonal dissipation matrix
    std::vector<int> offsets;
};

BlockDiag assemble_blocks(const SystemSpec& sys) {
    const int m = sys.total_modes();
    BlockDiag bd;
    bd.h = Matrix::Zero(m, m);
    bd.gamma = Matrix::Zero(m, m);
    int off = 0;
    for (const auto& [s, model] : sys.couplings) {
        const int nk = int(model.size());
        bd.offsets.push_back(off);
        bd.h.block(off, off, nk, nk) = model.H;
        bd.gamma.block(off, off, nk, nk) = model.Gamma;
        off += nk;
    }
    return bd;
}

void add_entries(SparseOp& dst, const SparseOp& src, Complex scale) {
    const Matrix m = src.dense();  // builder-time only; dims here are modest
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != Complex(0.0, 0.0)) dst.add(i, j, scale * m(i, j));
}

std::vector<std::pair<double, SparseOp>> jump_family(const FockSpace& space, const Matrix& gamma) {
    std::vector<std::pair<double, SparseOp>> jumps;
    if (gamma.rows() == 0) return jumps;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gamma + gamma.adjoint()));
    const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    for (Index m = 0; m < gamma.rows(); ++m) {
        const double g = es.eigenvalues()[m];
        if (g <= 1e-15 * top) continue;  // clip the numerically-zero dissipation channels
        // J_m = Σ_l conj(u_m)_l b_l reproduces Σ_kl Γ_kl b_l ρ b†_k exactly
        jumps.emplace_back(g, space.annihilator_combo(es.eigenvectors().col(m).conjugate()));
    }
    return jumps;
}

Generator build_full_generator(const SystemSpec& sys, const FockSpace& space) {
    const BlockDiag bd = assemble_blocks(sys);
    Generator gen;
    gen.dim = space.dim;
    SparseOp w(space.dim);
    add_entries(w, space.lift_system(sys.H_S), Complex(0.0, -1.0));
    if (space.n_modes > 0) {
        add_entries(w, space.one_body(bd.h), Complex(0.0, -1.0));
        add_entries(w, space.one_body(bd.gamma), Complex(-1.0, 0.0));  // -Θ
        for (size_t i = 0; i < sys.couplings.size(); ++i)
            add_entries(w, space.coupling(sys.couplings[i].first, sys.couplings[i].second.g,
                                          bd.offsets[i]),
                        Complex(0.0, -1.0));
    }
    w.compress();
    gen.w = std::move(w);
    gen.jumps = jump_family(space, bd.gamma);
    gen.scratch = Matrix::Zero(space.dim, space.dim);
    return gen;
}

// ---- steppers ------------------------------------------------------------

struct Rk4 {
    Matrix k, tmp, acc;
    void init(Index dim) {
        k.resize(dim, dim);
        tmp.resize(dim, dim);
        acc.resize(dim, dim);
    }
    void step(const Generator& gen, Matrix& y, double dt) {
        gen.rhs(k, y);
        acc = y + (dt / 6.0) * k;
        tmp = y + (0.5 * dt) * k;
        gen.rhs(k, tmp);
        acc += (dt / 3.0) * k;
        tmp = y + (0.5 * dt) * k;
        gen.rhs(k, tmp);
        acc += (dt / 3.0) * k;
        tmp = y + dt * k;
        gen.rhs(k, tmp);
        y = acc + (dt / 6.0) * k;
    }
};

// Dormand–Prince 5(4) with a PI controller; steps never cross output boundaries
struct Rk45 {
    std::array<Matrix, 7> k;
    Matrix tmp, y5;
    double h = 0.0;
    double prev_err = 1.0;

    void init(Index dim, double h0) {
        for (auto& m : k) m.resize(dim, dim);
        tmp.resize(dim, dim);
        y5.resize(dim, dim);
        h = h0;
        prev_err = 1.0;
    }

    // advance y from t by exactly span
    void advance(const Generator& gen, Matrix& y, double span, double rtol, double atol) {
        static constexpr double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
        static constexpr double a[7][6] = {
            {},
            {1.0 / 5},
            {3.0 / 40, 9.0 / 40},
            {44.0 / 45, -56.0 / 15, 32.0 / 9},
            {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
            {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
            {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
        static constexpr double e[7] = {71.0 / 57600,  0.0,           -71.0 / 16695, 71.0 / 1920,
                                        -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
        double done = 0.0;
        while (done < span * (1.0 - 1e-14)) {
            double hh = std::min(h, span - done);
            gen.rhs(k[0], y);
            for (int s = 1; s < 7; ++s) {
                tmp = y;
                for (int j = 0; j < s; ++j)
                    if (a[s][j] != 0.0) tmp += (hh * a[s][j]) * k[j];
                gen.rhs(k[s], tmp);
            }
            y5 = y;
            for (int j = 0; j < 6; ++j)
                if (a[6][j] != 0.0) y5 += (hh * a[6][j]) * k[j];
            // error estimate
            tmp.setZero();
            for (int j = 0; j < 7; ++j)
                if (e[j] != 0.0) tmp += (hh * e[j]) * k[j];
            const double scale = atol + rtol * std::max(y.norm(), y5.norm());
            const double err = tmp.norm() / scale;
            if (err <= 1.0) {
                y = y5;
                done += hh;
                const double grow =
                    0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(prev_err, 0.4 / 5.0);
                h = hh * std::clamp(grow, 0.2, 5.0);
                prev_err = std::max(err, 1e-10);
            } else {
                h = hh * std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
                if (h < 1e-12 * span)
                    throw SolverError("adaptive_rk45: step rejection floor hit (stiffness)");
            }
            (void)c;
        }
    }
};

Matrix partial_trace_system(const Matrix& rho, Index dim_s, Index dim_bath) {
    Matrix out = Matrix::Zero(dim_s, dim_s);
    for (Index s = 0; s < dim_s; ++s)
        for (Index sp = 0; sp < dim_s; ++sp) {
            Complex acc{0.0, 0.0};
            for (Index b = 0; b < dim_bath; ++b) acc += rho(s * dim_bath + b, sp * dim_bath + b);
            out(s, sp) = acc;
        }
    return out;
}

double auto_dt(double norm_est, double requested) {
    if (requested > 0.0) return requested;
    return 0.1 / std::max(norm_est, 1e-12);
}

bool is_diagonal(const Matrix& m) {
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (i != j && std::abs(m(i, j)) > 1e-14 * scale) return false;
    return true;
}

bool dephasing_structure(const SystemSpec& sys, const SimConfig& cfg,
                         const std::vector<std::pair<std::string, Matrix>>& observables) {
    if (cfg.rho_bath0.has_value()) return false;
    if (sys.dim_s() < 2 || sys.total_modes() == 0) return false;
    if (!is_diagonal(sys.H_S)) return false;
    for (const auto& [s, model] : sys.couplings)
        if (!is_diagonal(s)) return false;
    for (const auto& [name, op] : observables)
        if (op.rows() != sys.dim_s()) return false;  // full-space readout needs the full state
    return true;
}

struct OutputRecorder {
    const SystemSpec* sys;
    const std::vector<std::pair<std::string, Matrix>>* obs;
    std::vector<double> times;
    std::vector<Matrix> rho_s;
    std::vector<double> trace_defect, min_eig;
    std::map<std::string, std::vector<Complex>> series;

    // full_state may be null (dephasing fast path); it serves observables whose
    // dimension matches the full Hilbert space rather than the system alone
    void record(double t, const Matrix& rs, double defect, const Matrix* full_state = nullptr) {
        times.push_back(t);
        Matrix h = 0.5 * (rs + rs.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
        trace_defect.push_back(defect);
        min_eig.push_back(es.eigenvalues()[0]);
        for (const auto& [name, op] : *obs) {
            if (op.rows() == rs.rows()) {
                series[name].push_back((op.adjoint() * rs).trace());
            } else if (full_state && op.rows() == full_state->rows()) {
                series[name].push_back((op.adjoint() * (*full_state)).trace());
            } else {
                throw InputError("propagate: observable '" + name + "' has unusable dimensions");
            }
        }
        rho_s.push_back(std::move(h));
    }

    Trajectory finish() const {
        Trajectory traj;
        const Index n = Index(times.size());
        traj.times = Eigen::Map<const RealVector>(times.data(), n);
        traj.rho_s = rho_s;
        traj.trace_defect = Eigen::Map<const RealVector>(trace_defect.data(), n);
        traj.min_eig_rho_s = Eigen::Map<const RealVector>(min_eig.data(), n);
        for (const auto& [name, vals] : series)
            traj.observables[name] = Eigen::Map<const Vector>(vals.data(), n);
        return traj;
    }
};

// generic full-space propagation of an arbitrary initial full matrix
Trajectory propagate_full(const SystemSpec& sys, const SimConfig& cfg,
                          const std::vector<std::pair<std::string, Matrix>>& observables,
                          const Matrix& rho_full_init, bool renormalize) {
    const FockSpace space(sys.dim_s(), sys.total_modes(), cfg.fock_cutoff);
    if (space.dim > cfg.dim_cap)
        throw ResourceError("propagate: Hilbert dimension " + std::to_string(space.dim) +
                            " exceeds the cap " + std::to_string(cfg.dim_cap));
    Generator gen = build_full_generator(sys, space);
    const double norm_est = gen.norm_est();
    const double dt = auto_dt(norm_est, cfg.dt);
    const double out_dt = cfg.out_dt > 0.0 ? cfg.out_dt : cfg.horizon / 200.0;

    Matrix rho = rho_full_init;
    double last_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
    OutputRecorder rec{&sys, &observables, {}, {}, {}, {}, {}};
    auto emit = [&](double t) {
        Matrix rs = partial_trace_system(rho, space.dim_s, space.dim_bath);
        rec.record(t, rs, last_defect, &rho);
    };
    auto renorm = [&] {
        last_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
        if (renormalize) {
            const double tr = rho.trace().real();
            if (tr > 0.0) rho /= tr;
        }
    };

    Rk4 rk4;
    Rk45 rk45;
    if (cfg.method == Integrator::rk4) rk4.init(space.dim);
    else rk45.init(space.dim, dt);

    emit(0.0);
    double t = 0.0;
    while (t < cfg.horizon - 1e-12 * cfg.horizon) {
        const double span = std::min(out_dt, cfg.horizon - t);
        if (cfg.method == Integrator::rk4) {
            const int nsub = std::max(1, int(std::ceil(span / dt - 1e-12)));
            const double h = span / nsub;
            for (int s = 0; s < nsub; ++s) {
                rk4.step(gen, rho, h);
                renorm();
            }
        } else {
            rk45.advance(gen, rho, span, cfg.rtol, cfg.atol);
            renorm();
        }
        t += span;
        emit(t);
    }
    Trajectory traj = rec.finish();
    traj.generator_norm_est = norm_est;
    traj.dt_used = dt;
    return traj;
}

// pure-dephasing decomposition: each system block (s, s') evolves on the bath space alone
Trajectory propagate_dephasing(const SystemSpec& sys, const SimConfig& cfg,
                               const std::vector<std::pair<std::string, Matrix>>& observables,
                               const Matrix& init_sys, bool hermitian_init) {
    const Index ds = sys.dim_s();
    const int modes = sys.total_modes();
    const FockSpace bath(1, modes, cfg.fock_cutoff);
    if (bath.dim * ds > cfg.dim_cap)
        throw ResourceError("propagate: Hilbert dimension exceeds the cap");
    const BlockDiag bd = assemble_blocks(sys);
    const double out_dt = cfg.out_dt > 0.0 ? cfg.out_dt : cfg.horizon / 200.0;
    const Index n_out = Index(std::llround(std::ceil(cfg.horizon / out_dt - 1e-9))) + 1;

    // per-(s,s') block coherence series tr B_{ss'}(t)
    Matrix coh0 = init_sys;
    std::vector<Matrix> coh(size_t(n_out), Matrix::Zero(ds, ds));
    coh[0] = coh0;
    for (Index i = 1; i < n_out; ++i) coh[size_t(i)] = coh0;  // diagonal blocks keep their trace

    double norm_est = 0.0;
    double dt_used = 0.0;
    for (Index s = 0; s < ds; ++s) {
        for (Index sp = 0; sp < ds; ++sp) {
            if (s == sp) continue;
            if (hermitian_init && sp < s) continue;  // mirror of an evolved block
            if (std::abs(coh0(s, sp)) == 0.0) {
                for (Index i = 1; i < n_out; ++i) coh[size_t(i)](s, sp) = 0.0;
                continue;
            }
            // W_L = -i(ε_s - ε_sp) - i(H_A + Σ_i σ_i(s) Â_i) - Θ ; right factor uses sp
            Generator gen;
            gen.dim = bath.dim;
            SparseOp wl(bath.dim), wr(bath.dim);
            const Complex de = sys.H_S(s, s) - sys.H_S(sp, sp);
            for (Index b = 0; b < bath.dim; ++b) wl.add(b, b, Complex(0.0, -1.0) * de);
            add_entries(wl, bath.one_body(bd.h), Complex(0.0, -1.0));
            add_entries(wl, bath.one_body(bd.gamma), Complex(-1.0, 0.0));
            add_entries(wr, bath.one_body(bd.h), Complex(0.0, 1.0));
            add_entries(wr, bath.one_body(bd.gamma), Complex(-1.0, 0.0));
            for (size_t i = 0; i < sys.couplings.size(); ++i) {
                const Matrix& sop = sys.couplings[i].first;
                Matrix unit = Matrix::Identity(1, 1);
                SparseOp drive = bath.coupling(unit, sys.couplings[i].second.g, bd.offsets[i]);
                add_entries(wl, drive, Complex(0.0, -1.0) * sop(s, s));
                add_entries(wr, drive, Complex(0.0, 1.0) * sop(sp, sp));
            }
            wl.compress();
            wr.compress();
            gen.w = std::move(wl);
            gen.w_right = std::move(wr);
            gen.use_w_right = true;
            gen.jumps = jump_family(bath, bd.gamma);
            gen.scratch = Matrix::Zero(bath.dim, bath.dim);

            const double est = gen.norm_est();
            const double dt = auto_dt(est, cfg.dt);
            dt_used = dt;
            norm_est = std::max(norm_est, est);

            Matrix block = Matrix::Zero(bath.dim, bath.dim);
            block(0, 0) = coh0(s, sp);  // vacuum ⊗ initial coherence
            Rk4 rk4;
            Rk45 rk45;
            if (cfg.method == Integrator::rk4) rk4.init(bath.dim);
            else rk45.init(bath.dim, dt);
            double t = 0.0;
            Index iout = 1;
            while (iout < n_out) {
                const double span = std::min(out_dt, cfg.horizon - t);
                if (cfg.method == Integrator::rk4) {
                    const int nsub = std::max(1, int(std::ceil(span / dt - 1e-12)));
                    const double h = span / nsub;
                    for (int k = 0; k < nsub; ++k) rk4.step(gen, block, h);
                } else {
                    rk45.advance(gen, block, span, cfg.rtol, cfg.atol);
                }
                t += span;
                coh[size_t(iout)](s, sp) = block.trace();
                if (hermitian_init) coh[size_t(iout)](sp, s) = std::conj(block.trace());
                ++iout;
            }
        }
    }

    OutputRecorder rec{&sys, &observables, {}, {}, {}, {}, {}};
    for (Index i = 0; i < n_out; ++i) rec.record(double(i) * out_dt > cfg.horizon ? cfg.horizon
                                                     : double(i) * out_dt,
                                                 coh[size_t(i)], 0.0);
    Trajectory traj = rec.finish();
    traj.generator_norm_est = norm_est;
    traj.dt_used = dt_used;
    traj.dephasing_fast_path = true;
    return traj;
}

}  // namespace

Trajectory propagate(const SystemSpec& sys, const SimConfig& cfg,
                     const std::vector<std::pair<std::string, Matrix>>& observables) {
    sys.validate();
    if (cfg.fock_cutoff < 2 || cfg.horizon <= 0.0) throw InputError("SimConfig: d >= 2, T > 0 required");

    if (dephasing_structure(sys, cfg, observables))
        return propagate_dephasing(sys, cfg, observables, sys.rho0, true);

    const FockSpace space(sys.dim_s(), sys.total_modes(), cfg.fock_cutoff);
    if (space.dim > cfg.dim_cap)
        throw ResourceError("propagate: Hilbert dimension " + std::to_string(space.dim) +
                            " exceeds the cap " + std::to_string(cfg.dim_cap) +
                            " (lower the Fock cutoff or raise dim_cap)");
    Matrix rho0_full = Matrix::Zero(space.dim, space.dim);
    if (cfg.rho_bath0.has_value()) {
        const Matrix& rb = *cfg.rho_bath0;
        if (rb.rows() != space.dim_bath || rb.cols() != space.dim_bath)
            throw InputError("SimConfig: rho_bath0 dimension mismatch");
        for (Index s = 0; s < space.dim_s; ++s)
            for (Index sp = 0; sp < space.dim_s; ++sp)
                rho0_full.block(s * space.dim_bath, sp * space.dim_bath, space.dim_bath,
                                space.dim_bath) = sys.rho0(s, sp) * rb;
    } else {
        for (Index s = 0; s < space.dim_s; ++s)
            for (Index sp = 0; sp < space.dim_s; ++sp)
                rho0_full(s * space.dim_bath, sp * space.dim_bath) = sys.rho0(s, sp);
    }
    return propagate_full(sys, cfg, observables, rho0_full, cfg.renormalize_trace);
}

RealVector population(const Trajectory& traj, Index level) {
    if (traj.rho_s.empty()) throw InputError("population: empty trajectory");
    if (level < 0 || level >= traj.rho_s[0].rows()) throw InputError("population: level out of range");
    RealVector out(Index(traj.rho_s.size()));
    for (size_t i = 0; i < traj.rho_s.size(); ++i) out[Index(i)] = traj.rho_s[i](level, level).real();
    return out;
}

TimeSeries dipole_correlation(const SystemSpec& sys, const Matrix& mu, const SimConfig& cfg) {
    sys.validate();
    if (mu.rows() != sys.dim_s() || mu.cols() != sys.dim_s())
        throw InputError("dipole_correlation: mu dimension mismatch");

    const Matrix init_sys = mu * sys.rho0;
    std::vector<std::pair<std::string, Matrix>> obs{{"cmu", mu}};

    Trajectory traj;
    if (dephasing_structure(sys, cfg, obs)) {
        traj = propagate_dephasing(sys, cfg, obs, init_sys, false);
    } else {
        const FockSpace space(sys.dim_s(), sys.total_modes(), cfg.fock_cutoff);
        if (space.dim > cfg.dim_cap)
            throw ResourceError("dipole_correlation: Hilbert dimension exceeds the cap");
        Matrix rho0_full = Matrix::Zero(space.dim, space.dim);
        for (Index s = 0; s < space.dim_s; ++s)
            for (Index sp = 0; sp < space.dim_s; ++sp)
                rho0_full(s * space.dim_bath, sp * space.dim_bath) = init_sys(s, sp);
        traj = propagate_full(sys, cfg, obs, rho0_full, /*renormalize=*/false);
    }
    return TimeSeries(traj.times, traj.observables.at("cmu"));
}

FreqSeries absorption_spectrum(const TimeSeries& c_mu, const RealVector& omega_grid, double eta,
                               bool use_esprit_tail, const EspritOptions& esprit_opts) {
    if (eta < 0.0) throw InputError("absorption_spectrum: eta must be >= 0");
    RealVector s(omega_grid.size());
    if (use_esprit_tail) {
        auto fit = esprit_fit(c_mu, esprit_opts);
        for (Index i = 0; i < omega_grid.size(); ++i) {
            const double w = omega_grid[i];
            double acc = 0.0;
            for (Index k = 0; k < fit.model.size(); ++k) {
                const double wk = fit.model.poles[k].real();
                const double gk = -fit.model.poles[k].imag();
                acc += (fit.model.weights[k] / Complex(gk + eta, wk - w)).real();
            }
            s[i] = w * acc;
        }
    } else {
        if (c_mu.uniform_step() <= 0.0)
            throw InputError("absorption_spectrum: uniform time grid required");
        for (Index i = 0; i < omega_grid.size(); ++i) {
            const double w = omega_grid[i];
            Complex acc{0.0, 0.0};
            for (Index j = 0; j + 1 < c_mu.size(); ++j) {
                auto f = [&](Index idx) {
                    return c_mu.values[idx] *
                           std::exp(Complex(-eta * c_mu.grid[idx], w * c_mu.grid[idx]));
                };
                acc += 0.5 * (f(j) + f(j + 1)) * (c_mu.grid[j + 1] - c_mu.grid[j]);
            }
            s[i] = w * acc.real();  // Im(i z) = Re z
        }
    }
    return FreqSeries(omega_grid, std::move(s));
}

}  // namespace pseudofit
