#include "pseudofit/expfit.hpp"

#include <algorithm>
#include <cmath>

#include "pseudofit/numerics.hpp"

namespace pseudofit {

void QuasiModel::validate() const {
    if (weights.size() != poles.size()) throw InputError("QuasiModel: poles/weights size mismatch");
    for (Index k = 0; k < poles.size(); ++k)
        if (poles[k].imag() > 1e-12)
            throw InputError("QuasiModel: pole with Im > 1e-12 violates the decay invariant");
    if (l.size() != r.size()) throw InputError("QuasiModel: l/r size mismatch");
    if (has_factorization()) {
        for (Index k = 0; k < poles.size(); ++k)
            if (std::abs(std::conj(l[k]) * r[k] - weights[k]) >
                1e-12 * (1.0 + std::abs(weights[k])))
                throw InputError("QuasiModel: conj(l)·r does not reproduce the weights");
    }
}

Complex eval_quasi(const QuasiModel& m, double t) {
    if (t < 0.0) throw InputError("eval_quasi: t must be >= 0");
    Complex acc{0.0, 0.0};
    for (Index k = 0; k < m.size(); ++k)
        acc += m.weights[k] * std::exp(Complex(0.0, -t) * m.poles[k]);
    return acc;
}

Vector eval_quasi(const QuasiModel& m, const RealVector& t_grid) {
    Vector out(t_grid.size());
    for (Index i = 0; i < t_grid.size(); ++i) out[i] = eval_quasi(m, t_grid[i]);
    return out;
}

namespace {

// weights by least squares against the samples: c_j ≈ Σ_k w_k z_k^j, then the
// t-offset of the grid is absorbed back into w
Vector recover_weights(const Vector& z, const TimeSeries& samples, double dt, double* rms) {
    const Index m = samples.size();
    const Index n = z.size();
    Matrix vand(m, n);
    for (Index k = 0; k < n; ++k) {
        Complex p{1.0, 0.0};
        for (Index j = 0; j < m; ++j) {
            vand(j, k) = p;
            p *= z[k];
        }
    }
    Vector w = least_squares(vand, samples.values);
    if (rms) *rms = std::sqrt((vand * w - samples.values).squaredNorm() / double(m));
    (void)dt;
    return w;
}

}  // namespace

EspritFit esprit_fit(const TimeSeries& samples, const EspritOptions& opts) {
    const Index m = samples.size();
    const double dt = samples.uniform_step();
    if (dt <= 0.0) throw InputError("esprit_fit: samples must be uniform with dt > 0");
    if (opts.target_order >= 0 && m < 2 * opts.target_order + 2)
        throw InputError("esprit_fit: need at least 2*order + 2 samples");
    if (m < 4) throw InputError("esprit_fit: need at least 4 samples");

    // Hankel matrix H_{ij} = c_{i+j}. The snapshot length is capped at 512 so the
    // SVD stays tractable on long series; rows carry the time shift either way.
    const Index cols = std::min<Index>((m + 1) / 2, 256);
    const Index rows = std::min<Index>(m - cols + 1, 4096);
    Matrix hankel(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) hankel(i, j) = samples.values[i + j];

    auto dec = svd(hankel);
    const double sigma0 = dec.singular_values.size() > 0 ? dec.singular_values[0] : 0.0;

    Index order;
    if (opts.target_order >= 0) {
        order = std::min<Index>(opts.target_order, dec.singular_values.size());
    } else {
        order = 0;
        while (order < dec.singular_values.size() &&
               dec.singular_values[order] > opts.sigma_rel * sigma0)
            ++order;
    }
    if (order == 0 || sigma0 == 0.0) {
        EspritFit out;
        double rms = std::sqrt(samples.values.squaredNorm() / double(m));
        out.rms_misfit = rms;
        return out;
    }
    if (rows - 1 < order) throw InputError("esprit_fit: too few samples for the requested order");

    // rotational invariance: U_up Ψ ≈ U_down, eigenvalues of Ψ are z_k = e^{-iλ_k Δt}
    Matrix u_sig = dec.u.leftCols(order);
    Matrix u_up = u_sig.topRows(rows - 1);
    Matrix u_down = u_sig.bottomRows(rows - 1);
    Matrix psi = u_up.completeOrthogonalDecomposition().solve(u_down);
    auto eig = general_eig(psi);

    // λ = i ln(z)/Δt: Re λ = -arg(z)/Δt, Im λ = ln|z|/Δt
    std::vector<Complex> kept;
    int discarded = 0;
    for (Index k = 0; k < eig.values.size(); ++k) {
        Complex z = eig.values[k];
        const double mag = std::abs(z);
        if (mag == 0.0) continue;  // z = 0 corresponds to no decaying exponential
        if (mag > 1.0) {
            if (mag - 1.0 <= 1e-8) {
                z /= mag * mag;  // reflect into the unit disk: γ ← |γ|
            } else {
                ++discarded;
                continue;
            }
        }
        kept.push_back(z);
    }

    EspritFit out;
    out.discarded_poles = discarded;
    if (kept.empty()) {
        out.rms_misfit = std::sqrt(samples.values.squaredNorm() / double(m));
        return out;
    }

    Vector z(kept.size());
    for (size_t k = 0; k < kept.size(); ++k) z[Index(k)] = kept[k];
    Vector w = recover_weights(z, samples, dt, &out.rms_misfit);

    const double t0 = samples.grid[0];
    Vector poles(z.size()), weights(z.size());
    for (Index k = 0; k < z.size(); ++k) {
        const Complex lnz = std::log(z[k]);  // principal branch; caller keeps Δt·max|ω| < π
        Complex lambda = Complex(0.0, 1.0) * lnz / dt;
        if (lambda.imag() > 0.0) lambda = Complex(lambda.real(), 0.0);
        poles[k] = lambda;
        // samples indexed from t0: c(t0 + jΔt) = Σ (w e^{-iλ t0}) z^j
        weights[k] = w[k] * std::exp(Complex(0.0, t0) * lambda);
    }
    out.model.poles = std::move(poles);
    out.model.weights = std::move(weights);
    out.model.validate();
    return out;
}

double avg_l2_error(const TimeSeries& c_ref, const TimeSeries& c_fit, double T) {
    if (c_ref.size() != c_fit.size() || (c_ref.grid - c_fit.grid).cwiseAbs().maxCoeff() > 1e-12)
        throw InputError("avg_l2_error: grids must be identical");
    return avg_l2_error(c_ref, c_fit.values, T);
}

double avg_l2_error(const TimeSeries& c_ref, const Vector& fit_values, double T) {
    if (c_ref.size() != fit_values.size()) throw InputError("avg_l2_error: size mismatch");
    if (c_ref.size() < 2) throw InputError("avg_l2_error: need at least 2 points");
    const RealVector& t = c_ref.grid;
    if (std::abs(t[0]) > 1e-12 || std::abs(t[t.size() - 1] - T) > 1e-9 * std::max(1.0, T))
        throw InputError("avg_l2_error: grid must span [0, T]");
    double acc = 0.0;
    for (Index i = 0; i + 1 < t.size(); ++i) {
        const double f0 = std::norm(c_ref.values[i] - fit_values[i]);
        const double f1 = std::norm(c_ref.values[i + 1] - fit_values[i + 1]);
        acc += 0.5 * (f0 + f1) * (t[i + 1] - t[i]);
    }
    return std::sqrt(acc / T);
}

}  // namespace pseudofit
