#include "pseudofit/realization.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "pseudofit/numerics.hpp"

namespace pseudofit {

void PoleResidue::validate() const {
    if (poles.size() != residues.size()) throw InputError("PoleResidue: size mismatch");
    for (Index i = 0; i < poles.size(); ++i)
        for (Index j = i + 1; j < poles.size(); ++j)
            if (std::abs(poles[i] - poles[j]) < 1e-10)
                throw InputError("PoleResidue: poles closer than 1e-10");
}

Complex eval_pole_residue(const PoleResidue& pr, double omega) {
    Complex acc{0.0, 0.0};
    for (Index k = 0; k < pr.size(); ++k) acc += pr.residues[k] / (pr.poles[k] - omega);
    return acc;
}

namespace {

// residues by linear least squares on the Cauchy matrix over all samples
Vector fit_residues(const Vector& poles, const FreqSeries& data, double* max_err) {
    const Index m = data.size();
    const Index n = poles.size();
    Matrix cauchy(m, n);
    for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < n; ++k) cauchy(i, k) = 1.0 / (poles[k] - data.grid[i]);
    Vector rhs(m);
    for (Index i = 0; i < m; ++i) rhs[i] = Complex(data.values[i], 0.0);
    Vector c = least_squares(cauchy, rhs);
    if (max_err) *max_err = (cauchy * c - rhs).cwiseAbs().maxCoeff();
    return c;
}

// average matched conjugate-reflected pairs so real symmetry holds exactly
void symmetrize_pairs(Vector& poles, Vector& residues) {
    const Index n = poles.size();
    std::vector<bool> used(size_t(n), false);
    for (Index i = 0; i < n; ++i) {
        if (used[size_t(i)]) continue;
        if (std::abs(poles[i].imag()) < 1e-12) {
            poles[i] = Complex(poles[i].real(), 0.0);
            residues[i] = Complex(residues[i].real(), 0.0);
            used[size_t(i)] = true;
            continue;
        }
        Index best = -1;
        double best_dist = 1e-6 * (1.0 + std::abs(poles[i]));
        for (Index j = i + 1; j < n; ++j) {
            if (used[size_t(j)]) continue;
            const double dist = std::abs(std::conj(poles[j]) - poles[i]);
            if (dist < best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        if (best >= 0) {
            const Complex lam = 0.5 * (poles[i] + std::conj(poles[best]));
            const Complex res = 0.5 * (residues[i] + std::conj(residues[best]));
            poles[i] = lam;
            residues[i] = res;
            poles[best] = std::conj(lam);
            residues[best] = std::conj(res);
            used[size_t(i)] = used[size_t(best)] = true;
        }
    }
}

// merge poles closer than 1e-10 (summing residues)
void merge_close_poles(Vector& poles, Vector& residues) {
    std::vector<Complex> p, c;
    for (Index i = 0; i < poles.size(); ++i) {
        bool merged = false;
        for (size_t j = 0; j < p.size(); ++j) {
            if (std::abs(p[j] - poles[i]) < 1e-10) {
                c[j] += residues[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            p.push_back(poles[i]);
            c.push_back(residues[i]);
        }
    }
    poles = Eigen::Map<Vector>(p.data(), Index(p.size()));
    residues = Eigen::Map<Vector>(c.data(), Index(c.size()));
}

}  // namespace

LoewnerResult loewner_realize(const FreqSeries& samples, const LoewnerOptions& opts) {
    const Index m = samples.size();
    if (m < 4) throw InputError("loewner_realize: need at least 4 samples");
    for (Index i = 1; i < m; ++i)
        if (samples.grid[i] - samples.grid[i - 1] < 1e-14 * (1.0 + std::abs(samples.grid[i])))
            throw InputError("loewner_realize: coincident frequencies in the partition");

    LoewnerResult out;
    if (samples.values.cwiseAbs().maxCoeff() == 0.0) return out;  // all-zero data: empty model

    // alternate split: right (θ, f), left (μ, v)
    std::vector<double> theta, mu;
    std::vector<Complex> f, v;
    for (Index i = 0; i < m; ++i) {
        if (int(i % 2) == opts.partition_offset % 2) {
            theta.push_back(samples.grid[i]);
            f.emplace_back(samples.values[i], 0.0);
        } else {
            mu.push_back(samples.grid[i]);
            v.emplace_back(samples.values[i], 0.0);
        }
    }
    const Index nl = Index(mu.size());
    const Index nr = Index(theta.size());

    Matrix loew(nl, nr), shifted(nl, nr);
    for (Index j = 0; j < nl; ++j) {
        for (Index i = 0; i < nr; ++i) {
            const double den = mu[size_t(j)] - theta[size_t(i)];
            loew(j, i) = (v[size_t(j)] - f[size_t(i)]) / den;
            shifted(j, i) = (mu[size_t(j)] * v[size_t(j)] - theta[size_t(i)] * f[size_t(i)]) / den;
        }
    }

    // numerical rank from the stacked pencils
    Matrix stack_v(2 * nl, nr);
    stack_v << loew, shifted;
    Matrix stack_h(nl, 2 * nr);
    stack_h << loew, shifted;
    auto svd_v = svd(stack_v);  // right vectors span the column space to project onto
    auto svd_h = svd(stack_h);  // left vectors
    const double sigma0 = svd_v.singular_values[0];
    Index rank = 0;
    while (rank < svd_v.singular_values.size() && rank < svd_h.singular_values.size() &&
           svd_v.singular_values[rank] > opts.sigma_rel * sigma0 &&
           svd_h.singular_values[rank] > opts.sigma_rel * sigma0)
        ++rank;
    rank = std::min({rank, nl, nr});
    if (opts.rank_cap > 0) rank = std::min<Index>(rank, opts.rank_cap);
    out.rank = int(rank);
    out.sigma_next =
        rank < svd_v.singular_values.size() ? svd_v.singular_values[rank] : 0.0;
    if (rank == 0) return out;

    Matrix x = svd_v.v.leftCols(rank);   // nr × r
    Matrix y = svd_h.u.leftCols(rank);   // nl × r

    Matrix e_red = y.adjoint() * loew * x;
    Matrix a_red = y.adjoint() * shifted * x;

    // poles: generalized eigenvalues of (a_red, e_red)
    Eigen::FullPivLU<Matrix> lu(e_red);
    Matrix pencil;
    if (lu.isInvertible()) {
        pencil = lu.solve(a_red);
    } else {
        // rank truncation should leave e_red invertible; fall back to a pseudo-inverse
        auto dec = svd(e_red);
        RealVector inv = dec.singular_values;
        for (Index i = 0; i < inv.size(); ++i)
            inv[i] = inv[i] > 1e-14 * dec.singular_values[0] ? 1.0 / inv[i] : 0.0;
        pencil = dec.v * inv.asDiagonal() * dec.u.adjoint() * a_red;
    }
    auto eig = general_eig(pencil);

    // keep finite, reasonably located poles; spurious far poles carry no residue anyway
    const double w_span = std::max(std::abs(samples.grid[0]), std::abs(samples.grid[m - 1]));
    std::vector<Complex> kept;
    for (Index k = 0; k < eig.values.size(); ++k) {
        const Complex lam = eig.values[k];
        if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag())) continue;
        if (std::abs(lam) > 1e6 * std::max(w_span, 1.0)) continue;
        kept.push_back(lam);
    }
    if (kept.empty()) return out;

    Vector poles = Eigen::Map<Vector>(kept.data(), Index(kept.size()));
    Vector residues = fit_residues(poles, samples, nullptr);

    // drop numerically invisible poles and refit
    const double res_floor = 1e-13 * samples.values.cwiseAbs().maxCoeff();
    std::vector<Complex> p2, c2;
    for (Index k = 0; k < poles.size(); ++k) {
        if (std::abs(residues[k]) > res_floor) {
            p2.push_back(poles[k]);
            c2.push_back(residues[k]);
        }
    }
    if (p2.empty()) return out;
    poles = Eigen::Map<Vector>(p2.data(), Index(p2.size()));
    residues = Eigen::Map<Vector>(c2.data(), Index(c2.size()));

    merge_close_poles(poles, residues);
    residues = fit_residues(poles, samples, &out.max_fit_error);
    symmetrize_pairs(poles, residues);
    residues = fit_residues(poles, samples, &out.max_fit_error);
    symmetrize_pairs(poles, residues);

    out.pr.poles = std::move(poles);
    out.pr.residues = std::move(residues);
    out.pr.validate();
    return out;
}

HalfplaneResult halfplane_reduce(const PoleResidue& pr) {
    HalfplaneResult out;
    std::vector<Complex> poles, weights;
    for (Index k = 0; k < pr.size(); ++k) {
        const Complex lam = pr.poles[k];
        if (std::abs(lam.imag()) < 1e-12) {
            ++out.marginal_poles;
            poles.emplace_back(lam.real(), 0.0);
            weights.push_back(2.0 * cplx_i * pr.residues[k]);
            continue;
        }
        if (lam.imag() < 0.0) {
            poles.push_back(lam);
            weights.push_back(2.0 * cplx_i * pr.residues[k]);
        }
    }
    out.model.poles = Eigen::Map<Vector>(poles.data(), Index(poles.size()));
    out.model.weights = Eigen::Map<Vector>(weights.data(), Index(weights.size()));
    out.model.validate();
    return out;
}

}  // namespace pseudofit
