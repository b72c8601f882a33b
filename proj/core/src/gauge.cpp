#include "pseudofit/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

namespace pseudofit {

void CoupledModel::validate() const {
    const Index n = g.size();
    if (H.rows() != n || H.cols() != n || Gamma.rows() != n || Gamma.cols() != n)
        throw InputError("CoupledModel: inconsistent dimensions");
    require_finite(H, "CoupledModel.H");
    require_finite(Gamma, "CoupledModel.Gamma");
    const double h_scale = 1.0 + (n > 0 ? H.cwiseAbs().maxCoeff() : 0.0);
    if (n > 0 && HermitianMatrix::hermiticity_defect(H) > 1e-12 * h_scale)
        throw InputError("CoupledModel: H is not Hermitian to 1e-12");
    const double g_scale = 1.0 + (n > 0 ? Gamma.cwiseAbs().maxCoeff() : 0.0);
    if (n > 0 && HermitianMatrix::hermiticity_defect(Gamma) > 1e-12 * g_scale)
        throw InputError("CoupledModel: Gamma is not Hermitian to 1e-12");
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Gamma + Gamma.adjoint()));
        if (es.eigenvalues()[0] < -1e-10 * (1.0 + Gamma.norm()))
            throw InputError("CoupledModel: Gamma has an eigenvalue below -1e-10(1+norm)");
    }
}

namespace {

// ---- Hermitian vectorization (orthonormal w.r.t. the Frobenius inner product) ----

RealVector vech(const Matrix& y) {
    const Index n = y.rows();
    RealVector out(n * n);
    Index idx = 0;
    for (Index p = 0; p < n; ++p) out[idx++] = y(p, p).real();
    const double rt2 = std::sqrt(2.0);
    for (Index p = 0; p < n; ++p) {
        for (Index q = p + 1; q < n; ++q) {
            out[idx++] = rt2 * y(p, q).real();
            out[idx++] = rt2 * y(p, q).imag();
        }
    }
    return out;
}

Matrix unvech(const RealVector& v, Index n) {
    Matrix y = Matrix::Zero(n, n);
    Index idx = 0;
    for (Index p = 0; p < n; ++p) y(p, p) = v[idx++];
    const double irt2 = 1.0 / std::sqrt(2.0);
    for (Index p = 0; p < n; ++p) {
        for (Index q = p + 1; q < n; ++q) {
            const double re = v[idx++] * irt2;
            const double im = v[idx++] * irt2;
            y(p, q) = Complex(re, im);
            y(q, p) = Complex(re, -im);
        }
    }
    return y;
}

Matrix herm_basis_element(Index n, Index j) {
    RealVector e = RealVector::Zero(n * n);
    e[j] = 1.0;
    return unvech(e, n);
}

Matrix psd_project(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    RealVector d = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

double min_eig(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

Matrix lmi_map(const Matrix& y, const Vector& lambda) {
    // i(YΛ - Λ†Y) for diagonal Λ
    Matrix x = y * lambda.asDiagonal();
    x -= lambda.conjugate().asDiagonal() * y;
    return cplx_i * x;
}

struct Factorization {
    Vector l, r;
};

Factorization starting_factorization(const QuasiModel& m) {
    if (m.has_factorization()) return {m.l, m.r};
    const Index n = m.size();
    Factorization f;
    f.l.resize(n);
    f.r.resize(n);
    bool all_pos_real = true;
    for (Index k = 0; k < n; ++k)
        if (!(std::abs(m.weights[k].imag()) <= 1e-14 * std::abs(m.weights[k]) &&
              m.weights[k].real() > 0.0))
            all_pos_real = false;
    for (Index k = 0; k < n; ++k) {
        if (all_pos_real) {
            f.l[k] = f.r[k] = std::sqrt(m.weights[k].real());
        } else {
            // balanced split of w = conj(l)·r; any split is gauge-equivalent for
            // feasibility, and equal magnitudes keep the residual geometry honest
            const double mag = std::sqrt(std::max(std::abs(m.weights[k]), 1e-300));
            f.l[k] = std::conj(m.weights[k]) / mag;
            f.r[k] = mag;
        }
    }
    return f;
}

// Gram matrix (1/T)∫_0^T (e^{-iΛt} r)(e^{-iΛt} r)† dt in closed form
Matrix bcf_gram(const Vector& lambda, const Vector& r, double T) {
    const Index n = lambda.size();
    Matrix m(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index k = 0; k < n; ++k) {
            const Complex a = -cplx_i * lambda[j] + cplx_i * std::conj(lambda[k]);
            Complex integral;
            if (std::abs(a) * T < 1e-8) integral = T * (1.0 + 0.5 * a * T);
            else integral = (std::exp(a * T) - 1.0) / a;
            m(j, k) = r[j] * std::conj(r[k]) * integral / T;
        }
    }
    return Matrix(0.5 * (m + m.adjoint()));
}

// distinct poles are required by the similarity algebra; nudge ties by 1e-12
Vector separate_poles(Vector lambda) {
    for (Index i = 0; i < lambda.size(); ++i)
        for (Index j = 0; j < i; ++j)
            if (std::abs(lambda[i] - lambda[j]) < 1e-12)
                lambda[i] += Complex(1e-12, 0.0) * double(i + 1);
    return lambda;
}

}  // namespace

namespace {

// Damped-Newton log-barrier descent for
//   min ‖B1 y - b1‖²  s.t.  Y ⪰ δI,  A(Y) ⪰ -σI
// run after ADMM has located the neighborhood of the solution. ADMM alone shows an
// O(1/k) tail here (the optimum sits on a degenerate cone boundary), which cannot
// reach 1e-10 residuals in any sane iteration budget.
struct BarrierResult {
    Matrix y;
    int iterations = 0;
    bool ok = false;
};

BarrierResult barrier_polish(const RealMatrix& b1, const RealVector& b1_rhs, const RealMatrix& b3,
                             const Vector& lambda, double delta, double sigma, Matrix y_start,
                             double tol, int max_newton) {
    const Index n = y_start.rows();
    const Index dim = n * n;
    BarrierResult res;

    auto feas = [&](const Matrix& y, double margin) {
        const double e1 = min_eig(y - delta * Matrix::Identity(n, n));
        const double e2 = min_eig(lmi_map(y, lambda)) + sigma;
        return std::min(e1, e2) > margin;
    };

    // pull the start strictly inside the cones; βI is always interior for decaying poles
    Matrix y = std::move(y_start);
    if (!feas(y, 0.0)) {
        const double beta = std::max(1.0, y.norm());
        for (double mix = 0.05; mix <= 1.0; mix *= 2.0) {
            Matrix cand = (1.0 - mix) * y + (mix * beta + 2.0 * delta) * Matrix::Identity(n, n);
            if (feas(cand, 0.0)) {
                y = cand;
                break;
            }
            if (mix * 2.0 > 1.0) return res;  // no strict interior reachable (γ = 0 modes)
        }
    }

    auto objective = [&](const RealVector& yv) { return (b1 * yv - b1_rhs).squaredNorm(); };
    RealVector yv = vech(y);
    double mu = std::max(1e-3, objective(yv) / double(4 * n));
    const double mu_final = std::max(tol / double(8 * n), 1e-13);
    int it = 0;

    auto barrier_terms = [&](const RealVector& v, double mu_now, double& f, RealVector& grad,
                             RealMatrix& hess) -> bool {
        Matrix ym = unvech(v, n);
        Matrix x1 = ym - delta * Matrix::Identity(n, n);
        Matrix x2 = lmi_map(ym, lambda) + sigma * Matrix::Identity(n, n);
        Eigen::LLT<Matrix> c1(x1), c2(x2);
        if (c1.info() != Eigen::Success || c2.info() != Eigen::Success) return false;
        Matrix x1i = c1.solve(Matrix::Identity(n, n));
        Matrix x2i = c2.solve(Matrix::Identity(n, n));
        const double ld1 = 2.0 * Matrix(c1.matrixL()).diagonal().real().array().log().sum();
        const double ld2 = 2.0 * Matrix(c2.matrixL()).diagonal().real().array().log().sum();

        RealVector obj_grad = 2.0 * b1.transpose() * (b1 * v - b1_rhs);
        f = objective(v) - mu_now * (ld1 + ld2);
        grad = obj_grad - mu_now * vech(x1i) - mu_now * (b3.transpose() * vech(x2i));

        // kernel K_X(i, j) = Re tr(X⁻¹ E_i X⁻¹ E_j) in the orthonormal Hermitian basis
        auto kernel = [&](const Matrix& xi) {
            RealMatrix k(dim, dim);
            for (Index j = 0; j < dim; ++j) {
                Matrix mj = xi * herm_basis_element(n, j) * xi;
                k.col(j) = vech(mj);
            }
            return k;
        };
        hess = 2.0 * b1.transpose() * b1 + mu_now * kernel(x1i) +
               mu_now * b3.transpose() * kernel(x2i) * b3;
        return true;
    };

    while (it < max_newton) {
        double f = 0.0;
        RealVector grad(dim);
        RealMatrix hess(dim, dim);
        if (!barrier_terms(yv, mu, f, grad, hess)) return res;
        Eigen::LDLT<RealMatrix> ldlt(hess);
        RealVector dir = -ldlt.solve(grad);
        const double decrement = -grad.dot(dir);
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 50; ++ls) {
            RealVector trial = yv + step * dir;
            Matrix ym = unvech(trial, n);
            if (feas(ym, 0.0)) {
                double ft;
                RealVector gt(dim);
                RealMatrix ht(dim, dim);
                if (barrier_terms(trial, mu, ft, gt, ht) && ft <= f - 0.25 * step * decrement) {
                    yv = trial;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        ++it;
        if (!moved || decrement < 0.5 * mu) {
            if (mu <= mu_final) break;
            mu = std::max(mu / 10.0, mu_final);
        }
    }
    res.y = unvech(yv, n);
    res.iterations = it;
    res.ok = true;
    return res;
}

}  // namespace

GaugeSolution solve_gauge_sdp(const QuasiModel& m, const SdpOptions& opts) {
    m.validate();
    const Index n = m.size();
    auto [l, r] = starting_factorization(m);
    GaugeSolution out;
    if (n == 0) {
        out.converged = true;
        return out;
    }
    Vector lambda = separate_poles(m.poles);

    const double lam_max = lambda.cwiseAbs().maxCoeff();
    const double delta = opts.delta > 0.0 ? opts.delta : 1e-8 * std::max(lam_max, 1e-8);
    const double tol = opts.tol * std::max(1.0, l.norm());

    const Index dim = n * n;
    // L²(0,T)-weighted residual: S(l - Yr) with S = (M + floor·I)^{1/2}
    Matrix s_weight = Matrix::Identity(n, n);
    if (opts.horizon > 0.0) {
        Matrix gram = bcf_gram(lambda, r, opts.horizon);
        gram += (1e-8 * gram.trace().real() / double(n) + 1e-14) * Matrix::Identity(n, n);
        s_weight = psd_sqrt(HermitianMatrix(gram));
    }

    // objective map y ↦ [Re(S·Yr); Im(S·Yr)] and constraint map y ↦ vech(i(YΛ - Λ†Y))
    RealMatrix b1(2 * n, dim), b3(dim, dim);
    for (Index j = 0; j < dim; ++j) {
        Matrix e = herm_basis_element(n, j);
        Vector er = s_weight * (e * r);
        for (Index i = 0; i < n; ++i) {
            b1(i, j) = er[i].real();
            b1(n + i, j) = er[i].imag();
        }
        b3.col(j) = vech(lmi_map(e, lambda));
    }
    Vector sl = s_weight * l;
    RealVector rhs_l(2 * n);
    for (Index i = 0; i < n; ++i) {
        rhs_l[i] = sl[i].real();
        rhs_l[n + i] = sl[i].imag();
    }
    const RealVector delta_vec = vech(delta * Matrix::Identity(n, n));

    double rho = 1.0;
    RealMatrix quad = 2.0 * b1.transpose() * b1;
    RealMatrix b3tb3 = b3.transpose() * b3;
    auto factor = [&](double rho_now) {
        RealMatrix lhs = quad + rho_now * (RealMatrix::Identity(dim, dim) + b3tb3);
        return Eigen::LLT<RealMatrix>(lhs);
    };
    Eigen::LLT<RealMatrix> llt = factor(rho);
    const RealVector lin = 2.0 * b1.transpose() * rhs_l;

    // start from the best diagonal fit of Yr = l, clipped to the cone interior
    Matrix y_mat = Matrix::Identity(n, n);
    for (Index k = 0; k < n; ++k) {
        const double rk2 = std::norm(r[k]);
        const double yk = rk2 > 1e-30 ? (l[k] * std::conj(r[k])).real() / rk2 : 1.0;
        y_mat(k, k) = std::max(yk, delta);
    }
    Matrix z1 = psd_project(y_mat - delta * Matrix::Identity(n, n));
    Matrix z2 = psd_project(lmi_map(y_mat, lambda));
    Matrix u1 = Matrix::Zero(n, n), u2 = Matrix::Zero(n, n);

    const double relax = 1.6;
    double r_pri = inf, s_dual = inf;
    // ADMM globalizes quickly but crawls on degenerate boundaries; the barrier
    // stage below finishes the job, so cap this stage well under the total budget
    const int admm_cap = std::min(opts.max_iters, 2000);
    int it = 0;
    for (; it < admm_cap; ++it) {
        RealVector rhs = lin + rho * (delta_vec + vech(z1) - vech(u1)) +
                         rho * (b3.transpose() * (vech(z2) - vech(u2)));
        RealVector yv = llt.solve(rhs);
        y_mat = unvech(yv, n);
        Matrix ay = lmi_map(y_mat, lambda);

        Matrix v1 = y_mat - delta * Matrix::Identity(n, n);
        Matrix v1_rel = relax * v1 + (1.0 - relax) * z1;
        Matrix v2_rel = relax * ay + (1.0 - relax) * z2;

        Matrix z1_prev = z1, z2_prev = z2;
        z1 = psd_project(v1_rel + u1);
        z2 = psd_project(v2_rel + u2);
        u1 += v1_rel - z1;
        u2 += v2_rel - z2;

        r_pri = std::max((v1 - z1).norm(), (ay - z2).norm());
        s_dual = rho * std::max((z1 - z1_prev).norm(), (z2 - z2_prev).norm());
        if (r_pri <= tol && s_dual <= tol) {
            ++it;
            break;
        }
        if ((it + 1) % 25 == 0) {
            if (r_pri > 10.0 * s_dual && rho < 1e8) {
                rho *= 2.0;
                u1 *= 0.5;
                u2 *= 0.5;
                llt = factor(rho);
            } else if (s_dual > 10.0 * r_pri && rho > 1e-6) {
                rho *= 0.5;
                u1 *= 2.0;
                u2 *= 2.0;
                llt = factor(rho);
            }
        }
    }

    // feasible polish: Z1 + δI is ⪰ δI exactly and within the primal residual of Y
    Matrix y_out = z1 + delta * Matrix::Identity(n, n);
    y_out = 0.5 * (y_out + y_out.adjoint());
    bool solved = r_pri <= tol && s_dual <= tol;

    if (!solved) {
        const double gamma_floor = -lambda.imag().maxCoeff();  // smallest decay rate
        const double sigma = gamma_floor > 1e-10 ? 0.0 : 1e-12 * std::max(lam_max, 1.0);
        auto polished =
            barrier_polish(b1, rhs_l, b3, lambda, delta, sigma, y_out, opts.tol,
                           std::max(50, opts.max_iters / 100));
        if (polished.ok) {
            y_out = 0.5 * (polished.y + polished.y.adjoint());
            it += polished.iterations;
            solved = true;
        }
    }

    // Exact LMI repair. A residual ε in i(YΛ - Λ†Y) ⪰ 0 gets amplified to ε/(2δ) in the
    // extracted Γ when Y touches the δ boundary, so project the LMI onto the cone and
    // invert the (diagonal-Λ) Sylvester map entrywise: Y_pq = L_pq / (i(λ_q - conj λ_p)).
    {
        Matrix lmi_clean = psd_project(lmi_map(y_out, lambda));
        Matrix y_fix = y_out;
        for (Index p = 0; p < n; ++p) {
            for (Index q = 0; q < n; ++q) {
                const Complex den = cplx_i * (lambda[q] - std::conj(lambda[p]));
                if (std::abs(den) > 1e-12) y_fix(p, q) = lmi_clean(p, q) / den;
            }
        }
        y_fix = 0.5 * (y_fix + y_fix.adjoint());
        if ((y_fix - y_out).norm() <= 0.1 * std::max(1.0, y_out.norm())) {
            // shifting by c·I adds 2c·diag(γ) ⪰ 0 to the LMI, so restoring Y ⪰ δI is safe
            const double shortfall = delta - min_eig(y_fix);
            if (shortfall > 0.0) y_fix += shortfall * Matrix::Identity(n, n);
            y_out = y_fix;
        }
    }
    out.Y = y_out;
    out.l = l;
    out.r = r;
    out.equality_residual = (Vector(l) - out.Y * r).norm();
    out.lmi_min_eig = min_eig(lmi_map(out.Y, lambda));
    out.y_min_eig = min_eig(out.Y);
    out.delta = delta;
    out.tol = opts.tol;
    out.iterations = it;
    out.converged = solved;
    if (!out.converged)
        throw SdpConvergenceError("solve_gauge_sdp: did not reach tolerance within the cap", out);
    return out;
}

CoupledModel extract_coupled(const GaugeSolution& sol, const QuasiModel& m) {
    const Index n = m.size();
    if (sol.Y.rows() != n) throw InputError("extract_coupled: size mismatch");
    CoupledModel cm;
    if (n == 0) return cm;

    auto [l, r] = starting_factorization(m);
    Vector lambda = separate_poles(m.poles);

    Eigen::SelfAdjointEigenSolver<Matrix> es(sol.Y);
    const double emin = es.eigenvalues()[0], emax = es.eigenvalues()[n - 1];
    if (!(emin > 0.0) || emax / emin > 1e12)
        throw SolverError("extract_coupled: ill-conditioned gauge (cond(Y) > 1e12)");

    Matrix x = psd_sqrt(HermitianMatrix(sol.Y));
    Eigen::PartialPivLU<Matrix> xlu(x);
    Matrix k = x * lambda.asDiagonal() * xlu.inverse();
    cm.g = x * r;
    cm.H = 0.5 * (k + k.adjoint());
    Matrix gamma = (k.adjoint() - k) / (2.0 * cplx_i);
    gamma = 0.5 * (gamma + gamma.adjoint());

    // clip the tiny negative band [-1e-10·‖Γ‖, 0) introduced by rounding
    Eigen::SelfAdjointEigenSolver<Matrix> ge(gamma);
    RealVector d = ge.eigenvalues();
    const double floor = -1e-10 * gamma.norm();
    for (Index i = 0; i < d.size(); ++i)
        if (d[i] < 0.0 && d[i] >= floor) d[i] = 0.0;
    cm.Gamma = ge.eigenvectors() * d.asDiagonal() * ge.eigenvectors().adjoint();
    cm.Gamma = 0.5 * (cm.Gamma + cm.Gamma.adjoint());
    cm.validate();
    return cm;
}

namespace {

struct KSpectral {
    Vector lambda;   // eigenvalues of K
    Vector coeff;    // (g†V)_k (V⁻¹g)_k, so C(t) = Σ coeff_k e^{-iλ_k t}
    bool usable = false;
};

KSpectral k_spectral(const CoupledModel& cm) {
    KSpectral s;
    if (cm.size() == 0) return s;
    auto eig = general_eig(cm.K());
    Eigen::PartialPivLU<Matrix> vlu(eig.right_vectors);
    const double cond_est = eig.right_vectors.norm() * vlu.inverse().norm();
    if (eig.max_residual > 1e-8 || cond_est > 1e8) return s;  // near-defective
    Vector q = vlu.solve(cm.g);
    Vector vtg = eig.right_vectors.adjoint() * cm.g;  // (V†g)_k = conj((g†V)_k)
    s.lambda = eig.values;
    s.coeff.resize(cm.size());
    for (Index k = 0; k < cm.size(); ++k) s.coeff[k] = std::conj(vtg[k]) * q[k];
    s.usable = true;
    return s;
}

}  // namespace

Complex eval_coupled_bcf_at(const CoupledModel& cm, double t) {
    if (t < 0.0) throw InputError("eval_coupled_bcf: t must be >= 0");
    if (cm.size() == 0) return {0.0, 0.0};
    auto s = k_spectral(cm);
    if (s.usable) {
        Complex acc{0.0, 0.0};
        for (Index k = 0; k < cm.size(); ++k)
            acc += s.coeff[k] * std::exp(Complex(0.0, -t) * s.lambda[k]);
        return acc;
    }
    Matrix e = (Complex(0.0, -t) * cm.K()).exp();
    return cm.g.dot(e * cm.g);
}

TimeSeries eval_coupled_bcf(const CoupledModel& cm, const RealVector& t_grid) {
    Vector values(t_grid.size());
    auto s = k_spectral(cm);
    if (cm.size() == 0) {
        values.setZero();
    } else if (s.usable) {
        for (Index i = 0; i < t_grid.size(); ++i) {
            if (t_grid[i] < 0.0) throw InputError("eval_coupled_bcf: t must be >= 0");
            Complex acc{0.0, 0.0};
            for (Index k = 0; k < cm.size(); ++k)
                acc += s.coeff[k] * std::exp(Complex(0.0, -t_grid[i]) * s.lambda[k]);
            values[i] = acc;
        }
    } else {
        // scaling-and-squaring fallback for near-defective K
        for (Index i = 0; i < t_grid.size(); ++i) {
            Matrix e = (Complex(0.0, -t_grid[i]) * cm.K()).exp();
            values[i] = cm.g.dot(e * cm.g);
        }
    }
    return TimeSeries(t_grid, std::move(values));
}

FittedDensity fitted_density(const CoupledModel& cm, const RealVector& omega_grid) {
    if (omega_grid.size() < 2) throw InputError("fitted_density: need at least 2 grid points");
    double h_radius = 0.0;
    if (cm.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cm.H + cm.H.adjoint()),
                                                 Eigen::EigenvaluesOnly);
        h_radius = es.eigenvalues().cwiseAbs().maxCoeff();
    }
    const double w_max = omega_grid.cwiseAbs().maxCoeff();
    if (w_max < 2.0 * h_radius)
        throw InputError("fitted_density: grid must bracket the support (max|omega| >= 2 rho(H))");

    RealVector values(omega_grid.size());
    auto s = k_spectral(cm);
    for (Index i = 0; i < omega_grid.size(); ++i) {
        const double w = omega_grid[i];
        Complex acc{0.0, 0.0};
        if (cm.size() == 0) {
            values[i] = 0.0;
            continue;
        }
        if (s.usable) {
            for (Index k = 0; k < cm.size(); ++k) acc += s.coeff[k] / (s.lambda[k] - w);
        } else {
            Matrix res = cm.K() - w * Matrix::Identity(cm.size(), cm.size());
            acc = cm.g.dot(res.partialPivLu().solve(cm.g));
        }
        values[i] = acc.imag();
    }

    double neg = 0.0, tot = 0.0;
    for (Index i = 0; i + 1 < omega_grid.size(); ++i) {
        const double seg =
            0.5 * (std::abs(values[i]) + std::abs(values[i + 1])) * (omega_grid[i + 1] - omega_grid[i]);
        tot += seg;
        if (omega_grid[i + 1] <= 0.0) neg += seg;
        else if (omega_grid[i] < 0.0)  // straddling panel: negative-side fraction
            neg += seg * (-omega_grid[i]) / (omega_grid[i + 1] - omega_grid[i]);
    }
    return {FreqSeries(omega_grid, std::move(values)), tot > 0.0 ? neg / tot : 0.0};
}

PhysicalityReport physicality_check(const CoupledModel& cm) {
    PhysicalityReport rep;
    if (cm.size() == 0) {
        rep.pass = true;
        return rep;
    }
    rep.hermiticity_defect = std::max(HermitianMatrix::hermiticity_defect(cm.H),
                                      HermitianMatrix::hermiticity_defect(cm.Gamma));
    rep.gamma_min_eig = min_eig(cm.Gamma);
    rep.bcf_t0_imag = std::abs(eval_coupled_bcf_at(cm, 0.0).imag());
    const double h_scale = 1.0 + cm.H.cwiseAbs().maxCoeff();
    const double c0 = std::abs(eval_coupled_bcf_at(cm, 0.0));
    rep.pass = rep.hermiticity_defect <= 1e-12 * h_scale &&
               rep.gamma_min_eig >= -1e-10 * (1.0 + cm.Gamma.norm()) &&
               rep.bcf_t0_imag <= 1e-12 * (1.0 + c0);
    return rep;
}

// ---------------------------------------------------------------------------
// time-domain refinement over the always-physical chart (g, H, Γ = LL†)
// ---------------------------------------------------------------------------

namespace refine {

Point from_model(const CoupledModel& cm) {
    Point p;
    p.g = cm.g;
    p.H = 0.5 * (cm.H + cm.H.adjoint());
    const Index n = cm.size();
    // Γ = U√d (U√d)† = (QR)-route lower factor with real diagonal
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cm.Gamma + cm.Gamma.adjoint()));
    RealVector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix a = es.eigenvectors() * d.asDiagonal();
    Eigen::HouseholderQR<Matrix> qr(a.adjoint());
    Matrix rfac = qr.matrixQR().triangularView<Eigen::Upper>();
    Matrix lfac = rfac.adjoint();
    for (Index k = 0; k < n; ++k) {  // absorb column phases so diag(L) is real ≥ 0
        const Complex lkk = lfac(k, k);
        if (std::abs(lkk) > 0.0) lfac.col(k) *= std::conj(lkk) / std::abs(lkk);
    }
    p.L = lfac.triangularView<Eigen::Lower>();
    return p;
}

CoupledModel to_model(const Point& p) {
    CoupledModel cm;
    cm.g = p.g;
    cm.H = 0.5 * (p.H + p.H.adjoint());
    cm.Gamma = p.L * p.L.adjoint();
    cm.Gamma = 0.5 * (cm.Gamma + cm.Gamma.adjoint());
    return cm;
}

RealVector pack(const Point& p) {
    const Index n = p.g.size();
    RealVector th(2 * n + n * n + n * n);
    Index idx = 0;
    for (Index i = 0; i < n; ++i) th[idx++] = p.g[i].real();
    for (Index i = 0; i < n; ++i) th[idx++] = p.g[i].imag();
    for (Index i = 0; i < n; ++i) th[idx++] = p.H(i, i).real();
    for (Index a = 0; a < n; ++a)
        for (Index b = a + 1; b < n; ++b) {
            th[idx++] = p.H(a, b).real();
            th[idx++] = p.H(a, b).imag();
        }
    for (Index i = 0; i < n; ++i) th[idx++] = p.L(i, i).real();
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < a; ++b) {
            th[idx++] = p.L(a, b).real();
            th[idx++] = p.L(a, b).imag();
        }
    return th;
}

Point unpack(const RealVector& th, Index n) {
    Point p;
    p.g.resize(n);
    p.H = Matrix::Zero(n, n);
    p.L = Matrix::Zero(n, n);
    Index idx = 0;
    for (Index i = 0; i < n; ++i) p.g[i] = Complex(th[idx++], 0.0);
    for (Index i = 0; i < n; ++i) p.g[i] += Complex(0.0, th[idx++]);
    for (Index i = 0; i < n; ++i) p.H(i, i) = th[idx++];
    for (Index a = 0; a < n; ++a)
        for (Index b = a + 1; b < n; ++b) {
            const double re = th[idx++], im = th[idx++];
            p.H(a, b) = Complex(re, im);
            p.H(b, a) = Complex(re, -im);
        }
    for (Index i = 0; i < n; ++i) p.L(i, i) = th[idx++];
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < a; ++b) {
            const double re = th[idx++], im = th[idx++];
            p.L(a, b) = Complex(re, im);
        }
    return p;
}

namespace {

struct ObjectiveData {
    double value = 0.0;
    bool usable = false;  // false when K is too close to defective for the spectral path
    // spectral pieces reused by the gradient
    Vector lambda, p_row, q_col;
    Matrix v, v_inv;
    Vector s_weights;  // s_i = (2/T) u_i conj(e_i)
};

ObjectiveData objective_data(const Point& pt, const TimeSeries& target) {
    ObjectiveData d;
    const Index n = pt.g.size();
    const Matrix k = pt.H - cplx_i * (pt.L * pt.L.adjoint());
    auto eig = general_eig(k);
    Eigen::PartialPivLU<Matrix> vlu(eig.right_vectors);
    Matrix v_inv = vlu.inverse();
    if (eig.max_residual > 1e-8 || eig.right_vectors.norm() * v_inv.norm() > 1e10) return d;

    d.lambda = eig.values;
    d.v = eig.right_vectors;
    d.v_inv = std::move(v_inv);
    d.q_col = d.v_inv * pt.g;
    d.p_row.resize(n);
    Vector vtg = d.v.adjoint() * pt.g;
    for (Index i = 0; i < n; ++i) d.p_row[i] = std::conj(vtg[i]);  // (g†V)_k

    const RealVector& t = target.grid;
    const double T = t[t.size() - 1];
    const Index m = t.size();
    d.s_weights.resize(m);
    double acc = 0.0;
    for (Index i = 0; i < m; ++i) {
        Complex c{0.0, 0.0};
        for (Index kk = 0; kk < n; ++kk)
            c += d.p_row[kk] * d.q_col[kk] * std::exp(Complex(0.0, -t[i]) * d.lambda[kk]);
        const Complex e = c - target.values[i];
        double u = 0.0;
        if (i > 0) u += 0.5 * (t[i] - t[i - 1]);
        if (i + 1 < m) u += 0.5 * (t[i + 1] - t[i]);
        acc += u * std::norm(e);
        d.s_weights[i] = (2.0 / T) * u * std::conj(e);
    }
    d.value = acc / T;
    d.usable = true;
    return d;
}

}  // namespace

double objective(const Point& pt, const TimeSeries& target) {
    auto d = objective_data(pt, target);
    if (d.usable) return d.value;
    // defective-K fallback: direct expm evaluation
    const Matrix k = pt.H - cplx_i * (pt.L * pt.L.adjoint());
    const RealVector& t = target.grid;
    const double T = t[t.size() - 1];
    double acc = 0.0;
    for (Index i = 0; i < t.size(); ++i) {
        Matrix e = (Complex(0.0, -t[i]) * k).exp();
        const Complex c = pt.g.dot(e * pt.g) - target.values[i];
        double u = 0.0;
        if (i > 0) u += 0.5 * (t[i] - t[i - 1]);
        if (i + 1 < t.size()) u += 0.5 * (t[i + 1] - t[i]);
        acc += u * std::norm(c);
    }
    return acc / T;
}

RealVector gradient(const Point& pt, const TimeSeries& target) {
    const Index n = pt.g.size();
    auto d = objective_data(pt, target);
    if (!d.usable) throw SolverError("refine gradient: K too close to defective");

    const RealVector& t = target.grid;
    const Index m = t.size();

    // ν_k = Σ_i s_i e^{-iλ_k t_i}, Φ̄_kl = Σ_i s_i f[λ_k,λ_l](t_i)
    Vector nu = Vector::Zero(n);
    Matrix phibar = Matrix::Zero(n, n);
    for (Index i = 0; i < m; ++i) {
        Vector u(n);
        for (Index k = 0; k < n; ++k) u[k] = std::exp(Complex(0.0, -t[i]) * d.lambda[k]);
        nu += d.s_weights[i] * u;
        for (Index k = 0; k < n; ++k) {
            for (Index l = 0; l < n; ++l) {
                const Complex dl = d.lambda[k] - d.lambda[l];
                Complex f;
                if (std::abs(dl) > 1e-9 * (1.0 + std::abs(d.lambda[k])))
                    f = (u[k] - u[l]) / dl;
                else
                    f = Complex(0.0, -t[i]) * u[k];
                phibar(k, l) += d.s_weights[i] * f;
            }
        }
    }

    // K-adjoint: Ḡ = V⁻ᵀ ((p qᵀ) ∘ Φ̄) Vᵀ, so dφ = Re Σ_pq Ḡ_pq dK_pq
    Matrix w = Matrix(n, n);
    for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) w(k, l) = d.p_row[k] * d.q_col[l] * phibar(k, l);
    Matrix gbar = d.v_inv.transpose() * w * d.v.transpose();

    // g-adjoints: ᾱ = V(ν ∘ q), ζ̄ = V⁻ᵀ(p ∘ ν)
    Vector alpha_bar = d.v * (nu.cwiseProduct(d.q_col));
    Vector zeta_bar = d.v_inv.transpose() * (d.p_row.cwiseProduct(nu));

    RealVector th = pack(pt);
    RealVector grad = RealVector::Zero(th.size());
    Index idx = 0;
    for (Index j = 0; j < n; ++j) grad[idx++] = (alpha_bar[j] + zeta_bar[j]).real();
    for (Index j = 0; j < n; ++j) grad[idx++] = (cplx_i * (zeta_bar[j] - alpha_bar[j])).real();
    // H block: dK = dH
    for (Index i = 0; i < n; ++i) grad[idx++] = gbar(i, i).real();
    for (Index a = 0; a < n; ++a)
        for (Index b = a + 1; b < n; ++b) {
            grad[idx++] = (gbar(a, b) + gbar(b, a)).real();
            grad[idx++] = (cplx_i * (gbar(a, b) - gbar(b, a))).real();
        }
    // L block: dK = -i(dL L† + L dL†)
    auto l_deriv = [&](Index a, Index b, bool imag_part) {
        Complex t1{0.0, 0.0}, t2{0.0, 0.0};
        for (Index q = 0; q < n; ++q) t1 += gbar(a, q) * std::conj(pt.L(q, b));
        for (Index p = 0; p < n; ++p) t2 += gbar(p, a) * pt.L(p, b);
        if (!imag_part) return (-cplx_i * (t1 + t2)).real();
        return (t1 - t2).real();
    };
    for (Index i = 0; i < n; ++i) grad[idx++] = l_deriv(i, i, false);
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < a; ++b) {
            grad[idx++] = l_deriv(a, b, false);
            grad[idx++] = l_deriv(a, b, true);
        }
    return grad;
}

}  // namespace refine

namespace {

// residuals r (stacked weighted Re/Im misfits, φ = ‖r‖²) and their Jacobian in the
// (g, H, L) chart, from the same eigendecomposition differential as refine::gradient
bool refine_residuals(const refine::Point& pt, const TimeSeries& target, RealVector& r,
                      RealMatrix* jac) {
    const Index n = pt.g.size();
    const RealVector& t = target.grid;
    const Index m = t.size();
    const double T = t[m - 1];

    const Matrix k = pt.H - cplx_i * (pt.L * pt.L.adjoint());
    auto eig = general_eig(k);
    Eigen::PartialPivLU<Matrix> vlu(eig.right_vectors);
    Matrix v_inv = vlu.inverse();
    if (eig.max_residual > 1e-8 || eig.right_vectors.norm() * v_inv.norm() > 1e10) return false;
    const Vector& lam = eig.values;
    const Matrix& v = eig.right_vectors;
    Vector q = v_inv * pt.g;
    Vector p(n);
    {
        Vector vtg = v.adjoint() * pt.g;
        for (Index i = 0; i < n; ++i) p[i] = std::conj(vtg[i]);  // (g†V)_k
    }

    r.resize(2 * m);
    const Index n_params = 2 * n + n * n + n * n;
    if (jac) jac->setZero(2 * m, n_params);

    Matrix v_invT = v_inv.transpose();
    Matrix vT = v.transpose();

    for (Index i = 0; i < m; ++i) {
        Vector u(n);
        for (Index kk = 0; kk < n; ++kk) u[kk] = std::exp(Complex(0.0, -t[i]) * lam[kk]);
        Complex c{0.0, 0.0};
        for (Index kk = 0; kk < n; ++kk) c += p[kk] * q[kk] * u[kk];
        double w = 0.0;
        if (i > 0) w += 0.5 * (t[i] - t[i - 1]);
        if (i + 1 < m) w += 0.5 * (t[i + 1] - t[i]);
        const double sw = std::sqrt(w / T);
        const Complex e = c - target.values[i];
        r[2 * i] = sw * e.real();
        r[2 * i + 1] = sw * e.imag();
        if (!jac) continue;

        // per-time K-adjoint G_i and g-sensitivities α_i = E g, ζ_i = (g†E) row
        Matrix phi(n, n);
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b) {
                const Complex dl = lam[a] - lam[b];
                phi(a, b) = std::abs(dl) > 1e-9 * (1.0 + std::abs(lam[a]))
                                ? (u[a] - u[b]) / dl
                                : Complex(0.0, -t[i]) * u[a];
            }
        Matrix w_mat(n, n);
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b) w_mat(a, b) = p[a] * q[b] * phi(a, b);
        Matrix gmat = v_invT * w_mat * vT;  // dC = Σ_pq G_pq dK_pq
        Vector alpha = v * (u.cwiseProduct(q));
        Vector zeta = v_invT * (p.cwiseProduct(u));

        Index idx = 0;
        auto put = [&](Complex dc) {
            (*jac)(2 * i, idx) = sw * dc.real();
            (*jac)(2 * i + 1, idx) = sw * dc.imag();
            ++idx;
        };
        for (Index j = 0; j < n; ++j) put(alpha[j] + zeta[j]);
        for (Index j = 0; j < n; ++j) put(cplx_i * (zeta[j] - alpha[j]));
        for (Index a = 0; a < n; ++a) put(gmat(a, a));
        for (Index a = 0; a < n; ++a)
            for (Index b = a + 1; b < n; ++b) {
                put(gmat(a, b) + gmat(b, a));
                put(cplx_i * (gmat(a, b) - gmat(b, a)));
            }
        auto l_col = [&](Index aa, Index bb, bool imag_part) {
            Complex t1{0.0, 0.0}, t2{0.0, 0.0};
            for (Index qq = 0; qq < n; ++qq) t1 += gmat(aa, qq) * std::conj(pt.L(qq, bb));
            for (Index pp = 0; pp < n; ++pp) t2 += gmat(pp, aa) * pt.L(pp, bb);
            return imag_part ? (t1 - t2) : (-cplx_i * (t1 + t2));
        };
        for (Index a = 0; a < n; ++a) put(l_col(a, a, false));
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < a; ++b) {
                put(l_col(a, b, false));
                put(l_col(a, b, true));
            }
    }
    return true;
}

// LM over the CP chart; returns iterations used, point updated in place
int lm_cp_chart(refine::Point& pt, const TimeSeries& target, int max_iters) {
    const Index n = pt.g.size();
    RealVector resid;
    RealMatrix jac;
    if (!refine_residuals(pt, target, resid, &jac)) return 0;
    double f = resid.squaredNorm();
    double lm = 1e-4;
    RealVector theta = refine::pack(pt);
    int it = 0;
    for (; it < max_iters; ++it) {
        RealMatrix jtj = jac.transpose() * jac;
        RealVector jtr = jac.transpose() * resid;
        if (jtr.norm() <= 1e-15 * (1.0 + f)) break;
        bool accepted = false;
        for (int trial = 0; trial < 25; ++trial) {
            RealMatrix damped = jtj;
            damped.diagonal().array() += lm * (jtj.diagonal().array() + 1e-12);
            RealVector step = -Eigen::LDLT<RealMatrix>(damped).solve(jtr);
            RealVector theta_new = theta + step;
            refine::Point cand = refine::unpack(theta_new, n);
            RealVector resid_new;
            if (refine_residuals(cand, target, resid_new, nullptr) &&
                resid_new.squaredNorm() < f) {
                theta = theta_new;
                pt = cand;
                f = resid_new.squaredNorm();
                lm = std::max(lm / 3.0, 1e-14);
                accepted = true;
                break;
            }
            lm *= 4.0;
            if (lm > 1e14) break;
        }
        if (!accepted) break;
        if (!refine_residuals(pt, target, resid, &jac)) break;
    }
    return it;
}

// unconstrained-Γ chart for the penalty continuation
struct FreePoint {
    Vector g;
    Matrix H;  // Hermitian
    Matrix G;  // Hermitian, possibly indefinite
};

Index free_n_params(Index n) { return 2 * n + 2 * n * n; }

RealVector free_pack(const FreePoint& p) {
    const Index n = p.g.size();
    RealVector th(free_n_params(n));
    Index i = 0;
    for (Index k = 0; k < n; ++k) th[i++] = p.g[k].real();
    for (Index k = 0; k < n; ++k) th[i++] = p.g[k].imag();
    auto herm = [&](const Matrix& m) {
        for (Index k = 0; k < n; ++k) th[i++] = m(k, k).real();
        for (Index a = 0; a < n; ++a)
            for (Index b = a + 1; b < n; ++b) {
                th[i++] = m(a, b).real();
                th[i++] = m(a, b).imag();
            }
    };
    herm(p.H);
    herm(p.G);
    return th;
}

FreePoint free_unpack(const RealVector& th, Index n) {
    FreePoint p;
    p.g.resize(n);
    Index i = 0;
    for (Index k = 0; k < n; ++k) p.g[k] = th[i++];
    for (Index k = 0; k < n; ++k) p.g[k] += cplx_i * th[i++];
    auto herm = [&]() {
        Matrix m = Matrix::Zero(n, n);
        for (Index k = 0; k < n; ++k) m(k, k) = th[i++];
        for (Index a = 0; a < n; ++a)
            for (Index b = a + 1; b < n; ++b) {
                const double re = th[i++], im = th[i++];
                m(a, b) = Complex(re, im);
                m(b, a) = Complex(re, -im);
            }
        return m;
    };
    p.H = herm();
    p.G = herm();
    return p;
}

// misfit residuals plus √c·min(eig Γ, 0) penalty rows
bool free_residuals(const FreePoint& pt, const TimeSeries& target, double cpen, RealVector& r,
                    RealMatrix* jac) {
    const Index n = pt.g.size();
    const RealVector& t = target.grid;
    const Index m = t.size();
    const double T = t[m - 1];
    const Matrix k = pt.H - cplx_i * pt.G;
    auto eig = general_eig(k);
    Eigen::PartialPivLU<Matrix> vlu(eig.right_vectors);
    Matrix v_inv = vlu.inverse();
    if (eig.max_residual > 1e-8 || eig.right_vectors.norm() * v_inv.norm() > 1e10) return false;
    const Vector& lam = eig.values;
    const Matrix& v = eig.right_vectors;
    Vector q = v_inv * pt.g;
    Vector p(n);
    {
        Vector vtg = v.adjoint() * pt.g;
        for (Index i = 0; i < n; ++i) p[i] = std::conj(vtg[i]);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> ges(0.5 * (pt.G + pt.G.adjoint()));

    r.resize(2 * m + n);
    if (jac) jac->setZero(2 * m + n, free_n_params(n));
    Matrix v_invT = v_inv.transpose();
    Matrix vT = v.transpose();
    for (Index i = 0; i < m; ++i) {
        Vector u(n);
        for (Index kk = 0; kk < n; ++kk) u[kk] = std::exp(Complex(0.0, -t[i]) * lam[kk]);
        Complex c{0.0, 0.0};
        for (Index kk = 0; kk < n; ++kk) c += p[kk] * q[kk] * u[kk];
        double w = 0.0;
        if (i > 0) w += 0.5 * (t[i] - t[i - 1]);
        if (i + 1 < m) w += 0.5 * (t[i + 1] - t[i]);
        const double sw = std::sqrt(w / T);
        const Complex e = c - target.values[i];
        r[2 * i] = sw * e.real();
        r[2 * i + 1] = sw * e.imag();
        if (!jac) continue;
        Matrix phi(n, n);
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b) {
                const Complex dl = lam[a] - lam[b];
                phi(a, b) = std::abs(dl) > 1e-9 * (1.0 + std::abs(lam[a]))
                                ? (u[a] - u[b]) / dl
                                : Complex(0.0, -t[i]) * u[a];
            }
        Matrix w_mat(n, n);
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b) w_mat(a, b) = p[a] * q[b] * phi(a, b);
        Matrix gmat = v_invT * w_mat * vT;
        Vector alpha = v * (u.cwiseProduct(q));
        Vector zeta = v_invT * (p.cwiseProduct(u));
        Index idx = 0;
        auto put = [&](Complex dc) {
            (*jac)(2 * i, idx) = sw * dc.real();
            (*jac)(2 * i + 1, idx) = sw * dc.imag();
            ++idx;
        };
        for (Index j = 0; j < n; ++j) put(alpha[j] + zeta[j]);
        for (Index j = 0; j < n; ++j) put(cplx_i * (zeta[j] - alpha[j]));
        for (Index a = 0; a < n; ++a) put(gmat(a, a));  // dK = dH
        for (Index a = 0; a < n; ++a)
            for (Index b = a + 1; b < n; ++b) {
                put(gmat(a, b) + gmat(b, a));
                put(cplx_i * (gmat(a, b) - gmat(b, a)));
            }
        for (Index a = 0; a < n; ++a) put(-cplx_i * gmat(a, a));  // dK = -i dG
        for (Index a = 0; a < n; ++a)
            for (Index b = a + 1; b < n; ++b) {
                put(-cplx_i * (gmat(a, b) + gmat(b, a)));
                put(gmat(a, b) - gmat(b, a));
            }
    }
    const double sc = std::sqrt(cpen);
    for (Index kk = 0; kk < n; ++kk) {
        const double ev = ges.eigenvalues()[kk];
        r[2 * m + kk] = ev < 0.0 ? sc * ev : 0.0;
        if (jac && ev < 0.0) {
            Vector uk = ges.eigenvectors().col(kk);
            Index idx = 2 * n + n * n;  // start of the G block
            for (Index a = 0; a < n; ++a) (*jac)(2 * m + kk, idx++) = sc * std::norm(uk[a]);
            for (Index a = 0; a < n; ++a)
                for (Index b = a + 1; b < n; ++b) {
                    const Complex prod = std::conj(uk[a]) * uk[b];
                    (*jac)(2 * m + kk, idx++) = sc * 2.0 * prod.real();
                    (*jac)(2 * m + kk, idx++) = sc * (-2.0) * prod.imag();
                }
        }
    }
    return true;
}

int lm_free_chart(FreePoint& pt, const TimeSeries& target, double cpen, int max_iters) {
    const Index n = pt.g.size();
    RealVector resid;
    RealMatrix jac;
    if (!free_residuals(pt, target, cpen, resid, &jac)) return 0;
    double f = resid.squaredNorm();
    double lm = 1e-6;
    RealVector theta = free_pack(pt);
    int it = 0;
    for (; it < max_iters; ++it) {
        RealMatrix jtj = jac.transpose() * jac;
        RealVector jtr = jac.transpose() * resid;
        bool accepted = false;
        for (int trial = 0; trial < 25; ++trial) {
            RealMatrix damped = jtj;
            damped.diagonal().array() += lm * (jtj.diagonal().array() + 1e-12);
            RealVector step = -Eigen::LDLT<RealMatrix>(damped).solve(jtr);
            RealVector theta_new = theta + step;
            FreePoint cand = free_unpack(theta_new, n);
            RealVector resid_new;
            if (free_residuals(cand, target, cpen, resid_new, nullptr) &&
                resid_new.squaredNorm() < f) {
                theta = theta_new;
                pt = cand;
                f = resid_new.squaredNorm();
                lm = std::max(lm / 3.0, 1e-14);
                accepted = true;
                break;
            }
            lm *= 4.0;
            if (lm > 1e15) break;
        }
        if (!accepted) break;
        if (!free_residuals(pt, target, cpen, resid, &jac)) break;
    }
    return it;
}

}  // namespace

RefineResult refine_time_domain(const CoupledModel& cm, const TimeSeries& target,
                                const RefineOptions& opts) {
    cm.validate();
    if (target.size() < 2) throw InputError("refine_time_domain: target too short");
    if (std::abs(target.grid[0]) > 1e-12)
        throw InputError("refine_time_domain: target grid must start at 0");

    RefineResult out;
    refine::Point pt = refine::from_model(cm);
    const Index n = cm.size();
    double f = refine::objective(pt, target);
    out.initial_error = std::sqrt(f);
    if (n == 0) {
        out.model = cm;
        out.final_error = out.initial_error;
        return out;
    }

    int iters = 0;
    CoupledModel best = cm;
    double best_err = out.initial_error;
    auto consider = [&](const CoupledModel& cand) {
        const double err = std::sqrt(refine::objective(refine::from_model(cand), target));
        if (err < best_err) {
            best_err = err;
            best = cand;
        }
    };

    // stage 1: LM in the CP chart
    {
        refine::Point work = pt;
        iters += lm_cp_chart(work, target, opts.max_iters);
        consider(refine::to_model(work));
    }

    // stage 2: penalty continuation through the indefinite-Γ chart, then re-polish
    if (opts.continuation) {
        FreePoint free_pt{best.g, best.H, best.Gamma};
        double cpen = 3e-2 * (1.0 + f);
        const double cpen_max = 1e11 * (1.0 + f);
        while (cpen < cpen_max) {
            iters += lm_free_chart(free_pt, target, cpen, std::max(60, opts.max_iters / 8));
            cpen *= 3.0;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (free_pt.G + free_pt.G.adjoint()));
        Matrix gpos = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                      es.eigenvectors().adjoint();
        CoupledModel clipped;
        clipped.g = free_pt.g;
        clipped.H = 0.5 * (free_pt.H + free_pt.H.adjoint());
        clipped.Gamma = 0.5 * (gpos + gpos.adjoint());
        refine::Point work = refine::from_model(clipped);
        iters += lm_cp_chart(work, target, opts.max_iters);
        consider(refine::to_model(work));
    }

    out.iterations = iters;
    out.final_error = best_err;
    out.model = best;
    out.model.validate();
    return out;
}

}  // namespace pseudofit
