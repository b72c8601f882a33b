// quadrature.hpp — Adaptive Gauss–Kronrod panels with oscillation-aware splitting
//
// The driver below integrates f(x)·e^{-i x t} over finite panels. Initial panels are
// capped at half an oscillation period so the (G7, K15) error estimate stays honest
// on oscillatory integrands; bisection does the rest.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pseudofit/types.hpp"

namespace pseudofit::quad {

// 15-point Kronrod nodes/weights on [-1, 1] and the embedded 7-point Gauss weights.
// Nodes are symmetric; only the nonnegative half is tabulated.
inline constexpr double kron_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kron_weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gauss_weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelEstimate {
    Complex value;
    double error;
};

// (K15, |K15 - G7|) on [a, b]
template <typename F>
PanelEstimate gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    Complex kron = kron_weights[7] * f(c);
    Complex gauss = gauss_weights[3] * f(c);
    for (int i = 0; i < 7; ++i) {
        const Complex fp = f(c + h * kron_nodes[i]);
        const Complex fm = f(c - h * kron_nodes[i]);
        kron += kron_weights[i] * (fp + fm);
        if (i % 2 == 1) gauss += gauss_weights[i / 2] * (fp + fm);
    }
    kron *= h;
    gauss *= h;
    return {kron, std::abs(kron - gauss)};
}

struct QuadResult {
    Complex value{0.0, 0.0};
    double error = 0.0;
    bool converged = true;
};

// Adaptive integral of f over [a, b] to absolute tolerance abs_tol.
// max_period caps the initial panel width (pass inf for smooth integrands).
template <typename F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                              double max_width = inf, int max_panels = 200000) {
    struct Panel {
        double a, b, error;
        Complex value;
    };
    if (!(b > a)) return {};

    std::vector<Panel> heap;
    const double width0 = std::min(max_width, b - a);
    const int n0 = std::max(1, int(std::ceil((b - a) / width0)));
    heap.reserve(size_t(n0) + 64);
    double x = a;
    const double h0 = (b - a) / double(n0);
    for (int i = 0; i < n0; ++i) {
        const double x1 = (i == n0 - 1) ? b : x + h0;
        auto est = gk15(f, x, x1);
        heap.push_back({x, x1, est.error, est.value});
        x = x1;
    }
    auto cmp = [](const Panel& p, const Panel& q) { return p.error < q.error; };
    std::make_heap(heap.begin(), heap.end(), cmp);

    double total_error = 0.0;
    for (const auto& p : heap) total_error += p.error;

    while (total_error > abs_tol && int(heap.size()) < max_panels) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        Panel worst = heap.back();
        heap.pop_back();
        if (worst.b - worst.a < 1e-15 * std::max(1.0, std::abs(worst.a))) {
            // cannot refine further; keep the panel and give up on it
            heap.push_back(worst);
            std::push_heap(heap.begin(), heap.end(), cmp);
            break;
        }
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = gk15(f, worst.a, mid);
        auto right = gk15(f, mid, worst.b);
        total_error += left.error + right.error - worst.error;
        heap.push_back({worst.a, mid, left.error, left.value});
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back({mid, worst.b, right.error, right.value});
        std::push_heap(heap.begin(), heap.end(), cmp);
    }

    QuadResult out;
    // compensated sum, smallest panels first to curb cancellation
    std::sort(heap.begin(), heap.end(),
              [](const Panel& p, const Panel& q) { return std::abs(p.value) < std::abs(q.value); });
    for (const auto& p : heap) out.value += p.value;
    out.error = total_error;
    out.converged = total_error <= abs_tol;
    return out;
}

// ∫_a^b g(x) e^{-i x t} dx with panel width tied to the oscillation period 2π/|t|.
template <typename G>
QuadResult fourier_panel(G&& g, double a, double b, double t, double abs_tol) {
    const double period = 2.0 * M_PI / std::max(std::abs(t), 1e-300);
    auto f = [&](double x) { return g(x) * std::exp(Complex(0.0, -x * t)); };
    return integrate_adaptive(f, a, b, abs_tol, 0.5 * period);
}

// ∫_a^∞ g(x) e^{-i x t} dx for decaying g: geometric panel extension [L, 2L], ...
// tail_bound(L) must bound ∫_L^∞ |g|; extension stops once it certifies abs_tol.
template <typename G, typename TailBound>
QuadResult fourier_semi_infinite(G&& g, double a, double t, double abs_tol, TailBound&& tail_bound,
                                 double first_width = 16.0) {
    QuadResult total;
    double lo = a;
    double width = first_width;
    const double tol_here = 0.5 * abs_tol;
    int chunk = 0;
    while (true) {
        const double hi = lo + width;
        auto part = fourier_panel(g, lo, hi, t, tol_here / std::pow(2.0, chunk + 1));
        total.value += part.value;
        total.error += part.error;
        total.converged = total.converged && part.converged;
        lo = hi;
        width *= 2.0;
        ++chunk;
        const double rest = tail_bound(lo);
        if (rest < 0.5 * abs_tol) {
            total.error += rest;
            break;
        }
        if (chunk > 60) {
            total.converged = false;
            break;
        }
    }
    return total;
}

}  // namespace pseudofit::quad
