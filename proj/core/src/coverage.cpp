// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#include "uavcov/coverage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "uavcov/errors.hpp"
#include "uavcov/parallel.hpp"
#include "uavcov/quadrature.hpp"
#include "uavcov/special_functions.hpp"

namespace uavcov {

const char* to_string(InterferenceKind k) {
    switch (k) {
        case InterferenceKind::uav_to_uav: return "uav_to_uav";
        case InterferenceKind::gue_to_uav: return "gue_to_uav";
        case InterferenceKind::uav_to_bs: return "uav_to_bs";
        case InterferenceKind::gue_to_bs: return "gue_to_bs";
    }
    return "?";
}

double CoverageCurve::threshold_at(double level) const {
    for (std::size_t i = 0; i + 1 < coverage.size(); ++i) {
        const double a = coverage[i], b = coverage[i + 1];
        if ((a >= level && b <= level) || (a <= level && b >= level)) {
            if (a == b) return threshold_db[i];
            return threshold_db[i] +
                   (level - a) * (threshold_db[i + 1] - threshold_db[i]) / (b - a);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {

void atomic_max(std::atomic<double>& target, double value) {
    double cur = target.load(std::memory_order_relaxed);
    while (value > cur &&
           !target.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
    }
}

/// Precomputed interference-path table: per-cell condition probability and
/// victim gain, plus edge powers of d^2 so the kernel runs without pow().
struct CellTable {
    double beta = 0.0;
    int m = 1;
    double tau_hat = 1.0;
    double h2 = 0.0;
    double cell_w = 0.0;
    std::size_t n_cells = 0;  // explicitly summed cells
    std::size_t n_los = 0;    // cells where p still varies (no early stop before)
    bool has_gain = false;
    std::vector<double> p;     // [n_cells]
    std::vector<double> gain;  // [n_cells + 1], per left edge; empty if !has_gain
    std::vector<double> d2, d2_pow, d2_pow_m1;  // [n_cells + 1] edges
};

struct SumDiag {
    double tail_fraction = 0.0;
};

double edge_psi(const CellTable& t, std::size_t edge, double u) {
    return psi_kernel_pre(u, t.d2[edge], t.d2_pow[edge], t.d2_pow_m1[edge], t.m, t.beta);
}

/// Forward step sum from `first_cell` (optionally entering it at x > left
/// edge) with the exact far-field tail -p * Psi at the stopping edge.
double cell_sum(const CellTable& t, double s_y, double p_x, std::size_t first_cell,
                double x_partial, double stop_rel, SumDiag* diag) {
    if (s_y <= 0.0 || p_x <= 0.0) return 0.0;
    const double inv_beta = 1.0 / t.beta;
    const double base_u = s_y / t.tau_hat * p_x;

    auto cell_u = [&](std::size_t cell) {
        return t.has_gain ? base_u * t.gain[std::min(cell, t.n_cells)] : base_u;
    };

    double acc = 0.0;
    std::size_t i = first_cell;
    if (i >= t.n_cells) {
        // Entirely in the persisted-p far field.
        const double u = cell_u(i);
        double psi_start;
        if (x_partial > 0.0) {
            const double d2 = x_partial * x_partial + t.h2;
            psi_start = psi_kernel_pre(u, d2, std::pow(d2, inv_beta),
                                       std::pow(d2, inv_beta - 1.0), t.m, t.beta);
        } else {
            psi_start = edge_psi(t, t.n_cells, u);
        }
        if (diag) diag->tail_fraction = 1.0;
        return t.p.back() * (0.0 - psi_start);
    }

    double psi_lo;
    if (x_partial > 0.0) {
        const double d2 = x_partial * x_partial + t.h2;
        psi_lo = psi_kernel_pre(cell_u(i), d2, std::pow(d2, inv_beta),
                                std::pow(d2, inv_beta - 1.0), t.m, t.beta);
    } else {
        psi_lo = edge_psi(t, i, cell_u(i));
    }

    int below = 0;
    for (; i < t.n_cells; ++i) {
        const double u = cell_u(i);
        // With per-cell gain the kernel argument changes at every cell, so the
        // shared edge must be re-evaluated; otherwise the previous upper edge
        // is reused.
        const double lo =
            (t.has_gain && i != first_cell) ? edge_psi(t, i, u) : psi_lo;
        const double hi = edge_psi(t, i + 1, u);
        const double term = t.p[i] * (hi - lo);
        acc += term;
        psi_lo = hi;
        if (i >= t.n_los && stop_rel > 0.0) {
            if (std::abs(term) < stop_rel * std::abs(acc)) {
                if (++below >= 3) {
                    ++i;
                    break;
                }
            } else {
                below = 0;
            }
        }
    }

    // Exact remainder under persisted p and frozen gain: Psi(inf) = 0.
    const double u_tail = cell_u(i);
    const double psi_tail = edge_psi(t, std::min(i, t.n_cells), u_tail);
    const double tail = t.p[std::min(i, t.n_cells - 1)] * (0.0 - psi_tail);
    acc += tail;
    if (diag && acc != 0.0) diag->tail_fraction = std::abs(tail) / std::abs(acc);
    return acc;
}

CellTable make_cell_table(const StepSumTable& in) {
    CellTable t;
    t.beta = in.beta;
    t.m = in.m;
    t.tau_hat = in.tau_hat;
    t.h2 = in.h2;
    t.cell_w = in.cell_width;
    t.n_cells = in.p.size();
    t.n_los = in.p.size();
    t.p = in.p;
    t.has_gain = !in.gain.empty();
    if (t.has_gain) {
        t.gain = in.gain;
        t.gain.resize(t.n_cells + 1, in.gain.back());
    }
    t.d2.resize(t.n_cells + 1);
    t.d2_pow.resize(t.n_cells + 1);
    t.d2_pow_m1.resize(t.n_cells + 1);
    for (std::size_t e = 0; e <= t.n_cells; ++e) {
        const double r = e * t.cell_w;
        t.d2[e] = r * r + t.h2;
        if (t.d2[e] > 0.0) {
            t.d2_pow[e] = std::pow(t.d2[e], 1.0 / t.beta);
            t.d2_pow_m1[e] = std::pow(t.d2[e], 1.0 / t.beta - 1.0);
        }
    }
    return t;
}

}  // namespace

double step_sum_forward(const StepSumTable& in, double s_y, double p_x) {
    const CellTable t = make_cell_table(in);
    return cell_sum(t, s_y, p_x, 0, 0.0, 0.0, nullptr);
}

double step_sum_theorem(const StepSumTable& in, double s_y, double p_x) {
    if (!in.gain.empty())
        throw std::invalid_argument("step_sum_theorem: constant-gain form only");
    const CellTable t = make_cell_table(in);
    if (s_y <= 0.0 || p_x <= 0.0) return 0.0;
    const double u = s_y / t.tau_hat * p_x;
    // Sum_{i} [p(r_{i-1}) - p(r_i)] Psi(s, r_i) with p(r_0) = 0; differences
    // vanish once p persists, so the sum is finite.
    double acc = 0.0;
    double p_prev = 0.0;
    for (std::size_t i = 0; i < t.n_cells; ++i) {
        acc += (p_prev - t.p[i]) * edge_psi(t, i, u);
        p_prev = t.p[i];
    }
    return acc;
}

DerivativeResult laplacian_derivatives(const std::function<double(double)>& log_laplacian,
                                       double s, int order) {
    if (order < 0) throw std::invalid_argument("laplacian_derivatives: order >= 0");
    if (s <= 0.0) throw std::invalid_argument("laplacian_derivatives: s > 0 required");

    DerivativeResult out;
    out.value.assign(order + 1, 0.0);
    out.rel_error.assign(order + 1, 0.0);
    const double eta0 = log_laplacian(s);
    out.value[0] = std::exp(eta0);
    if (order == 0) return out;
    if (order > 4)
        throw std::invalid_argument("laplacian_derivatives: derivative order > 4 unsupported");

    // Central stencils for eta^(j), Richardson-extrapolated over h, h/2, h/4.
    auto stencil = [&](int j, double h) {
        switch (j) {
            case 1:
                return (log_laplacian(s + h) - log_laplacian(s - h)) / (2.0 * h);
            case 2:
                return (log_laplacian(s + h) - 2.0 * eta0 + log_laplacian(s - h)) / (h * h);
            case 3:
                return (log_laplacian(s + 2 * h) - 2.0 * log_laplacian(s + h) +
                        2.0 * log_laplacian(s - h) - log_laplacian(s - 2 * h)) /
                       (2.0 * h * h * h);
            default:
                return (log_laplacian(s + 2 * h) - 4.0 * log_laplacian(s + h) +
                        6.0 * eta0 - 4.0 * log_laplacian(s - h) +
                        log_laplacian(s - 2 * h)) /
                       (h * h * h * h);
        }
    };

    std::vector<double> eta_deriv(order + 1, 0.0);
    std::vector<double> eta_err(order + 1, 0.0);
    constexpr double eps = 2.2e-16;
    for (int j = 1; j <= order; ++j) {
        const double h0 = s * 16.0 * std::pow(eps, 1.0 / (2.0 + j));
        const double d1 = stencil(j, h0);
        const double d2 = stencil(j, h0 / 2.0);
        const double d4 = stencil(j, h0 / 4.0);
        const double r1 = (4.0 * d2 - d1) / 3.0;
        const double r2 = (4.0 * d4 - d2) / 3.0;
        const double r = (16.0 * r2 - r1) / 15.0;
        eta_deriv[j] = r;
        eta_err[j] = std::abs(r - r2) / std::max(std::abs(r), 1e-300);
    }

    // L = exp(eta):  L^(n) = sum_k C(n-1, k) eta^(n-k) L^(k).
    for (int n = 1; n <= order; ++n) {
        double acc = 0.0;
        double binom = 1.0;  // C(n-1, 0)
        for (int k = 0; k <= n - 1; ++k) {
            acc += binom * eta_deriv[n - k] * out.value[k];
            binom = binom * (n - 1 - k) / (k + 1.0);
        }
        out.value[n] = acc;
        out.rel_error[n] = eta_err[n];
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Piecewise-linear interpolant of a smooth function over log s, refined
/// until the midpoint defect of every interval is below tolerance.  The
/// log-interference eta(s) is evaluated here a few hundred times per curve
/// instead of once per outer quadrature node.
class LogInterp {
  public:
    template <class F>
    LogInterp(const F& f, double s_lo, double s_hi, int jobs, double abs_tol,
              double rel_tol) {
        constexpr std::size_t kInit = 65;
        const double ulo = std::log(s_lo), uhi = std::log(s_hi);
        std::vector<double> u0(kInit), v0(kInit);
        for (std::size_t i = 0; i < kInit; ++i)
            u0[i] = ulo + (uhi - ulo) * static_cast<double>(i) /
                              static_cast<double>(kInit - 1);
        std::vector<double> m0(kInit - 1), mv0(kInit - 1);
        for (std::size_t i = 0; i + 1 < kInit; ++i) m0[i] = 0.5 * (u0[i] + u0[i + 1]);
        parallel_for(kInit + m0.size(), jobs, [&](std::size_t i) {
            if (i < kInit)
                v0[i] = f(std::exp(u0[i]));
            else
                mv0[i - kInit] = f(std::exp(m0[i - kInit]));
        });

        auto tol_at = [&](double v) { return std::max(abs_tol, rel_tol * std::abs(v)); };

        // Round-based refinement: all pending midpoints of one round are
        // evaluated in parallel, failing halves carry to the next round.
        struct Seg {
            double ua, va, ub, vb;
            int depth;
        };
        std::vector<std::pair<double, double>> nodes;
        for (std::size_t i = 0; i < kInit; ++i) nodes.emplace_back(u0[i], v0[i]);
        std::vector<Seg> pending;
        for (std::size_t i = 0; i + 1 < kInit; ++i)
            pending.push_back({u0[i], v0[i], u0[i + 1], v0[i + 1], 0});
        for (int round = 0; round < 12 && !pending.empty(); ++round) {
            std::vector<double> vm(pending.size());
            parallel_for(pending.size(), jobs, [&](std::size_t k) {
                vm[k] = f(std::exp(0.5 * (pending[k].ua + pending[k].ub)));
            });
            std::vector<Seg> next;
            for (std::size_t k = 0; k < pending.size(); ++k) {
                const Seg& sg = pending[k];
                const double um = 0.5 * (sg.ua + sg.ub);
                nodes.emplace_back(um, vm[k]);
                const double err = std::abs(vm[k] - 0.5 * (sg.va + sg.vb));
                if (err > tol_at(vm[k]) && sg.depth < 10 && sg.ub - sg.ua > 2e-4) {
                    next.push_back({sg.ua, sg.va, um, vm[k], sg.depth + 1});
                    next.push_back({um, vm[k], sg.ub, sg.vb, sg.depth + 1});
                } else {
                    max_defect_ = std::max(max_defect_, err);
                }
            }
            pending = std::move(next);
        }
        std::sort(nodes.begin(), nodes.end());
        u_.reserve(nodes.size());
        v_.reserve(nodes.size());
        for (const auto& [u, v] : nodes) {
            u_.push_back(u);
            v_.push_back(v);
        }
    }

    bool covers(double s) const {
        const double u = std::log(s);
        return u >= u_.front() && u <= u_.back();
    }

    double operator()(double s) const {
        const double u = std::log(s);
        const auto it = std::upper_bound(u_.begin(), u_.end(), u);
        const std::size_t hi = std::clamp<std::size_t>(it - u_.begin(), 1, u_.size() - 1);
        const std::size_t lo = hi - 1;
        const double w = (u - u_[lo]) / (u_[hi] - u_[lo]);
        return v_[lo] + w * (v_[hi] - v_[lo]);
    }

    std::size_t nodes() const { return u_.size(); }
    double max_defect() const { return max_defect_; }

  private:
    std::vector<double> u_, v_;
    double max_defect_ = 0.0;
};

}  // namespace

struct CoverageAnalytics::Impl {
    ScenarioParams prm;
    AnalyticOptions opt;
    double noise_w = 0.0;
    double cell_w = 0.0;
    double sigma_g = 0.0;
    double lam_b = 0.0, lam_u = 0.0;
    LosStepFunction los_uu, los_gb;  // serving-link condition probabilities
    std::array<std::array<CellTable, 2>, 4> tables;

    mutable std::atomic<double> max_tail{0.0};
    mutable std::atomic<double> max_quad_err{0.0};
    mutable std::atomic<long> deriv_calls{0};
    mutable std::atomic<long> cache_nodes{0};
    mutable std::atomic<long> eta_evals{0};

    Impl(const ScenarioParams& p, AnalyticOptions o)
        : prm(p),
          opt(o),
          noise_w(p.noise_power_w()),
          cell_w(p.los_cell_width()),
          sigma_g(p.sigma_g()),
          lam_b(p.lambda_b()),
          lam_u(p.lambda_u()),
          los_uu(los_step_table(LinkType::uu, p)),
          los_gb(los_step_table(LinkType::gb, p)) {
        for (const auto& cls : p.link_classes)
            if (cls.alpha <= 2.0)
                throw NumericalError(
                    "coverage analytics requires alpha > 2 for every link class "
                    "(beta = 2/alpha must lie in (0,1)); got alpha = " +
                    std::to_string(cls.alpha) + " for " + to_string(cls.type));
        build_table(InterferenceKind::uav_to_uav, LinkType::uu, false);
        build_table(InterferenceKind::gue_to_uav, LinkType::gu, false);
        build_table(InterferenceKind::uav_to_bs, LinkType::ub, true);
        build_table(InterferenceKind::gue_to_bs, LinkType::gb, true);
    }

    void build_table(InterferenceKind kind, LinkType type, bool victim_is_bs) {
        const auto los = los_step_table(type, prm);
        const auto [h_x, h_y] = prm.heights(type);
        const double h2 = (h_x - h_y) * (h_x - h_y);
        const std::size_t n_los = los.size();
        const std::size_t n_cells =
            victim_is_bs
                ? std::max(n_los, static_cast<std::size_t>(
                                      std::ceil(opt.sum_horizon_m / cell_w)))
                : n_los;
        for (Condition xi : {Condition::los, Condition::nlos}) {
            const LinkClass& cls = prm.link(type, xi);
            StepSumTable in;
            in.cell_width = cell_w;
            in.beta = 2.0 / cls.alpha;
            in.m = cls.m_fading;
            in.h2 = h2;
            in.tau_hat = cls.tau_hat();
            in.p.resize(n_cells);
            for (std::size_t i = 0; i < n_cells; ++i) {
                const double pl = los.value(i);
                in.p[i] = xi == Condition::los ? pl : 1.0 - pl;
            }
            if (victim_is_bs) {
                in.gain.resize(n_cells + 1);
                for (std::size_t e = 0; e <= n_cells; ++e) {
                    const double r = static_cast<double>(e) * cell_w;
                    const double d = std::sqrt(r * r + h2);
                    if (d == 0.0) {
                        in.gain[e] = 0.0;  // node on top of the BS: element null
                        continue;
                    }
                    const double c = std::clamp((h_x - prm.h_b) / d, -1.0, 1.0);
                    in.gain[e] = bs_antenna_gain(std::acos(c), prm.antenna);
                }
            }
            CellTable t = make_cell_table(in);
            t.n_los = std::min(n_los, t.n_cells);
            tables[static_cast<int>(kind)][static_cast<int>(xi)] = std::move(t);
        }
    }

    const CellTable& table(InterferenceKind k, Condition xi) const {
        return tables[static_cast<int>(k)][static_cast<int>(xi)];
    }

    // Serving-link large-scale fading (sets transmit powers and s variables).
    double zeta_uu(Condition nu, double x) const {
        const LinkClass& cls = prm.link(LinkType::uu, nu);
        return cls.tau_hat() * std::pow(x, cls.alpha);
    }
    double zeta_gb(Condition nu, double x) const {
        const LinkClass& cls = prm.link(LinkType::gb, nu);
        const double d = std::hypot(x, prm.h_g - prm.h_b);
        const double c = std::clamp((prm.h_g - prm.h_b) / d, -1.0, 1.0);
        const double gain = bs_antenna_gain(std::acos(c), prm.antenna);
        return cls.tau_hat() * std::pow(d, cls.alpha) / gain;
    }
    double power_uav(Condition nu, double x) const {
        return transmit_power(zeta_uu(nu, x), prm.power_control, NodeRole::uav);
    }
    double power_gue(Condition nu, double x) const {
        return transmit_power(zeta_gb(nu, x), prm.power_control, NodeRole::gue);
    }

    double sum(const CellTable& t, double s_y, double p_x) const {
        SumDiag diag;
        const double v = cell_sum(t, s_y, p_x, 0, 0.0, opt.sum_rel_stop, &diag);
        atomic_max(max_tail, diag.tail_fraction);
        return v;
    }

    // Clamp kink of the UAV fractional power control, per serving condition.
    double uav_clamp_kink(Condition nu) const {
        const auto& pc = prm.power_control;
        if (pc.epsilon_u <= 0.0) return -1.0;
        const double zeta_star =
            std::pow(pc.p_max_w(NodeRole::uav) / pc.rho_w(NodeRole::uav),
                     1.0 / pc.epsilon_u);
        const LinkClass& cls = prm.link(LinkType::uu, nu);
        return std::pow(zeta_star / cls.tau_hat(), 1.0 / cls.alpha);
    }

    // Two-pass segmented quadrature: a coarse non-adaptive sweep fixes the
    // absolute tolerance, then the adaptive pass enforces it.
    template <class F>
    QuadResult integrate_rel(const F& f, std::span<const double> pts, double rel) const {
        double coarse = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            double v, e;
            detail::gk15_panel(f, pts[i], pts[i + 1], v, e);
            coarse += v;
        }
        QuadOptions o;
        o.abs_tol = std::max(std::abs(coarse) * rel, 1e-300);
        o.rel_tol = rel;
        return integrate_segmented(f, pts, o);
    }

    double interference(InterferenceKind kind, Condition xi, double s) const {
        if (s < 0.0) throw std::domain_error("interference_integral: s >= 0 required");
        if (s == 0.0) return 0.0;
        const CellTable& t = table(kind, xi);
        const bool uav_source =
            kind == InterferenceKind::uav_to_uav || kind == InterferenceKind::uav_to_bs;

        QuadResult q;
        if (uav_source) {
            const auto pts = split_points(
                0.0, prm.r_max, cell_w,
                std::array{uav_clamp_kink(Condition::los), uav_clamp_kink(Condition::nlos)});
            q = integrate_rel(
                [&](double x) {
                    const double pl = los_uu(x);
                    const double fr = prm.u2u_distance_pdf(x);
                    double v = 0.0;
                    if (pl > 0.0)
                        v += pl * fr * sum(t, s, power_uav(Condition::los, x));
                    if (pl < 1.0)
                        v += (1.0 - pl) * fr * sum(t, s, power_uav(Condition::nlos, x));
                    return v;
                },
                pts, opt.inner_rel_tol);
        } else if (kind == InterferenceKind::gue_to_uav) {
            const auto pts = split_points(0.0, 8.0 * sigma_g, cell_w);
            q = integrate_rel(
                [&](double x) {
                    const double pl = los_gb(x);
                    const double fr = prm.gue_serving_pdf(x);
                    double v = 0.0;
                    if (pl > 0.0)
                        v += pl * fr * sum(t, s, power_gue(Condition::los, x));
                    if (pl < 1.0)
                        v += (1.0 - pl) * fr * sum(t, s, power_gue(Condition::nlos, x));
                    return v;
                },
                pts, opt.inner_rel_tol);
        } else {
            // Other-cell GUEs at the typical BS: the interferer sits beyond its
            // own serving distance x, so the step sum starts in x's cell.
            const auto pts = split_points(0.0, 8.0 * sigma_g, cell_w);
            q = integrate_rel(
                [&](double x) {
                    const double pl = los_gb(x);
                    const double weight = x * std::exp(-lam_b * pi * x * x);
                    const auto first =
                        static_cast<std::size_t>(std::floor(x / cell_w + 1e-9));
                    double v = 0.0;
                    if (pl > 0.0) {
                        SumDiag diag;
                        v += pl * weight *
                             cell_sum(t, s, power_gue(Condition::los, x), first, x,
                                      opt.sum_rel_stop, &diag);
                    }
                    if (pl < 1.0) {
                        SumDiag diag;
                        v += (1.0 - pl) * weight *
                             cell_sum(t, s, power_gue(Condition::nlos, x), first, x,
                                      opt.sum_rel_stop, &diag);
                    }
                    return v;
                },
                pts, opt.inner_rel_tol);
        }
        if (!q.converged)
            throw NumericalError(std::string("interference integral did not converge: ") +
                                 to_string(kind) + "/" + to_string(xi));
        return q.value;
    }

    double eta_u(double s) const {
        eta_evals.fetch_add(1, std::memory_order_relaxed);
        double acc = 0.0;
        if (lam_u > 0.0)
            acc += lam_u * (interference(InterferenceKind::uav_to_uav, Condition::los, s) +
                            interference(InterferenceKind::uav_to_uav, Condition::nlos, s));
        if (lam_b > 0.0)
            acc += lam_b * (interference(InterferenceKind::gue_to_uav, Condition::los, s) +
                            interference(InterferenceKind::gue_to_uav, Condition::nlos, s));
        return -2.0 * pi * acc;
    }

    double eta_g(double s) const {
        eta_evals.fetch_add(1, std::memory_order_relaxed);
        double acc = 0.0;
        if (lam_u > 0.0)
            acc += 2.0 * pi * lam_u *
                   (interference(InterferenceKind::uav_to_bs, Condition::los, s) +
                    interference(InterferenceKind::uav_to_bs, Condition::nlos, s));
        if (lam_b > 0.0) {
            const double pref = (2.0 * pi * lam_b) * (2.0 * pi * lam_b);
            acc += pref * (interference(InterferenceKind::gue_to_bs, Condition::los, s) +
                           interference(InterferenceKind::gue_to_bs, Condition::nlos, s));
        }
        return -acc;
    }

    // s variable of the detection probability at serving distance r.
    double s_of(bool u2u_victim, Condition nu, double r, double t_lin) const {
        const LinkType serving = u2u_victim ? LinkType::uu : LinkType::gb;
        const int m_nu = prm.link(serving, nu).m_fading;
        if (u2u_victim)
            return m_nu * t_lin * zeta_uu(nu, r) / power_uav(nu, r);
        if (opt.exact_theorem2)
            return m_nu * t_lin *
                   std::pow(zeta_gb(nu, r), 1.0 - prm.power_control.epsilon_g) /
                   prm.power_control.rho_w(NodeRole::gue);
        return m_nu * t_lin * zeta_gb(nu, r) / power_gue(nu, r);
    }

    // Detection-probability sum over fading terms at one (T, serving state).
    template <class Eta>
    double conditional_coverage(bool u2u_victim, int m_nu, double s,
                                const Eta& eta_cached) const {
        const double n0s = noise_w * s;
        if (m_nu == 1) return std::exp(-n0s + eta_cached(s));
        // Higher fading orders need true derivatives of eta; bypass any cache.
        const auto eta = [&](double sv) { return u2u_victim ? eta_u(sv) : eta_g(sv); };

        deriv_calls.fetch_add(1, std::memory_order_relaxed);
        const auto d = laplacian_derivatives(eta, s, m_nu - 1);
        for (int j = 1; j < m_nu; ++j)
            if (d.rel_error[j] > 1e-4)
                throw NumericalError(
                    "laplacian_derivatives: unstable extrapolation at order " +
                    std::to_string(j) + " (estimated rel err " +
                    std::to_string(d.rel_error[j]) + ")");
        // q_i = e^{-N0 s} s^i / i! * sum_{k <= m-1-i} (N0 s)^k / k!
        double total = 0.0;
        double s_pow_over_fact = 1.0;  // s^i / i!
        double sign = 1.0;
        for (int i = 0; i < m_nu; ++i) {
            double poisson_sum = 0.0, term = 1.0;
            for (int k = 0; k <= m_nu - 1 - i; ++k) {
                poisson_sum += term;
                term *= n0s / (k + 1.0);
            }
            total += sign * std::exp(-n0s) * s_pow_over_fact * poisson_sum * d.value[i];
            sign = -sign;
            s_pow_over_fact *= s / (i + 1.0);
        }
        return total;
    }

    CoverageCurve coverage(bool u2u_victim, std::span<const double> t_db) const {
        CoverageCurve curve;
        curve.provenance = Provenance::analytic;
        curve.threshold_db.assign(t_db.begin(), t_db.end());
        const std::size_t n = t_db.size();
        curve.coverage.assign(n, 0.0);
        curve.cov_los.assign(n, 0.0);
        curve.cov_nlos.assign(n, 0.0);
        curve.quad_err.assign(n, 0.0);

        const double upper = u2u_victim ? prm.r_max : 8.0 * sigma_g;
        const LinkType serving_type = u2u_victim ? LinkType::uu : LinkType::gb;
        const LosStepFunction& serving_los = u2u_victim ? los_uu : los_gb;

        // With Rayleigh serving fading (the default) the conditional coverage
        // needs only eta(s) itself, which is smooth in log s: evaluate it on
        // an interpolation grid once instead of at every quadrature node.
        const bool cacheable =
            prm.link(serving_type, Condition::los).m_fading == 1 &&
            prm.link(serving_type, Condition::nlos).m_fading == 1 && n > 0;
        std::unique_ptr<LogInterp> cache;
        if (cacheable) {
            double t_lo = db_to_linear(t_db[0]), t_hi = t_lo;
            for (double t : t_db) {
                t_lo = std::min(t_lo, db_to_linear(t));
                t_hi = std::max(t_hi, db_to_linear(t));
            }
            double s_lo = std::numeric_limits<double>::max(), s_hi = 0.0;
            for (Condition nu : {Condition::los, Condition::nlos}) {
                for (int i = 0; i <= 512; ++i) {
                    const double r =
                        upper * std::pow(10.0, -7.0 + 7.0 * i / 512.0);
                    const double s1 = s_of(u2u_victim, nu, r, 1.0);
                    s_lo = std::min(s_lo, s1 * t_lo);
                    s_hi = std::max(s_hi, s1 * t_hi);
                }
            }
            const auto eta_fn = [&](double s) {
                return u2u_victim ? eta_u(s) : eta_g(s);
            };
            cache = std::make_unique<LogInterp>(eta_fn, 0.5 * s_lo, 2.0 * s_hi,
                                                opt.jobs, 1e-5, 1e-3);
            cache_nodes.store(static_cast<long>(cache->nodes()));
        }
        const auto eta_eval = [&](double s) {
            if (cache && cache->covers(s)) return (*cache)(s);
            return u2u_victim ? eta_u(s) : eta_g(s);
        };

        parallel_for(n, opt.jobs, [&](std::size_t ti) {
            const double t_lin = db_to_linear(t_db[ti]);
            double err_acc = 0.0;
            for (Condition nu : {Condition::los, Condition::nlos}) {
                const int m_nu = prm.link(serving_type, nu).m_fading;
                std::vector<double> extra;
                if (u2u_victim) extra.push_back(uav_clamp_kink(nu));
                const auto pts = split_points(0.0, upper, cell_w, extra);

                auto integrand = [&](double r) {
                    const double pl = serving_los(r);
                    const double p_nu = nu == Condition::los ? pl : 1.0 - pl;
                    const double f_r = u2u_victim ? prm.u2u_distance_pdf(r)
                                                  : prm.gue_serving_pdf(r);
                    // Negligible-weight branches are not worth an eta call.
                    if (p_nu * f_r < 1e-16) return 0.0;
                    const double s = s_of(u2u_victim, nu, r, t_lin);
                    return p_nu * f_r *
                           conditional_coverage(u2u_victim, m_nu, s, eta_eval);
                };

                QuadOptions o;
                o.abs_tol = opt.outer_abs_tol / 2.0;  // per serving-condition branch
                o.rel_tol = 0.0;
                const QuadResult q = integrate_segmented(integrand, pts, o);
                err_acc += q.abs_error;
                const double branch = std::clamp(q.value, 0.0, 1.0);
                if (nu == Condition::los)
                    curve.cov_los[ti] = branch;
                else
                    curve.cov_nlos[ti] = branch;
            }
            curve.coverage[ti] =
                std::min(1.0, curve.cov_los[ti] + curve.cov_nlos[ti]);
            curve.quad_err[ti] = err_acc;
            atomic_max(max_quad_err, err_acc);
        });
        return curve;
    }
};

CoverageAnalytics::CoverageAnalytics(const ScenarioParams& params, AnalyticOptions opts)
    : impl_(std::make_unique<Impl>(params, opts)) {}
CoverageAnalytics::~CoverageAnalytics() = default;
CoverageAnalytics::CoverageAnalytics(CoverageAnalytics&&) noexcept = default;
CoverageAnalytics& CoverageAnalytics::operator=(CoverageAnalytics&&) noexcept = default;

double CoverageAnalytics::interference_integral(InterferenceKind kind, Condition xi,
                                                double s) const {
    return impl_->interference(kind, xi, s);
}

double CoverageAnalytics::log_laplacian_u2u(double s) const { return impl_->eta_u(s); }
double CoverageAnalytics::laplacian_u2u(double s) const { return std::exp(impl_->eta_u(s)); }
double CoverageAnalytics::log_laplacian_gue(double s) const { return impl_->eta_g(s); }
double CoverageAnalytics::laplacian_gue(double s) const { return std::exp(impl_->eta_g(s)); }

CoverageCurve CoverageAnalytics::coverage_u2u(std::span<const double> t_db) const {
    return impl_->coverage(true, t_db);
}
CoverageCurve CoverageAnalytics::coverage_gue(std::span<const double> t_db) const {
    return impl_->coverage(false, t_db);
}

CoverageDiagnostics CoverageAnalytics::diagnostics() const {
    CoverageDiagnostics d;
    d.max_outer_quad_err = impl_->max_quad_err.load();
    d.max_tail_fraction = impl_->max_tail.load();
    d.derivative_evals = impl_->deriv_calls.load();
    d.interp_nodes = impl_->cache_nodes.load();
    d.eta_evaluations = impl_->eta_evals.load();
    return d;
}

const ScenarioParams& CoverageAnalytics::params() const { return impl_->prm; }

}  // namespace uavcov
