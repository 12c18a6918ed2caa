// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#include "uavcov/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "uavcov/parallel.hpp"

namespace uavcov {

double SinrRecord::sinr_db() const { return linear_to_db(sinr()); }

namespace {

struct ClassConst {
    double tau_hat = 1.0;
    double alpha = 2.0;
    int m = 1;
};

ClassConst class_const(const ScenarioParams& p, LinkType t, Condition c) {
    const LinkClass& cls = p.link(t, c);
    return {cls.tau_hat(), cls.alpha, cls.m_fading};
}

// Spatial hash for nearest-BS association (voronoi GUE mode).
class NearestGrid {
  public:
    NearestGrid(const std::vector<std::array<double, 2>>& pts, double cell)
        : pts_(pts), cell_(cell) {
        bins_.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            bins_[key(pts[i][0], pts[i][1])].push_back(static_cast<int>(i));
    }

    int nearest(double x, double y) const {
        const long cx = coord(x), cy = coord(y);
        int best = -1;
        double best_d2 = std::numeric_limits<double>::max();
        for (long ring = 0;; ++ring) {
            bool scanned = false;
            for (long ix = cx - ring; ix <= cx + ring; ++ix)
                for (long iy = cy - ring; iy <= cy + ring; ++iy) {
                    if (std::max(std::labs(ix - cx), std::labs(iy - cy)) != ring) continue;
                    const auto it = bins_.find(pack(ix, iy));
                    if (it == bins_.end()) continue;
                    scanned = true;
                    for (int i : it->second) {
                        const double dx = pts_[i][0] - x, dy = pts_[i][1] - y;
                        const double d2 = dx * dx + dy * dy;
                        if (d2 < best_d2) {
                            best_d2 = d2;
                            best = i;
                        }
                    }
                }
            // Any closer point must lie within ring*cell of the query.
            if (best >= 0 && (ring - 1) * cell_ > std::sqrt(best_d2)) break;
            if (ring > 4 && !scanned && best >= 0) break;
            if (ring * cell_ > 8.0e4) break;  // degenerate fields
        }
        return best;
    }

  private:
    long coord(double v) const { return static_cast<long>(std::floor(v / cell_)); }
    std::uint64_t key(double x, double y) const { return pack(coord(x), coord(y)); }
    static std::uint64_t pack(long ix, long iy) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
               static_cast<std::uint32_t>(iy);
    }

    const std::vector<std::array<double, 2>>& pts_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> bins_;
};

}  // namespace

MonteCarloEngine::MonteCarloEngine(const ScenarioParams& params, SimOptions opts)
    : params_(params),
      opts_(opts),
      los_gb_(los_step_table(LinkType::gb, params)),
      los_ub_(los_step_table(LinkType::ub, params)),
      los_uu_(los_step_table(LinkType::uu, params)),
      los_gu_(los_step_table(LinkType::gu, params)),
      noise_w_(params.noise_power_w()) {
    if (opts_.drops < 1) throw std::invalid_argument("SimOptions: drops >= 1 required");
}

NetworkRealization MonteCarloEngine::drop_realization(std::uint64_t drop_index) const {
    const ScenarioParams& p = params_;
    SubstreamRng rng(opts_.seed, drop_index);
    NetworkRealization real;
    real.drop_index = drop_index;

    const double disc_r = p.sim_disc_radius_m;
    const double sigma_g = p.sigma_g();

    // Typical U2U pair: receiver at the origin, transmitter at truncated-
    // Rayleigh distance.  The pair's own link condition drives its power.
    {
        TypicalLink& tp = real.u2u_pair;
        tp.serving_dist = rng.truncated_rayleigh(p.sigma_u, p.r_max);
        tp.cond = rng.bernoulli(los_uu_(tp.serving_dist)) ? Condition::los : Condition::nlos;
        const auto cc = class_const(p, LinkType::uu, tp.cond);
        const double zeta = cc.tau_hat * std::pow(tp.serving_dist, cc.alpha);
        tp.tx_power_w = transmit_power(zeta, p.power_control, NodeRole::uav);
        tp.fading = rng.gamma_unit_mean(cc.m);
    }

    // Uplink user of the typical BS.
    {
        TypicalLink& tg = real.serving_gue;
        tg.serving_dist = rng.rayleigh(sigma_g);
        tg.cond = rng.bernoulli(los_gb_(tg.serving_dist)) ? Condition::los : Condition::nlos;
        const auto cc = class_const(p, LinkType::gb, tg.cond);
        const double d = std::hypot(tg.serving_dist, p.h_g - p.h_b);
        const double cth = (p.h_g - p.h_b) / d;
        const double gain = bs_antenna_gain(std::acos(std::clamp(cth, -1.0, 1.0)), p.antenna);
        const double zeta = cc.tau_hat * std::pow(d, cc.alpha) / gain;
        tg.tx_power_w = transmit_power(zeta, p.power_control, NodeRole::gue);
        tg.fading = rng.gamma_unit_mean(cc.m);
    }

    // Interfering U2U transmitters.
    const int n_uav = rng.poisson(p.lambda_u() * pi * disc_r * disc_r);
    real.uavs.reserve(n_uav);
    for (int i = 0; i < n_uav; ++i) {
        Interferer it;
        it.dist_2d = disc_r * std::sqrt(rng.uniform());
        it.serving_dist = rng.truncated_rayleigh(p.sigma_u, p.r_max);
        it.serving_cond =
            rng.bernoulli(los_uu_(it.serving_dist)) ? Condition::los : Condition::nlos;
        const auto sc = class_const(p, LinkType::uu, it.serving_cond);
        const double zeta = sc.tau_hat * std::pow(it.serving_dist, sc.alpha);
        it.tx_power_w = transmit_power(zeta, p.power_control, NodeRole::uav);
        it.cond_to_uav = rng.bernoulli(los_uu_(it.dist_2d)) ? Condition::los : Condition::nlos;
        it.fading_to_uav = rng.gamma_unit_mean(p.link(LinkType::uu, it.cond_to_uav).m_fading);
        it.cond_to_bs = rng.bernoulli(los_ub_(it.dist_2d)) ? Condition::los : Condition::nlos;
        it.fading_to_bs = rng.gamma_unit_mean(p.link(LinkType::ub, it.cond_to_bs).m_fading);
        real.uavs.push_back(it);
    }

    // Active GUEs, one per cell on the observed PRB.
    if (opts_.gue_mode == GueMode::density) {
        // Homogeneous field of actives; the nearest-BS thinning x < r applies
        // only toward the typical BS.
        const int n_gue = rng.poisson(p.lambda_b() * pi * disc_r * disc_r);
        real.gues.reserve(n_gue);
        for (int i = 0; i < n_gue; ++i) {
            Interferer it;
            it.dist_2d = disc_r * std::sqrt(rng.uniform());
            it.serving_dist = rng.rayleigh(sigma_g);
            it.serving_cond =
                rng.bernoulli(los_gb_(it.serving_dist)) ? Condition::los : Condition::nlos;
            const auto sc = class_const(p, LinkType::gb, it.serving_cond);
            const double d = std::hypot(it.serving_dist, p.h_g - p.h_b);
            const double cth = (p.h_g - p.h_b) / d;
            const double gain =
                bs_antenna_gain(std::acos(std::clamp(cth, -1.0, 1.0)), p.antenna);
            const double zeta = sc.tau_hat * std::pow(d, sc.alpha) / gain;
            it.tx_power_w = transmit_power(zeta, p.power_control, NodeRole::gue);
            it.cond_to_uav =
                rng.bernoulli(los_gu_(it.dist_2d)) ? Condition::los : Condition::nlos;
            it.fading_to_uav =
                rng.gamma_unit_mean(p.link(LinkType::gu, it.cond_to_uav).m_fading);
            it.cond_to_bs =
                rng.bernoulli(los_gb_(it.dist_2d)) ? Condition::los : Condition::nlos;
            it.fading_to_bs =
                rng.gamma_unit_mean(p.link(LinkType::gb, it.cond_to_bs).m_fading);
            it.active_at_bs = it.serving_dist < it.dist_2d;
            real.gues.push_back(it);
        }
    } else {
        fill_gues_voronoi(real, rng);
    }
    return real;
}

void MonteCarloEngine::fill_gues_voronoi(NetworkRealization& real, SubstreamRng& rng) const {
    const ScenarioParams& p = params_;
    const double disc_r = p.sim_disc_radius_m;

    // BS field with the typical BS added at the origin.
    std::vector<std::array<double, 2>> bs;
    bs.push_back({0.0, 0.0});
    const int n_bs = rng.poisson(p.lambda_b() * pi * disc_r * disc_r);
    for (int i = 0; i < n_bs; ++i) {
        const double r = disc_r * std::sqrt(rng.uniform());
        const double ang = rng.uniform(0.0, 2.0 * pi);
        bs.push_back({r * std::cos(ang), r * std::sin(ang)});
    }
    NearestGrid grid(bs, 1.0 / std::sqrt(p.lambda_b()));

    // Large GUE population associated to nearest BSs; each cell activates one
    // uniformly chosen member on this PRB.
    const double pop_factor = 20.0;
    const int n_pop = rng.poisson(pop_factor * p.lambda_b() * pi * disc_r * disc_r);
    std::vector<std::array<double, 2>> pop(n_pop);
    std::vector<std::vector<int>> members(bs.size());
    for (int i = 0; i < n_pop; ++i) {
        const double r = disc_r * std::sqrt(rng.uniform());
        const double ang = rng.uniform(0.0, 2.0 * pi);
        pop[i] = {r * std::cos(ang), r * std::sin(ang)};
        const int b = grid.nearest(pop[i][0], pop[i][1]);
        if (b >= 0) members[b].push_back(i);
    }

    auto make_gue = [&](double gx, double gy, double bx, double by) {
        Interferer it;
        it.dist_2d = std::hypot(gx, gy);
        it.serving_dist = std::hypot(gx - bx, gy - by);
        it.serving_cond =
            rng.bernoulli(los_gb_(it.serving_dist)) ? Condition::los : Condition::nlos;
        const auto sc = class_const(p, LinkType::gb, it.serving_cond);
        const double d = std::hypot(it.serving_dist, p.h_g - p.h_b);
        const double cth = (p.h_g - p.h_b) / d;
        const double gain =
            bs_antenna_gain(std::acos(std::clamp(cth, -1.0, 1.0)), p.antenna);
        const double zeta = sc.tau_hat * std::pow(d, sc.alpha) / gain;
        it.tx_power_w = transmit_power(zeta, p.power_control, NodeRole::gue);
        if (it.dist_2d > 0.0) {
            it.cond_to_uav =
                rng.bernoulli(los_gu_(it.dist_2d)) ? Condition::los : Condition::nlos;
            it.cond_to_bs =
                rng.bernoulli(los_gb_(it.dist_2d)) ? Condition::los : Condition::nlos;
        }
        it.fading_to_uav = rng.gamma_unit_mean(p.link(LinkType::gu, it.cond_to_uav).m_fading);
        it.fading_to_bs = rng.gamma_unit_mean(p.link(LinkType::gb, it.cond_to_bs).m_fading);
        return it;
    };

    real.gues.reserve(bs.size());
    for (std::size_t b = 0; b < bs.size(); ++b) {
        double gx, gy;
        if (!members[b].empty()) {
            const int pick = members[b][static_cast<std::size_t>(
                rng.uniform() * static_cast<double>(members[b].size()))];
            gx = pop[pick][0];
            gy = pop[pick][1];
        } else if (b == 0) {
            // Rare empty typical cell: draw its user uniformly in the cell.
            double radius = 3.0 / std::sqrt(pi * p.lambda_b());
            int tries = 0;
            do {
                const double r = radius * std::sqrt(rng.uniform());
                const double ang = rng.uniform(0.0, 2.0 * pi);
                gx = r * std::cos(ang);
                gy = r * std::sin(ang);
                if (++tries % 256 == 0) radius *= 1.5;
            } while (grid.nearest(gx, gy) != 0);
        } else {
            continue;  // silent cell
        }
        Interferer it = make_gue(gx, gy, bs[b][0], bs[b][1]);
        it.active_at_bs = b != 0;
        if (b == 0) {
            // The typical cell's member is the uplink user under study.
            real.serving_gue.serving_dist = it.serving_dist;
            real.serving_gue.cond = it.serving_cond;
            real.serving_gue.tx_power_w = it.tx_power_w;
            real.serving_gue.fading = rng.gamma_unit_mean(
                p.link(LinkType::gb, it.serving_cond).m_fading);
        }
        real.gues.push_back(it);
    }
}

SinrRecord MonteCarloEngine::sinr_u2u(const NetworkRealization& real) const {
    const ScenarioParams& p = params_;
    SinrRecord rec;
    rec.noise_w = noise_w_;
    rec.serving_cond = real.u2u_pair.cond;

    const auto sc = class_const(p, LinkType::uu, real.u2u_pair.cond);
    rec.useful_w = real.u2u_pair.tx_power_w * real.u2u_pair.fading /
                   (sc.tau_hat * std::pow(real.u2u_pair.serving_dist, sc.alpha));

    const double dz_gu = p.h_g - p.h_u;
    const ClassConst uu[2] = {class_const(p, LinkType::uu, Condition::los),
                              class_const(p, LinkType::uu, Condition::nlos)};
    const ClassConst gu[2] = {class_const(p, LinkType::gu, Condition::los),
                              class_const(p, LinkType::gu, Condition::nlos)};

    for (const Interferer& it : real.uavs) {
        if (it.dist_2d <= 0.0) continue;
        const auto& cc = uu[static_cast<int>(it.cond_to_uav)];
        rec.i_uav_w += it.tx_power_w * it.fading_to_uav /
                       (cc.tau_hat * std::pow(it.dist_2d, cc.alpha));
    }
    for (const Interferer& it : real.gues) {
        const auto& cc = gu[static_cast<int>(it.cond_to_uav)];
        const double d = std::hypot(it.dist_2d, dz_gu);
        rec.i_gue_w += it.tx_power_w * it.fading_to_uav /
                       (cc.tau_hat * std::pow(d, cc.alpha));
    }
    return rec;
}

SinrRecord MonteCarloEngine::sinr_gue_ul(const NetworkRealization& real) const {
    const ScenarioParams& p = params_;
    SinrRecord rec;
    rec.noise_w = noise_w_;
    rec.serving_cond = real.serving_gue.cond;

    const double dz_gb = p.h_g - p.h_b;
    const double dz_ub = p.h_u - p.h_b;

    {
        const auto sc = class_const(p, LinkType::gb, real.serving_gue.cond);
        const double d = std::hypot(real.serving_gue.serving_dist, dz_gb);
        const double gain =
            bs_antenna_gain(std::acos(std::clamp(dz_gb / d, -1.0, 1.0)), p.antenna);
        rec.useful_w = real.serving_gue.tx_power_w * real.serving_gue.fading * gain /
                       (sc.tau_hat * std::pow(d, sc.alpha));
    }

    const ClassConst ub[2] = {class_const(p, LinkType::ub, Condition::los),
                              class_const(p, LinkType::ub, Condition::nlos)};
    const ClassConst gb[2] = {class_const(p, LinkType::gb, Condition::los),
                              class_const(p, LinkType::gb, Condition::nlos)};

    for (const Interferer& it : real.uavs) {
        const auto& cc = ub[static_cast<int>(it.cond_to_bs)];
        const double d = std::hypot(it.dist_2d, dz_ub);
        const double gain =
            bs_antenna_gain(std::acos(std::clamp(dz_ub / d, -1.0, 1.0)), p.antenna);
        rec.i_uav_w += it.tx_power_w * it.fading_to_bs * gain /
                       (cc.tau_hat * std::pow(d, cc.alpha));
    }
    for (const Interferer& it : real.gues) {
        if (!it.active_at_bs || it.dist_2d <= 0.0) continue;
        const auto& cc = gb[static_cast<int>(it.cond_to_bs)];
        const double d = std::hypot(it.dist_2d, dz_gb);
        const double gain =
            bs_antenna_gain(std::acos(std::clamp(dz_gb / d, -1.0, 1.0)), p.antenna);
        rec.i_gue_w += it.tx_power_w * it.fading_to_bs * gain /
                       (cc.tau_hat * std::pow(d, cc.alpha));
    }
    return rec;
}

DropRecords MonteCarloEngine::run() const {
    DropRecords out;
    const auto n = static_cast<std::size_t>(opts_.drops);
    out.u2u.resize(n);
    out.gue_ul.resize(n);
    parallel_for(n, opts_.jobs, [&](std::size_t i) {
        const NetworkRealization real = drop_realization(i);
        out.u2u[i] = sinr_u2u(real);
        out.gue_ul[i] = sinr_gue_ul(real);
    });
    return out;
}

CoverageCurve estimate_ccdf(std::span<const SinrRecord> records,
                            std::span<const double> thresholds_db) {
    if (records.size() < 100)
        throw std::invalid_argument("estimate_ccdf: need at least 100 records");
    CoverageCurve curve;
    curve.provenance = Provenance::montecarlo;
    curve.threshold_db.assign(thresholds_db.begin(), thresholds_db.end());
    curve.n_samples = records.size();

    std::vector<double> sinr_los, sinr_nlos;
    for (const SinrRecord& r : records)
        (r.serving_cond == Condition::los ? sinr_los : sinr_nlos).push_back(r.sinr());
    std::sort(sinr_los.begin(), sinr_los.end());
    std::sort(sinr_nlos.begin(), sinr_nlos.end());

    const double n = static_cast<double>(records.size());
    const double z = 1.959963984540054;  // 95% normal quantile
    for (double t_db : thresholds_db) {
        const double t = db_to_linear(t_db);
        const auto above = [&](const std::vector<double>& v) {
            return static_cast<double>(
                v.end() - std::upper_bound(v.begin(), v.end(), t));
        };
        const double k_los = above(sinr_los);
        const double k_nlos = above(sinr_nlos);
        const double p_hat = (k_los + k_nlos) / n;
        curve.cov_los.push_back(k_los / n);
        curve.cov_nlos.push_back(k_nlos / n);
        curve.coverage.push_back(p_hat);
        const double denom = 1.0 + z * z / n;
        const double hw =
            z * std::sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n)) / denom;
        curve.ci_halfwidth.push_back(hw);
    }
    return curve;
}

PowerDecomposition power_decomposition(std::span<const SinrRecord> records) {
    if (records.size() < 100)
        throw std::invalid_argument("power_decomposition: need at least 100 records");
    PowerDecomposition out;
    out.n_records = records.size();
    double useful = 0.0, gue = 0.0, uav = 0.0, noise = 0.0;
    for (const SinrRecord& r : records) {
        useful += r.useful_w;
        gue += r.i_gue_w;
        uav += r.i_uav_w;
        noise += r.noise_w;
    }
    const double n = static_cast<double>(records.size());
    out.useful_dbm = watt_to_dbm(useful / n);
    out.noise_dbm = watt_to_dbm(noise / n);
    if (gue > 0.0) out.i_gue_dbm = watt_to_dbm(gue / n);
    if (uav > 0.0) out.i_uav_dbm = watt_to_dbm(uav / n);
    return out;
}

void write_records_csv(std::ostream& os, std::span<const SinrRecord> records,
                       Victim victim) {
    os << "drop_idx,victim,useful_dbm,i_gue_dbm,i_uav_dbm,noise_dbm,serving_los\n";
    const char* name = victim == Victim::u2u ? "u2u" : "gue_ul";
    os.precision(10);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const SinrRecord& r = records[i];
        os << i << "," << name << "," << watt_to_dbm(r.useful_w) << ",";
        if (r.i_gue_w > 0.0) os << watt_to_dbm(r.i_gue_w);
        os << ",";
        if (r.i_uav_w > 0.0) os << watt_to_dbm(r.i_uav_w);
        os << "," << watt_to_dbm(r.noise_w) << ","
           << (r.serving_cond == Condition::los ? 1 : 0) << "\n";
    }
}

}  // namespace uavcov
