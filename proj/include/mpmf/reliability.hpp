#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mpmf/geo.hpp"
#include "mpmf/rng.hpp"

namespace mpmf {

struct UniformDist {
    double lo = 0.0;
    double hi = 0.0;

    double mean() const { return 0.5 * (lo + hi); }
    double sample(Rng& rng) const { return rng.uniform(lo, hi); }

    void validate(const char* what) const {
        if (!(hi >= lo)) throw ValidationError(std::string(what) + ": hi < lo");
    }
};

enum class BridgeArchetype { typical_43yr, new_bridge };
enum class MaintenancePolicy { no_pi, traditional, crowdsourced };

inline const char* to_string(MaintenancePolicy p) {
    switch (p) {
        case MaintenancePolicy::no_pi: return "no_pi";
        case MaintenancePolicy::traditional: return "traditional";
        default: return "crowdsourced";
    }
}

// Bridge class: initial reliability index, degradation rate, and the
// improvement produced by one traditional preventive intervention. The
// improvement defaults are calibration choices (the underlying reference
// distributions are not published); see configs/ to override them.
struct ArchetypeConfig {
    BridgeArchetype kind = BridgeArchetype::typical_43yr;
    UniformDist beta0{5.0, 6.4};
    UniformDist rate{0.03, 0.07};         // beta units per year
    UniformDist improvement{0.08, 0.12};  // beta jump per traditional PI

    void validate() const {
        beta0.validate("beta0");
        rate.validate("rate");
        improvement.validate("improvement");
        if (!(rate.lo >= 0.0)) throw ValidationError("ArchetypeConfig: negative degradation rate");
    }

    static ArchetypeConfig typical() { return ArchetypeConfig{}; }

    static ArchetypeConfig fresh() {
        ArchetypeConfig a;
        a.kind = BridgeArchetype::new_bridge;
        a.beta0 = {8.0, 9.0};
        a.improvement = {0.015, 0.025};
        return a;
    }
};

struct PolicyConfig {
    MaintenancePolicy kind = MaintenancePolicy::no_pi;
    double pi_interval_years = 15.0;
    double apr = 0.06;
    double service_limit = 4.6;
    // Crowdsourced one-time jump; set by equalize_costs (scaled copy of the
    // archetype's improvement distribution).
    UniformDist pi_effect{0.0, 0.0};

    void validate() const {
        if (!(service_limit > 0.0)) throw ValidationError("PolicyConfig: service limit must be positive");
        if (apr < 0.0) throw ValidationError("PolicyConfig: negative APR");
        if (!(pi_interval_years > 0.0)) throw ValidationError("PolicyConfig: bad PI interval");
    }
};

struct ProfileEvent {
    double year = 0.0;
    double jump = 0.0;
};

// beta(t) decays linearly between events and jumps up at each event; service
// ends at the first crossing below the limit, after which no further PIs are
// applied (the profile keeps decaying for aggregation purposes).
struct ReliabilityProfile {
    std::vector<double> t;     // 0..horizon, yearly
    std::vector<double> beta;  // right-continuous samples
    std::vector<ProfileEvent> events;
    double service_life = 0.0;
    bool censored = false;  // still above the limit at the horizon
};

inline ReliabilityProfile generate_profile(const ArchetypeConfig& arch, const PolicyConfig& policy,
                                           double horizon_years, Rng& rng) {
    arch.validate();
    policy.validate();
    if (!(horizon_years > 0.0)) throw ValidationError("generate_profile: horizon must be positive");

    const double beta0 = arch.beta0.sample(rng);
    const double rate = arch.rate.sample(rng);
    const double limit = policy.service_limit;

    ReliabilityProfile profile;
    double beta_at_event = beta0;  // value right after the previous event
    double t_event = 0.0;
    bool in_service = beta0 >= limit;
    double life = in_service ? std::numeric_limits<double>::infinity() : 0.0;

    auto beta_before = [&](double t) { return beta_at_event - rate * (t - t_event); };
    auto crossing_from = [&](double) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return t_event + (beta_at_event - limit) / rate;
    };

    // Collect events chronologically.
    if (in_service) {
        if (policy.kind == MaintenancePolicy::traditional) {
            for (double ty = policy.pi_interval_years; ty <= horizon_years;
                 ty += policy.pi_interval_years) {
                const double cross = crossing_from(t_event);
                if (cross < ty) {  // service ended before this scheduled PI
                    life = cross;
                    in_service = false;
                    break;
                }
                const double jump = arch.improvement.sample(rng);
                beta_at_event = beta_before(ty) + jump;
                t_event = ty;
                profile.events.push_back({ty, jump});
            }
            if (in_service) life = crossing_from(t_event);
        } else if (policy.kind == MaintenancePolicy::crowdsourced) {
            const double cross = crossing_from(t_event);
            if (cross <= horizon_years && std::isfinite(cross)) {
                const double jump = policy.pi_effect.sample(rng);
                beta_at_event = limit + jump;
                t_event = cross;
                profile.events.push_back({cross, jump});
            }
            life = crossing_from(t_event);
        } else {
            life = crossing_from(t_event);
        }
    }

    if (life > horizon_years) {
        profile.censored = true;
        profile.service_life = horizon_years;
    } else {
        profile.service_life = life;
    }

    // Sample the piecewise-linear profile on the yearly grid (right-continuous
    // at event years).
    const std::size_t n_years = static_cast<std::size_t>(std::floor(horizon_years)) + 1;
    profile.t.resize(n_years);
    profile.beta.resize(n_years);
    for (std::size_t y = 0; y < n_years; ++y) {
        const double ty = static_cast<double>(y);
        double b = beta0 - rate * ty;
        for (const auto& ev : profile.events)
            if (ev.year <= ty) b += ev.jump;
        profile.t[y] = ty;
        profile.beta[y] = b;
    }
    return profile;
}

// One-time crowdsourced PI extent whose present value at `apr` matches the
// expected discounted cost of the traditional schedule over the horizon
// (cost taken proportional to PI extent). The one-time PI is assumed at the
// mean no-PI crossing time of the archetype.
inline double equalize_costs(const PolicyConfig& traditional, const ArchetypeConfig& arch,
                             double horizon_years) {
    traditional.validate();
    arch.validate();
    const double limit = traditional.service_limit;
    const double mean_rate = arch.rate.mean();
    if (!(mean_rate > 0.0)) throw ValidationError("equalize_costs: zero mean degradation rate");
    const double t_onetime = (arch.beta0.mean() - limit) / mean_rate;

    double pv_traditional = 0.0;
    for (double ty = traditional.pi_interval_years; ty <= horizon_years;
         ty += traditional.pi_interval_years)
        pv_traditional += arch.improvement.mean() * std::pow(1.0 + traditional.apr, -ty);
    const double extent = pv_traditional * std::pow(1.0 + traditional.apr, t_onetime);
    if (!(extent > 0.0)) throw ValidationError("equalize_costs: infeasible (required extent <= 0)");
    return extent;
}

// Crowdsourced policy with its pi_effect distribution scaled so the mean
// equals the cost-equalized extent.
inline PolicyConfig make_crowdsourced_policy(const PolicyConfig& traditional,
                                             const ArchetypeConfig& arch, double horizon_years) {
    const double extent = equalize_costs(traditional, arch, horizon_years);
    PolicyConfig policy = traditional;
    policy.kind = MaintenancePolicy::crowdsourced;
    const double scale = extent / arch.improvement.mean();
    policy.pi_effect = {arch.improvement.lo * scale, arch.improvement.hi * scale};
    return policy;
}

struct McSummary {
    std::vector<double> year;
    std::vector<double> mean_beta;
    std::vector<double> std_beta;
    double expected_life = 0.0;  // first crossing of the mean profile below the limit
    bool censored = false;
};

// Per-realization RNG streams are keyed by (seed, index), so the aggregate is
// independent of generation order.
inline McSummary monte_carlo(const ArchetypeConfig& arch, const PolicyConfig& policy, int n,
                             double horizon_years, std::uint64_t seed) {
    if (n < 1) throw ValidationError("monte_carlo: n must be >= 1");
    const std::size_t n_years = static_cast<std::size_t>(std::floor(horizon_years)) + 1;
    std::vector<double> sum(n_years, 0.0), sum_sq(n_years, 0.0);
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        const ReliabilityProfile profile = generate_profile(arch, policy, horizon_years, rng);
        for (std::size_t y = 0; y < n_years; ++y) {
            sum[y] += profile.beta[y];
            sum_sq[y] += profile.beta[y] * profile.beta[y];
        }
    }

    McSummary mc;
    mc.year.resize(n_years);
    mc.mean_beta.resize(n_years);
    mc.std_beta.resize(n_years);
    for (std::size_t y = 0; y < n_years; ++y) {
        mc.year[y] = static_cast<double>(y);
        mc.mean_beta[y] = sum[y] / n;
        const double var = std::max(0.0, sum_sq[y] / n - mc.mean_beta[y] * mc.mean_beta[y]);
        mc.std_beta[y] = std::sqrt(var);
    }

    mc.expected_life = horizon_years;
    mc.censored = true;
    for (std::size_t y = 0; y < n_years; ++y) {
        if (mc.mean_beta[y] < policy.service_limit) {
            if (y == 0) {
                mc.expected_life = 0.0;
            } else {
                const double b0 = mc.mean_beta[y - 1];
                const double b1 = mc.mean_beta[y];
                mc.expected_life = static_cast<double>(y - 1) + (b0 - policy.service_limit) / (b0 - b1);
            }
            mc.censored = false;
            break;
        }
    }
    return mc;
}

}  // namespace mpmf
