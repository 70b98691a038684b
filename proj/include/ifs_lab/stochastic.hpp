#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "chains.hpp"
#include "error.hpp"
#include "format.hpp"
#include "ifs_core.hpp"
#include "spaces.hpp"
#include "symbolic.hpp"

namespace ifs {

//---------------------------------------------------------------------------//
// Trial runner
//---------------------------------------------------------------------------//
/*!
 * Number of worker threads for `jobs` independent trials: the hardware
 * concurrency, capped by the IFS_LAB_THREADS environment variable.
 */
inline std::size_t worker_count(std::size_t jobs)
{
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("IFS_LAB_THREADS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap >= 1) {
            n = std::min<std::size_t>(n, cap);
        }
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

/*!
 * Evaluate fn(0..n-1) on worker threads. Results are stored by trial index,
 * so the output does not depend on scheduling. The first exception thrown
 * by any trial is rethrown after all workers stop.
 */
template <class Fn>
auto run_trials(std::size_t n, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>>
{
    using R = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<std::optional<R>> slots(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) {
                return;
            }
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed = true;
            }
        }
    };

    const std::size_t workers = worker_count(n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

//---------------------------------------------------------------------------//
// Branch properties and estimation
//---------------------------------------------------------------------------//
struct ReachesTarget {
    TargetSet target;
    RelationSpec rel;
    RelationSpec tilde;
    std::size_t horizon = 1;
};

/// The orbit x_0..x_H comes within eps of every point of epsilon_net(eps).
struct EpsDense {
    double eps = 0.0;
    std::size_t horizon = 1;
};

/// min_{1 <= i <= H} d(f^i x, f^i y) < tol.
struct ProximalPair {
    SpacePoint y;
    double tol = 0.0;
    std::size_t horizon = 1;
};

struct FirstLetterIs {
    Symbol symbol{1};
};

using BranchProperty = std::variant<ReachesTarget, EpsDense, ProximalPair, FirstLetterIs>;

struct EstimationReport {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double frequency = 0.0;
    double standard_error = 0.0;
    std::uint64_t base_seed = 0;
    /// Echo of the property parameters, in a fixed order.
    std::vector<std::pair<std::string, std::string>> parameters;
    /// Optional per-trial statistic (coverage fraction, minimum distance).
    std::string per_trial_label;
    std::vector<double> per_trial;

    /// Frequency within three standard errors of 0 or of 1.
    bool near_zero_or_one() const noexcept
    {
        return frequency <= 3.0 * standard_error || 1.0 - frequency <= 3.0 * standard_error;
    }
};

inline double median(std::vector<double> v)
{
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) {
        return hi;
    }
    double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

namespace detail {
struct TrialOutcome {
    bool success = false;
    double statistic = 0.0;
};

inline std::vector<std::pair<std::string, std::string>> echo(const BranchProperty& prop)
{
    struct Visitor {
        std::vector<std::pair<std::string, std::string>> operator()(const ReachesTarget& p) const
        {
            return {{"property", "reaches_target"},
                    {"target", describe(p.target)},
                    {"relation", describe(p.rel)},
                    {"tilde", describe(p.tilde)},
                    {"horizon", std::to_string(p.horizon)}};
        }
        std::vector<std::pair<std::string, std::string>> operator()(const EpsDense& p) const
        {
            return {{"property", "eps_dense"},
                    {"eps", format_double(p.eps)},
                    {"horizon", std::to_string(p.horizon)}};
        }
        std::vector<std::pair<std::string, std::string>> operator()(const ProximalPair& p) const
        {
            return {{"property", "proximal_pair"},
                    {"y", format_point(p.y)},
                    {"tol", format_double(p.tol)},
                    {"horizon", std::to_string(p.horizon)}};
        }
        std::vector<std::pair<std::string, std::string>> operator()(const FirstLetterIs& p) const
        {
            return {{"property", "first_letter_is"}, {"symbol", std::to_string(p.symbol.value())}};
        }
    };
    return std::visit(Visitor{}, prop);
}

/// Fraction of net points within eps of the orbit x_0..x_H along omega.
inline double coverage_fraction(const IfsSystem& sys, const EpsilonNet& net, const SpacePoint& x,
                                const WordStream& omega, std::size_t horizon)
{
    std::vector<char> covered(net.size(), 0);
    std::size_t count = 0;
    auto mark = [&](std::size_t j) {
        if (!covered[j]) {
            covered[j] = 1;
            ++count;
        }
    };
    SpacePoint p = x;
    net.for_each_within(p, net.resolution(), mark);
    for (std::size_t i = 0; i < horizon && count < net.size(); ++i) {
        p = sys.apply(omega[i], p);
        net.for_each_within(p, net.resolution(), mark);
    }
    return static_cast<double>(count) / static_cast<double>(net.size());
}

inline double min_pair_distance(const IfsSystem& sys, SpacePoint x, SpacePoint y,
                                const WordStream& omega, std::size_t horizon)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < horizon; ++i) {
        x = sys.apply(omega[i], x);
        y = sys.apply(omega[i], y);
        best = std::min(best, raw_distance(x, y));
    }
    return best;
}
}  // namespace detail

/*!
 * Fraction of N sampled branches with the property. Trial t uses the word
 * stream keyed by (base_seed, t), so the result is deterministic.
 */
inline EstimationReport estimate_branch_probability(const IfsSystem& sys, const SpacePoint& x,
                                                    const BranchProperty& prop,
                                                    std::size_t trials, std::uint64_t base_seed)
{
    if (trials < 1) {
        throw Error(ErrorKind::InvalidParameter, "need at least one trial");
    }
    require_in(sys.space(), x);

    std::optional<EpsilonNet> net;
    if (const auto* p = std::get_if<EpsDense>(&prop)) {
        if (!(p->eps > 0.0) || p->horizon < 1) {
            throw Error(ErrorKind::InvalidParameter, "eps_dense needs eps > 0 and horizon >= 1");
        }
        net.emplace(sys.space(), p->eps);
    } else if (const auto* p = std::get_if<ProximalPair>(&prop)) {
        require_in(sys.space(), p->y);
        if (!(p->tol > 0.0)) {
            throw Error(ErrorKind::InvalidParameter, "proximality tolerance must be positive");
        }
    } else if (const auto* p = std::get_if<ReachesTarget>(&prop)) {
        validate(sys.space(), p->target);
        validate(sys.space(), p->rel);
        validate(sys.space(), p->tilde);
    } else if (const auto* p = std::get_if<FirstLetterIs>(&prop)) {
        if (p->symbol.index() >= sys.size()) {
            throw Error(ErrorKind::OutOfRange, "letter outside the alphabet");
        }
    }

    auto outcomes = run_trials(trials, [&](std::size_t t) {
        const WordStream omega = trial_stream(base_seed, t, sys.weights());
        detail::TrialOutcome out;
        if (const auto* p = std::get_if<ReachesTarget>(&prop)) {
            out.success =
                find_chain_connection(sys, x, p->target, p->rel, p->tilde, omega, p->horizon)
                    .has_value();
        } else if (const auto* p = std::get_if<EpsDense>(&prop)) {
            out.statistic = detail::coverage_fraction(sys, *net, x, omega, p->horizon);
            out.success = out.statistic >= 1.0;
        } else if (const auto* p = std::get_if<ProximalPair>(&prop)) {
            out.statistic = detail::min_pair_distance(sys, x, p->y, omega, p->horizon);
            out.success = out.statistic < p->tol;
        } else {
            out.success = omega[0] == std::get<FirstLetterIs>(prop).symbol;
        }
        return out;
    });

    EstimationReport report;
    report.trials = trials;
    report.base_seed = base_seed;
    report.parameters = detail::echo(prop);
    for (const auto& o : outcomes) {
        report.successes += o.success ? 1 : 0;
    }
    report.frequency = static_cast<double>(report.successes) / static_cast<double>(trials);
    report.standard_error =
        std::sqrt(report.frequency * (1.0 - report.frequency) / static_cast<double>(trials));
    if (std::holds_alternative<EpsDense>(prop)) {
        report.per_trial_label = "coverage";
    } else if (std::holds_alternative<ProximalPair>(prop)) {
        report.per_trial_label = "min_distance";
    }
    if (!report.per_trial_label.empty()) {
        for (const auto& o : outcomes) {
            report.per_trial.push_back(o.statistic);
        }
    }
    return report;
}

inline EstimationReport verify_chaos_game_density(const IfsSystem& sys, const SpacePoint& x,
                                                  double eps, std::size_t horizon,
                                                  std::size_t trials, std::uint64_t base_seed)
{
    return estimate_branch_probability(sys, x, EpsDense{eps, horizon}, trials, base_seed);
}

struct ProximalityReport {
    EstimationReport estimate;
    double median_minimum = 0.0;
};

inline ProximalityReport verify_proximality(const IfsSystem& sys, const SpacePoint& x,
                                            const SpacePoint& y, double tol, std::size_t horizon,
                                            std::size_t trials, std::uint64_t base_seed)
{
    ProximalityReport out;
    out.estimate =
        estimate_branch_probability(sys, x, ProximalPair{y, tol, horizon}, trials, base_seed);
    out.estimate.parameters.insert(out.estimate.parameters.begin() + 1, {"x", format_point(x)});
    out.median_minimum = median(out.estimate.per_trial);
    return out;
}

//---------------------------------------------------------------------------//
// Tail bound
//---------------------------------------------------------------------------//
struct WindowChoice {
    std::size_t window = 0;          ///< smallest l covering every sampled point
    std::size_t sampled_points = 0;
    std::size_t unresolved = 0;      ///< sampled points with no connection within max_window
};

/*!
 * Smallest window l such that every sampled orbit point y connects to the
 * target by some word of length <= l (hit index j <= l - 1). Orbit points
 * are f^a_omega(x), a = 0..steps, along `branches` sampled branches.
 */
inline WindowChoice choose_window(const IfsSystem& sys, const SpacePoint& x,
                                  const TargetSet& target, const RelationSpec& rel,
                                  const RelationSpec& tilde, std::size_t branches,
                                  std::size_t steps, std::size_t max_window,
                                  std::uint64_t base_seed)
{
    if (max_window < 1) {
        throw Error(ErrorKind::InvalidParameter, "max_window must be >= 1");
    }
    auto per_branch = run_trials(branches, [&](std::size_t t) {
        const WordStream omega = trial_stream(base_seed, t, sys.weights());
        std::pair<std::size_t, std::size_t> worst{0, 0};  // (window, unresolved)
        SpacePoint y = x;
        for (std::size_t a = 0; a <= steps; ++a) {
            auto j = minimal_connection_index(sys, y, target, rel, tilde, max_window - 1);
            if (j) {
                worst.first = std::max(worst.first, *j + 1);
            } else {
                ++worst.second;
            }
            y = sys.apply(omega[a], y);
        }
        return worst;
    });
    WindowChoice out;
    out.sampled_points = branches * (steps + 1);
    for (const auto& [w, miss] : per_branch) {
        out.window = std::max(out.window, w);
        out.unresolved += miss;
    }
    if (out.unresolved > 0) {
        out.window = max_window;
    }
    out.window = std::max<std::size_t>(out.window, 1);
    return out;
}

struct TailBoundRow {
    std::size_t n = 0;
    std::size_t checked_through = 0;  ///< largest hit index counted, n + l
    std::size_t misses = 0;
    double miss_rate = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;  ///< bound + 3 sqrt(bound (1 - bound) / N)
    bool ok = false;
};

struct TailBoundReport {
    std::size_t window = 0;
    double p_lower = 0.0;
    std::size_t trials = 0;
    std::uint64_t base_seed = 0;
    std::vector<TailBoundRow> rows;
    std::size_t hypothesis_checked = 0;
    std::size_t hypothesis_violations = 0;

    bool all_ok() const noexcept
    {
        return std::all_of(rows.begin(), rows.end(), [](const TailBoundRow& r) { return r.ok; });
    }
};

/// (1 - p_lower)^(1 + floor(n / l)).
inline double tail_bound(double p_lower, std::size_t window, std::size_t n)
{
    return std::pow(1.0 - p_lower, 1.0 + static_cast<double>(n / window));
}

/*!
 * Empirical probability of missing the target against the geometric bound.
 *
 * A trial misses at row n when its branch has no chain connection with hit
 * index <= n + l. The hypothesis (every orbit point connects within l
 * letters) is spot-checked on the first `check_points` orbit points of the
 * first `check_branches` trials; violations are counted, not fatal.
 */
inline TailBoundReport tail_bound_report(const IfsSystem& sys, const SpacePoint& x,
                                         const TargetSet& target, const RelationSpec& rel,
                                         const RelationSpec& tilde, std::size_t window,
                                         std::vector<std::size_t> horizons, std::size_t trials,
                                         std::uint64_t base_seed, std::size_t check_branches = 10,
                                         std::size_t check_points = 20)
{
    if (window < 1 || trials < 1 || horizons.empty()) {
        throw Error(ErrorKind::InvalidParameter,
                    "tail bound needs window >= 1, trials >= 1 and at least one horizon");
    }
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
    const std::size_t max_index = horizons.back() + window;

    struct Trial {
        std::optional<std::size_t> first_hit;
        std::size_t checked = 0;
        std::size_t violations = 0;
    };
    auto results = run_trials(trials, [&](std::size_t t) {
        const WordStream omega = trial_stream(base_seed, t, sys.weights());
        Trial out;
        if (auto cert = find_chain_connection(sys, x, target, rel, tilde, omega, max_index)) {
            out.first_hit = cert->length();
        }
        if (t < check_branches) {
            SpacePoint y = x;
            for (std::size_t a = 0; a < check_points; ++a) {
                ++out.checked;
                if (!minimal_connection_index(sys, y, target, rel, tilde, window - 1)) {
                    ++out.violations;
                }
                y = sys.apply(omega[a], y);
            }
        }
        return out;
    });

    TailBoundReport report;
    report.window = window;
    report.p_lower = std::pow(sys.weights().min(), static_cast<double>(window));
    report.trials = trials;
    report.base_seed = base_seed;
    for (const auto& r : results) {
        report.hypothesis_checked += r.checked;
        report.hypothesis_violations += r.violations;
    }
    const double n_trials = static_cast<double>(trials);
    for (std::size_t n : horizons) {
        TailBoundRow row;
        row.n = n;
        row.checked_through = n + window;
        for (const auto& r : results) {
            if (!r.first_hit || *r.first_hit > row.checked_through) {
                ++row.misses;
            }
        }
        row.miss_rate = static_cast<double>(row.misses) / n_trials;
        row.bound = tail_bound(report.p_lower, window, n);
        row.tolerance = row.bound + 3.0 * std::sqrt(row.bound * (1.0 - row.bound) / n_trials);
        row.ok = row.miss_rate <= row.tolerance;
        report.rows.push_back(row);
    }
    return report;
}

//---------------------------------------------------------------------------//
// Syndetic surrogate over sampled branches
//---------------------------------------------------------------------------//
struct SyndeticReport {
    std::size_t branches = 0;
    std::size_t horizon = 0;
    std::size_t gap_limit = 0;
    std::size_t within_limit = 0;
    std::vector<std::size_t> max_gaps;  ///< per branch

    double fraction() const noexcept
    {
        return branches == 0 ? 0.0
                             : static_cast<double>(within_limit) / static_cast<double>(branches);
    }
};

inline SyndeticReport syndetic_report(const IfsSystem& sys, const SpacePoint& x,
                                      const TargetSet& target, const RelationSpec& rel,
                                      const RelationSpec& tilde, std::size_t horizon,
                                      std::size_t lookahead, std::size_t gap_limit,
                                      std::size_t branches, std::uint64_t base_seed)
{
    SyndeticReport out;
    out.branches = branches;
    out.horizon = horizon;
    out.gap_limit = gap_limit;
    out.max_gaps = run_trials(branches, [&](std::size_t t) {
        const WordStream omega = trial_stream(base_seed, t, sys.weights());
        return syndetic_max_gap(
            branch_hit_set(sys, x, omega, target, rel, tilde, horizon, lookahead));
    });
    for (std::size_t g : out.max_gaps) {
        out.within_limit += g <= gap_limit ? 1 : 0;
    }
    return out;
}

//---------------------------------------------------------------------------//
// Strong proximality scenario: a minimal rotation part plus a north-south map
//---------------------------------------------------------------------------//
/// Whether alpha / 2pi lies within tol of p/q for some q <= max_q.
inline bool near_rational_turn(double alpha, std::size_t max_q = 1000, double tol = 1e-9)
{
    const double turns = alpha / two_pi;
    for (std::size_t q = 1; q <= max_q; ++q) {
        const double scaled_turns = turns * static_cast<double>(q);
        if (std::abs(scaled_turns - std::round(scaled_turns)) < tol * static_cast<double>(q)) {
            return true;
        }
    }
    return false;
}

/// Attracting fixed point of the scenario's north-south map.
inline SpacePoint theorem_c_attractor(SpaceKind space)
{
    return space == SpaceKind::Circle ? SpacePoint::circle(0.0) : SpacePoint::sphere(0, 0, 1);
}

/*!
 * Circle: {rotation(alpha), north_south(p = 0, lambda)}.
 * Sphere: {rotation about z by alpha, rotation about x by alpha,
 * north_south(p = north pole, lambda)}. Uniform weights.
 */
inline IfsSystem build_theorem_c_scenario(SpaceKind space, double lambda, double alpha)
{
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw Error(ErrorKind::InvalidParameter, "lambda must lie in (0, 1)");
    }
    if (!std::isfinite(alpha) || near_rational_turn(alpha)) {
        throw Error(ErrorKind::InvalidParameter,
                    "rotation angle " + format_double(alpha) +
                        " is within 1e-9 of a rational multiple of 2pi (denominator <= 1000)");
    }
    const SpacePoint p = theorem_c_attractor(space);
    switch (space) {
    case SpaceKind::Circle: {
        auto s = SpaceDescriptor::circle();
        return IfsSystem(s, {make_rotation(alpha), make_north_south(s, p, lambda)});
    }
    case SpaceKind::Sphere2: {
        auto s = SpaceDescriptor::sphere2();
        return IfsSystem(s, {make_sphere_rotation({0, 0, 1}, alpha),
                             make_sphere_rotation({1, 0, 0}, alpha),
                             make_north_south(s, p, lambda)});
    }
    default: break;
    }
    throw Error(ErrorKind::InvalidParameter, "scenario needs the circle or the sphere");
}

struct MinimalityProbe {
    double eps = 0.0;
    std::size_t points = 0;
    std::size_t steps = 0;
    std::size_t dense = 0;  ///< starting points whose backward orbit is eps-dense
    std::vector<double> coverage;

    bool passed() const noexcept { return dense == points; }
};

/*!
 * Backward orbits f^{-1}_{omega_{-j}} o ... o f^{-1}_{omega_{-1}}(x) from
 * random starting points, checked for eps-density against epsilon_net(eps).
 */
inline MinimalityProbe backward_minimality_probe(const IfsSystem& sys, double eps = 0.05,
                                                 std::size_t points = 20,
                                                 std::size_t steps = 10000,
                                                 std::uint64_t base_seed = 0)
{
    if (!sys.invertible()) {
        throw Error(ErrorKind::InvalidParameter, "backward orbits need invertible maps");
    }
    EpsilonNet net(sys.space(), eps);
    MinimalityProbe out;
    out.eps = eps;
    out.points = points;
    out.steps = steps;
    out.coverage = run_trials(points, [&](std::size_t t) {
        CounterRng rng(stream_key(base_seed ^ 0x5bd1e995ULL, t));
        SpacePoint p = random_point(sys.space(), rng);
        const WordStream window = trial_stream(base_seed, t, sys.weights());
        std::vector<char> covered(net.size(), 0);
        std::size_t count = 0;
        auto mark = [&](std::size_t j) {
            if (!covered[j]) {
                covered[j] = 1;
                ++count;
            }
        };
        net.for_each_within(p, eps, mark);
        for (std::size_t j = 0; j < steps && count < net.size(); ++j) {
            p = sys.apply_inverse(window[j], p);
            net.for_each_within(p, eps, mark);
        }
        return static_cast<double>(count) / static_cast<double>(net.size());
    });
    for (double c : out.coverage) {
        out.dense += c >= 1.0 ? 1 : 0;
    }
    return out;
}

}  // namespace ifs
