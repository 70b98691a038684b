#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "chains.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "format.hpp"
#include "ifs_core.hpp"
#include "render.hpp"
#include "report.hpp"
#include "spaces.hpp"
#include "stochastic.hpp"
#include "symbolic.hpp"

namespace ifs {

//---------------------------------------------------------------------------//
// Scenario plans: fully validated parameters, built before any computation
//---------------------------------------------------------------------------//
struct EstimatePlan {
    SpacePoint start;
    BranchProperty property;
    std::size_t trials;
};

struct ChaosGamePlan {
    SpacePoint start;
    double eps;
    std::size_t horizon;
    std::size_t trials;
};

struct ConnectionPlan {
    SpacePoint start;
    TargetSet target;
    RelationSpec relation;
    RelationSpec tilde;
    std::size_t horizon;
    ChainSearchOptions search;
    double stability_radius;  ///< 0 disables the stability check
    std::size_t stability_samples;
};

struct ReachablePlan {
    SpacePoint start;
    SpacePoint end;
    double delta;
    double eps;
    std::size_t max_len;
};

struct RecurrentPlan {
    double delta;
    double eps;
};

struct ProximalPlan {
    std::size_t pairs;
    std::size_t trials;
    std::size_t horizon;
    double tol;
    double threshold;
    bool probe;
    double probe_eps;
    std::size_t probe_points;
    std::size_t probe_steps;
    std::optional<Ball> connect_ball;  ///< pair connection to this ball when set
    double connect_tau;
};

struct TheoremBPlan {
    std::size_t max_factor;
};

struct RenderPlan {
    SpacePoint start;
    RenderOptions options;
};

struct TailBoundPlan {
    SpacePoint start;
    TargetSet target;
    RelationSpec relation;
    RelationSpec tilde;
    std::vector<std::size_t> horizons;
    std::size_t trials;
    std::size_t window;  ///< 0: chosen by the window helper
    std::size_t window_branches;
    std::size_t window_steps;
    std::size_t max_window;
    bool syndetic;
    std::size_t syndetic_horizon;
    std::size_t syndetic_branches;
    std::size_t gap_factor;
};

using ScenarioPlan = std::variant<EstimatePlan, ChaosGamePlan, ConnectionPlan, ReachablePlan,
                                  RecurrentPlan, ProximalPlan, TheoremBPlan, RenderPlan,
                                  TailBoundPlan>;

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
};

struct PreparedRun {
    RawConfig config;  ///< with overrides applied; echoed into the summary
    IfsSystem system;
    std::string kind;
    std::uint64_t seed = 0;
    std::string output_dir;
    ScenarioPlan plan;
    std::optional<RenderPlan> render;  ///< from [render], for the render subcommand
};

inline constexpr const char* scenario_kinds[] = {"estimate",  "chaos-game", "chains",
                                                 "recurrent", "proximal",   "theorem-b",
                                                 "render",    "tail-bound"};

namespace detail {
inline bool kind_uses_trials(std::string_view kind)
{
    return kind == "estimate" || kind == "chaos-game" || kind == "proximal" ||
           kind == "tail-bound";
}

/// Error text without the "Kind: " prefix added by Error.
inline std::string bare_message(const Error& e)
{
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    if (msg.rfind(prefix, 0) == 0) {
        msg.erase(0, prefix.size());
    }
    return msg;
}

/// Numbers plus the names pi, golden (pi (3 - sqrt 5)) and <x>pi.
inline double parse_real(std::string_view text)
{
    text = trim(text);
    constexpr double golden = std::numbers::pi * (3.0 - 2.23606797749978969641);
    if (text == "golden") {
        return golden;
    }
    if (text == "pi") {
        return std::numbers::pi;
    }
    if (text.size() > 2 && text.substr(text.size() - 2) == "pi") {
        auto factor = trim(text.substr(0, text.size() - 2));
        if (!factor.empty() && factor.back() == '*') {
            factor = trim(factor.substr(0, factor.size() - 1));
        }
        return parse_number(factor) * std::numbers::pi;
    }
    return parse_number(text);
}

inline std::size_t to_count(double v, std::string_view what)
{
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) {
        throw Error(ErrorKind::Parse, std::string(what) + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

/// "(0 1 2)(3 4)" -> {{0,1,2},{3,4}}.
inline std::vector<std::vector<std::size_t>> parse_cycles(std::string_view text)
{
    std::vector<std::vector<std::size_t>> cycles;
    text = trim(text);
    while (!text.empty()) {
        if (text.front() != '(') {
            throw Error(ErrorKind::Parse, "cycles are written (a b c)(d e)");
        }
        const auto close = text.find(')');
        if (close == std::string_view::npos) {
            throw Error(ErrorKind::Parse, "unclosed cycle");
        }
        std::vector<std::size_t> cycle;
        std::string inner(text.substr(1, close - 1));
        for (char& c : inner) {
            if (c == ',') {
                c = ' ';
            }
        }
        std::istringstream in(inner);
        std::string tok;
        while (in >> tok) {
            cycle.push_back(to_count(parse_number(tok), "cycle entry"));
        }
        if (cycle.empty()) {
            throw Error(ErrorKind::Parse, "empty cycle");
        }
        cycles.push_back(std::move(cycle));
        text = trim(text.substr(close + 1));
    }
    return cycles;
}

inline std::vector<std::size_t> parse_index_list(std::string_view text)
{
    text = trim(text);
    if (text.size() >= 2 && text.front() == '(' && text.back() == ')') {
        text = text.substr(1, text.size() - 2);
    }
    std::vector<std::size_t> out;
    for (const auto& part : split_top_level(text, ',')) {
        out.push_back(to_count(parse_number(part), "permutation entry"));
    }
    return out;
}

inline Vec3 parse_vec3(std::string_view text)
{
    text = trim(text);
    if (text.size() >= 2 && text.front() == '(' && text.back() == ')') {
        text = text.substr(1, text.size() - 2);
    }
    auto parts = split_top_level(text, ',');
    if (parts.size() != 3) {
        throw Error(ErrorKind::Parse, "expected a vector (x,y,z)");
    }
    return {parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2])};
}

/// Arguments of a call value, each read at most once and all required.
class CallArgs {
public:
    explicit CallArgs(CallValue call) : call_(std::move(call)), used_(call_.args.size(), false) {}

    const std::string& name() const noexcept { return call_.name; }

    const std::string& require(std::string_view key)
    {
        for (std::size_t i = 0; i < call_.args.size(); ++i) {
            if (call_.args[i].first == key) {
                used_[i] = true;
                return call_.args[i].second;
            }
        }
        throw Error(ErrorKind::Parse,
                    call_.name + "{...} needs argument '" + std::string(key) + "'");
    }

    std::optional<std::string> optional(std::string_view key)
    {
        for (std::size_t i = 0; i < call_.args.size(); ++i) {
            if (call_.args[i].first == key) {
                used_[i] = true;
                return call_.args[i].second;
            }
        }
        return std::nullopt;
    }

    void finish() const
    {
        for (std::size_t i = 0; i < call_.args.size(); ++i) {
            if (!used_[i]) {
                throw Error(ErrorKind::Parse, call_.name + "{...} has unknown argument '" +
                                                  call_.args[i].first + "'");
            }
        }
    }

private:
    CallValue call_;
    std::vector<bool> used_;
};

inline MapDescriptor parse_map(const SpaceDescriptor& space, std::string_view text)
{
    CallArgs call(parse_call(text));
    const std::string& name = call.name();
    MapDescriptor out = CircleRotation{0.0};
    if (name == "rotation") {
        out = make_rotation(parse_real(call.require("alpha")));
    } else if (name == "affine") {
        out = make_affine(parse_real(call.require("a")), parse_real(call.require("b")));
    } else if (name == "north_south") {
        const SpacePoint p = parse_point(space, call.require("p"));
        out = make_north_south(space, p, parse_real(call.require("lambda")));
    } else if (name == "sphere_rotation") {
        out = make_sphere_rotation(parse_vec3(call.require("axis")),
                                   parse_real(call.require("alpha")));
    } else if (name == "permutation") {
        if (space.kind != SpaceKind::FiniteGrid) {
            throw Error(ErrorKind::SpaceMismatch, "permutation maps act on grid spaces");
        }
        auto cycles = call.optional("cycles");
        auto image = call.optional("image");
        if (cycles.has_value() == image.has_value()) {
            throw Error(ErrorKind::Parse, "permutation{...} takes exactly one of cycles, image");
        }
        out = cycles ? MapDescriptor(GridPermutation::from_cycles(space.grid_size,
                                                                  parse_cycles(*cycles)))
                     : make_permutation(parse_index_list(*image));
    } else if (name == "identity") {
        switch (space.kind) {
        case SpaceKind::Circle: out = make_rotation(0.0); break;
        case SpaceKind::Interval: out = make_affine(1.0, 0.0); break;
        case SpaceKind::Sphere2: out = make_sphere_rotation({0, 0, 1}, 0.0); break;
        case SpaceKind::FiniteGrid: out = GridPermutation::identity(space.grid_size); break;
        }
    } else {
        throw Error(ErrorKind::Parse, "unknown map '" + name + "'");
    }
    call.finish();
    return out;
}

inline Ball parse_ball_args(const SpaceDescriptor& space, CallArgs& call)
{
    Ball b{parse_point(space, call.require("center")), parse_real(call.require("radius"))};
    if (!(b.radius > 0.0)) {
        throw Error(ErrorKind::Parse, "ball radius must be positive");
    }
    return b;
}

inline TargetSet parse_target(const SpaceDescriptor& space, std::string_view text)
{
    CallArgs call(parse_call(text));
    TargetSet out = WholeSpace{};
    if (call.name() == "whole") {
        out = WholeSpace{};
    } else if (call.name() == "ball") {
        out = parse_ball_args(space, call);
    } else if (call.name() == "point") {
        out = PointSet{{parse_point(space, call.require("at"))},
                       parse_real(call.require("radius"))};
    } else {
        throw Error(ErrorKind::Parse, "unknown target '" + call.name() + "'");
    }
    call.finish();
    validate(space, out);
    return out;
}

inline RelationSpec parse_relation(const SpaceDescriptor& space, std::string_view text)
{
    CallArgs call(parse_call(text));
    const std::string& name = call.name();
    RelationSpec out = ExactImage{};
    if (name == "exact") {
        ExactImage r;
        if (auto tau = call.optional("tau")) {
            r.tau = parse_real(*tau);
        }
        out = r;
    } else if (name == "delta") {
        out = DeltaImage{parse_real(call.require("delta"))};
    } else if (name == "in_ball") {
        out = InBall{parse_ball_args(space, call)};
    } else if (name == "pair_exact") {
        PairExactImage r;
        if (auto tau = call.optional("tau")) {
            r.tau = parse_real(*tau);
        }
        out = r;
    } else if (name == "pair_in_ball") {
        out = PairInBall{parse_ball_args(space, call)};
    } else {
        throw Error(ErrorKind::Parse, "unknown relation '" + name + "'");
    }
    call.finish();
    validate(space, out);
    return out;
}

/// Runs a parser on a key's value, reporting failures at the key's line.
template <class Fn>
auto at_key(SectionReader& r, std::string_view key, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        throw r.invalid_at(key, bare_message(e));
    }
}

inline SpacePoint read_point(SectionReader& r, const SpaceDescriptor& space, std::string_view key,
                             std::optional<SpacePoint> fallback = std::nullopt)
{
    auto v = r.get(key);
    if (!v) {
        if (fallback) {
            return *fallback;
        }
        throw r.invalid(std::string("missing required key '") + std::string(key) + "'");
    }
    return at_key(r, key, [&] { return parse_point(space, *v); });
}

inline double read_real(SectionReader& r, std::string_view key,
                        std::optional<double> fallback = std::nullopt)
{
    auto v = r.get(key);
    if (!v) {
        if (fallback) {
            return *fallback;
        }
        throw r.invalid(std::string("missing required key '") + std::string(key) + "'");
    }
    return at_key(r, key, [&] { return parse_real(*v); });
}

inline double read_positive(SectionReader& r, std::string_view key,
                            std::optional<double> fallback = std::nullopt)
{
    const double v = read_real(r, key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw r.invalid_at(key, "must be a positive number");
    }
    return v;
}

inline std::size_t read_count(SectionReader& r, std::string_view key,
                              std::optional<std::uint64_t> fallback = std::nullopt,
                              std::uint64_t min = 0)
{
    const std::uint64_t v = r.unsigned_integer(key, fallback);
    if (v < min) {
        throw r.invalid_at(key, "must be at least " + std::to_string(min));
    }
    return static_cast<std::size_t>(v);
}

inline SpacePoint default_point(const SpaceDescriptor& s)
{
    switch (s.kind) {
    case SpaceKind::Circle: return SpacePoint::circle(0.0);
    case SpaceKind::Sphere2: return SpacePoint::sphere(0, 0, 1);
    case SpaceKind::Interval: return SpacePoint::interval(0.5);
    case SpaceKind::FiniteGrid: return SpacePoint::grid(0);
    }
    return SpacePoint::grid(0);
}

inline SpaceDescriptor read_space(const RawConfig& cfg)
{
    SectionReader r(cfg, "space");
    if (!r.present()) {
        throw r.invalid("missing section [space]");
    }
    const std::string kind = r.require("kind");
    SpaceDescriptor s;
    if (kind == "circle") {
        s = SpaceDescriptor::circle();
    } else if (kind == "sphere2" || kind == "sphere") {
        s = SpaceDescriptor::sphere2();
    } else if (kind == "interval") {
        s = SpaceDescriptor::interval();
    } else if (kind == "grid") {
        const auto nodes = read_count(r, "nodes", std::nullopt, 1);
        s = SpaceDescriptor::grid(nodes);
    } else {
        throw r.invalid_at("kind", "unknown space '" + kind +
                                       "' (expected circle, sphere2, interval or grid)");
    }
    r.finish();
    return s;
}

inline std::vector<MapDescriptor> read_maps(const RawConfig& cfg, const SpaceDescriptor& space)
{
    SectionReader r(cfg, "maps");
    const ConfigSection* sec = cfg.section("maps");
    if (!sec || sec->entries.empty()) {
        throw r.invalid("the system needs at least one map f1 = ...");
    }
    std::vector<MapDescriptor> maps;
    for (std::size_t i = 1; i <= sec->entries.size(); ++i) {
        const std::string key = "f" + std::to_string(i);
        auto v = r.get(key);
        if (!v) {
            throw r.invalid("maps must be named f1..f" + std::to_string(sec->entries.size()) +
                            " without gaps; missing " + key);
        }
        MapDescriptor m = at_key(r, key, [&] { return parse_map(space, *v); });
        if (!acts_on(m, space)) {
            throw r.invalid_at(key, describe(m) + " does not act on " + describe(space));
        }
        maps.push_back(std::move(m));
    }
    r.finish();
    return maps;
}

inline ProbabilityVector read_weights(const RawConfig& cfg, std::size_t maps)
{
    SectionReader r(cfg, "system");
    ProbabilityVector out = ProbabilityVector::uniform(maps);
    if (auto v = r.get("weights")) {
        std::vector<double> w = at_key(r, "weights", [&] { return parse_number_list(*v); });
        if (w.size() != maps) {
            throw r.invalid_at("weights", std::to_string(w.size()) + " weights for " +
                                              std::to_string(maps) + " maps");
        }
        out = at_key(r, "weights", [&] { return ProbabilityVector(std::move(w)); });
    }
    r.finish();
    return out;
}

inline void require_render_space(SectionReader& r, const SpaceDescriptor& s)
{
    if (s.kind == SpaceKind::FiniteGrid) {
        throw r.invalid("rendering supports circle, interval and sphere2 spaces");
    }
}

inline RenderPlan read_render(const RawConfig& cfg, const SpaceDescriptor& space)
{
    SectionReader r(cfg, "render");
    require_render_space(r, space);
    RenderPlan p{read_point(r, space, "start", default_point(space)), {}};
    p.options.width = read_count(r, "width", 512, 1);
    p.options.height = read_count(r, "height", 512, 1);
    if (p.options.width > 8192 || p.options.height > 8192) {
        throw r.invalid("image size must be at most 8192 x 8192");
    }
    p.options.steps = read_count(r, "steps", 100000);
    p.options.burn_in = read_count(r, "burn_in", 100);
    r.finish();
    return p;
}

inline std::vector<std::size_t> read_horizons(SectionReader& r, std::string_view key)
{
    const std::string text = r.require(key);
    auto values = at_key(r, key, [&] { return parse_number_list(text); });
    std::vector<std::size_t> out;
    for (double v : values) {
        out.push_back(at_key(r, key, [&] { return to_count(v, "horizon"); }));
    }
    if (out.empty()) {
        throw r.invalid_at(key, "needs at least one horizon");
    }
    return out;
}

inline TargetSet read_target(SectionReader& r, const SpaceDescriptor& s, std::string_view key,
                             std::optional<std::string> fallback = std::nullopt)
{
    auto v = r.get(key);
    if (!v && !fallback) {
        throw r.invalid(std::string("missing required key '") + std::string(key) + "'");
    }
    const std::string text = v ? *v : *fallback;
    return at_key(r, key, [&] { return parse_target(s, text); });
}

inline RelationSpec read_relation(SectionReader& r, const SpaceDescriptor& s,
                                  std::string_view key, std::optional<std::string> fallback)
{
    auto v = r.get(key);
    if (!v && !fallback) {
        throw r.invalid(std::string("missing required key '") + std::string(key) + "'");
    }
    const std::string text = v ? *v : *fallback;
    RelationSpec rel = at_key(r, key, [&] { return parse_relation(s, text); });
    if (is_pair_relation(rel)) {
        throw r.invalid_at(key, "pair relations are only used by the proximal scenario");
    }
    return rel;
}

/// Default E~ for a target: land in the target ball, or the exact image.
inline std::string default_tilde(const std::optional<std::string>& target_text)
{
    if (target_text && target_text->rfind("ball", 0) == 0) {
        return "in_ball" + target_text->substr(4);
    }
    return "exact";
}

inline ScenarioPlan read_plan(SectionReader& r, const std::string& kind, const IfsSystem& sys,
                              const RawConfig& cfg)
{
    const auto& s = sys.space();
    if (kind == "estimate") {
        const SpacePoint start = read_point(r, s, "start", default_point(s));
        const std::string prop = r.text("property", "first-letter");
        BranchProperty bp = FirstLetterIs{};
        if (prop == "first-letter") {
            const auto sym = read_count(r, "symbol", 1, 1);
            if (sym > sys.size()) {
                throw r.invalid_at("symbol", "letter outside 1.." + std::to_string(sys.size()));
            }
            bp = FirstLetterIs{Symbol(static_cast<int>(sym))};
        } else if (prop == "reaches") {
            const auto target_text = r.get("target");
            if (!target_text) {
                throw r.invalid("property 'reaches' needs a target");
            }
            ReachesTarget p{at_key(r, "target", [&] { return parse_target(s, *target_text); }),
                            read_relation(r, s, "relation", "exact"),
                            read_relation(r, s, "tilde", default_tilde(target_text)),
                            read_count(r, "horizon", 1000, 1)};
            bp = std::move(p);
        } else if (prop == "eps-dense") {
            bp = EpsDense{read_positive(r, "eps"), read_count(r, "horizon", 1000, 1)};
        } else if (prop == "proximal") {
            bp = ProximalPair{read_point(r, s, "partner"), read_positive(r, "tol"),
                              read_count(r, "horizon", 1000, 1)};
        } else {
            throw r.invalid_at("property", "unknown property '" + prop +
                                               "' (first-letter, reaches, eps-dense, proximal)");
        }
        return EstimatePlan{start, std::move(bp), read_count(r, "trials", 100, 1)};
    }
    if (kind == "chaos-game") {
        ChaosGamePlan p{read_point(r, s, "start", default_point(s)), read_positive(r, "eps"),
                        read_count(r, "horizon", 20000, 1), read_count(r, "trials", 100, 1)};
        at_key(r, "eps", [&] { return net_size(s, p.eps); });
        return p;
    }
    if (kind == "chains") {
        const std::string mode = r.text("mode", "connection");
        if (mode == "connection") {
            const auto target_text = r.get("target");
            if (!target_text) {
                throw r.invalid("missing required key 'target'");
            }
            ConnectionPlan p{read_point(r, s, "start", default_point(s)),
                             at_key(r, "target", [&] { return parse_target(s, *target_text); }),
                             read_relation(r, s, "relation", "exact"),
                             read_relation(r, s, "tilde", default_tilde(target_text)),
                             read_count(r, "horizon", 1000, 1),
                             {},
                             read_real(r, "stability_radius", 0.0),
                             read_count(r, "stability_samples", 100, 1)};
            p.search.net_resolution = read_real(r, "net_resolution", 0.0);
            if (p.stability_radius < 0.0) {
                throw r.invalid_at("stability_radius", "must be >= 0");
            }
            return p;
        }
        if (mode == "reachable") {
            ReachablePlan p{read_point(r, s, "start", default_point(s)), read_point(r, s, "end"),
                            read_positive(r, "delta"), read_positive(r, "eps"),
                            read_count(r, "max_len", 1000, 1)};
            if (!(p.delta > p.eps)) {
                throw r.invalid_at("delta", "delta must exceed eps (delta > eps > 0)");
            }
            at_key(r, "eps", [&] { return net_size(s, p.eps); });
            return p;
        }
        throw r.invalid_at("mode", "unknown mode '" + mode + "' (connection, reachable)");
    }
    if (kind == "recurrent") {
        RecurrentPlan p{read_positive(r, "delta"), read_positive(r, "eps")};
        if (!(p.delta > p.eps)) {
            throw r.invalid_at("delta", "delta must exceed eps (delta > eps > 0)");
        }
        at_key(r, "eps", [&] { return net_size(s, p.eps); });
        return p;
    }
    if (kind == "proximal") {
        ProximalPlan p{read_count(r, "pairs", 20, 1),
                       read_count(r, "trials", 100, 1),
                       read_count(r, "horizon", 50000, 1),
                       read_positive(r, "tol", 1e-3),
                       read_real(r, "threshold", 0.99),
                       r.boolean("probe", false),
                       read_positive(r, "probe_eps", 0.05),
                       read_count(r, "probe_points", 20, 1),
                       read_count(r, "probe_steps", 10000, 1),
                       std::nullopt,
                       1e-9};
        if (p.probe) {
            if (!sys.invertible()) {
                throw r.invalid_at("probe", "backward orbits need invertible maps");
            }
            at_key(r, "probe_eps", [&] { return net_size(s, p.probe_eps); });
        }
        if (auto v = r.get("connect")) {
            const auto target = at_key(r, "connect", [&] { return parse_target(s, *v); });
            const auto* ball = std::get_if<Ball>(&target);
            if (!ball) {
                throw r.invalid_at("connect", "pair connections need a ball{center, radius}");
            }
            p.connect_ball = *ball;
        }
        return p;
    }
    if (kind == "theorem-b") {
        const auto L = read_count(r, "max_factor", 8, 1);
        at_key(r, "max_factor", [&] { return universal_word(sys.size(), L).size(); });
        std::size_t cylinders = 0;
        std::size_t level = 1;
        for (std::size_t i = 1; i <= L; ++i) {
            level *= sys.size();
            cylinders += level;
        }
        if (cylinders > 100000) {
            throw r.invalid_at("max_factor", "more than 100000 cylinders to tabulate");
        }
        return TheoremBPlan{L};
    }
    if (kind == "render") {
        require_render_space(r, s);
        return read_render(cfg, s);
    }
    if (kind == "tail-bound") {
        const auto target_text = r.get("target");
        if (!target_text) {
            throw r.invalid("missing required key 'target'");
        }
        TailBoundPlan p{read_point(r, s, "start", default_point(s)),
                        at_key(r, "target", [&] { return parse_target(s, *target_text); }),
                        read_relation(r, s, "relation", "exact"),
                        read_relation(r, s, "tilde", default_tilde(target_text)),
                        read_horizons(r, "horizons"),
                        read_count(r, "trials", 1000, 1),
                        read_count(r, "window", 0),
                        read_count(r, "window_branches", 20, 1),
                        read_count(r, "window_steps", 200),
                        read_count(r, "max_window", 16, 1),
                        r.boolean("syndetic", false),
                        read_count(r, "syndetic_horizon", 2000, 1),
                        read_count(r, "syndetic_branches", 100, 1),
                        read_count(r, "gap_factor", 2, 1)};
        if (!std::holds_alternative<ExactImage>(p.relation)) {
            throw r.invalid_at("relation", "the tail bound needs exact-image chains");
        }
        return p;
    }
    std::string kinds;
    for (const char* k : scenario_kinds) {
        kinds += kinds.empty() ? k : std::string(", ") + k;
    }
    throw r.invalid_at("kind", "unknown scenario kind '" + kind + "' (" + kinds + ")");
}
}  // namespace detail

/*!
 * Parses and validates everything a run needs. No computation happens
 * here; every failure is a Parse or Validation error.
 */
inline PreparedRun prepare_run(RawConfig cfg, const RunOverrides& overrides = {})
{
    using namespace detail;
    {
        SectionReader sc(cfg, "scenario");
        if (!sc.present()) {
            throw sc.invalid("missing section [scenario]");
        }
        const std::string kind = sc.require("kind");
        if (overrides.trials && !kind_uses_trials(kind)) {
            throw Error(ErrorKind::Validation,
                        "--trials does not apply to scenario kind '" + kind + "'");
        }
        if (overrides.trials && *overrides.trials < 1) {
            throw Error(ErrorKind::Validation, "--trials must be at least 1");
        }
    }
    if (overrides.seed) {
        cfg.set("scenario", "seed", std::to_string(*overrides.seed));
    } else if (!cfg.section("scenario")->find("seed")) {
        cfg.set("scenario", "seed", "0");
    }
    if (overrides.trials) {
        cfg.set("scenario", "trials", std::to_string(*overrides.trials));
    }

    const SpaceDescriptor space = read_space(cfg);
    auto maps = read_maps(cfg, space);
    auto weights = read_weights(cfg, maps.size());
    IfsSystem sys(space, std::move(maps), std::move(weights));

    SectionReader sc(cfg, "scenario");
    const std::string kind = sc.require("kind");
    const std::uint64_t seed = sc.unsigned_integer("seed", 0);
    ScenarioPlan plan = read_plan(sc, kind, sys, cfg);
    sc.finish();

    std::optional<RenderPlan> render;
    if (cfg.section("render") && kind != "render") {
        render = read_render(cfg, space);
    }

    SectionReader out(cfg, "output");
    std::string dir = out.text("dir", "out");
    out.finish();

    for (const auto& sec : cfg.sections) {
        static const char* known[] = {"space", "maps", "system", "scenario", "render", "output"};
        if (std::find(std::begin(known), std::end(known), sec.name) == std::end(known)) {
            throw Error(ErrorKind::Validation, detail::location(cfg.source, sec.line) +
                                                   ": unknown section [" + sec.name + "]");
        }
    }
    return PreparedRun{std::move(cfg), std::move(sys), kind, seed, std::move(dir),
                       std::move(plan), std::move(render)};
}

inline PreparedRun prepare_run_file(const std::string& path, const RunOverrides& overrides = {})
{
    return prepare_run(load_config(path), overrides);
}

//---------------------------------------------------------------------------//
// Execution
//---------------------------------------------------------------------------//
namespace detail {
using Json = nlohmann::ordered_json;

inline Json config_echo(const RawConfig& cfg)
{
    Json out = Json::object();
    for (const auto& sec : cfg.sections) {
        Json entries = Json::object();
        for (const auto& e : sec.entries) {
            entries[e.key] = e.value;
        }
        out[sec.name] = std::move(entries);
    }
    return out;
}

inline Json base_summary(const PreparedRun& run, const std::string& kind)
{
    Json j = Json::object();
    j["tool"] = tool_name;
    j["version"] = tool_version;
    j["kind"] = kind;
    j["base_seed"] = run.seed;
    j["system"] = {{"space", describe(run.system.space())},
                   {"maps", Json::array()},
                   {"weights", run.system.weights().values()}};
    for (const auto& m : run.system.maps()) {
        j["system"]["maps"].push_back(describe(m));
    }
    j["config"] = config_echo(run.config);
    j["config_text"] = run.config.to_text();
    return j;
}

inline Json parameters_json(const std::vector<std::pair<std::string, std::string>>& params)
{
    Json out = Json::object();
    for (const auto& [k, v] : params) {
        out[k] = v;
    }
    return out;
}

inline Json estimate_json(const EstimationReport& rep)
{
    return {{"trials", rep.trials},
            {"successes", rep.successes},
            {"frequency", rep.frequency},
            {"standard_error", rep.standard_error},
            {"zero_one_consistent", rep.near_zero_or_one()},
            {"parameters", parameters_json(rep.parameters)}};
}

inline void add_estimate_tables(ReportBundle& b, const EstimationReport& rep)
{
    CsvTable summary("estimate", {"trials", "successes", "frequency", "standard_error",
                                  "base_seed", "zero_one_consistent"});
    summary.add_row({std::to_string(rep.trials), std::to_string(rep.successes),
                     format_double(rep.frequency), format_double(rep.standard_error),
                     format_u64(rep.base_seed), rep.near_zero_or_one() ? "1" : "0"});
    b.tables.push_back(std::move(summary));
    if (!rep.per_trial.empty()) {
        CsvTable trials("trials", {"trial", rep.per_trial_label});
        for (std::size_t t = 0; t < rep.per_trial.size(); ++t) {
            trials.add_row({std::to_string(t), format_double(rep.per_trial[t])});
        }
        b.tables.push_back(std::move(trials));
    }
}

inline std::string format_word_text(const FiniteWord& w)
{
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += std::to_string(w[i].value());
    }
    return out;
}

inline std::size_t lit_pixels(const PpmImage& img)
{
    std::size_t lit = 0;
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
            lit += img.at(x, y) != PpmImage::background ? 1 : 0;
        }
    }
    return lit;
}

inline ReportBundle render_bundle(const PreparedRun& run, const RenderPlan& p)
{
    ReportBundle b;
    b.summary = base_summary(run, "render");
    b.image = render_attractor(run.system, p.start, run.seed, p.options);
    b.summary["results"] = {{"start", format_point(p.start)},
                            {"width", p.options.width},
                            {"height", p.options.height},
                            {"steps", p.options.steps},
                            {"burn_in", p.options.burn_in},
                            {"lit_pixels", lit_pixels(*b.image)}};
    return b;
}

struct PlanExecutor {
    const PreparedRun& run;

    ReportBundle operator()(const EstimatePlan& p) const
    {
        ReportBundle b;
        b.summary = base_summary(run, run.kind);
        auto rep =
            estimate_branch_probability(run.system, p.start, p.property, p.trials, run.seed);
        add_estimate_tables(b, rep);
        b.summary["results"] = estimate_json(rep);
        return b;
    }

    ReportBundle operator()(const ChaosGamePlan& p) const
    {
        ReportBundle b;
        b.summary = base_summary(run, run.kind);
        auto rep =
            verify_chaos_game_density(run.system, p.start, p.eps, p.horizon, p.trials, run.seed);
        add_estimate_tables(b, rep);
        b.summary["results"] = estimate_json(rep);
        b.summary["results"]["median_coverage"] = median(rep.per_trial);
        return b;
    }

    ReportBundle operator()(const ConnectionPlan& p) const
    {
        ReportBundle b;
        b.summary = base_summary(run, run.kind);
        const WordStream omega = trial_stream(run.seed, 0, run.system.weights());
        auto cert = find_chain_connection(run.system, p.start, p.target, p.relation, p.tilde,
                                          omega, p.horizon, p.search);
        Json res = {{"mode", "connection"},
                    {"start", format_point(p.start)},
                    {"target", describe(p.target)},
                    {"relation", describe(p.relation)},
                    {"tilde", describe(p.tilde)},
                    {"horizon", p.horizon},
                    {"found", cert.has_value()}};
        if (cert) {
            res["length"] = cert->length();
            res["direction"] = format_word_text(cert->direction);
            res["endpoint"] = format_point(cert->endpoint());
            res["verified"] = verify_chain(run.system, *cert);
            b.tables.push_back(witness_table(run.system, *cert));
            if (p.stability_radius > 0.0) {
                auto st = check_stable_connection(run.system, *cert, p.stability_radius,
                                                  p.stability_samples, run.seed);
                res["stability"] = {{"radius", st.radius},
                                    {"samples", st.samples},
                                    {"failures", st.failures},
                                    {"stable", st.stable}};
            }
        } else {
            b.not_found = true;
        }
        b.summary["results"] = std::move(res);
        return b;
    }

    ReportBundle operator()(const ReachablePlan& p) const
    {
        ReportBundle b;
        b.summary = base_summary(run, run.kind);
        ChainGraph graph(run.system, p.delta, p.eps);
        auto r = delta_chain_reachable(graph, run.system, p.start, p.end, p.max_len);
        Json res = {{"mode", "reachable"},
                    {"start", format_point(p.start)},
                    {"end", format_point(p.end)},
                    {"delta", p.delta},
                    {"eps", p.eps},
                    {"max_len", p.max_len},
                    {"net_size", graph.size()},
                    {"reachable", r.reachable}};
        if (r.reachable && r.word && r.certificate) {
            res["length"] = r.word->size();
            res["word"] = format_word_text(*r.word);
            res["verified"] = verify_chain(run.system, *r.certificate);
            b.tables.push_back(witness_table(run.system, *r.certificate));
        } else {
            b.not_found = true;
        }
        b.summary["results"] = std::move(res);
        return b;
    }

    ReportBundle operator()(const RecurrentPlan& p) const
    {
        ReportBundle b;
        b.summary = base_summary(run, run.kind);
        ChainGraph graph(run.system, p.delta, p.eps);
        std::size_t components = 0;
        const auto comp = strongly_connected_components(graph, &components);
        const auto rec = chain_recurrent_set(graph);
        std::vector<char> in_rec(graph.size(), 0);
        for (std::size_t u : rec) {
            in_rec[u] = 1;
        }
        CsvTable nodes("nodes", {"node", "point", "recurrent", "component"});
        for (std::size_t u = 0; u < graph.size(); ++u) {
            nodes.add_row({std::to_string(u), format_point(graph.net()[u]),
                           in_rec[u] ? "1" : "0", std::to_string(comp[u])});
        }
        b.tables.push_back(std::move(nodes));
        b.summary["results"] = {{"delta", p.delta},
                                {"eps", p.eps},
                                {"net_size", graph.size()},
                                {"edges", graph.edge_count()},
                                {"recurrent_nodes", rec.size()},
                                {"components", components},
                                {"chain_transitive", is_chain_transitive(graph)}};
        return b;
    }

    ReportBundle operator()(const ProximalPlan& p) const
    {
        ReportBundle b;
        b.summary = base_summary(run, run.kind);
        const auto& space = run.system.space();
        std::vector<std::string> header{"pair", "x", "y", "distance", "frequency",
                                        "standard_error", "median_minimum"};
        if (p.connect_ball) {
            header.insert(header.end(), {"connected", "hit_index"});
        }
        CsvTable pairs("pairs", header);
        double min_freq = 1.0;
        std::size_t passing = 0;
        Json per_pair = Json::array();
        for (std::size_t i = 0; i < p.pairs; ++i) {
            CounterRng rng(stream_key(run.seed ^ 0x9e3779b97f4a7c15ULL, i));
            const SpacePoint x = random_point(space, rng);
            const SpacePoint y = random_point(space, rng);
            const std::uint64_t pair_seed = stream_key(run.seed, i);
            auto rep = verify_proximality(run.system, x, y, p.tol, p.horizon, p.trials, pair_seed);
            const double f = rep.estimate.frequency;
            min_freq = std::min(min_freq, f);
            passing += f >= p.threshold ? 1 : 0;
            std::vector<std::string> row{std::to_string(i),
                                         format_point(x),
                                         format_point(y),
                                         format_double(raw_distance(x, y)),
                                         format_double(f),
                                         format_double(rep.estimate.standard_error),
                                         format_double(rep.median_minimum)};
            Json pj = {{"pair", i}, {"frequency", f}, {"median_minimum", rep.median_minimum}};
            if (p.connect_ball) {
                const WordStream omega = trial_stream(pair_seed, 0, run.system.weights());
                auto cert = find_pair_connection(run.system, PointPair{x, y}, *p.connect_ball,
                                                 PairExactImage{p.connect_tau},
                                                 PairInBall{*p.connect_ball}, omega, p.horizon);
                row.push_back(cert ? "1" : "0");
                row.push_back(cert ? std::to_string(cert->length()) : "");
                pj["connected"] = cert.has_value();
                if (cert) {
                    pj["hit_index"] = cert->length();
                }
            }
            pairs.add_row(std::move(row));
            per_pair.push_back(std::move(pj));
        }
        b.tables.push_back(std::move(pairs));
        Json res = {{"pairs", p.pairs},
                    {"trials", p.trials},
                    {"horizon", p.horizon},
                    {"tol", p.tol},
                    {"threshold", p.threshold},
                    {"pairs_meeting_threshold", passing},
                    {"min_frequency", min_freq},
                    {"per_pair", std::move(per_pair)}};
        if (p.connect_ball) {
            res["connect"] = describe(TargetSet{*p.connect_ball});
        }
        if (p.probe) {
            auto probe = backward_minimality_probe(run.system, p.probe_eps, p.probe_points,
                                                   p.probe_steps, run.seed);
            res["backward_probe"] = {{"eps", probe.eps},
                                     {"points", probe.points},
                                     {"steps", probe.steps},
                                     {"dense", probe.dense},
                                     {"passed", probe.passed()},
                                     {"min_coverage", probe.coverage.empty()
                                                          ? 0.0
                                                          : *std::min_element(
                                                                probe.coverage.begin(),
                                                                probe.coverage.end())}};
        }
        b.summary["results"] = std::move(res);
        return b;
    }

    ReportBundle operator()(const TheoremBPlan& p) const
    {
        ReportBundle b;
        b.summary = base_summary(run, run.kind);
        const std::size_t k = run.system.size();
        const FiniteWord w = universal_word(k, p.max_factor);
        CsvTable table("cylinders", {"cylinder", "length", "occurrence", "verified"});
        std::size_t total = 0;
        std::size_t confirmed = 0;
        for (std::size_t len = 1; len <= p.max_factor; ++len) {
            std::vector<int> digits(len, 1);
            for (;;) {
                FiniteWord prefix;
                for (int d : digits) {
                    prefix.push_back(Symbol(d));
                }
                auto n = find_cylinder_occurrence(w, Cylinder(prefix), w.size() - len);
                bool ok = false;
                if (n) {
                    ok = w.slice(*n, len) == prefix;
                }
                ++total;
                confirmed += ok ? 1 : 0;
                table.add_row({format_word(prefix, k), std::to_string(len),
                               n ? std::to_string(*n) : "", ok ? "1" : "0"});
                std::size_t pos = len;
                while (pos > 0 && digits[pos - 1] == static_cast<int>(k)) {
                    digits[--pos] = 1;
                }
                if (pos == 0) {
                    break;
                }
                ++digits[pos - 1];
            }
        }
        b.tables.push_back(std::move(table));
        b.summary["results"] = {{"alphabet", k},
                                {"max_factor", p.max_factor},
                                {"word_length", w.size()},
                                {"cylinders", total},
                                {"confirmed", confirmed},
                                {"all_found", confirmed == total}};
        return b;
    }

    ReportBundle operator()(const RenderPlan& p) const { return render_bundle(run, p); }

    ReportBundle operator()(const TailBoundPlan& p) const
    {
        ReportBundle b;
        b.summary = base_summary(run, run.kind);
        Json res = Json::object();
        std::size_t window = p.window;
        if (window == 0) {
            auto choice = choose_window(run.system, p.start, p.target, p.relation, p.tilde,
                                        p.window_branches, p.window_steps, p.max_window,
                                        run.seed);
            window = choice.window;
            res["window_helper"] = {{"window", choice.window},
                                    {"sampled_points", choice.sampled_points},
                                    {"unresolved", choice.unresolved}};
        }
        auto rep = tail_bound_report(run.system, p.start, p.target, p.relation, p.tilde, window,
                                     p.horizons, p.trials, run.seed);
        CsvTable rows("tail_bound",
                      {"n", "checked_through", "misses", "miss_rate", "bound", "tolerance", "ok"});
        for (const auto& r : rep.rows) {
            rows.add_row({std::to_string(r.n), std::to_string(r.checked_through),
                          std::to_string(r.misses), format_double(r.miss_rate),
                          format_double(r.bound), format_double(r.tolerance), r.ok ? "1" : "0"});
        }
        b.tables.push_back(std::move(rows));
        res["start"] = format_point(p.start);
        res["target"] = describe(p.target);
        res["window"] = rep.window;
        res["p_lower"] = rep.p_lower;
        res["trials"] = rep.trials;
        res["all_ok"] = rep.all_ok();
        res["hypothesis_checked"] = rep.hypothesis_checked;
        res["hypothesis_violations"] = rep.hypothesis_violations;
        if (p.syndetic) {
            const std::size_t limit = p.gap_factor * window;
            auto syn = syndetic_report(run.system, p.start, p.target, p.relation, p.tilde,
                                       p.syndetic_horizon, limit, limit, p.syndetic_branches,
                                       stream_key(run.seed, 0x5e7d));
            CsvTable gaps("syndetic", {"branch", "max_gap", "within_limit"});
            for (std::size_t i = 0; i < syn.max_gaps.size(); ++i) {
                gaps.add_row({std::to_string(i), std::to_string(syn.max_gaps[i]),
                              syn.max_gaps[i] <= limit ? "1" : "0"});
            }
            b.tables.push_back(std::move(gaps));
            res["syndetic"] = {{"horizon", syn.horizon},
                               {"branches", syn.branches},
                               {"gap_limit", syn.gap_limit},
                               {"within_limit", syn.within_limit},
                               {"fraction", syn.fraction()}};
        }
        b.summary["results"] = std::move(res);
        return b;
    }
};
}  // namespace detail

/// Runs the prepared scenario and assembles its report (nothing is written).
inline ReportBundle execute_run(const PreparedRun& run)
{
    return std::visit(detail::PlanExecutor{run}, run.plan);
}

/// Chaos-game picture from the [render] section (or a render scenario).
inline ReportBundle execute_render(const PreparedRun& run)
{
    if (const auto* p = std::get_if<RenderPlan>(&run.plan)) {
        return detail::render_bundle(run, *p);
    }
    if (run.render) {
        return detail::render_bundle(run, *run.render);
    }
    SectionReader r(run.config, "render");
    detail::require_render_space(r, run.system.space());
    return detail::render_bundle(
        run, RenderPlan{detail::default_point(run.system.space()), RenderOptions{}});
}

}  // namespace ifs
