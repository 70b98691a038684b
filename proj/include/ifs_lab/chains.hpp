#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "format.hpp"
#include "ifs_core.hpp"
#include "spaces.hpp"
#include "symbolic.hpp"

namespace ifs {

//---------------------------------------------------------------------------//
// Relations
//
// Every relation is evaluated on a step: given the step letter i, the chain
// point x and the next point y, the relation compares the image f_i(x) with
// y. ExactImage and DeltaImage are the "y = f_i(x)" and "d(f_i(x), y) < delta"
// relations; InBall requires both f_i(x) and y to lie in the ball. The Pair
// kinds act coordinatewise on X x X.
//---------------------------------------------------------------------------//
struct ExactImage {
    double tau = 1e-9;
};

struct DeltaImage {
    double delta = 0.0;
};

struct InBall {
    Ball ball;
};

struct PairExactImage {
    double tau = 1e-9;
};

struct PairInBall {
    Ball ball;
};

using RelationSpec = std::variant<ExactImage, DeltaImage, InBall, PairExactImage, PairInBall>;

inline bool is_pair_relation(const RelationSpec& rel) noexcept
{
    return std::holds_alternative<PairExactImage>(rel) || std::holds_alternative<PairInBall>(rel);
}

inline std::string describe(const RelationSpec& rel)
{
    struct Visitor {
        std::string operator()(const ExactImage& r) const
        {
            return "exact_image{tau=" + format_double(r.tau) + "}";
        }
        std::string operator()(const DeltaImage& r) const
        {
            return "delta_image{delta=" + format_double(r.delta) + "}";
        }
        std::string operator()(const InBall& r) const
        {
            return "in_ball{center=" + format_point(r.ball.center) +
                   ", radius=" + format_double(r.ball.radius) + "}";
        }
        std::string operator()(const PairExactImage& r) const
        {
            return "pair_exact_image{tau=" + format_double(r.tau) + "}";
        }
        std::string operator()(const PairInBall& r) const
        {
            return "pair_in_ball{center=" + format_point(r.ball.center) +
                   ", radius=" + format_double(r.ball.radius) + "}";
        }
    };
    return std::visit(Visitor{}, rel);
}

inline void validate(const SpaceDescriptor& s, const RelationSpec& rel)
{
    auto check_ball = [&s](const Ball& b) {
        require_in(s, b.center);
        if (!(b.radius > 0.0)) {
            throw Error(ErrorKind::InvalidParameter, "relation ball radius must be positive");
        }
    };
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ExactImage> || std::is_same_v<T, PairExactImage>) {
                if (!(r.tau >= 0.0)) {
                    throw Error(ErrorKind::InvalidParameter, "tolerance tau must be >= 0");
                }
            } else if constexpr (std::is_same_v<T, DeltaImage>) {
                if (!(r.delta > 0.0)) {
                    throw Error(ErrorKind::InvalidParameter, "delta must be positive");
                }
            } else {
                check_ball(r.ball);
            }
        },
        rel);
}

namespace detail {
/// Single-point relation applied to an already computed image.
inline bool image_relation_holds(const RelationSpec& rel, const SpacePoint& image,
                                 const SpacePoint& y)
{
    if (const auto* r = std::get_if<ExactImage>(&rel)) {
        return raw_distance(image, y) <= r->tau;
    }
    if (const auto* r = std::get_if<DeltaImage>(&rel)) {
        return raw_distance(image, y) < r->delta;
    }
    if (const auto* r = std::get_if<InBall>(&rel)) {
        return r->ball.contains(image) && r->ball.contains(y);
    }
    throw Error(ErrorKind::InvalidParameter,
                "pair relation " + describe(rel) + " used on single points");
}

inline bool pair_image_relation_holds(const RelationSpec& rel,
                                      const std::pair<SpacePoint, SpacePoint>& image,
                                      const std::pair<SpacePoint, SpacePoint>& y)
{
    if (const auto* r = std::get_if<PairExactImage>(&rel)) {
        return raw_distance(image.first, y.first) <= r->tau &&
               raw_distance(image.second, y.second) <= r->tau;
    }
    if (const auto* r = std::get_if<PairInBall>(&rel)) {
        return r->ball.contains(image.first) && r->ball.contains(image.second) &&
               r->ball.contains(y.first) && r->ball.contains(y.second);
    }
    throw Error(ErrorKind::InvalidParameter,
                "single-point relation " + describe(rel) + " used on pairs");
}
}  // namespace detail

/// Whether f_letter(x) relates to y.
inline bool relation_holds(const IfsSystem& sys, const RelationSpec& rel, Symbol letter,
                           const SpacePoint& x, const SpacePoint& y)
{
    require_in(sys.space(), x);
    require_in(sys.space(), y);
    return detail::image_relation_holds(rel, sys.apply(letter, x), y);
}

using PointPair = std::pair<SpacePoint, SpacePoint>;

/// Whether (f_letter(x.first), f_letter(x.second)) relates to y.
inline bool relation_holds(const IfsSystem& sys, const RelationSpec& rel, Symbol letter,
                           const PointPair& x, const PointPair& y)
{
    for (const auto* p : {&x.first, &x.second, &y.first, &y.second}) {
        require_in(sys.space(), *p);
    }
    return detail::pair_image_relation_holds(
        rel, {sys.apply(letter, x.first), sys.apply(letter, x.second)}, y);
}

//---------------------------------------------------------------------------//
// Target sets
//---------------------------------------------------------------------------//
struct WholeSpace {};

/// Closed neighbourhood {q : min_j d(q, points_j) <= radius}.
struct PointSet {
    std::vector<SpacePoint> points;
    double radius = 0.0;
};

using TargetSet = std::variant<Ball, WholeSpace, PointSet>;

inline bool target_contains(const TargetSet& target, const SpacePoint& q)
{
    if (const auto* b = std::get_if<Ball>(&target)) {
        return b->contains(q);
    }
    if (const auto* ps = std::get_if<PointSet>(&target)) {
        for (const auto& p : ps->points) {
            if (p.kind() == q.kind() && raw_distance(p, q) <= ps->radius) {
                return true;
            }
        }
        return false;
    }
    return true;
}

inline void validate(const SpaceDescriptor& s, const TargetSet& target)
{
    if (const auto* b = std::get_if<Ball>(&target)) {
        require_in(s, b->center);
        if (!(b->radius > 0.0)) {
            throw Error(ErrorKind::InvalidParameter, "target ball radius must be positive");
        }
    } else if (const auto* ps = std::get_if<PointSet>(&target)) {
        if (ps->points.empty()) {
            throw Error(ErrorKind::InvalidParameter, "target point set is empty");
        }
        if (!(ps->radius >= 0.0)) {
            throw Error(ErrorKind::InvalidParameter, "target point set radius must be >= 0");
        }
        for (const auto& p : ps->points) {
            require_in(s, p);
        }
    }
}

inline std::string describe(const TargetSet& target)
{
    if (const auto* b = std::get_if<Ball>(&target)) {
        return "ball{center=" + format_point(b->center) +
               ", radius=" + format_double(b->radius) + "}";
    }
    if (const auto* ps = std::get_if<PointSet>(&target)) {
        return "point_set{points=" + std::to_string(ps->points.size()) +
               ", radius=" + format_double(ps->radius) + "}";
    }
    return "whole_space";
}

//---------------------------------------------------------------------------//
// Certificates
//---------------------------------------------------------------------------//
/*!
 * A chain connection x_0 E^n E~ q. direction holds omega_1..omega_{n+1};
 * points holds x_0..x_n followed by q = x_{n+1}.
 */
struct ChainCertificate {
    FiniteWord direction;
    std::vector<SpacePoint> points;
    RelationSpec relation;
    RelationSpec tilde_relation;
    TargetSet target;

    /// Number n of E-steps before the closing E~ step.
    std::size_t length() const noexcept { return direction.empty() ? 0 : direction.size() - 1; }
    const SpacePoint& start() const { return points.front(); }
    const SpacePoint& endpoint() const { return points.back(); }
};

inline bool verify_chain(const IfsSystem& sys, const ChainCertificate& cert)
{
    const auto& w = cert.direction;
    const auto& x = cert.points;
    if (w.empty() || x.size() != w.size() + 1) {
        return false;
    }
    if (is_pair_relation(cert.relation) || is_pair_relation(cert.tilde_relation)) {
        return false;
    }
    for (const auto& p : x) {
        if (!belongs_to(sys.space(), p)) {
            return false;
        }
    }
    for (Symbol s : w) {
        if (s.index() >= sys.size()) {
            return false;
        }
    }
    const std::size_t n = w.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!relation_holds(sys, cert.relation, w[i], x[i], x[i + 1])) {
            return false;
        }
    }
    return relation_holds(sys, cert.tilde_relation, w[n], x[n], x[n + 1]) &&
           target_contains(cert.target, x[n + 1]);
}

/*!
 * Pick a closing point q with image E~ q and q in the target, where image is
 * f_{omega_{n+1}}(x_n). Candidates are tried in a fixed order: the image
 * itself, then points pulled toward each target anchor, then the anchors.
 */
inline std::optional<SpacePoint> choose_endpoint(const SpaceDescriptor& s,
                                                 const RelationSpec& tilde,
                                                 const SpacePoint& image,
                                                 const TargetSet& target)
{
    auto accept = [&](const SpacePoint& q) {
        return target_contains(target, q) && detail::image_relation_holds(tilde, image, q);
    };
    if (accept(image)) {
        return image;
    }
    if (std::holds_alternative<ExactImage>(tilde)) {
        return std::nullopt;
    }

    std::vector<SpacePoint> anchors;
    if (const auto* b = std::get_if<Ball>(&target)) {
        anchors.push_back(b->center);
    } else if (const auto* ps = std::get_if<PointSet>(&target)) {
        anchors = ps->points;
    }

    if (const auto* r = std::get_if<DeltaImage>(&tilde)) {
        // Move from the image toward each anchor by just under delta.
        for (const auto& a : anchors) {
            const double d = raw_distance(image, a);
            if (d <= 0.0) {
                continue;
            }
            const double step = std::min(d, r->delta * (1.0 - 1e-9));
            auto q = geodesic_point(s, image, a, step / d);
            if (accept(q)) {
                return q;
            }
        }
        return std::nullopt;
    }
    if (const auto* r = std::get_if<InBall>(&tilde)) {
        for (const auto& a : anchors) {
            if (accept(a)) {
                return a;
            }
        }
        if (accept(r->ball.center)) {
            return r->ball.center;
        }
        for (const auto& a : anchors) {
            auto q = geodesic_point(s, r->ball.center, a, 0.5);
            if (accept(q)) {
                return q;
            }
        }
    }
    return std::nullopt;
}

/// Witness chain as a CSV table: step, letter, point, step error.
inline CsvTable witness_table(const IfsSystem& sys, const ChainCertificate& cert,
                              std::string name = "witness")
{
    CsvTable table(std::move(name), {"step", "letter", "point", "step_error"});
    for (std::size_t i = 0; i < cert.points.size(); ++i) {
        if (i == 0) {
            table.add_row({"0", "", format_point(cert.points[0]), ""});
            continue;
        }
        const Symbol letter = cert.direction[i - 1];
        const double err = raw_distance(sys.apply(letter, cert.points[i - 1]), cert.points[i]);
        table.add_row({std::to_string(i), std::to_string(letter.value()),
                       format_point(cert.points[i]), format_double(err)});
    }
    return table;
}

//---------------------------------------------------------------------------//
// Searching for chain connections
//---------------------------------------------------------------------------//
namespace detail {
inline std::size_t letters_available(const FiniteWord& w) noexcept { return w.size(); }
inline std::size_t letters_available(const WordStream&) noexcept
{
    return std::numeric_limits<std::size_t>::max();
}
}  // namespace detail

struct ChainSearchOptions {
    /// Net resolution for discretized searches; 0 selects delta/2 (DeltaImage)
    /// or radius/4 (InBall).
    double net_resolution = 0.0;
    std::size_t net_cap = default_net_cap;
};

/*!
 * First chain connection of x to the target along omega with at most
 * `horizon` E-steps.
 *
 * ExactImage: the chain is the fiber-wise orbit itself. DeltaImage and
 * InBall: layered breadth-first search over epsilon-net nodes, layer i
 * advanced with letter omega_{i+1}; nodes in a layer are visited in net
 * order, so the witness is deterministic.
 */
template <class Word>
std::optional<ChainCertificate> find_chain_connection(const IfsSystem& sys, const SpacePoint& x,
                                                      const TargetSet& target,
                                                      const RelationSpec& rel,
                                                      const RelationSpec& tilde, const Word& omega,
                                                      std::size_t horizon,
                                                      const ChainSearchOptions& opts = {})
{
    const auto& space = sys.space();
    require_in(space, x);
    validate(space, rel);
    validate(space, tilde);
    validate(space, target);
    if (horizon < 1) {
        throw Error(ErrorKind::InvalidParameter, "horizon must be >= 1");
    }
    if (is_pair_relation(rel) || is_pair_relation(tilde)) {
        throw Error(ErrorKind::InvalidParameter, "pair relations need find_pair_connection");
    }
    const std::size_t avail = detail::letters_available(omega);
    if (avail == 0) {
        return std::nullopt;
    }
    const std::size_t last_n = std::min(horizon, avail - 1);

    auto close = [&](std::size_t n, const SpacePoint& xn) {
        return choose_endpoint(space, tilde, sys.apply(omega[n], xn), target);
    };

    if (std::holds_alternative<ExactImage>(rel)) {
        std::vector<SpacePoint> orbit{x};
        for (std::size_t n = 0;; ++n) {
            if (auto q = close(n, orbit.back())) {
                FiniteWord dir;
                for (std::size_t i = 0; i <= n; ++i) {
                    dir.push_back(omega[i]);
                }
                orbit.push_back(*q);
                return ChainCertificate{std::move(dir), std::move(orbit), rel, tilde, target};
            }
            if (n == last_n) {
                return std::nullopt;
            }
            orbit.push_back(sys.apply(omega[n], orbit.back()));
        }
    }

    double eps = opts.net_resolution;
    if (eps <= 0.0) {
        if (const auto* d = std::get_if<DeltaImage>(&rel)) {
            eps = d->delta / 2.0;
        } else {
            eps = std::get<InBall>(rel).ball.radius / 4.0;
        }
    }
    EpsilonNet net(space, eps, opts.net_cap);

    // Layer entries: net node (or npos for the start point) and parent slot.
    constexpr std::size_t start_node = std::numeric_limits<std::size_t>::max();
    struct Entry {
        std::size_t node;
        std::size_t parent;
    };
    std::vector<std::vector<Entry>> layers{{Entry{start_node, 0}}};
    auto point_of = [&](const Entry& e) -> const SpacePoint& {
        return e.node == start_node ? x : net[e.node];
    };
    std::vector<std::size_t> mark(net.size(), std::numeric_limits<std::size_t>::max());

    for (std::size_t n = 0;; ++n) {
        const auto& layer = layers[n];
        for (std::size_t slot = 0; slot < layer.size(); ++slot) {
            if (auto q = close(n, point_of(layer[slot]))) {
                std::vector<SpacePoint> pts(n + 2, x);
                pts[n + 1] = *q;
                std::size_t s = slot;
                for (std::size_t i = n + 1; i-- > 0;) {
                    pts[i] = point_of(layers[i][s]);
                    s = layers[i][s].parent;
                }
                FiniteWord dir;
                for (std::size_t i = 0; i <= n; ++i) {
                    dir.push_back(omega[i]);
                }
                return ChainCertificate{std::move(dir), std::move(pts), rel, tilde, target};
            }
        }
        if (n == last_n) {
            return std::nullopt;
        }
        std::vector<Entry> next;
        const Symbol letter = omega[n];
        for (std::size_t slot = 0; slot < layer.size(); ++slot) {
            const SpacePoint image = sys.apply(letter, point_of(layer[slot]));
            auto add = [&](std::size_t v) {
                if (mark[v] != n) {
                    mark[v] = n;
                    next.push_back(Entry{v, slot});
                }
            };
            if (const auto* d = std::get_if<DeltaImage>(&rel)) {
                for (std::size_t v : net.within(image, d->delta)) {
                    add(v);
                }
            } else {
                const auto& ball = std::get<InBall>(rel).ball;
                if (ball.contains(image)) {
                    for (std::size_t v : net.within(ball.center, ball.radius)) {
                        add(v);
                    }
                }
            }
        }
        if (next.empty()) {
            return std::nullopt;
        }
        std::sort(next.begin(), next.end(),
                  [](const Entry& a, const Entry& b) { return a.node < b.node; });
        layers.push_back(std::move(next));
    }
}

struct StabilityReport {
    bool stable = false;
    double radius = 0.0;
    std::size_t samples = 0;
    std::size_t failures = 0;
};

/*!
 * Re-verify the certificate's direction word from m points sampled in
 * B(x_0, r). For ExactImage the chain points are recomputed from u; the
 * other relations keep the certificate's interior points. The closing point
 * may be re-chosen for each sample.
 */
inline StabilityReport check_stable_connection(const IfsSystem& sys, const ChainCertificate& cert,
                                               double r, std::size_t m, std::uint64_t seed = 0)
{
    if (!(r > 0.0) || m < 1) {
        throw Error(ErrorKind::InvalidParameter, "stability check needs r > 0 and m >= 1");
    }
    StabilityReport report{true, r, m, 0};
    if (!verify_chain(sys, cert)) {
        report.stable = false;
        report.failures = m;
        return report;
    }
    const std::size_t n = cert.length();
    const bool exact = std::holds_alternative<ExactImage>(cert.relation);
    CounterRng rng(stream_key(seed, 0));
    for (std::size_t t = 0; t < m; ++t) {
        ChainCertificate c = cert;
        c.points[0] = random_point_in_ball(sys.space(), cert.start(), r, rng);
        if (exact) {
            for (std::size_t i = 0; i < n; ++i) {
                c.points[i + 1] = sys.apply(c.direction[i], c.points[i]);
            }
        }
        bool ok = verify_chain(sys, c);
        if (!ok) {
            if (auto q = choose_endpoint(sys.space(), c.tilde_relation,
                                         sys.apply(c.direction[n], c.points[n]), c.target)) {
                c.points[n + 1] = *q;
                ok = verify_chain(sys, c);
            }
        }
        if (!ok) {
            ++report.failures;
        }
    }
    report.stable = report.failures == 0;
    return report;
}

//---------------------------------------------------------------------------//
// Hit sets and syndeticity
//---------------------------------------------------------------------------//
struct HitSet {
    std::vector<std::size_t> indices;  ///< sorted, all <= horizon
    std::size_t horizon = 0;
};

/// Largest gap of {-1} u hits u {N+1}; an empty set has gap N+1.
inline std::size_t syndetic_max_gap(const HitSet& hits)
{
    if (hits.horizon < 1) {
        throw Error(ErrorKind::InvalidParameter, "hit set horizon must be >= 1");
    }
    if (hits.indices.empty()) {
        return hits.horizon + 1;
    }
    std::size_t gap = hits.indices.front() + 1;
    for (std::size_t i = 1; i < hits.indices.size(); ++i) {
        gap = std::max(gap, hits.indices[i] - hits.indices[i - 1]);
    }
    return std::max(gap, hits.horizon + 1 - hits.indices.back());
}

/*!
 * Smallest j <= max_len such that y E^j_rho E~ q for some word rho and some
 * q in the target, searching all words breadth-first. Only ExactImage is
 * supported for the E-steps (the chain is then a branch of the orbit tree).
 */
inline std::optional<std::size_t> minimal_connection_index(const IfsSystem& sys,
                                                           const SpacePoint& y,
                                                           const TargetSet& target,
                                                           const RelationSpec& rel,
                                                           const RelationSpec& tilde,
                                                           std::size_t max_len)
{
    if (!std::holds_alternative<ExactImage>(rel)) {
        throw Error(ErrorKind::Unsupported, "word search supports exact-image chains only");
    }
    constexpr std::size_t layer_cap = std::size_t{1} << 22;
    const std::size_t k = sys.size();
    std::vector<SpacePoint> layer{y};
    for (std::size_t j = 0;; ++j) {
        for (const auto& u : layer) {
            for (std::size_t a = 1; a <= k; ++a) {
                const Symbol s(static_cast<int>(a));
                if (choose_endpoint(sys.space(), tilde, sys.apply(s, u), target)) {
                    return j;
                }
            }
        }
        if (j == max_len) {
            return std::nullopt;
        }
        if (layer.size() > layer_cap / k) {
            throw Error(ErrorKind::TooLarge, "word search exceeds " + std::to_string(layer_cap) +
                                                 " branches; lower the lookahead");
        }
        std::vector<SpacePoint> next;
        next.reserve(layer.size() * k);
        for (const auto& u : layer) {
            for (std::size_t a = 1; a <= k; ++a) {
                next.push_back(sys.apply(Symbol(static_cast<int>(a)), u));
            }
        }
        layer = std::move(next);
    }
}

/*!
 * Hit set of a branch on [0, N]: indices a + j where y_a = f^a_omega(x) and
 * j is the minimal connection index from y_a (lookahead L). This is the set
 * {i : x E^i_{omega_1..omega_a rho} E~ q} with the first a letters taken from
 * the branch and the continuation rho free.
 */
template <class Word>
HitSet branch_hit_set(const IfsSystem& sys, const SpacePoint& x, const Word& omega,
                      const TargetSet& target, const RelationSpec& rel, const RelationSpec& tilde,
                      std::size_t horizon, std::size_t lookahead)
{
    if (horizon < 1) {
        throw Error(ErrorKind::InvalidParameter, "hit set horizon must be >= 1");
    }
    if (detail::letters_available(omega) < horizon) {
        throw Error(ErrorKind::OutOfRange, "word shorter than the hit-set horizon");
    }
    HitSet hits{{}, horizon};
    std::vector<char> hit(horizon + 1, 0);
    SpacePoint y = x;
    for (std::size_t a = 0; a <= horizon; ++a) {
        const std::size_t budget = std::min(lookahead, horizon - a);
        if (auto j = minimal_connection_index(sys, y, target, rel, tilde, budget)) {
            hit[a + *j] = 1;
        }
        if (a < horizon) {
            y = sys.apply(omega[a], y);
        }
    }
    for (std::size_t i = 0; i <= horizon; ++i) {
        if (hit[i]) {
            hits.indices.push_back(i);
        }
    }
    return hits;
}

//---------------------------------------------------------------------------//
// Backward chains: f^{-1}_{beta_{-i}}(x_{i-1}) E x_i
//---------------------------------------------------------------------------//
inline bool verify_backward_chain(const IfsSystem& sys, const FiniteWord& negative_window,
                                  const std::vector<SpacePoint>& points, const RelationSpec& rel)
{
    if (points.empty() || points.size() > negative_window.size() + 1) {
        return false;
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!belongs_to(sys.space(), points[i - 1]) || !belongs_to(sys.space(), points[i])) {
            return false;
        }
        const SpacePoint image = sys.apply_inverse(negative_window[i - 1], points[i - 1]);
        if (!detail::image_relation_holds(rel, image, points[i])) {
            return false;
        }
    }
    return true;
}

//---------------------------------------------------------------------------//
// Pair chains on X x X
//---------------------------------------------------------------------------//
struct PairCertificate {
    FiniteWord direction;
    std::vector<PointPair> points;
    RelationSpec relation;
    RelationSpec tilde_relation;
    TargetSet target;  ///< applied to both coordinates

    std::size_t length() const noexcept { return direction.empty() ? 0 : direction.size() - 1; }
};

inline bool verify_pair_chain(const IfsSystem& sys, const PairCertificate& cert)
{
    const auto& w = cert.direction;
    const auto& x = cert.points;
    if (w.empty() || x.size() != w.size() + 1 || !is_pair_relation(cert.relation) ||
        !is_pair_relation(cert.tilde_relation)) {
        return false;
    }
    for (const auto& p : x) {
        if (!belongs_to(sys.space(), p.first) || !belongs_to(sys.space(), p.second)) {
            return false;
        }
    }
    const std::size_t n = w.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!relation_holds(sys, cert.relation, w[i], x[i], x[i + 1])) {
            return false;
        }
    }
    return relation_holds(sys, cert.tilde_relation, w[n], x[n], x[n + 1]) &&
           target_contains(cert.target, x[n + 1].first) &&
           target_contains(cert.target, x[n + 1].second);
}

/*!
 * First pair connection along omega with E = PairExactImage (the pair orbit)
 * and E~ = PairInBall: both images land in the ball and the closing pair is
 * taken to be the images themselves.
 */
template <class Word>
std::optional<PairCertificate> find_pair_connection(const IfsSystem& sys, const PointPair& start,
                                                    const TargetSet& target,
                                                    const RelationSpec& rel,
                                                    const RelationSpec& tilde, const Word& omega,
                                                    std::size_t horizon)
{
    if (!std::holds_alternative<PairExactImage>(rel) ||
        !std::holds_alternative<PairInBall>(tilde)) {
        throw Error(ErrorKind::Unsupported,
                    "pair search supports pair_exact_image followed by pair_in_ball");
    }
    validate(sys.space(), tilde);
    validate(sys.space(), target);
    require_in(sys.space(), start.first);
    require_in(sys.space(), start.second);
    const std::size_t avail = detail::letters_available(omega);
    if (avail == 0) {
        return std::nullopt;
    }
    const std::size_t last_n = std::min(horizon, avail - 1);
    std::vector<PointPair> orbit{start};
    for (std::size_t n = 0;; ++n) {
        PointPair image{sys.apply(omega[n], orbit.back().first),
                        sys.apply(omega[n], orbit.back().second)};
        if (detail::pair_image_relation_holds(tilde, image, image) &&
            target_contains(target, image.first) && target_contains(target, image.second)) {
            FiniteWord dir;
            for (std::size_t i = 0; i <= n; ++i) {
                dir.push_back(omega[i]);
            }
            orbit.push_back(image);
            return PairCertificate{std::move(dir), std::move(orbit), rel, tilde, target};
        }
        if (n == last_n) {
            return std::nullopt;
        }
        orbit.push_back(std::move(image));
    }
}

//---------------------------------------------------------------------------//
// Delta-chain graph over an epsilon-net
//---------------------------------------------------------------------------//
/*!
 * Labeled graph on epsilon_net(eps) nodes with an edge u ->_i v iff
 * d(f_i(u), v) < delta. Edges of a node are stored sorted by (letter, v).
 */
class ChainGraph {
public:
    struct Edge {
        std::uint32_t letter;  ///< 1-based
        std::uint32_t target;
    };

    ChainGraph(const IfsSystem& sys, double delta, double eps, std::size_t cap = default_net_cap)
        : delta_(delta), net_(check_params(sys.space(), delta, eps), eps, cap)
    {
        offsets_.reserve(net_.size() + 1);
        offsets_.push_back(0);
        for (std::size_t u = 0; u < net_.size(); ++u) {
            for (std::size_t a = 1; a <= sys.size(); ++a) {
                const auto image = sys.apply(Symbol(static_cast<int>(a)), net_[u]);
                for (std::size_t v : net_.within(image, delta)) {
                    edges_.push_back(
                        Edge{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(v)});
                }
            }
            offsets_.push_back(edges_.size());
        }
    }

    const EpsilonNet& net() const noexcept { return net_; }
    double delta() const noexcept { return delta_; }
    double resolution() const noexcept { return net_.resolution(); }
    std::size_t size() const noexcept { return net_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    std::span<const Edge> edges(std::size_t u) const
    {
        return {edges_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
    }

    bool has_self_edge(std::size_t u) const
    {
        for (const auto& e : edges(u)) {
            if (e.target == u) {
                return true;
            }
        }
        return false;
    }

private:
    static const SpaceDescriptor& check_params(const SpaceDescriptor& s, double delta, double eps)
    {
        if (!(eps > 0.0) || !(delta > eps)) {
            throw Error(ErrorKind::InvalidParameter,
                        "delta-chain graph needs delta > eps > 0 (got delta=" +
                            format_double(delta) + ", eps=" + format_double(eps) + ")");
        }
        return s;
    }

    double delta_;
    EpsilonNet net_;
    std::vector<std::size_t> offsets_;
    std::vector<Edge> edges_;
};

struct DeltaReachResult {
    bool reachable = false;
    std::optional<FiniteWord> word;
    std::vector<std::size_t> nodes;  ///< u_0 .. v_L on the net
    std::optional<ChainCertificate> certificate;
};

/*!
 * Whether x reaches y by a delta-chain of length 1..max_len, searched on the
 * graph from the net node u_0 nearest x to any node within delta of y.
 *
 * The certificate is the node path u_0, ..., v_L with relations
 * DeltaImage(delta + eps) and target the closed delta-neighbourhood of y.
 */
inline DeltaReachResult delta_chain_reachable(const ChainGraph& graph, const IfsSystem& sys,
                                              const SpacePoint& x, const SpacePoint& y,
                                              std::size_t max_len)
{
    if (max_len < 1) {
        throw Error(ErrorKind::InvalidParameter, "max_len must be >= 1");
    }
    const auto& net = graph.net();
    require_in(sys.space(), x);
    require_in(sys.space(), y);
    const std::size_t u0 = net.nearest(x);
    std::vector<char> goal(net.size(), 0);
    net.for_each_within(y, graph.delta(), [&goal](std::size_t v) { goal[v] = 1; });

    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent(net.size(), none);
    std::vector<std::uint32_t> via(net.size(), 0);
    std::vector<std::size_t> depth(net.size(), 0);
    std::vector<std::size_t> queue;
    // Seed with the successors of u_0 so that u_0 itself may be reached again.
    for (const auto& e : graph.edges(u0)) {
        if (parent[e.target] == none) {
            parent[e.target] = u0;
            via[e.target] = e.letter;
            depth[e.target] = 1;
            queue.push_back(e.target);
        }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t u = queue[head];
        if (goal[u]) {
            DeltaReachResult out;
            out.reachable = true;
            std::vector<std::size_t> path{u};
            std::vector<int> letters;
            std::size_t cur = u;
            for (std::size_t d = depth[u]; d > 0; --d) {
                letters.push_back(static_cast<int>(via[cur]));
                cur = parent[cur];
                path.push_back(cur);
            }
            std::reverse(path.begin(), path.end());
            std::reverse(letters.begin(), letters.end());
            FiniteWord w;
            for (int a : letters) {
                w.push_back(Symbol(a));
            }
            std::vector<SpacePoint> pts;
            for (std::size_t v : path) {
                pts.push_back(net[v]);
            }
            const RelationSpec slack = DeltaImage{graph.delta() + graph.resolution()};
            out.certificate =
                ChainCertificate{w, std::move(pts), slack, slack, PointSet{{y}, graph.delta()}};
            out.word = std::move(w);
            out.nodes = std::move(path);
            return out;
        }
        if (depth[u] == max_len) {
            continue;
        }
        for (const auto& e : graph.edges(u)) {
            if (parent[e.target] == none) {
                parent[e.target] = u;
                via[e.target] = e.letter;
                depth[e.target] = depth[u] + 1;
                queue.push_back(e.target);
            }
        }
    }
    return {};
}

inline DeltaReachResult delta_chain_reachable(const IfsSystem& sys, const SpacePoint& x,
                                              const SpacePoint& y, double delta, double eps,
                                              std::size_t max_len)
{
    return delta_chain_reachable(ChainGraph(sys, delta, eps), sys, x, y, max_len);
}

/// Strongly connected component id per node (Tarjan, iterative).
inline std::vector<std::size_t> strongly_connected_components(const ChainGraph& graph,
                                                              std::size_t* count = nullptr)
{
    const std::size_t n = graph.size();
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next edge)
    std::size_t next_index = 0;
    std::size_t next_comp = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) {
            continue;
        }
        call.emplace_back(root, 0);
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [u, pos] = call.back();
            const auto edges = graph.edges(u);
            if (pos < edges.size()) {
                const std::size_t v = edges[pos++].target;
                if (index[v] == unvisited) {
                    index[v] = low[v] = next_index++;
                    stack.push_back(v);
                    on_stack[v] = 1;
                    call.emplace_back(v, 0);
                } else if (on_stack[v]) {
                    low[u] = std::min(low[u], index[v]);
                }
                continue;
            }
            const std::size_t done = u;
            call.pop_back();
            if (!call.empty()) {
                const std::size_t p = call.back().first;
                low[p] = std::min(low[p], low[done]);
            }
            if (low[done] == index[done]) {
                std::size_t v;
                do {
                    v = stack.back();
                    stack.pop_back();
                    on_stack[v] = 0;
                    comp[v] = next_comp;
                } while (v != done);
                ++next_comp;
            }
        }
    }
    if (count) {
        *count = next_comp;
    }
    return comp;
}

/// Net nodes lying on a cycle of the delta-chain graph, ascending.
inline std::vector<std::size_t> chain_recurrent_set(const ChainGraph& graph)
{
    std::size_t count = 0;
    const auto comp = strongly_connected_components(graph, &count);
    std::vector<std::size_t> comp_size(count, 0);
    for (std::size_t c : comp) {
        ++comp_size[c];
    }
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < graph.size(); ++u) {
        if (comp_size[comp[u]] >= 2 || graph.has_self_edge(u)) {
            out.push_back(u);
        }
    }
    return out;
}

inline std::vector<std::size_t> chain_recurrent_set(const IfsSystem& sys, double delta,
                                                    double eps)
{
    return chain_recurrent_set(ChainGraph(sys, delta, eps));
}

/// True iff every ordered pair of net nodes is joined by a delta-chain.
inline bool is_chain_transitive(const ChainGraph& graph)
{
    std::size_t count = 0;
    strongly_connected_components(graph, &count);
    if (count != 1) {
        return false;
    }
    // A single node needs a self-edge to reach itself by a nonempty chain.
    return graph.size() > 1 || graph.has_self_edge(0);
}

inline bool is_chain_transitive(const IfsSystem& sys, double delta, double eps)
{
    return is_chain_transitive(ChainGraph(sys, delta, eps));
}

}  // namespace ifs
