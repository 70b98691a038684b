#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "error.hpp"
#include "format.hpp"
#include "rng.hpp"

namespace ifs {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

//---------------------------------------------------------------------------//
// Small 3-vector helpers
//---------------------------------------------------------------------------//
using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) noexcept
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross(const Vec3& a, const Vec3& b) noexcept
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }
inline Vec3 scaled(const Vec3& a, double s) noexcept { return {a[0] * s, a[1] * s, a[2] * s}; }
inline Vec3 plus(const Vec3& a, const Vec3& b) noexcept
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 minus(const Vec3& a, const Vec3& b) noexcept
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

/// Angle between two unit vectors, stable at 0 and pi.
inline double vector_angle(const Vec3& a, const Vec3& b) noexcept
{
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

/// Angle reduced to [0, 2pi).
inline double wrap_angle(double theta) noexcept
{
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) {
        r += two_pi;
    }
    if (r >= two_pi) {
        r = 0.0;
    }
    return r;
}

/// Angle reduced to (-pi, pi].
inline double wrap_signed(double theta) noexcept
{
    double r = wrap_angle(theta);
    return r > std::numbers::pi ? r - two_pi : r;
}

//---------------------------------------------------------------------------//
// Spaces
//---------------------------------------------------------------------------//
enum class SpaceKind { Circle, Sphere2, Interval, FiniteGrid };

inline const char* to_string(SpaceKind kind) noexcept
{
    switch (kind) {
    case SpaceKind::Circle: return "circle";
    case SpaceKind::Sphere2: return "sphere2";
    case SpaceKind::Interval: return "interval";
    case SpaceKind::FiniteGrid: return "grid";
    }
    return "?";
}

struct SpaceDescriptor {
    SpaceKind kind = SpaceKind::Circle;
    std::size_t grid_size = 0;  ///< FiniteGrid only

    static SpaceDescriptor circle() { return {SpaceKind::Circle, 0}; }
    static SpaceDescriptor sphere2() { return {SpaceKind::Sphere2, 0}; }
    static SpaceDescriptor interval() { return {SpaceKind::Interval, 0}; }
    static SpaceDescriptor grid(std::size_t nodes)
    {
        if (nodes < 1) {
            throw Error(ErrorKind::InvalidParameter, "grid needs at least one node");
        }
        return {SpaceKind::FiniteGrid, nodes};
    }

    friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;
};

inline std::string describe(const SpaceDescriptor& s)
{
    if (s.kind == SpaceKind::FiniteGrid) {
        return "grid(" + std::to_string(s.grid_size) + ")";
    }
    return to_string(s.kind);
}

//---------------------------------------------------------------------------//
/*!
 * A point of one of the four spaces. Factories enforce the domain:
 * angles are reduced mod 2pi, sphere vectors are renormalized when the norm
 * drifts by less than 1e-6 and rejected otherwise, interval values must lie
 * in [0,1].
 */
class SpacePoint {
public:
    static constexpr double sphere_drift_limit = 1e-6;

    static SpacePoint circle(double theta)
    {
        if (!std::isfinite(theta)) {
            throw Error(ErrorKind::InvalidParameter, "non-finite angle");
        }
        return SpacePoint(Angle{wrap_angle(theta)});
    }

    static SpacePoint sphere(const Vec3& v)
    {
        double n = norm(v);
        if (!std::isfinite(n) || std::abs(n - 1.0) > sphere_drift_limit) {
            throw Error(ErrorKind::InvalidParameter, "vector is not on the unit sphere");
        }
        return SpacePoint(Direction{scaled(v, 1.0 / n)});
    }
    static SpacePoint sphere(double x, double y, double z) { return sphere(Vec3{x, y, z}); }

    static SpacePoint interval(double t)
    {
        constexpr double slack = 1e-12;
        if (!(t >= -slack && t <= 1.0 + slack)) {
            throw Error(ErrorKind::InvalidParameter, "interval value outside [0,1]");
        }
        return SpacePoint(Value{std::clamp(t, 0.0, 1.0)});
    }

    static SpacePoint grid(std::size_t node) { return SpacePoint(Node{node}); }

    SpaceKind kind() const noexcept { return static_cast<SpaceKind>(data_.index()); }

    double angle() const { return get<Angle>().theta; }
    const Vec3& vec() const { return get<Direction>().v; }
    double value() const { return get<Value>().t; }
    std::size_t node() const { return get<Node>().index; }

    friend bool operator==(const SpacePoint&, const SpacePoint&) = default;

private:
    struct Angle {
        double theta;
        friend bool operator==(const Angle&, const Angle&) = default;
    };
    struct Direction {
        Vec3 v;
        friend bool operator==(const Direction&, const Direction&) = default;
    };
    struct Value {
        double t;
        friend bool operator==(const Value&, const Value&) = default;
    };
    struct Node {
        std::size_t index;
        friend bool operator==(const Node&, const Node&) = default;
    };
    // Alternative order matches SpaceKind.
    using Data = std::variant<Angle, Direction, Value, Node>;

    template <class T>
    explicit SpacePoint(T value) : data_(value)
    {
    }

    template <class T>
    const T& get() const
    {
        if (const T* p = std::get_if<T>(&data_)) {
            return *p;
        }
        throw Error(ErrorKind::SpaceMismatch,
                    std::string("point lives on ") + to_string(kind()));
    }

    Data data_;
};

inline bool belongs_to(const SpaceDescriptor& s, const SpacePoint& x) noexcept
{
    if (x.kind() != s.kind) {
        return false;
    }
    return s.kind != SpaceKind::FiniteGrid || x.node() < s.grid_size;
}

inline void require_in(const SpaceDescriptor& s, const SpacePoint& x)
{
    if (!belongs_to(s, x)) {
        throw Error(ErrorKind::SpaceMismatch,
                    std::string("point of kind ") + to_string(x.kind()) + " is not in " +
                        describe(s));
    }
}

/// Metric distance without membership checks; kinds must agree.
inline double raw_distance(const SpacePoint& x, const SpacePoint& y)
{
    switch (x.kind()) {
    case SpaceKind::Circle: {
        double d = std::abs(x.angle() - y.angle());
        return std::min(d, two_pi - d);
    }
    case SpaceKind::Sphere2: return vector_angle(x.vec(), y.vec());
    case SpaceKind::Interval: return std::abs(x.value() - y.value());
    case SpaceKind::FiniteGrid: return x.node() == y.node() ? 0.0 : 1.0;
    }
    return 0.0;
}

/*!
 * Arc length on the circle, geodesic angle on the sphere, |x-y| on the
 * interval, and the discrete 0/1 metric on a grid.
 */
inline double distance(const SpaceDescriptor& s, const SpacePoint& x, const SpacePoint& y)
{
    require_in(s, x);
    require_in(s, y);
    return raw_distance(x, y);
}

//---------------------------------------------------------------------------//
// Open balls and the enumerated basis
//---------------------------------------------------------------------------//
struct Ball {
    SpacePoint center;
    double radius;

    bool contains(const SpacePoint& x) const
    {
        return x.kind() == center.kind() && raw_distance(center, x) < radius;
    }
};

struct BasisBall : Ball {
    std::size_t index = 0;  ///< 1-based enumeration index
    int level = 0;          ///< radius = 2^-level
};

//---------------------------------------------------------------------------//
// Epsilon-nets
//---------------------------------------------------------------------------//
inline constexpr std::size_t default_net_cap = 1'000'000;
inline constexpr double fibonacci_angle = std::numbers::pi * (3.0 - 2.23606797749978969641);

namespace detail {
inline std::size_t checked_count(double raw)
{
    if (!std::isfinite(raw) || raw > 1e15) {
        throw Error(ErrorKind::TooFine, "net resolution too fine");
    }
    return static_cast<std::size_t>(raw);
}
}  // namespace detail

/*!
 * Number of points of the epsilon-net, without the size cap.
 *
 * Circle: ceil(2pi/eps) equally spaced angles. Interval: the grid j/m,
 * m = ceil(1/eps). Sphere: ceil(4pi/eps^2) Fibonacci-lattice points, whose
 * covering radius is about 0.77*sqrt(4pi/N) <= 0.77 eps. Grid: every node.
 */
inline std::size_t net_size(const SpaceDescriptor& s, double eps)
{
    if (!(eps > 0.0)) {
        throw Error(ErrorKind::InvalidParameter, "net resolution must be positive");
    }
    switch (s.kind) {
    case SpaceKind::Circle:
        return std::max<std::size_t>(1, detail::checked_count(std::ceil(two_pi / eps - 1e-9)));
    case SpaceKind::Interval:
        return std::max<std::size_t>(1, detail::checked_count(std::ceil(1.0 / eps - 1e-9))) + 1;
    case SpaceKind::Sphere2:
        return std::max<std::size_t>(
            2, detail::checked_count(std::ceil(4.0 * std::numbers::pi / (eps * eps))));
    case SpaceKind::FiniteGrid: return s.grid_size;
    }
    return 0;
}

/// Closed-form j-th net point (0-based) for a net of the given size.
inline SpacePoint net_point_of_size(const SpaceDescriptor& s, std::size_t size, std::size_t j)
{
    switch (s.kind) {
    case SpaceKind::Circle:
        return SpacePoint::circle(two_pi * static_cast<double>(j) / static_cast<double>(size));
    case SpaceKind::Interval:
        return SpacePoint::interval(static_cast<double>(j) / static_cast<double>(size - 1));
    case SpaceKind::Sphere2: {
        const double n = static_cast<double>(size);
        const double z = 1.0 - (2.0 * static_cast<double>(j) + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = static_cast<double>(j) * fibonacci_angle;
        return SpacePoint::sphere(r * std::cos(phi), r * std::sin(phi), z);
    }
    case SpaceKind::FiniteGrid: return SpacePoint::grid(j);
    }
    throw Error(ErrorKind::Unsupported, "unknown space");
}

/*!
 * Materialized epsilon-net with nearest-point and radius queries.
 *
 * Query cost is proportional to the number of candidates in the query
 * window: an index range on the circle and interval, a latitude band on the
 * sphere (Fibonacci points are sorted by decreasing z).
 */
class EpsilonNet {
public:
    EpsilonNet(const SpaceDescriptor& s, double eps, std::size_t cap = default_net_cap)
        : space_(s), eps_(eps), size_(net_size(s, eps))
    {
        if (size_ > cap) {
            throw Error(ErrorKind::TooFine, "epsilon-net of " + std::to_string(size_) +
                                                " points exceeds cap " + std::to_string(cap));
        }
        points_.reserve(size_);
        for (std::size_t j = 0; j < size_; ++j) {
            points_.push_back(net_point_of_size(s, size_, j));
        }
    }

    const SpaceDescriptor& space() const noexcept { return space_; }
    double resolution() const noexcept { return eps_; }
    std::size_t size() const noexcept { return size_; }
    const SpacePoint& operator[](std::size_t j) const { return points_[j]; }
    const std::vector<SpacePoint>& points() const noexcept { return points_; }

    /// Net indices j with d(net_j, x) < r, ascending.
    std::vector<std::size_t> within(const SpacePoint& x, double r) const
    {
        std::vector<std::size_t> out;
        for_each_within(x, r, [&out](std::size_t j) { out.push_back(j); });
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Calls fn(j) for every net index with d(net_j, x) < r (unordered).
    template <class Fn>
    void for_each_within(const SpacePoint& x, double r, Fn&& fn) const
    {
        require_in(space_, x);
        if (!(r > 0.0)) {
            return;
        }
        auto visit = [&](std::size_t j) {
            if (raw_distance(points_[j], x) < r) {
                fn(j);
            }
        };
        switch (space_.kind) {
        case SpaceKind::Circle: {
            const double h = two_pi / static_cast<double>(size_);
            const auto lo = static_cast<std::int64_t>(std::floor((x.angle() - r) / h));
            const auto hi = static_cast<std::int64_t>(std::ceil((x.angle() + r) / h));
            if (hi - lo + 1 >= static_cast<std::int64_t>(size_)) {
                scan_all(visit);
                return;
            }
            const auto n = static_cast<std::int64_t>(size_);
            for (std::int64_t j = lo; j <= hi; ++j) {
                visit(static_cast<std::size_t>(((j % n) + n) % n));
            }
            return;
        }
        case SpaceKind::Interval: {
            const double m = static_cast<double>(size_ - 1);
            const auto lo = std::max<std::int64_t>(
                0, static_cast<std::int64_t>(std::floor((x.value() - r) * m)));
            const auto hi = std::min<std::int64_t>(
                static_cast<std::int64_t>(size_) - 1,
                static_cast<std::int64_t>(std::ceil((x.value() + r) * m)));
            for (std::int64_t j = lo; j <= hi; ++j) {
                visit(static_cast<std::size_t>(j));
            }
            return;
        }
        case SpaceKind::Sphere2: {
            const double polar = std::acos(std::clamp(x.vec()[2], -1.0, 1.0));
            const double z_hi = std::cos(std::max(0.0, polar - r));
            const double z_lo = std::cos(std::min(std::numbers::pi, polar + r));
            const double n = static_cast<double>(size_);
            const auto lo = std::max<std::int64_t>(
                0, static_cast<std::int64_t>(std::floor(((1.0 - z_hi) * n - 1.0) / 2.0)) - 1);
            const auto hi = std::min<std::int64_t>(
                static_cast<std::int64_t>(size_) - 1,
                static_cast<std::int64_t>(std::ceil(((1.0 - z_lo) * n - 1.0) / 2.0)) + 1);
            for (std::int64_t j = lo; j <= hi; ++j) {
                visit(static_cast<std::size_t>(j));
            }
            return;
        }
        case SpaceKind::FiniteGrid:
            if (r > 1.0) {
                scan_all(visit);
            } else {
                visit(x.node());
            }
            return;
        }
    }

    /// Index of the closest net point; ties go to the lowest index.
    std::size_t nearest(const SpacePoint& x) const
    {
        require_in(space_, x);
        switch (space_.kind) {
        case SpaceKind::Circle: {
            const double h = two_pi / static_cast<double>(size_);
            return static_cast<std::size_t>(std::llround(x.angle() / h)) % size_;
        }
        case SpaceKind::Interval:
            return static_cast<std::size_t>(
                std::llround(x.value() * static_cast<double>(size_ - 1)));
        case SpaceKind::FiniteGrid: return x.node();
        case SpaceKind::Sphere2: break;
        }
        std::size_t best = size_;
        double best_d = std::numeric_limits<double>::infinity();
        auto consider = [&](std::size_t j) {
            double d = raw_distance(points_[j], x);
            if (d < best_d || (d == best_d && j < best)) {
                best = j;
                best_d = d;
            }
        };
        for_each_within(x, 1.5 * eps_, consider);
        if (best == size_) {
            scan_all(consider);
        }
        return best;
    }

private:
    template <class Fn>
    void scan_all(Fn&& fn) const
    {
        for (std::size_t j = 0; j < size_; ++j) {
            fn(j);
        }
    }

    SpaceDescriptor space_;
    double eps_;
    std::size_t size_;
    std::vector<SpacePoint> points_;
};

inline std::vector<SpacePoint> epsilon_net(const SpaceDescriptor& s, double eps,
                                           std::size_t cap = default_net_cap)
{
    return EpsilonNet(s, eps, cap).points();
}

//---------------------------------------------------------------------------//
/*!
 * The i-th ball (i >= 1) of the countable basis.
 *
 * Levels m = 1, 2, ... are listed in order; level m contributes one ball of
 * radius 2^-m around each point of the net of resolution 2^-(m+1), in net
 * order. Every level is finite, so the listing is total. Each point is within
 * 2^-(m+1) of a level-m center, hence inside a level-m ball, so x lies in a
 * ball of radius < r at the first level with 2^-m < r.
 */
inline BasisBall basis_ball(const SpaceDescriptor& s, std::size_t i)
{
    if (i < 1) {
        throw Error(ErrorKind::InvalidParameter, "basis indices start at 1");
    }
    std::size_t remaining = i - 1;
    for (int level = 1; level < 60; ++level) {
        const double radius = std::ldexp(1.0, -level);
        const std::size_t count = net_size(s, radius / 2.0);
        if (remaining < count) {
            BasisBall b{{net_point_of_size(s, count, remaining), radius}, i, level};
            return b;
        }
        remaining -= count;
    }
    throw Error(ErrorKind::TooLarge, "basis index beyond enumerated levels");
}

/// Number of basis balls at levels 1..level (inclusive).
inline std::size_t basis_count_through(const SpaceDescriptor& s, int level)
{
    std::size_t total = 0;
    for (int m = 1; m <= level; ++m) {
        total += net_size(s, std::ldexp(1.0, -m - 1));
    }
    return total;
}

/*!
 * Point at fraction t in [0,1] along a shortest path from `from` to `to`.
 * On the grid the path jumps at t = 1.
 */
inline SpacePoint geodesic_point(const SpaceDescriptor& s, const SpacePoint& from,
                                 const SpacePoint& to, double t)
{
    require_in(s, from);
    require_in(s, to);
    t = std::clamp(t, 0.0, 1.0);
    switch (s.kind) {
    case SpaceKind::Circle:
        return SpacePoint::circle(from.angle() + t * wrap_signed(to.angle() - from.angle()));
    case SpaceKind::Interval:
        return SpacePoint::interval(from.value() + t * (to.value() - from.value()));
    case SpaceKind::Sphere2: {
        const double theta = vector_angle(from.vec(), to.vec());
        const double s_theta = std::sin(theta);
        if (s_theta < 1e-12) {
            return t < 0.5 ? from : to;
        }
        const double a = std::sin((1.0 - t) * theta) / s_theta;
        const double b = std::sin(t * theta) / s_theta;
        Vec3 v = plus(scaled(from.vec(), a), scaled(to.vec(), b));
        return SpacePoint::sphere(scaled(v, 1.0 / norm(v)));
    }
    case SpaceKind::FiniteGrid: return t < 1.0 ? from : to;
    }
    throw Error(ErrorKind::Unsupported, "unknown space");
}

//---------------------------------------------------------------------------//
// Random points
//---------------------------------------------------------------------------//
inline SpacePoint random_point(const SpaceDescriptor& s, CounterRng& rng)
{
    switch (s.kind) {
    case SpaceKind::Circle: return SpacePoint::circle(rng.uniform(0.0, two_pi));
    case SpaceKind::Interval: return SpacePoint::interval(rng.uniform());
    case SpaceKind::Sphere2: {
        for (;;) {
            Vec3 g{rng.normal(), rng.normal(), rng.normal()};
            double n = norm(g);
            if (n > 1e-12) {
                return SpacePoint::sphere(scaled(g, 1.0 / n));
            }
        }
    }
    case SpaceKind::FiniteGrid: {
        auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(s.grid_size));
        return SpacePoint::grid(std::min(j, s.grid_size - 1));
    }
    }
    throw Error(ErrorKind::Unsupported, "unknown space");
}

/// Random point of the open ball B(center, r).
inline SpacePoint random_point_in_ball(const SpaceDescriptor& s, const SpacePoint& center,
                                       double r, CounterRng& rng)
{
    require_in(s, center);
    switch (s.kind) {
    case SpaceKind::Circle: {
        if (r >= std::numbers::pi) {
            return random_point(s, rng);
        }
        return SpacePoint::circle(center.angle() + rng.uniform(-r, r));
    }
    case SpaceKind::Interval: {
        const double lo = std::max(0.0, center.value() - r);
        const double hi = std::min(1.0, center.value() + r);
        return SpacePoint::interval(rng.uniform(lo, hi));
    }
    case SpaceKind::Sphere2: {
        const Vec3& c = center.vec();
        Vec3 t{};
        double tn = 0.0;
        while (tn < 1e-9) {
            Vec3 g{rng.normal(), rng.normal(), rng.normal()};
            t = minus(g, scaled(c, dot(g, c)));
            tn = norm(t);
        }
        t = scaled(t, 1.0 / tn);
        const double a = rng.uniform() * std::min(r, std::numbers::pi);
        return SpacePoint::sphere(plus(scaled(c, std::cos(a)), scaled(t, std::sin(a))));
    }
    case SpaceKind::FiniteGrid: return r > 1.0 ? random_point(s, rng) : center;
    }
    throw Error(ErrorKind::Unsupported, "unknown space");
}

//---------------------------------------------------------------------------//
// Text form used in CSV reports and configs
//---------------------------------------------------------------------------//
inline std::string format_point(const SpacePoint& x)
{
    switch (x.kind()) {
    case SpaceKind::Circle: return "θ=" + format_double(x.angle());
    case SpaceKind::Sphere2: {
        const Vec3& v = x.vec();
        return format_double(v[0]) + "," + format_double(v[1]) + "," + format_double(v[2]);
    }
    case SpaceKind::Interval: return "t=" + format_double(x.value());
    case SpaceKind::FiniteGrid: return "#" + std::to_string(x.node());
    }
    return "?";
}

namespace detail {
inline double parse_number(std::string_view text)
{
    std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "expected a number, got '" + s + "'");
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) {
        ++used;
    }
    if (used != s.size()) {
        throw Error(ErrorKind::Parse, "trailing characters in number '" + s + "'");
    }
    return v;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::string_view strip_prefix(std::string_view s, std::string_view prefix)
{
    if (s.substr(0, prefix.size()) == prefix) {
        s.remove_prefix(prefix.size());
    }
    return s;
}
}  // namespace detail

/// Inverse of format_point; also accepts bare numbers and "(x,y,z)".
inline SpacePoint parse_point(const SpaceDescriptor& s, std::string_view text)
{
    using detail::parse_number;
    using detail::strip_prefix;
    std::string_view t = detail::trim(text);
    switch (s.kind) {
    case SpaceKind::Circle: {
        t = strip_prefix(strip_prefix(strip_prefix(t, "θ="), "theta="), "=");
        return SpacePoint::circle(parse_number(t));
    }
    case SpaceKind::Interval:
        return SpacePoint::interval(parse_number(strip_prefix(t, "t=")));
    case SpaceKind::Sphere2: {
        if (!t.empty() && t.front() == '(' && t.back() == ')') {
            t = t.substr(1, t.size() - 2);
        }
        Vec3 v{};
        std::size_t pos = 0;
        for (int c = 0; c < 3; ++c) {
            std::size_t comma = t.find(',', pos);
            if ((c < 2) == (comma == std::string_view::npos)) {
                throw Error(ErrorKind::Parse, "sphere points are written x,y,z");
            }
            if (comma == std::string_view::npos) {
                comma = t.size();
            }
            v[static_cast<std::size_t>(c)] = parse_number(detail::trim(t.substr(pos, comma - pos)));
            pos = comma + 1;
        }
        return SpacePoint::sphere(v);
    }
    case SpaceKind::FiniteGrid: {
        t = strip_prefix(t, "#");
        double v = parse_number(t);
        if (v < 0 || v != std::floor(v)) {
            throw Error(ErrorKind::Parse, "grid nodes are nonnegative integers");
        }
        SpacePoint p = SpacePoint::grid(static_cast<std::size_t>(v));
        require_in(s, p);
        return p;
    }
    }
    throw Error(ErrorKind::Unsupported, "unknown space");
}

}  // namespace ifs
