#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "spaces.hpp"
#include "symbolic.hpp"

namespace ifs {

//---------------------------------------------------------------------------//
// Map descriptors. Every kind is a homeomorphism of its space (affine maps
// of the interval are homeomorphisms onto their image) with a closed-form
// inverse.
//---------------------------------------------------------------------------//
struct CircleRotation {
    double alpha;
};

/// t -> a t + b with a > 0, b >= 0, a + b <= 1.
struct IntervalAffine {
    double a;
    double b;
};

/*!
 * North-south map with fixed points p (the attractor when multiplier < 1)
 * and its antipode q. In the stereographic chart that sends p to 0 and q to
 * infinity the map is z -> multiplier * z; on the circle this is
 * theta -> 2 atan(multiplier * tan(theta/2)) with theta measured from p.
 * The inverse is the same map with multiplier 1/multiplier.
 */
struct NorthSouth {
    SpacePoint pole;
    double multiplier;
};

/// Rotation by alpha about a unit axis (right-hand rule).
struct SphereRotation {
    Vec3 axis;
    double alpha;
};

struct GridPermutation {
    std::vector<std::size_t> image;
    std::vector<std::size_t> preimage;

    explicit GridPermutation(std::vector<std::size_t> img) : image(std::move(img))
    {
        preimage.assign(image.size(), image.size());
        for (std::size_t i = 0; i < image.size(); ++i) {
            if (image[i] >= image.size() || preimage[image[i]] != image.size()) {
                throw Error(ErrorKind::InvalidParameter, "not a permutation");
            }
            preimage[image[i]] = i;
        }
    }

    static GridPermutation identity(std::size_t n)
    {
        std::vector<std::size_t> img(n);
        for (std::size_t i = 0; i < n; ++i) {
            img[i] = i;
        }
        return GridPermutation(std::move(img));
    }

    /// Builds from disjoint cycles such as {{0,1,2},{3,4}}; unlisted nodes are fixed.
    static GridPermutation from_cycles(std::size_t n,
                                       const std::vector<std::vector<std::size_t>>& cycles)
    {
        std::vector<std::size_t> img(n);
        for (std::size_t i = 0; i < n; ++i) {
            img[i] = i;
        }
        std::vector<bool> seen(n, false);
        for (const auto& cycle : cycles) {
            for (std::size_t j = 0; j < cycle.size(); ++j) {
                std::size_t from = cycle[j];
                if (from >= n || seen[from]) {
                    throw Error(ErrorKind::InvalidParameter,
                                "cycles must be disjoint and name nodes below " +
                                    std::to_string(n));
                }
                seen[from] = true;
                img[from] = cycle[(j + 1) % cycle.size()];
            }
        }
        return GridPermutation(std::move(img));
    }
};

using MapDescriptor =
    std::variant<CircleRotation, IntervalAffine, NorthSouth, SphereRotation, GridPermutation>;

inline SpaceKind space_kind_of(const MapDescriptor& f)
{
    struct {
        SpaceKind operator()(const CircleRotation&) const { return SpaceKind::Circle; }
        SpaceKind operator()(const IntervalAffine&) const { return SpaceKind::Interval; }
        SpaceKind operator()(const NorthSouth& m) const { return m.pole.kind(); }
        SpaceKind operator()(const SphereRotation&) const { return SpaceKind::Sphere2; }
        SpaceKind operator()(const GridPermutation&) const { return SpaceKind::FiniteGrid; }
    } kind_of;
    return std::visit(kind_of, f);
}

inline bool acts_on(const MapDescriptor& f, const SpaceDescriptor& s)
{
    if (space_kind_of(f) != s.kind) {
        return false;
    }
    if (const auto* perm = std::get_if<GridPermutation>(&f)) {
        return perm->image.size() == s.grid_size;
    }
    return true;
}

inline std::string describe(const MapDescriptor& f)
{
    struct {
        std::string operator()(const CircleRotation& m) const
        {
            return "rotation{alpha=" + format_double(m.alpha) + "}";
        }
        std::string operator()(const IntervalAffine& m) const
        {
            return "affine{a=" + format_double(m.a) + ", b=" + format_double(m.b) + "}";
        }
        std::string operator()(const NorthSouth& m) const
        {
            return "north_south{p=" + format_point(m.pole) +
                   ", lambda=" + format_double(m.multiplier) + "}";
        }
        std::string operator()(const SphereRotation& m) const
        {
            return "sphere_rotation{axis=(" + format_double(m.axis[0]) + "," +
                   format_double(m.axis[1]) + "," + format_double(m.axis[2]) +
                   "), alpha=" + format_double(m.alpha) + "}";
        }
        std::string operator()(const GridPermutation& m) const
        {
            std::string out = "permutation{image=";
            for (std::size_t i = 0; i < m.image.size(); ++i) {
                out += (i ? " " : "") + std::to_string(m.image[i]);
            }
            return out + "}";
        }
    } text;
    return std::visit(text, f);
}

//---------------------------------------------------------------------------//
// Constructors with parameter validation
//---------------------------------------------------------------------------//
inline MapDescriptor make_rotation(double alpha)
{
    if (!std::isfinite(alpha)) {
        throw Error(ErrorKind::InvalidParameter, "rotation angle must be finite");
    }
    return CircleRotation{alpha};
}

inline MapDescriptor make_affine(double a, double b)
{
    constexpr double slack = 1e-12;
    if (!(a > 0.0) || !(b >= 0.0) || !(a + b <= 1.0 + slack)) {
        throw Error(ErrorKind::InvalidParameter,
                    "affine{a,b} needs a > 0, b >= 0 and a + b <= 1 to map [0,1] into itself");
    }
    return IntervalAffine{a, b};
}

inline MapDescriptor make_sphere_rotation(const Vec3& axis, double alpha)
{
    double n = norm(axis);
    if (!(n > 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorKind::InvalidParameter, "sphere rotation needs a nonzero axis");
    }
    return SphereRotation{scaled(axis, 1.0 / n), alpha};
}

inline MapDescriptor make_permutation(std::vector<std::size_t> image)
{
    return GridPermutation(std::move(image));
}

/// North-south map attracting to p with chart multiplier lambda in (0,1).
inline MapDescriptor make_north_south(const SpaceDescriptor& space, const SpacePoint& p,
                                      double lambda)
{
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw Error(ErrorKind::InvalidParameter, "north-south multiplier must lie in (0,1)");
    }
    if (space.kind != SpaceKind::Circle && space.kind != SpaceKind::Sphere2) {
        throw Error(ErrorKind::Unsupported, "north-south maps live on the circle or the sphere");
    }
    require_in(space, p);
    return NorthSouth{p, lambda};
}

/// The point antipodal to p (the repeller of a north-south map).
inline SpacePoint antipode(const SpacePoint& p)
{
    if (p.kind() == SpaceKind::Circle) {
        return SpacePoint::circle(p.angle() + std::numbers::pi);
    }
    return SpacePoint::sphere(scaled(p.vec(), -1.0));
}

//---------------------------------------------------------------------------//
// Evaluation
//---------------------------------------------------------------------------//
namespace detail {

inline double chart_scale(double offset, double multiplier)
{
    // offset in (-pi, pi]; the repeller sits at |offset| = pi.
    if (std::abs(offset) >= std::numbers::pi) {
        return offset;
    }
    return 2.0 * std::atan(multiplier * std::tan(0.5 * offset));
}

inline SpacePoint north_south_apply(const NorthSouth& m, const SpacePoint& x)
{
    if (x.kind() == SpaceKind::Circle) {
        const double p = m.pole.angle();
        return SpacePoint::circle(p + chart_scale(wrap_signed(x.angle() - p), m.multiplier));
    }
    const Vec3& p = m.pole.vec();
    const Vec3& v = x.vec();
    const double c = dot(v, p);
    const Vec3 tangent = minus(v, scaled(p, c));
    const double s = norm(tangent);
    if (s == 0.0) {
        return x;  // one of the two fixed points
    }
    const double polar = std::atan2(s, c);
    const double image = chart_scale(polar, m.multiplier);
    const Vec3 out = plus(scaled(p, std::cos(image)), scaled(tangent, std::sin(image) / s));
    return SpacePoint::sphere(out);
}

inline Vec3 rodrigues(const Vec3& axis, double alpha, const Vec3& v)
{
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    return plus(plus(scaled(v, c), scaled(cross(axis, v), s)),
                scaled(axis, dot(axis, v) * (1.0 - c)));
}

}  // namespace detail

inline void require_acts(const MapDescriptor& f, const SpacePoint& x)
{
    if (space_kind_of(f) != x.kind()) {
        throw Error(ErrorKind::SpaceMismatch, "map acts on " +
                                                  std::string(to_string(space_kind_of(f))) +
                                                  ", point lives on " + to_string(x.kind()));
    }
    if (const auto* perm = std::get_if<GridPermutation>(&f)) {
        if (x.node() >= perm->image.size()) {
            throw Error(ErrorKind::SpaceMismatch, "grid node outside permutation domain");
        }
    }
}

inline SpacePoint apply_map(const MapDescriptor& f, const SpacePoint& x)
{
    require_acts(f, x);
    struct {
        const SpacePoint& x;
        SpacePoint operator()(const CircleRotation& m) const
        {
            return SpacePoint::circle(x.angle() + m.alpha);
        }
        SpacePoint operator()(const IntervalAffine& m) const
        {
            return SpacePoint::interval(m.a * x.value() + m.b);
        }
        SpacePoint operator()(const NorthSouth& m) const
        {
            return detail::north_south_apply(m, x);
        }
        SpacePoint operator()(const SphereRotation& m) const
        {
            return SpacePoint::sphere(detail::rodrigues(m.axis, m.alpha, x.vec()));
        }
        SpacePoint operator()(const GridPermutation& m) const
        {
            return SpacePoint::grid(m.image[x.node()]);
        }
    } eval{x};
    return std::visit(eval, f);
}

inline MapDescriptor inverse_map(const MapDescriptor& f)
{
    struct {
        MapDescriptor operator()(const CircleRotation& m) const { return CircleRotation{-m.alpha}; }
        MapDescriptor operator()(const IntervalAffine& m) const
        {
            if (m.a != 1.0 || m.b != 0.0) {
                throw Error(ErrorKind::Unsupported,
                            "only the identity affine map is a homeomorphism of [0,1]");
            }
            return m;
        }
        MapDescriptor operator()(const NorthSouth& m) const
        {
            return NorthSouth{m.pole, 1.0 / m.multiplier};
        }
        MapDescriptor operator()(const SphereRotation& m) const
        {
            return SphereRotation{m.axis, -m.alpha};
        }
        MapDescriptor operator()(const GridPermutation& m) const
        {
            return GridPermutation(m.preimage);
        }
    } inv;
    return std::visit(inv, f);
}

/*!
 * f^{-1}(x). For a non-surjective interval affine map the inverse is only
 * defined on the image [b, a+b]; points outside it raise OutOfRange.
 */
inline SpacePoint apply_inverse(const MapDescriptor& f, const SpacePoint& x)
{
    require_acts(f, x);
    if (const auto* m = std::get_if<IntervalAffine>(&f)) {
        const double t = (x.value() - m->b) / m->a;
        if (t < -1e-12 || t > 1.0 + 1e-12) {
            throw Error(ErrorKind::OutOfRange, "point outside the image of affine{a,b}");
        }
        return SpacePoint::interval(t);
    }
    if (const auto* m = std::get_if<NorthSouth>(&f)) {
        return detail::north_south_apply(NorthSouth{m->pole, 1.0 / m->multiplier}, x);
    }
    if (const auto* m = std::get_if<GridPermutation>(&f)) {
        return SpacePoint::grid(m->preimage[x.node()]);
    }
    return apply_map(inverse_map(f), x);
}

//---------------------------------------------------------------------------//
/*!
 * Random iterated function system (X; f_1..f_k; p_1..p_k). Letters are
 * 1-based: Symbol(i) selects maps()[i-1].
 */
class IfsSystem {
public:
    IfsSystem(SpaceDescriptor space, std::vector<MapDescriptor> maps, ProbabilityVector weights)
        : space_(space), maps_(std::move(maps)), weights_(std::move(weights))
    {
        if (maps_.empty()) {
            throw Error(ErrorKind::InvalidParameter, "an IFS needs at least one map");
        }
        if (weights_.size() != maps_.size()) {
            throw Error(ErrorKind::InvalidParameter,
                        "weights has " + std::to_string(weights_.size()) + " entries for " +
                            std::to_string(maps_.size()) + " maps");
        }
        for (std::size_t i = 0; i < maps_.size(); ++i) {
            if (!acts_on(maps_[i], space_)) {
                throw Error(ErrorKind::SpaceMismatch, "map " + std::to_string(i + 1) + " (" +
                                                          describe(maps_[i]) +
                                                          ") does not act on " + describe(space_));
            }
        }
    }

    IfsSystem(SpaceDescriptor space, std::vector<MapDescriptor> maps)
        : IfsSystem(space, maps, ProbabilityVector::uniform(maps.size()))
    {
    }

    const SpaceDescriptor& space() const noexcept { return space_; }
    const std::vector<MapDescriptor>& maps() const noexcept { return maps_; }
    const ProbabilityVector& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return maps_.size(); }

    const MapDescriptor& map(Symbol s) const
    {
        if (s.index() >= maps_.size()) {
            throw Error(ErrorKind::OutOfRange, "letter " + std::to_string(s.value()) +
                                                   " outside 1.." + std::to_string(maps_.size()));
        }
        return maps_[s.index()];
    }

    SpacePoint apply(Symbol s, const SpacePoint& x) const { return apply_map(map(s), x); }
    SpacePoint apply_inverse(Symbol s, const SpacePoint& x) const
    {
        return ifs::apply_inverse(map(s), x);
    }

    /// True when every map is a homeomorphism of the whole space.
    bool invertible() const
    {
        for (const auto& f : maps_) {
            if (const auto* m = std::get_if<IntervalAffine>(&f)) {
                if (m->a != 1.0 || m->b != 0.0) {
                    return false;
                }
            }
        }
        return true;
    }

private:
    SpaceDescriptor space_;
    std::vector<MapDescriptor> maps_;
    ProbabilityVector weights_;
};

/// Fiber-wise orbit piece: points[i] = f^i_omega(base), points[0] = base.
struct OrbitSegment {
    SpacePoint base;
    FiniteWord direction;
    std::vector<SpacePoint> points;
};

inline OrbitSegment iterate_forward(const IfsSystem& sys, const FiniteWord& w,
                                    const SpacePoint& x, std::size_t n)
{
    if (n > w.size()) {
        throw Error(ErrorKind::OutOfRange, "word shorter than the requested orbit length");
    }
    require_in(sys.space(), x);
    OrbitSegment seg{x, w.slice(0, n), {}};
    seg.points.reserve(n + 1);
    seg.points.push_back(x);
    for (std::size_t i = 0; i < n; ++i) {
        seg.points.push_back(sys.apply(w[i], seg.points.back()));
    }
    return seg;
}

inline OrbitSegment iterate_forward(const IfsSystem& sys, const WordStream& w,
                                    const SpacePoint& x, std::size_t n)
{
    return iterate_forward(sys, w.take(n), x, n);
}

/*!
 * Backward orbit along the negative half of a two-sided word.
 * window[0] is omega_{-1}, window[1] is omega_{-2}, ...; points[j] is
 * f^{-1}_{omega_{-j}} o ... o f^{-1}_{omega_{-1}}(x).
 */
inline OrbitSegment iterate_backward(const IfsSystem& sys, const FiniteWord& negative_window,
                                     const SpacePoint& x, std::size_t n)
{
    if (n > negative_window.size()) {
        throw Error(ErrorKind::OutOfRange, "window shorter than the requested orbit length");
    }
    require_in(sys.space(), x);
    OrbitSegment seg{x, negative_window.slice(0, n), {}};
    seg.points.reserve(n + 1);
    seg.points.push_back(x);
    for (std::size_t j = 0; j < n; ++j) {
        seg.points.push_back(sys.apply_inverse(negative_window[j], seg.points.back()));
    }
    return seg;
}

}  // namespace ifs
