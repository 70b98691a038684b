// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each line ends with the measured quantities and the runtime.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "grid_oracle.hpp"
#include "ifs_lab/chains.hpp"
#include "ifs_lab/format.hpp"
#include "ifs_lab/ifs_core.hpp"
#include "ifs_lab/stochastic.hpp"
#include "ifs_lab/symbolic.hpp"

using namespace ifs;
namespace fs = std::filesystem;

namespace {

constexpr double golden_angle = 2.39996322972865332;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) { return format_double(v); }

//---------------------------------------------------------------------------//
// 1. Cocycle and inverse identities
//---------------------------------------------------------------------------//
IfsSystem random_system(SpaceKind kind, CounterRng& rng)
{
    const auto k = 1 + static_cast<std::size_t>(rng.uniform() * 3);
    std::vector<MapDescriptor> maps;
    switch (kind) {
    case SpaceKind::Circle: {
        auto s = SpaceDescriptor::circle();
        for (std::size_t i = 0; i < k; ++i) {
            if (rng.uniform() < 0.5) {
                maps.push_back(make_rotation(rng.uniform(0.0, two_pi)));
            } else {
                maps.push_back(make_north_south(s, random_point(s, rng), rng.uniform(0.5, 0.95)));
            }
        }
        return IfsSystem(s, maps);
    }
    case SpaceKind::Sphere2: {
        auto s = SpaceDescriptor::sphere2();
        for (std::size_t i = 0; i < k; ++i) {
            if (rng.uniform() < 0.5) {
                maps.push_back(make_sphere_rotation(random_point(s, rng).vec(),
                                                    rng.uniform(0.0, two_pi)));
            } else {
                maps.push_back(make_north_south(s, random_point(s, rng), rng.uniform(0.5, 0.95)));
            }
        }
        return IfsSystem(s, maps);
    }
    case SpaceKind::Interval: {
        for (std::size_t i = 0; i < k; ++i) {
            const double a = rng.uniform(0.5, 1.0);
            maps.push_back(make_affine(a, rng.uniform(0.0, 1.0 - a)));
        }
        return IfsSystem(SpaceDescriptor::interval(), maps);
    }
    case SpaceKind::FiniteGrid: {
        const auto n = 1 + static_cast<std::size_t>(rng.uniform() * 40);
        return ifs_test::random_grid_system(rng, n, k);
    }
    }
    throw Error(ErrorKind::Unsupported, "unknown space");
}

Outcome criterion_cocycle()
{
    constexpr int cases = 1000;
    std::size_t failures = 0;
    double worst = 0.0;
    std::ostringstream detail;
    for (SpaceKind kind :
         {SpaceKind::Circle, SpaceKind::Sphere2, SpaceKind::Interval, SpaceKind::FiniteGrid}) {
        CounterRng rng(stream_key(101, static_cast<std::uint64_t>(kind)));
        std::size_t space_failures = 0;
        for (int c = 0; c < cases; ++c) {
            IfsSystem sys = random_system(kind, rng);
            const auto& s = sys.space();
            const SpacePoint x = random_point(s, rng);
            const auto m = static_cast<std::size_t>(rng.uniform() * 30);
            const auto n = static_cast<std::size_t>(rng.uniform() * 30);
            const auto r = static_cast<std::size_t>(rng.uniform() * 13);
            const FiniteWord w = sample_word(sys.weights(), m + n, stream_key(102, c));

            const auto whole = iterate_forward(sys, w, x, m + n).points.back();
            const auto mid = iterate_forward(sys, w, x, m).points.back();
            const auto split = iterate_forward(sys, shift_word(w, m), mid, n).points.back();

            const FiniteWord u = sample_word(sys.weights(), r, stream_key(103, c));
            const auto pushed = iterate_forward(sys, u, x, r).points.back();
            FiniteWord window;
            for (std::size_t j = r; j-- > 0;) {
                window.push_back(u[j]);
            }
            const auto back = iterate_backward(sys, window, pushed, r).points.back();

            bool ok = false;
            if (kind == SpaceKind::FiniteGrid) {
                ok = whole == split && back == x;
            } else {
                const double e = std::max(distance(s, whole, split), distance(s, back, x));
                worst = std::max(worst, e);
                ok = e <= 1e-9;
            }
            space_failures += ok ? 0 : 1;
        }
        failures += space_failures;
        detail << to_string(kind) << " " << cases - space_failures << "/" << cases << "; ";
    }
    detail << "max error " << num(worst);
    return {failures == 0, detail.str()};
}

//---------------------------------------------------------------------------//
// 2. Product measure of the cylinder [1 2]
//---------------------------------------------------------------------------//
Outcome criterion_product_measure()
{
    const ProbabilityVector w({0.3, 0.7});
    const FiniteWord prefix({Symbol(1), Symbol(2)});
    constexpr std::size_t n = 100000;
    std::size_t hits = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const WordStream s = trial_stream(202, t, w);
        hits += s[0] == prefix[0] && s[1] == prefix[1] ? 1 : 0;
    }
    const double q = cylinder_measure(w, prefix);
    const double f = static_cast<double>(hits) / n;
    const double sigma = std::sqrt(q * (1.0 - q) / n);
    const double z = (f - q) / sigma;
    return {std::abs(f - q) <= 3.0 * sigma && std::abs(q - 0.21) < 1e-15,
            "frequency " + num(f) + " vs " + num(q) + ", z = " + num(z)};
}

//---------------------------------------------------------------------------//
// 3 and 8. Tail bound and syndetic gaps in the circle scenario
//---------------------------------------------------------------------------//
struct TailScenario {
    IfsSystem sys = build_theorem_c_scenario(SpaceKind::Circle, 0.5, golden_angle);
    SpacePoint x = SpacePoint::circle(3.0);
    Ball ball{SpacePoint::circle(0.0), 0.1};
    std::size_t window = 0;
};

TailScenario& tail_scenario()
{
    static TailScenario s = [] {
        TailScenario t;
        t.window = choose_window(t.sys, t.x, t.ball, ExactImage{}, InBall{t.ball}, 20, 200, 16, 303)
                       .window;
        return t;
    }();
    return s;
}

Outcome criterion_tail_bound()
{
    auto& s = tail_scenario();
    std::vector<std::size_t> horizons;
    for (std::size_t n = 0; n <= 400; n += 40) {
        horizons.push_back(n);
    }
    auto rep = tail_bound_report(s.sys, s.x, s.ball, ExactImage{}, InBall{s.ball}, s.window,
                                 horizons, 10000, 304);
    double worst_margin = 1.0;
    bool decreasing = true;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        worst_margin = std::min(worst_margin, rep.rows[i].tolerance - rep.rows[i].miss_rate);
        if (i > 0 && rep.rows[i].n / s.window > rep.rows[i - 1].n / s.window) {
            decreasing = decreasing && rep.rows[i].bound < rep.rows[i - 1].bound;
        }
    }
    std::ostringstream d;
    d << "l = " << s.window << ", p_lower = " << num(rep.p_lower) << ", rows ok "
      << std::count_if(rep.rows.begin(), rep.rows.end(), [](auto& r) { return r.ok; }) << "/"
      << rep.rows.size() << ", miss rate at n=0 " << num(rep.rows.front().miss_rate)
      << " at n=400 " << num(rep.rows.back().miss_rate) << ", min slack " << num(worst_margin)
      << ", hypothesis violations " << rep.hypothesis_violations;
    return {rep.all_ok() && decreasing && rep.hypothesis_violations == 0, d.str()};
}

Outcome criterion_syndetic()
{
    auto& s = tail_scenario();
    const std::size_t limit = 2 * s.window;
    auto rep = syndetic_report(s.sys, s.x, s.ball, ExactImage{}, InBall{s.ball}, 2000, limit,
                               limit, 100, 808);
    const auto worst = *std::max_element(rep.max_gaps.begin(), rep.max_gaps.end());
    return {rep.fraction() >= 0.95,
            "l = " + std::to_string(s.window) + ", " + std::to_string(rep.within_limit) +
                "/100 branches with max gap <= " + std::to_string(limit) + ", largest gap " +
                std::to_string(worst)};
}

//---------------------------------------------------------------------------//
// 4. Probabilistic chaos game
//---------------------------------------------------------------------------//
Outcome criterion_chaos_game()
{
    IfsSystem rot(SpaceDescriptor::circle(), {make_rotation(golden_angle), make_rotation(1.0)});
    auto dense = verify_chaos_game_density(rot, SpacePoint::circle(0.0), 0.02, 20000, 100, 404);
    IfsSystem contraction(SpaceDescriptor::interval(), {make_affine(0.5, 0.0)});
    auto control =
        verify_chaos_game_density(contraction, SpacePoint::interval(1.0), 0.1, 20000, 100, 405);
    return {dense.frequency >= 0.99 && control.frequency == 0.0,
            "rotations " + num(dense.frequency) + ", contraction " + num(control.frequency)};
}

//---------------------------------------------------------------------------//
// 5. Delta-chain graph against the brute-force oracle
//---------------------------------------------------------------------------//
Outcome criterion_chain_oracle()
{
    CounterRng rng(stream_key(505, 0));
    std::size_t agree = 0;
    std::size_t transitive = 0;
    std::size_t queries = 0;
    std::size_t query_mismatch = 0;
    for (int trial = 0; trial < 20; ++trial) {
        IfsSystem sys = ifs_test::mixed_grid_system(rng, trial);
        const double delta = 0.5;
        const double eps = 0.25;
        ChainGraph graph(sys, delta, eps);
        ifs_test::Oracle oracle(sys, delta, eps);
        bool ok = chain_recurrent_set(graph) == oracle.recurrent() &&
                  is_chain_transitive(graph) == oracle.transitive();
        const std::size_t n = graph.size();
        for (int q = 0; q < 40; ++q) {
            const auto x = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            const auto y = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            const auto len = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            std::vector<char> goal(n, 0);
            goal[y] = 1;
            const bool got =
                delta_chain_reachable(graph, sys, SpacePoint::grid(x), SpacePoint::grid(y), len)
                    .reachable;
            ++queries;
            if (got != oracle.reachable(x, goal, len)) {
                ++query_mismatch;
                ok = false;
            }
        }
        agree += ok ? 1 : 0;
        transitive += oracle.transitive() ? 1 : 0;
    }
    return {agree == 20, std::to_string(agree) + "/20 systems agree (" +
                             std::to_string(transitive) + " transitive), reachability queries " +
                             std::to_string(queries - query_mismatch) + "/" +
                             std::to_string(queries)};
}

//---------------------------------------------------------------------------//
// 6. Strong proximality
//---------------------------------------------------------------------------//
Outcome criterion_proximality()
{
    std::ostringstream d;
    bool pass = true;

    IfsSystem circle = build_theorem_c_scenario(SpaceKind::Circle, 0.5, golden_angle);
    CounterRng rng(stream_key(606, 0));
    double min_freq = 1.0;
    for (std::size_t i = 0; i < 20; ++i) {
        const SpacePoint x = random_point(circle.space(), rng);
        const SpacePoint y = random_point(circle.space(), rng);
        auto rep = verify_proximality(circle, x, y, 1e-3, 50000, 100, stream_key(607, i));
        min_freq = std::min(min_freq, rep.estimate.frequency);
    }
    pass = pass && min_freq >= 0.99;
    d << "circle min pair frequency " << num(min_freq);

    IfsSystem rotations(SpaceDescriptor::circle(),
                        {make_rotation(golden_angle), make_rotation(1.0)});
    double control_max = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        const SpacePoint x = random_point(rotations.space(), rng);
        const SpacePoint y = random_point(rotations.space(), rng);
        const double tol = 0.5 * raw_distance(x, y);
        auto rep = verify_proximality(rotations, x, y, tol, 50000, 100, stream_key(608, i));
        control_max = std::max(control_max, rep.estimate.frequency);
    }
    pass = pass && control_max == 0.0;
    d << ", rotations control max " << num(control_max);

    IfsSystem sphere = build_theorem_c_scenario(SpaceKind::Sphere2, 0.5, golden_angle);
    double sphere_min = 1.0;
    for (std::size_t i = 0; i < 5; ++i) {
        const SpacePoint x = random_point(sphere.space(), rng);
        const SpacePoint y = random_point(sphere.space(), rng);
        auto rep = verify_proximality(sphere, x, y, 1e-3, 50000, 100, stream_key(609, i));
        sphere_min = std::min(sphere_min, rep.estimate.frequency);
    }
    pass = pass && sphere_min >= 0.99;
    d << ", sphere min pair frequency " << num(sphere_min);

    auto probe = backward_minimality_probe(circle, 0.05, 20, 10000, 610);
    pass = pass && probe.passed();
    d << ", circle backward probe " << probe.dense << "/" << probe.points;
    return {pass, d.str()};
}

//---------------------------------------------------------------------------//
// 7. Universal word and cylinder occurrences
//---------------------------------------------------------------------------//
Outcome criterion_universal_word()
{
    const FiniteWord w = universal_word(2, 8);
    std::size_t total = 0;
    std::size_t confirmed = 0;
    for (std::size_t len = 1; len <= 8; ++len) {
        for (std::size_t code = 0; code < (std::size_t{1} << len); ++code) {
            FiniteWord prefix;
            for (std::size_t j = 0; j < len; ++j) {
                prefix.push_back(Symbol(1 + static_cast<int>((code >> (len - 1 - j)) & 1)));
            }
            ++total;
            auto n = find_cylinder_occurrence(w, Cylinder(prefix), w.size() - len);
            if (!n) {
                continue;
            }
            bool match = *n + len <= w.size();
            for (std::size_t j = 0; match && j < len; ++j) {
                match = w[*n + j] == prefix[j];
            }
            confirmed += match ? 1 : 0;
        }
    }
    return {total == 510 && confirmed == total,
            std::to_string(confirmed) + "/" + std::to_string(total) +
                " cylinders found and confirmed in a word of length " +
                std::to_string(w.size())};
}

//---------------------------------------------------------------------------//
// 9. CLI reproducibility over the shipped configs
//---------------------------------------------------------------------------//
std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion_cli_reproducible()
{
    const fs::path root = fs::temp_directory_path() / "ifs_lab_acceptance";
    fs::remove_all(root);
    std::vector<fs::path> configs;
    for (const auto& e : fs::directory_iterator(IFS_LAB_CONFIG_DIR)) {
        if (e.path().extension() == ".cfg") {
            configs.push_back(e.path());
        }
    }
    std::sort(configs.begin(), configs.end());
    std::size_t identical = 0;
    std::size_t files = 0;
    std::string failures;
    for (const auto& cfg : configs) {
        const std::string stem = cfg.stem().string();
        bool ok = true;
        for (const char* run : {"a", "b"}) {
            const std::string cmd = std::string(IFS_LAB_BINARY) + " run \"" + cfg.string() +
                                    "\" --out \"" + (root / run / stem).string() +
                                    "\" >/dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            ok = ok && WIFEXITED(status) && WEXITSTATUS(status) == 0;
        }
        std::vector<fs::path> names;
        if (ok) {
            for (const auto& e : fs::directory_iterator(root / "a" / stem)) {
                names.push_back(e.path().filename());
            }
            ok = !names.empty();
        }
        for (const auto& name : names) {
            ++files;
            ok = ok && fs::exists(root / "b" / stem / name) &&
                 slurp(root / "a" / stem / name) == slurp(root / "b" / stem / name);
        }
        identical += ok ? 1 : 0;
        if (!ok) {
            failures += " " + stem;
        }
    }
    return {!configs.empty() && identical == configs.size(),
            std::to_string(identical) + "/" + std::to_string(configs.size()) +
                " configs byte-identical across reruns (" + std::to_string(files) + " files)" +
                (failures.empty() ? "" : ", differing:" + failures)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  ///< 0: no runtime requirement
    std::function<Outcome()> run;
};

}  // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "cocycle and inverse identities", 0, criterion_cocycle},
        {2, "product measure of [1 2]", 0, criterion_product_measure},
        {3, "tail-bound domination", 60, criterion_tail_bound},
        {4, "probabilistic chaos game", 60, criterion_chaos_game},
        {5, "delta-chain oracle equivalence", 0, criterion_chain_oracle},
        {6, "strong proximality", 90, criterion_proximality},
        {7, "universal word cylinders", 5, criterion_universal_word},
        {8, "syndetic hit-set gaps", 0, criterion_syndetic},
        {9, "CLI reproducibility", 0, criterion_cli_reproducible},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_seconds > 0 && secs > c.budget_seconds) {
            out.pass = false;
            out.detail += ", over the " + num(c.budget_seconds) + " s budget";
        }
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.2f s", secs);
        std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name
                  << "): " << out.detail << " [" << timing << "]" << std::endl;
        failed += out.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " failed")
              << std::endl;
    return failed == 0 ? 0 : 1;
}
