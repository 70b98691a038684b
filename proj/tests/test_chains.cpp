#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ifs_lab/chains.hpp"
#include "grid_oracle.hpp"

using namespace ifs;
using ifs_test::Oracle;
using ifs_test::random_grid_system;

namespace {

constexpr double golden_angle = 2.39996322972865332;

IfsSystem two_rotations()
{
    return IfsSystem(SpaceDescriptor::circle(), {make_rotation(golden_angle), make_rotation(1.0)});
}

IfsSystem identity_grid(std::size_t n)
{
    return IfsSystem(SpaceDescriptor::grid(n), {make_permutation(GridPermutation::identity(n).image)});
}

}  // namespace

//---------------------------------------------------------------------------//
// Relations and certificates
//---------------------------------------------------------------------------//
TEST(Relation, Examples)
{
    auto sys = two_rotations();
    auto x = SpacePoint::circle(0.4);
    auto y = sys.apply(Symbol(1), x);
    EXPECT_TRUE(relation_holds(sys, ExactImage{1e-9}, Symbol(1), x, y));
    EXPECT_FALSE(relation_holds(sys, ExactImage{1e-9}, Symbol(2), x, y));
    for (double delta : {1e-12, 0.1, 3.0}) {
        EXPECT_TRUE(relation_holds(sys, DeltaImage{delta}, Symbol(1), x, y));
    }
    Ball b{SpacePoint::circle(0.0), 0.2};
    EXPECT_FALSE(relation_holds(sys, InBall{b}, Symbol(1), x, SpacePoint::circle(1.0)));
    EXPECT_THROW(relation_holds(sys, DeltaImage{0.1}, Symbol(1), x, SpacePoint::interval(0.5)),
                 Error);
    EXPECT_THROW(relation_holds(sys, PairExactImage{}, Symbol(1), x, y), Error);
}

TEST(VerifyChain, Examples)
{
    auto sys = two_rotations();
    auto x0 = SpacePoint::circle(0.0);
    auto x1 = sys.apply(Symbol(2), x0);
    ChainCertificate single{FiniteWord{2}, {x0, x1}, ExactImage{}, ExactImage{},
                            Ball{x1, 0.01}};
    EXPECT_TRUE(verify_chain(sys, single));

    auto w = sample_word(sys.weights(), 30, 4);
    auto orbit = iterate_forward(sys, w, x0, 30);
    ChainCertificate cert{w, orbit.points, ExactImage{}, ExactImage{}, WholeSpace{}};
    EXPECT_TRUE(verify_chain(sys, cert));

    const double delta = 0.01;
    ChainCertificate loose{w, orbit.points, DeltaImage{delta}, DeltaImage{delta}, WholeSpace{}};
    EXPECT_TRUE(verify_chain(sys, loose));
    loose.points[12] = SpacePoint::circle(loose.points[12].angle() + 10 * delta);
    EXPECT_FALSE(verify_chain(sys, loose));

    ChainCertificate malformed = cert;
    malformed.points.pop_back();
    EXPECT_FALSE(verify_chain(sys, malformed));
}

TEST(WitnessTable, ExactOrbitHasZeroErrors)
{
    auto sys = two_rotations();
    auto w = sample_word(sys.weights(), 5, 8);
    auto orbit = iterate_forward(sys, w, SpacePoint::circle(1.0), 5);
    ChainCertificate cert{w, orbit.points, ExactImage{}, ExactImage{}, WholeSpace{}};
    auto table = witness_table(sys, cert);
    ASSERT_EQ(table.size(), 6u);
    EXPECT_EQ(table.rows()[0][1], "");
    for (std::size_t i = 1; i < table.size(); ++i) {
        EXPECT_EQ(table.rows()[i][3], "0");
        EXPECT_EQ(table.rows()[i][1], std::to_string(w[i - 1].value()));
    }
}

//---------------------------------------------------------------------------//
// Chain connections
//---------------------------------------------------------------------------//
TEST(FindChainConnection, WholeSpaceConnectsImmediately)
{
    auto sys = two_rotations();
    WordStream omega(3, sys.weights());
    auto cert = find_chain_connection(sys, SpacePoint::circle(2.0), WholeSpace{}, DeltaImage{0.1},
                                      DeltaImage{0.3}, omega, 10);
    ASSERT_TRUE(cert.has_value());
    EXPECT_EQ(cert->length(), 0u);
    EXPECT_TRUE(verify_chain(sys, *cert));
}

TEST(FindChainConnection, DenseRotationOrbitReachesBall)
{
    auto sys = two_rotations();
    Ball target{SpacePoint::circle(4.0), 0.05};
    for (std::uint64_t t = 0; t < 10; ++t) {
        auto omega = trial_stream(11, t, sys.weights());
        auto cert = find_chain_connection(sys, SpacePoint::circle(0.3), target, ExactImage{},
                                          ExactImage{}, omega, 10000);
        ASSERT_TRUE(cert.has_value());
        EXPECT_TRUE(verify_chain(sys, *cert));
        EXPECT_TRUE(target.contains(cert->endpoint()));
    }
}

TEST(FindChainConnection, ConstantOrbitNeverConnects)
{
    auto sys = identity_grid(5);
    WordStream omega(1, sys.weights());
    auto cert = find_chain_connection(sys, SpacePoint::grid(0), Ball{SpacePoint::grid(3), 0.5},
                                      DeltaImage{0.5}, DeltaImage{0.5}, omega, 200);
    EXPECT_FALSE(cert.has_value());
}

TEST(FindChainConnection, DeltaSearchCertificatesAreSound)
{
    // A contraction pulls exact orbits to 0; delta-chains may still climb.
    IfsSystem sys(SpaceDescriptor::interval(), {make_affine(0.5, 0.0), make_affine(0.5, 0.5)});
    CounterRng rng(stream_key(21, 0));
    for (int trial = 0; trial < 40; ++trial) {
        auto x = random_point(sys.space(), rng);
        const double delta = rng.uniform(0.02, 0.2);
        Ball target{random_point(sys.space(), rng), rng.uniform(0.02, 0.2)};
        WordStream omega(static_cast<std::uint64_t>(trial), sys.weights());
        auto cert = find_chain_connection(sys, x, target, DeltaImage{delta}, DeltaImage{delta},
                                          omega, 50);
        if (cert) {
            EXPECT_TRUE(verify_chain(sys, *cert));
            EXPECT_EQ(cert->start(), x);
        }
    }
}

TEST(FindChainConnection, DeltaSearchMatchesOrbitWhenOrbitConnects)
{
    // Whenever the exact orbit connects by step n, the delta search connects
    // no later than n.
    auto sys = two_rotations();
    Ball target{SpacePoint::circle(1.0), 0.1};
    for (std::uint64_t t = 0; t < 10; ++t) {
        auto omega = trial_stream(5, t, sys.weights());
        auto exact = find_chain_connection(sys, SpacePoint::circle(0.0), target, ExactImage{},
                                           ExactImage{}, omega, 500);
        auto loose = find_chain_connection(sys, SpacePoint::circle(0.0), target, DeltaImage{0.05},
                                           DeltaImage{0.05}, omega, 500);
        ASSERT_TRUE(exact && loose);
        EXPECT_LE(loose->length(), exact->length());
        EXPECT_TRUE(verify_chain(sys, *loose));
    }
}

TEST(FindChainConnection, InBallChain)
{
    auto sys = two_rotations();
    Ball b{SpacePoint::circle(0.0), 0.3};
    auto x = SpacePoint::circle(two_pi - 1.0);  // f_2(x) = 0 lies in b
    FiniteWord omega{2, 1, 1};
    auto cert = find_chain_connection(sys, x, Ball{SpacePoint::circle(0.1), 0.05}, InBall{b},
                                      InBall{b}, omega, 2);
    ASSERT_TRUE(cert.has_value());
    EXPECT_TRUE(verify_chain(sys, *cert));
}

TEST(FindChainConnection, ExactChainsAreOrbitsOnGrid)
{
    CounterRng rng(stream_key(31, 0));
    std::size_t checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto sys = random_grid_system(rng, 30, 2);
        auto x = random_point(sys.space(), rng);
        auto omega = sample_word(sys.weights(), 60, static_cast<std::uint64_t>(trial));
        auto cert = find_chain_connection(sys, x, Ball{random_point(sys.space(), rng), 0.5},
                                          ExactImage{0.0}, ExactImage{0.0}, omega, 59);
        if (!cert) {
            continue;
        }
        ++checked;
        auto orbit = iterate_forward(sys, omega, x, cert->length() + 1);
        EXPECT_EQ(cert->points, orbit.points);
        // Any other interior point breaks the chain.
        if (cert->length() >= 1) {
            auto broken = *cert;
            broken.points[1] = SpacePoint::grid((cert->points[1].node() + 1) % 30);
            EXPECT_FALSE(verify_chain(sys, broken));
        }
    }
    EXPECT_GT(checked, 5u);
}

TEST(StableConnection, Examples)
{
    auto sys = two_rotations();
    FiniteWord w{1, 2, 2, 1};
    auto x = SpacePoint::circle(0.7);
    auto orbit = iterate_forward(sys, w, x, 4);

    ChainCertificate anywhere{w, orbit.points, ExactImage{}, ExactImage{}, WholeSpace{}};
    EXPECT_TRUE(check_stable_connection(sys, anywhere, 3.0, 200).stable);

    ChainCertificate into_ball{w, orbit.points, ExactImage{}, ExactImage{},
                               Ball{orbit.points.back(), 0.1}};
    auto small = check_stable_connection(sys, into_ball, 0.05, 200);
    EXPECT_TRUE(small.stable);
    EXPECT_EQ(small.samples, 200u);

    // Endpoint exactly on the boundary of a closed target neighbourhood.
    auto q = orbit.points.back();
    ChainCertificate boundary{w, orbit.points, ExactImage{}, ExactImage{},
                              PointSet{{SpacePoint::circle(q.angle() + 0.2)}, 0.2}};
    ASSERT_TRUE(verify_chain(sys, boundary));
    auto large = check_stable_connection(sys, boundary, 0.5, 200);
    EXPECT_FALSE(large.stable);
    EXPECT_GT(large.failures, 0u);
}

//---------------------------------------------------------------------------//
// Syndetic hit sets
//---------------------------------------------------------------------------//
TEST(SyndeticMaxGap, Examples)
{
    HitSet all{{}, 10};
    for (std::size_t i = 0; i <= 10; ++i) {
        all.indices.push_back(i);
    }
    EXPECT_EQ(syndetic_max_gap(all), 1u);
    HitSet evens{{0, 2, 4, 6, 8, 10}, 10};
    EXPECT_EQ(syndetic_max_gap(evens), 2u);
    EXPECT_EQ(syndetic_max_gap(HitSet{{0}, 100}), 101u);
    EXPECT_EQ(syndetic_max_gap(HitSet{{}, 100}), 101u);
    EXPECT_THROW(syndetic_max_gap(HitSet{{}, 0}), Error);
}

TEST(MinimalConnectionIndex, MatchesExhaustiveWordSearch)
{
    auto sys = two_rotations();
    Ball target{SpacePoint::circle(3.0), 0.4};
    CounterRng rng(stream_key(41, 0));
    for (int trial = 0; trial < 50; ++trial) {
        auto y = random_point(sys.space(), rng);
        const std::size_t L = 5;
        auto got = minimal_connection_index(sys, y, target, ExactImage{}, ExactImage{}, L);
        // Exhaustive: all words of length j+1 for j = 0..L.
        std::optional<std::size_t> expected;
        for (std::size_t j = 0; j <= L && !expected; ++j) {
            for (std::size_t code = 0; code < (std::size_t{1} << (j + 1)) && !expected; ++code) {
                auto p = y;
                for (std::size_t i = 0; i <= j; ++i) {
                    p = sys.apply(Symbol(static_cast<int>((code >> i) & 1) + 1), p);
                }
                if (target.contains(p)) {
                    expected = j;
                }
            }
        }
        EXPECT_EQ(got, expected);
    }
}

TEST(BranchHitSet, ContainsLiteralHitsAndRespectsHorizon)
{
    auto sys = two_rotations();
    Ball target{SpacePoint::circle(0.0), 0.2};
    auto x = SpacePoint::circle(2.0);
    const std::size_t n = 300;
    auto omega = sample_word(sys.weights(), n + 1, 17);
    auto hits = branch_hit_set(sys, x, omega, target, ExactImage{}, ExactImage{}, n, 8);
    EXPECT_TRUE(std::is_sorted(hits.indices.begin(), hits.indices.end()));
    ASSERT_FALSE(hits.indices.empty());
    EXPECT_LE(hits.indices.back(), n);
    auto orbit = iterate_forward(sys, omega, x, n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        if (target.contains(orbit.points[i + 1])) {
            EXPECT_TRUE(std::binary_search(hits.indices.begin(), hits.indices.end(), i)) << i;
        }
    }
}

TEST(BackwardChain, InverseOrbitVerifies)
{
    auto sys = two_rotations();
    auto window = sample_word(sys.weights(), 20, 2);
    auto seg = iterate_backward(sys, window, SpacePoint::circle(1.0), 20);
    EXPECT_TRUE(verify_backward_chain(sys, window, seg.points, ExactImage{}));
    seg.points[5] = SpacePoint::circle(seg.points[5].angle() + 0.5);
    EXPECT_FALSE(verify_backward_chain(sys, window, seg.points, DeltaImage{0.1}));
}

TEST(PairConnection, ContractingPairEntersBall)
{
    auto circle = SpaceDescriptor::circle();
    IfsSystem sys(circle, {make_rotation(golden_angle),
                           make_north_south(circle, SpacePoint::circle(0.0), 0.5)});
    Ball q{SpacePoint::circle(0.0), 0.1};
    for (std::uint64_t t = 0; t < 10; ++t) {
        auto omega = trial_stream(3, t, sys.weights());
        auto cert = find_pair_connection(sys, {SpacePoint::circle(1.0), SpacePoint::circle(2.5)},
                                         q, PairExactImage{}, PairInBall{q}, omega, 20000);
        ASSERT_TRUE(cert.has_value());
        EXPECT_TRUE(verify_pair_chain(sys, *cert));
    }
}

//---------------------------------------------------------------------------//
// Delta-chain graph
//---------------------------------------------------------------------------//
TEST(DeltaChainReachable, OneStepImage)
{
    auto sys = two_rotations();
    CounterRng rng(stream_key(51, 0));
    for (int i = 0; i < 50; ++i) {
        auto x = random_point(sys.space(), rng);
        auto r = delta_chain_reachable(sys, x, sys.apply(Symbol(1), x), 0.05, 0.02, 3);
        ASSERT_TRUE(r.reachable);
        EXPECT_EQ(*r.word, FiniteWord{1});
    }
}

TEST(DeltaChainReachable, IdentityCannotTravel)
{
    IfsSystem sys(SpaceDescriptor::circle(), {make_rotation(0.0)});
    auto r = delta_chain_reachable(sys, SpacePoint::circle(0.0), SpacePoint::circle(1.0), 0.1,
                                   0.02, 1);
    EXPECT_FALSE(r.reachable);
    EXPECT_FALSE(r.word.has_value());
    auto grid = identity_grid(10);
    EXPECT_FALSE(
        delta_chain_reachable(grid, SpacePoint::grid(0), SpacePoint::grid(4), 0.5, 0.25, 50)
            .reachable);
}

TEST(DeltaChainReachable, RejectsDeltaNotAboveEps)
{
    auto sys = two_rotations();
    EXPECT_THROW(delta_chain_reachable(sys, SpacePoint::circle(0), SpacePoint::circle(1), 0.02,
                                       0.02, 5),
                 Error);
}

TEST(DeltaChainReachable, CertificatesVerifyWithSlack)
{
    IfsSystem sys(SpaceDescriptor::interval(), {make_affine(0.5, 0.0), make_affine(0.6, 0.4)});
    CounterRng rng(stream_key(52, 0));
    ChainGraph graph(sys, 0.05, 0.01);
    std::size_t found = 0;
    for (int i = 0; i < 100; ++i) {
        auto x = random_point(sys.space(), rng);
        auto y = random_point(sys.space(), rng);
        auto r = delta_chain_reachable(graph, sys, x, y, 30);
        if (r.reachable) {
            ++found;
            ASSERT_TRUE(r.certificate.has_value());
            EXPECT_TRUE(verify_chain(sys, *r.certificate));
            EXPECT_EQ(r.nodes.front(), graph.net().nearest(x));
            EXPECT_LT(distance(sys.space(), graph.net()[r.nodes.back()], y), 0.05);
            EXPECT_GE(r.word->size(), 1u);
            EXPECT_LE(r.word->size(), 30u);
        }
    }
    EXPECT_GT(found, 0u);
}

TEST(DeltaChainReachable, GridMatchesBruteForce)
{
    CounterRng rng(stream_key(53, 0));
    for (int trial = 0; trial < 10; ++trial) {
        auto sys = random_grid_system(rng, 50, 1);
        Oracle oracle(sys, 0.5, 0.25);
        ChainGraph graph(sys, 0.5, 0.25);
        for (std::size_t x = 0; x < 50; ++x) {
            for (std::size_t y = 0; y < 50; y += 7) {
                std::vector<char> goal(50, 0);
                goal[y] = 1;
                for (std::size_t len : {1u, 3u, 50u}) {
                    auto r = delta_chain_reachable(graph, sys, SpacePoint::grid(x),
                                                   SpacePoint::grid(y), len);
                    ASSERT_EQ(r.reachable, oracle.reachable(x, goal, len))
                        << "x=" << x << " y=" << y << " len=" << len;
                }
            }
        }
    }
}

TEST(DeltaChainReachable, MonotoneInDelta)
{
    IfsSystem sys(SpaceDescriptor::circle(),
                  {make_rotation(0.3), make_north_south(SpaceDescriptor::circle(),
                                                        SpacePoint::circle(1.0), 0.6)});
    CounterRng rng(stream_key(54, 0));
    for (int i = 0; i < 100; ++i) {
        auto x = random_point(sys.space(), rng);
        auto y = random_point(sys.space(), rng);
        const double delta = rng.uniform(0.03, 0.1);
        const double bigger = delta * rng.uniform(1.0, 3.0);
        const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform() * 6);
        if (delta_chain_reachable(sys, x, y, delta, 0.02, len).reachable) {
            EXPECT_TRUE(delta_chain_reachable(sys, x, y, bigger, 0.02, len).reachable);
        }
    }
}

TEST(ChainRecurrentSet, IdentityMakesEveryNodeRecurrent)
{
    IfsSystem sys(SpaceDescriptor::circle(), {make_rotation(0.0), make_rotation(1.0)});
    ChainGraph graph(sys, 0.05, 0.02);
    EXPECT_EQ(chain_recurrent_set(graph).size(), graph.size());
}

TEST(ChainRecurrentSet, ContractionRecursOnlyNearFixedPoint)
{
    IfsSystem sys(SpaceDescriptor::interval(), {make_affine(0.5, 0.0)});
    ChainGraph graph(sys, 0.01, 0.004);
    auto rec = chain_recurrent_set(graph);
    ASSERT_FALSE(rec.empty());
    for (std::size_t u : rec) {
        EXPECT_LT(graph.net()[u].value(), 0.02);
    }
    Oracle oracle(sys, 0.01, 0.004);
    EXPECT_EQ(rec, oracle.recurrent());
}

TEST(ChainRecurrentSet, GoldenRotationRecursEverywhere)
{
    IfsSystem sys(SpaceDescriptor::circle(), {make_rotation(golden_angle)});
    ChainGraph graph(sys, 0.05, 0.02);
    auto rec = chain_recurrent_set(graph);
    EXPECT_EQ(rec.size(), graph.size());
    EXPECT_EQ(rec, Oracle(sys, 0.05, 0.02).recurrent());
}

TEST(ChainTransitive, Examples)
{
    EXPECT_FALSE(is_chain_transitive(identity_grid(2), 0.5, 0.25));
    IfsSystem rot(SpaceDescriptor::circle(), {make_rotation(golden_angle)});
    EXPECT_TRUE(is_chain_transitive(rot, 0.05, 0.02));
    EXPECT_TRUE(Oracle(rot, 0.05, 0.02).transitive());
    IfsSystem cycle(SpaceDescriptor::grid(6),
                    {make_permutation(GridPermutation::from_cycles(6, {{0, 1, 2, 3, 4, 5}}).image)});
    EXPECT_TRUE(is_chain_transitive(cycle, 0.5, 0.25));
    IfsSystem contraction(SpaceDescriptor::interval(), {make_affine(0.5, 0.0)});
    EXPECT_FALSE(is_chain_transitive(contraction, 0.01, 0.004));
}

TEST(ChainGraph, RandomGridsMatchOracle)
{
    CounterRng rng(stream_key(55, 0));
    std::size_t transitive = 0;
    for (int trial = 0; trial < 30; ++trial) {
        auto sys = ifs_test::mixed_grid_system(rng, trial);
        ChainGraph graph(sys, 0.5, 0.25);
        Oracle oracle(sys, 0.5, 0.25);
        EXPECT_EQ(chain_recurrent_set(graph), oracle.recurrent());
        EXPECT_EQ(is_chain_transitive(graph), oracle.transitive());
        transitive += oracle.transitive();
    }
    EXPECT_GT(transitive, 0u);
    EXPECT_LT(transitive, 30u);
}

TEST(ChainGraph, TransitiveMeansMutualReachability)
{
    IfsSystem rot(SpaceDescriptor::circle(), {make_rotation(golden_angle), make_rotation(1.0)});
    ChainGraph graph(rot, 0.05, 0.02);
    ASSERT_TRUE(is_chain_transitive(graph));
    CounterRng rng(stream_key(56, 0));
    for (int i = 0; i < 30; ++i) {
        auto a = graph.net()[static_cast<std::size_t>(rng.uniform() * graph.size())];
        auto b = graph.net()[static_cast<std::size_t>(rng.uniform() * graph.size())];
        EXPECT_TRUE(delta_chain_reachable(graph, rot, a, b, graph.size()).reachable);
        EXPECT_TRUE(delta_chain_reachable(graph, rot, b, a, graph.size()).reachable);
    }
}
