#include <doctest.h>

#include <numbers>
#include <random>

#include "kacward/geometry.hpp"
#include "oracles.hpp"

using namespace kacward;

TEST_CASE("directed edge indexing")
{
    CHECK(reversed(6) == 7);
    CHECK(reversed(7) == 6);
    CHECK(undirected(7) == 3);
    CHECK(directed_of(3) == 6);
    CHECK(directed_of(3, true) == 7);

    const PlanarGraph g = oracle::four_cycle();
    CHECK(g.tail(0) == 0);
    CHECK(g.head(0) == 1);
    CHECK(g.tail(1) == 1);
    CHECK(g.head(1) == 0);
    CHECK(g.num_directed() == 8);
    CHECK(g.degree(0) == 2);
    CHECK(g.find_edge(3, 0) == 3);
    CHECK(g.find_edge(0, 2) == -1);
}

TEST_CASE("turning angles")
{
    const double pi = std::numbers::pi;
    CHECK(turning_angle(Point(1, 0), Point(1, 0)) == 0.0);
    CHECK(turning_angle(Point(1, 0), Point(0, 1)) == doctest::Approx(pi / 2));
    CHECK(turning_angle(Point(1, 0), Point(0, -1)) == doctest::Approx(-pi / 2));
    CHECK(turning_angle(Point(1, 0), Point(-1, 0)) == pi);
    CHECK(turning_angle(Point(0, -1), Point(0, 1)) == pi);
    CHECK_THROWS_AS(turning_angle(Point(0, 0), Point(1, 0)), Error);

    const PlanarGraph g = oracle::four_cycle();
    for (int d = 0; d < g.num_directed(); ++d)
        CHECK(turning_angle(g, d, reversed(d)) == pi);
    // counterclockwise around the square: left turns
    CHECK(turning_angle(g, 0, 2) == doctest::Approx(pi / 2));
    CHECK(turning_angle(g, 3, 1) == doctest::Approx(-pi / 2));
}

TEST_CASE("validation reports crossings and rejects degenerate embeddings")
{
    const PlanarGraph k4 = oracle::k4_with_crossing();
    REQUIRE(k4.crossings().size() == 1);
    CHECK(k4.crossings()[0] == std::pair<int, int>(4, 5));
    CHECK(k4.crosses(4, 5));
    CHECK(k4.crosses(5, 4));
    CHECK_FALSE(k4.crosses(0, 1));
    CHECK(count_crossings(k4) == 1);
    CHECK(count_crossings(k4, 0b110000) == 1);
    CHECK(count_crossings(k4, 0b011111) == 0);

    SUBCASE("overlap")
    {
        CHECK_THROWS_AS(PlanarGraph({{0, 0}, {2, 0}, {1, 0}, {3, 0}}, {{0, 1}, {2, 3}}), Error);
    }
    SUBCASE("vertex inside an edge")
    {
        CHECK_THROWS_AS(PlanarGraph({{0, 0}, {2, 0}, {1, 0}, {1, 1}}, {{0, 1}, {2, 3}}), Error);
    }
    SUBCASE("coinciding vertices")
    {
        CHECK_THROWS_AS(PlanarGraph({{0, 0}, {0, 0}, {1, 1}}, {{0, 2}}), Error);
    }
    SUBCASE("loop edge")
    {
        try {
            PlanarGraph({{0, 0}, {1, 0}}, {{0, 0}});
            FAIL("expected an error");
        } catch (const Error& err) {
            CHECK(err.kind() == ErrorKind::invalid_edge);
        }
    }
    SUBCASE("missing vertex")
    {
        CHECK_THROWS_AS(PlanarGraph({{0, 0}, {1, 0}}, {{0, 2}}), Error);
    }
    SUBCASE("parallel edges")
    {
        CHECK_THROWS_AS(PlanarGraph({{0, 0}, {1, 0}}, {{0, 1}, {1, 0}}), Error);
    }
}

TEST_CASE("crossing registry matches an all-pairs scan on random drawings")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const PlanarGraph g = oracle::random_graph(rng, 9, 16, true);
        std::vector<std::pair<int, int>> expected;
        for (int a = 0; a < g.num_edges(); ++a)
            for (int b = a + 1; b < g.num_edges(); ++b) {
                const auto& e = g.edge(a);
                const auto& f = g.edge(b);
                if (!oracle::share_vertex(e, f) &&
                    oracle::segments_cross(g.vertex(e[0]), g.vertex(e[1]), g.vertex(f[0]), g.vertex(f[1])))
                    expected.emplace_back(a, b);
            }
        CHECK(g.crossings() == expected);
    }
}

TEST_CASE("out-edges are sorted and consistent")
{
    const PlanarGraph g = oracle::k4_with_crossing();
    CHECK(g.max_degree() == 3);
    for (int v = 0; v < g.num_vertices(); ++v) {
        const auto out = g.out_edges(v);
        CHECK(std::is_sorted(out.begin(), out.end()));
        for (int d : out)
            CHECK(g.tail(d) == v);
    }
}

TEST_CASE("subgraph keeps vertices and filters crossings")
{
    const PlanarGraph k4 = oracle::k4_with_crossing();
    const std::vector<int> keep{0, 1, 2, 3, 4};
    const PlanarGraph sub = k4.subgraph(keep);
    CHECK(sub.num_vertices() == 4);
    CHECK(sub.num_edges() == 5);
    CHECK_FALSE(sub.has_crossings());
    const std::vector<int> diagonals{5, 4};
    const PlanarGraph cross = k4.subgraph(diagonals);
    CHECK(cross.crossings().size() == 1);
    CHECK(cross.edge(0) == k4.edge(5));
}

TEST_CASE("modified graph replaces e and g by half-edges")
{
    const PlanarGraph g = oracle::four_cycle();
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 0.3);

    const ModifiedGraph m = modify_graph(g, x, 0, 2);
    CHECK(m.graph.num_edges() == 4);
    CHECK(m.graph.num_vertices() == 6);
    CHECK(m.weights[m.half_in] == doctest::Approx(0.3));
    CHECK(m.weights[m.half_out] == 1.0);
    CHECK(m.graph.vertex(m.mid_in) == g.midpoint(0));
    CHECK(m.graph.vertex(m.mid_out) == g.midpoint(2));

    const ModifiedGraph back = modify_graph(g, x, 0, 1);
    CHECK(back.half_in == back.half_out);
    const ModifiedGraph same = modify_graph(g, x, 0, 0);
    CHECK(same.mid_in == same.mid_out);
}

TEST_CASE("turning angles are antisymmetric modulo 2 pi")
{
    std::mt19937_64 rng(13);
    const PlanarGraph g = oracle::random_graph(rng, 10, 20, true);
    for (int v = 0; v < g.num_vertices(); ++v)
        for (int a : g.out_edges(v))
            for (int b : g.out_edges(v)) {
                if (a == b)
                    continue;
                const int into = reversed(a);  // arrives at v
                const double there = turning_angle(g, into, b);
                const double back = turning_angle(g, reversed(b), a);
                CHECK(std::abs(std::polar(1.0, there + back) - 1.0) < 1e-12);
            }
}

TEST_CASE("corner angles of a convex face")
{
    // around the unit square counterclockwise, e1 into vertex 1 then e2 out of it
    const PlanarGraph g = oracle::four_cycle();
    const int e1 = 0, e2 = 2;
    CHECK(turning_angle(g, e1, e2) + turning_angle(g, e2, reversed(e1)) == doctest::Approx(std::numbers::pi));
    const PlanarGraph hex = oracle::hexagon();
    CHECK(turning_angle(hex, 0, 2) + turning_angle(hex, 2, 1) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("crossing counts survive rigid motions")
{
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        const PlanarGraph g = oracle::random_graph(rng, 9, 18, true);
        const Point shift(3.7, -1.2);
        const Point turn = std::polar(1.0, 0.3 + trial);
        std::vector<Point> moved;
        for (const Point& p : g.vertices())
            moved.push_back(turn * p + shift);
        const PlanarGraph h(moved, g.edges());
        CHECK(count_crossings(h) == count_crossings(g));
    }
    const PlanarGraph diagonals({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, {{0, 1}, {2, 3}});
    CHECK(count_crossings(diagonals) == 1);
    CHECK(count_crossings(oracle::four_cycle()) == 0);
}
