#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <vector>

#include "dqmpc/potential_fields.hpp"

using dqmpc::AnomalyLog;
using dqmpc::ObstacleView;
using dqmpc::PotentialConfig;
using dqmpc::Vec3;

TEST_CASE("repulsion magnitude has the hyperbolic shape") {
    PotentialConfig p;  // d_min 0.5, d_safe 3, k_rep 1, f_cap 1e6

    CHECK(dqmpc::f_hyp(p.d_safe, p) == 0.0);
    CHECK(dqmpc::f_hyp(p.d_safe + 0.1, p) == 0.0);
    CHECK(dqmpc::f_hyp(50.0, p) == 0.0);

    CHECK(dqmpc::f_hyp(p.d_min, p) == p.f_cap);
    CHECK(dqmpc::f_hyp(0.1, p) == p.f_cap);
    CHECK(dqmpc::f_hyp(0.0, p) == p.f_cap);

    // Two interior points, evaluated by hand: 1/(d-0.5) - 1/2.5.
    CHECK(dqmpc::f_hyp(1.75, p) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(dqmpc::f_hyp(1.25, p) == doctest::Approx(14.0 / 15.0).epsilon(1e-12));

    // Continuous approach to zero at the outer edge.
    CHECK(dqmpc::f_hyp(p.d_safe - 1e-9, p) < 1e-6);
}

TEST_CASE("repulsion never increases with distance") {
    PotentialConfig p;
    p.f_cap = 20.0;
    double prev = p.f_cap + 1.0;
    for (int i = 0; i <= 2000; ++i) {
        const double d = 0.4 + i * (3.2 - 0.4) / 2000.0;
        const double f = dqmpc::f_hyp(d, p);
        CHECK(f <= prev + 1e-15);
        CHECK(f <= p.f_cap);
        CHECK(f >= 0.0);
        prev = f;
    }
}

TEST_CASE("angular field reuses the shape on squared differences") {
    PotentialConfig p;  // theta_safe 0.5
    CHECK(dqmpc::f_hyp_angle(0.25, p) == 0.0);
    CHECK(dqmpc::f_hyp_angle(0.3, p) == 0.0);
    CHECK(dqmpc::f_hyp_angle(0.0, p) == p.f_cap);
    // q = (theta_safe/2)^2 = 0.0625: 1/0.0625 - 1/0.25 = 12.
    CHECK(dqmpc::f_hyp_angle(0.0625, p) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("repulsive force points away with the scalar magnitude") {
    PotentialConfig p;
    const Vec3 f = dqmpc::repulsive_force(Vec3(2.0, 0.0, 0.0), Vec3::Zero(), p);
    CHECK(f.x() == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
    CHECK(f.y() == 0.0);
    CHECK(f.z() == 0.0);

    // Swapping the roles negates the force exactly.
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 a(d(gen), d(gen), d(gen));
        const Vec3 b(d(gen), d(gen), d(gen));
        const Vec3 fab = dqmpc::repulsive_force(a, b, p);
        const Vec3 fba = dqmpc::repulsive_force(b, a, p);
        CHECK((fab + fba).norm() <= 1e-15 * std::max(1.0, fab.norm()));
    }

    CHECK(dqmpc::repulsive_force(Vec3(10.0, 0.0, 0.0), Vec3::Zero(), p).norm() == 0.0);
}

TEST_CASE("coincident points fall back to +x and are logged") {
    PotentialConfig p;
    p.f_cap = 7.0;
    AnomalyLog log;
    const Vec3 f = dqmpc::repulsive_force(Vec3(1.0, 2.0, 3.0), Vec3(1.0, 2.0, 3.0), p, &log);
    CHECK(f.x() == 7.0);
    CHECK(f.y() == 0.0);
    CHECK(f.z() == 0.0);
    REQUIRE(log.notes.size() == 1);
}

TEST_CASE("the field can push but never pull") {
    PotentialConfig p;
    p.f_cap = 100.0;
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> d(-4.0, 4.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 own(d(gen), d(gen), d(gen));
        const Vec3 obs(d(gen), d(gen), d(gen));
        const Vec3 f = dqmpc::repulsive_force(own, obs, p);
        CHECK(f.dot(own - obs) >= 0.0);
    }
}

TEST_CASE("no obstacles means zero forces over the whole horizon") {
    PotentialConfig p;
    std::vector<Vec3> own(6, Vec3(1.0, 1.0, 5.0));
    const auto forces = dqmpc::horizon_forces(own, {}, p);
    REQUIRE(forces.size() == 6);
    for (const Vec3& f : forces) CHECK(f.norm() == 0.0);
}

TEST_CASE("an obstacle without a trajectory holds its instantaneous force") {
    PotentialConfig p;
    std::vector<Vec3> own;
    for (int k = 0; k < 5; ++k) own.push_back(Vec3(1.0 + 0.2 * k, 0.0, 5.0));

    ObstacleView obs;
    obs.kind = ObstacleView::Kind::static_obstacle;
    obs.current_position = Vec3(0.0, 0.0, 5.0);

    const auto forces = dqmpc::horizon_forces(own, {obs}, p);
    const Vec3 f0 = dqmpc::repulsive_force(own[0], obs.current_position, p);
    REQUIRE(forces.size() == 5);
    for (const Vec3& f : forces) CHECK((f - f0).norm() == 0.0);
}

TEST_CASE("a neighbor trajectory is evaluated step against step") {
    PotentialConfig p;
    std::vector<Vec3> own = {Vec3(2.0, 0.0, 5.0), Vec3(1.8, 0.0, 5.0), Vec3(1.6, 0.0, 5.0)};

    ObstacleView nb;
    nb.kind = ObstacleView::Kind::neighbor_agent;
    nb.current_position = Vec3::Zero();
    nb.horizon_positions = std::vector<Vec3>{Vec3(0.0, 0.0, 5.0), Vec3(0.0, 0.2, 5.0),
                                             Vec3(0.0, 0.4, 5.0)};

    const auto forces = dqmpc::horizon_forces(own, {nb}, p);
    REQUIRE(forces.size() == 3);
    for (int k = 0; k < 3; ++k) {
        const Vec3 expected = dqmpc::repulsive_force(own[k], (*nb.horizon_positions)[k], p);
        CHECK((forces[k] - expected).norm() == 0.0);
    }
}

TEST_CASE("forces from multiple obstacles add") {
    PotentialConfig p;
    std::vector<Vec3> own = {Vec3(1.0, 0.5, 5.0), Vec3(1.1, 0.5, 5.0)};

    ObstacleView a;
    a.current_position = Vec3(0.0, 0.0, 5.0);
    ObstacleView b;
    b.current_position = Vec3(2.0, 1.0, 5.0);
    b.horizon_positions = std::vector<Vec3>{Vec3(2.0, 1.0, 5.0), Vec3(2.0, 0.9, 5.0)};

    const auto fa = dqmpc::horizon_forces(own, {a}, p);
    const auto fb = dqmpc::horizon_forces(own, {b}, p);
    const auto fab = dqmpc::horizon_forces(own, {a, b}, p);
    for (int k = 0; k < 2; ++k) {
        CHECK((fab[k] - (fa[k] + fb[k])).norm() <= 1e-15);
    }
}

TEST_CASE("malformed horizon inputs are rejected") {
    PotentialConfig p;
    CHECK_THROWS_AS(dqmpc::horizon_forces({}, {}, p), std::invalid_argument);

    std::vector<Vec3> own(4, Vec3(1.0, 0.0, 5.0));
    ObstacleView nb;
    nb.horizon_positions = std::vector<Vec3>{Vec3::Zero(), Vec3::Zero()};  // wrong length
    CHECK_THROWS_AS(dqmpc::horizon_forces(own, {nb}, p), std::invalid_argument);
}

TEST_CASE("config validation rejects inconsistent parameters") {
    auto broken = [](auto&& mutate) {
        PotentialConfig p;
        mutate(p);
        return p;
    };
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.d_min = 3.5; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.d_min = 0.0; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.k_rep = 0.0; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.f_cap = -1.0; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.theta_safe = 0.0; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.k_s = -0.1; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.k_tang = -1.0; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.d_band = 0.0; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.omega_t_min_scale = 0.0; }).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(broken([](PotentialConfig& p) { p.omega_t_min_scale = 1.5; }).validate(),
                    std::invalid_argument);
    CHECK_NOTHROW(PotentialConfig{}.validate());
}
