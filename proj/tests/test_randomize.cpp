#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "greclab/ising.hpp"
#include "greclab/qsim.hpp"
#include "greclab/randomize.hpp"

using namespace greclab;

namespace {

RandomizationPlan default_plan(std::uint64_t seed = 42) {
    RandomizationPlan p;
    p.strategy = RandomizeStrategy::EquipSingles;
    p.n_g = 10;
    p.delta = 0.1;
    p.range_mode = ThetaRange::Positive;
    p.n_r = 9;
    p.seed = seed;
    return p;
}

Circuit base_at(double lam) { return build_ground_state_circuit(IsingSpec::for_lambda(lam)); }

double noisy_mean_z(const Circuit& c, const NoiseModel& noise) {
    return expect_mean_z(apply_circuit(DensityMatrix::zero_state(c.width), c, noise));
}

}  // namespace

TEST_CASE("equip-singles census matches the benchmark circuit") {
    const auto members = generate_ensemble(base_at(1.5), default_plan());
    REQUIRE(members.size() == 9);
    for (const auto& m : members) {
        CHECK(m.positions.size() == 10);
        CHECK(m.thetas.size() == 10);  // 30 scalar parameters
        for (const auto& th : m.thetas)
            for (double v : th) {
                CHECK(v >= 0.0);
                CHECK(v <= 0.1);
            }
    }
}

TEST_CASE("slot-count mismatch is rejected") {
    RandomizationPlan plan = default_plan();
    plan.n_g = 7;
    CHECK_THROWS_AS(generate_ensemble(base_at(1.5), plan), std::invalid_argument);
}

TEST_CASE("delta = 0 reproduces the original circuit") {
    RandomizationPlan plan = default_plan();
    plan.delta = 0.0;
    const auto members = generate_ensemble(base_at(1.5), plan);

    NoiseModel noise;
    noise.p1 = 0.004;
    noise.p2 = 0.02;
    noise.coherent_eps = 0.05;

    for (double lam : {1.0, 1.9, 3.2}) {
        const Circuit base = base_at(lam);
        const double base_noisy = noisy_mean_z(base, noise);
        for (const auto& m : members) {
            const Circuit realized = realize_member(base, m, plan);
            const MatrixC du = circuit_unitary(realized) - circuit_unitary(base);
            CHECK(du.cwiseAbs().maxCoeff() < 1e-12);
            CHECK(noisy_mean_z(realized, noise) == doctest::Approx(base_noisy).epsilon(1e-14));
        }
    }
}

TEST_CASE("single pi rotation on one slot matches a hand-spliced circuit") {
    RandomizationPlan plan = default_plan();
    plan.n_r = 1;
    const Circuit base = base_at(2.0);
    auto members = generate_ensemble(base, plan);
    EnsembleMember m = members[0];
    for (auto& th : m.thetas) th = {0.0, 0.0, 0.0};
    m.thetas[3] = {M_PI, 0.0, 0.0};

    const Circuit realized = realize_member(base, m, plan);

    Circuit expected = base;
    Gate aux = Gate::general_u(M_PI, 0.0, 0.0, m.positions[3].qubit);
    expected.gates.insert(expected.gates.begin() + m.positions[3].site + 1, aux);
    CHECK((circuit_unitary(realized) - circuit_unitary(expected)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("auxiliary gates are fixed across lambda") {
    const auto members = generate_ensemble(base_at(1.5), default_plan());
    const RandomizationPlan plan = default_plan();
    const Circuit a = realize_member(base_at(1.5), members[2], plan);
    const Circuit b = realize_member(base_at(2.0), members[2], plan);
    REQUIRE(a.gates.size() == b.gates.size());
    int aux_seen = 0;
    for (std::size_t i = 0; i < a.gates.size(); ++i) {
        if (a.gates[i].tag == kAuxTag) {
            ++aux_seen;
            CHECK(b.gates[i].tag == kAuxTag);
            CHECK(a.gates[i].params == b.gates[i].params);
        }
    }
    CHECK(aux_seen == 10);
    // base angles do differ
    CHECK(a.gates[0].params != b.gates[0].params);
}

TEST_CASE("tag integrity") {
    const RandomizationPlan plan = default_plan();
    const auto members = generate_ensemble(base_at(1.5), plan);
    for (const auto& m : members) {
        const Circuit realized = realize_member(base_at(2.5), m, plan);
        int tagged = 0;
        for (const auto& g : realized.gates) tagged += g.tag == kAuxTag ? 1 : 0;
        CHECK(tagged == plan.n_g);
    }
}

TEST_CASE("generation is reproducible and nested in n_r") {
    const auto a = generate_ensemble(base_at(1.5), default_plan(7));
    const auto b = generate_ensemble(base_at(1.5), default_plan(7));
    REQUIRE(a.size() == b.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        CHECK(a[r].thetas == b[r].thetas);
        for (std::size_t l = 0; l < a[r].positions.size(); ++l) {
            CHECK(a[r].positions[l].site == b[r].positions[l].site);
            CHECK(a[r].positions[l].qubit == b[r].positions[l].qubit);
        }
    }

    RandomizationPlan bigger = default_plan(7);
    bigger.n_r = 10;
    const auto c = generate_ensemble(base_at(1.5), bigger);
    REQUIRE(c.size() == 10);
    for (std::size_t r = 0; r < a.size(); ++r) CHECK(c[r].thetas == a[r].thetas);

    const auto d = generate_ensemble(base_at(1.5), default_plan(8));
    CHECK(d[0].thetas != a[0].thetas);
}

TEST_CASE("small-delta continuity under coherent noise") {
    NoiseModel noise;
    noise.coherent_eps = 0.02;
    const std::vector<double> grid = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5};

    auto max_deviation = [&](double delta) {
        RandomizationPlan plan = default_plan(11);
        plan.delta = delta;
        const auto members = generate_ensemble(base_at(1.5), plan);
        double dev = 0.0;
        for (double lam : grid) {
            const Circuit base = base_at(lam);
            const double base_val = noisy_mean_z(base, noise);
            for (const auto& m : members)
                dev = std::max(dev,
                               std::abs(noisy_mean_z(realize_member(base, m, plan), noise) - base_val));
        }
        return dev;
    };

    const double d20 = max_deviation(0.2);
    const double d10 = max_deviation(0.1);
    const double d05 = max_deviation(0.05);
    const double d00 = max_deviation(0.0);
    CHECK(d20 >= d10);
    CHECK(d10 >= d05);
    CHECK(d05 >= d00);
    CHECK(d00 < 1e-13);
}

TEST_CASE("random insertion stays within bounds and is deterministic") {
    RandomizationPlan plan = default_plan(3);
    plan.strategy = RandomizeStrategy::RandomInsert;
    plan.n_g = 6;
    const Circuit base = base_at(1.5);
    const auto members = generate_ensemble(base, plan);
    REQUIRE(members.size() == 9);
    for (const auto& m : members) {
        for (const auto& p : m.positions) {
            CHECK(p.site >= 0);
            CHECK(p.site <= static_cast<int>(base.gates.size()));
            CHECK(p.qubit >= 0);
            CHECK(p.qubit < base.width);
        }
        const Circuit realized = realize_member(base, m, plan);
        CHECK(realized.gates.size() == base.gates.size() + 6);
        int tagged = 0;
        for (const auto& g : realized.gates) tagged += g.tag == kAuxTag ? 1 : 0;
        CHECK(tagged == 6);
    }
    const auto again = generate_ensemble(base, plan);
    for (std::size_t r = 0; r < members.size(); ++r) CHECK(members[r].thetas == again[r].thetas);
}

TEST_CASE("ensemble manifest json round trip") {
    const RandomizationPlan plan = default_plan(5);
    const auto members = generate_ensemble(base_at(1.5), plan);
    const std::string text = ensemble_to_json(plan, members);

    RandomizationPlan plan2;
    std::vector<EnsembleMember> members2;
    ensemble_from_json(text, plan2, members2);
    CHECK(plan2.n_r == plan.n_r);
    CHECK(plan2.delta == plan.delta);
    CHECK(plan2.seed == plan.seed);
    REQUIRE(members2.size() == members.size());
    for (std::size_t r = 0; r < members.size(); ++r) {
        CHECK(members2[r].index == members[r].index);
        CHECK(members2[r].thetas == members[r].thetas);
    }
}
