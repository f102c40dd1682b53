#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fiberlab/catalog.hpp"
#include "fiberlab/transfer.hpp"
#include "helpers.hpp"

using namespace fiberlab;
using namespace fiberlab::testing;

namespace {

LeafwiseMeasure random_leafwise(const SubshiftSpec& spec, const FiberSpace& space, int depth,
                                Rng& rng, int max_atoms = 3) {
    WordIndex idx(spec, depth);
    LeafwiseMeasure mu;
    mu.spec = spec;
    mu.space = space;
    mu.depth = depth;
    mu.entries.resize(idx.total(depth));
    for (auto& entry : mu.entries) {
        int n = 1 + rng.uniform_int(max_atoms);
        for (int i = 0; i < n; ++i)
            entry.push_back({rng.uniform(space.lo(), space.hi()), rng.symmetric()});
        normalize_atoms(entry);
    }
    return mu;
}

}  // namespace

TEST_CASE("product_leafwise") {
    auto sys = catalog::dyadic();
    auto nu = dirac(sys.space, 0.0);
    auto mu = product_leafwise(sys.base, sys.space, nu, 3);
    CHECK(mu.word_count() == 8);
    for (const auto& e : mu.entries) {
        REQUIRE(e.size() == 1);
        CHECK(e[0].position == 0.0);
        CHECK(e[0].weight == 1.0);
    }
    CHECK(global_mass(mu) == doctest::Approx(1.0));
    CHECK(lipschitz_constant(mu, LipMode::Exact) == 0.0);  // constant path

    auto bad = dirac(sys.space, 0.0, 0.5);
    CHECK_THROWS_AS(product_leafwise(sys.base, sys.space, bad, 3), InvalidInput);
}

TEST_CASE("transfer_step on the dyadic system") {
    auto sys = catalog::dyadic();
    auto mu = product_leafwise(sys.base, sys.space, dirac(sys.space, 0.0), 3);

    auto one = transfer_step(sys, mu, 0.0);
    CHECK(one.depth == 2);
    for (const auto& e : one.entries) {
        REQUIRE(e.size() == 2);
        CHECK(e[0].position == 0.0);
        CHECK(e[0].weight == doctest::Approx(0.5));
        CHECK(e[1].position == 0.5);
        CHECK(e[1].weight == doctest::Approx(0.5));
    }

    auto two = transfer_step(sys, one, 0.0);
    CHECK(two.depth == 1);
    for (const auto& e : two.entries) {
        REQUIRE(e.size() == 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(e[i].position == doctest::Approx(0.25 * i));
            CHECK(e[i].weight == doctest::Approx(0.25));
        }
    }

    CHECK_THROWS_AS(transfer_step(sys, two, 0.0), InvalidInput);

    // zero in, zero out
    LeafwiseMeasure zero = mu;
    for (auto& e : zero.entries) e.clear();
    auto zout = transfer_step(sys, zero, 0.0);
    for (const auto& e : zout.entries) CHECK(e.empty());
}

TEST_CASE("marginal intertwining and mass conservation") {
    Rng rng(101);
    for (const auto& named : {catalog::dyadic(), catalog::golden_affine(), catalog::markov_affine(),
                              catalog::sequence_affine()}) {
        for (int t = 0; t < 5; ++t) {
            auto mu = random_leafwise(named.base, named.space, 4, rng);
            double mass_before = global_mass(mu);
            auto phi_pushed = perron_frobenius(named.base, density(mu));

            for (double delta : {0.0, 1.0 / 1024.0}) {
                auto stepped = transfer_step(named, mu, delta);
                auto phi_after = density(stepped);
                REQUIRE(phi_after.values.size() == phi_pushed.values.size());
                for (Eigen::Index i = 0; i < phi_after.values.size(); ++i)
                    CHECK(phi_after.values(i) ==
                          doctest::Approx(phi_pushed.values(i)).epsilon(1e-12));
                CHECK(global_mass(stepped) == doctest::Approx(mass_before).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("linearity of the transfer step") {
    Rng rng(7);
    auto sys = catalog::sequence_affine();
    auto a = random_leafwise(sys.base, sys.space, 4, rng);
    auto b = random_leafwise(sys.base, sys.space, 4, rng);
    double ca = 1.7, cb = -0.6;
    auto combined = transfer_step(sys, lw_combine(a, ca, b, cb), 0.0);
    auto separate = lw_combine(transfer_step(sys, a, 0.0), ca, transfer_step(sys, b, 0.0), cb);
    for (std::size_t r = 0; r < combined.entries.size(); ++r) {
        AtomList diff = linear_combination(combined.entries[r], 1.0, separate.entries[r], -1.0);
        CHECK(wk_norm(sys.space, diff) <= 1e-10);
    }
}

TEST_CASE("weak contraction and probability preservation") {
    Rng rng(31);
    auto sys = catalog::markov_affine();
    for (int t = 0; t < 8; ++t) {
        auto mu = random_leafwise(sys.base, sys.space, 5, rng);
        double delta = (t % 2) ? 1.0 / 4096.0 : 0.0;
        auto stepped = transfer_step(sys, mu, delta);
        CHECK(weak_norm(stepped) <= weak_norm(mu) + delta + 1e-9);
    }

    // probability leafwise measure stays a probability family
    auto prob = product_leafwise(sys.base, sys.space, dirac(sys.space, 0.25), 5);
    auto stepped = transfer_step(sys, prob, 0.0);
    CHECK(global_mass(stepped) == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& e : stepped.entries) {
        for (const auto& atom : e) CHECK(atom.weight > 0.0);
    }
    auto phi = density(stepped);
    CHECK(integral_m(sys.base, phi) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transfer_step is independent of the thread count") {
    Rng rng(55);
    auto sys = catalog::sequence_affine();
    auto mu = random_leafwise(sys.base, sys.space, 6, rng);
    auto serial = transfer_step(sys, mu, 1.0 / 512.0, 1);
    auto parallel = transfer_step(sys, mu, 1.0 / 512.0, 4);
    REQUIRE(serial.entries.size() == parallel.entries.size());
    for (std::size_t r = 0; r < serial.entries.size(); ++r) {
        REQUIRE(serial.entries[r].size() == parallel.entries[r].size());
        for (std::size_t i = 0; i < serial.entries[r].size(); ++i) {
            CHECK(serial.entries[r][i].position == parallel.entries[r][i].position);
            CHECK(serial.entries[r][i].weight == parallel.entries[r][i].weight);
        }
    }
}

TEST_CASE("invariant measure of the dyadic system") {
    auto sys = catalog::dyadic();
    const double delta = std::pow(2.0, -12);
    auto result = invariant_measure(sys, 4, 12, delta, dirac(sys.space, 0.0));
    CHECK(result.measure.depth == 4);
    CHECK(result.residual <= 0.01);
    CHECK(result.residual <= result.residual_bound + 1e-12);

    // limit is m x Lebesgue: compare an entry against the exact grid Lebesgue
    AtomList lebesgue;
    for (int j = 0; j < 4096; ++j) lebesgue.push_back({j * delta, delta});
    normalize_atoms(lebesgue);
    for (std::size_t r = 0; r < result.measure.entries.size(); ++r) {
        AtomList diff = linear_combination(result.measure.entries[r], 1.0, lebesgue, -1.0);
        CHECK(wk_norm(sys.space, diff) <= 12 * delta + delta);
    }

    auto report = strong_norm(result.measure);
    CHECK(report.weak >= 1.0 - 1e-9);
    CHECK(report.weak <= 1.0 + 1e-12);
    CHECK(report.strong == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(report.strong == doctest::Approx(report.weak + report.marginal_theta));

    // n = 0 returns the start
    auto start = invariant_measure(sys, 3, 0, delta, dirac(sys.space, 0.0));
    CHECK(start.measure.depth == 3);
    CHECK(start.measure.entries[0].size() == 1);
}

TEST_CASE("invariant measure of an IFS skew product is a product") {
    // first-symbol-affine with Bernoulli base: fibers must all agree
    auto skew = bernoulli_skewed();
    Eigen::VectorXd a(2), b(2);
    a << 0.5, 0.5;
    b << 0.0, 0.5;
    auto sys = make_first_symbol_affine(skew, FiberSpace::interval(0.0, 1.0), a, b);
    auto result = invariant_measure(sys, 3, 10, 1.0 / 4096.0, dirac(sys.space, 0.0));
    const auto& ref = result.measure.entries[0];
    for (const auto& entry : result.measure.entries) {
        AtomList diff = linear_combination(entry, 1.0, ref, -1.0);
        CHECK(wk_norm(sys.space, diff) <= 1e-9);
    }
}

TEST_CASE("memory cap refusal") {
    auto sys = catalog::dyadic();
    CHECK_THROWS_AS(
        invariant_measure(sys, 20, 20, 1.0 / 4096.0, dirac(sys.space, 0.0), 1, 1 << 20),
        MemoryLimit);
}

TEST_CASE("lasota-yorke chain") {
    auto sys = catalog::dyadic();
    auto m_delta0 = product_leafwise(sys.base, sys.space, dirac(sys.space, 0.0), 11);
    auto report = lasota_yorke_check(sys, m_delta0, 10, 1.0 / 4096.0);
    CHECK(report.all_passed);
    CHECK(report.weak0 == doctest::Approx(1.0));
    CHECK(report.sup_phi1 == doctest::Approx(1.0));
    // hand evaluation at j = 1: 1.0 <= 0.5 * 1 + 1/(1-1/2) = 2.5
    CHECK(report.rows[0].iterate_bound == doctest::Approx(2.5).epsilon(1e-3));

    // zero measure: margins trivially nonnegative
    LeafwiseMeasure zero = m_delta0;
    for (auto& e : zero.entries) e.clear();
    auto zr = lasota_yorke_check(sys, zero, 5, 0.0);
    CHECK(zr.all_passed);

    // signed measure with identically zero density: pure Lemma 5.4 decay
    Rng rng(5);
    auto raw = random_leafwise(sys.base, sys.space, 8, rng);
    LeafwiseMeasure centered = raw;
    for (auto& e : centered.entries) {
        double mass = total_mass(e);
        e.push_back({0.5, -mass});  // cancel the entry mass
        normalize_atoms(e);
    }
    auto cr = lasota_yorke_check(sys, centered, 6, 0.0);
    double w0 = cr.weak0;
    for (const auto& row : cr.rows)
        CHECK(row.weak <= std::pow(sys.alpha, row.j) * w0 + 1e-9);
}

TEST_CASE("equilibrium rate") {
    auto sys = catalog::dyadic();
    auto a = product_leafwise(sys.base, sys.space, dirac(sys.space, 0.0), 11);
    auto b = product_leafwise(sys.base, sys.space, dirac(sys.space, 1.0), 11);
    auto v = lw_combine(a, 1.0, b, -1.0);

    auto gap = estimate_basis_gap(sys.base, 10, 8, 3, 21);
    auto report = equilibrium_rate(sys, v, 10, 0.0, gap.r);
    CHECK_FALSE(report.degenerate);
    // two constant families contract toward each other at exactly alpha
    CHECK(report.fitted_rate == doctest::Approx(0.5).epsilon(0.02));
    CHECK(report.passed);
    CHECK(report.weak_norms[0] == doctest::Approx(1.0));

    // measures outside V are rejected
    CHECK_THROWS_AS(equilibrium_rate(sys, a, 5, 0.0, gap.r), InvalidInput);
}

TEST_CASE("paper constants") {
    auto dyadic = catalog::dyadic();
    auto c = paper_constants(dyadic, 0.5);
    CHECK(c.g_theta_max == 0.0);  // uniform jacobians
    CHECK(c.C1 == doctest::Approx(2.0));
    CHECK(c.lip_bound == doctest::Approx(4.0));
    CHECK(c.beta1 == doctest::Approx(std::sqrt(0.5)));
    CHECK(c.lambda0 == doctest::Approx(std::sqrt(0.5)));
    CHECK(c.xi == doctest::Approx(std::pow(0.5, 0.25)).epsilon(1e-12));

    auto markov = catalog::markov_affine();
    auto cm = paper_constants(markov, 0.5);
    // hand oracle: g_0 takes values .7 (into 0) and .4 (into 1): lip .3;
    // g_1 takes .3 and .6: lip .3
    CHECK(cm.g_theta_max == doctest::Approx(0.3));
    CHECK(cm.g_theta_sum == doctest::Approx(0.6));
    CHECK(cm.C1 == doctest::Approx(2.0));  // 2*0.5 + 0.5*2*0.3 = 1.3 < 2
}

TEST_CASE("lipschitz constant of disintegrations") {
    auto dyadic = catalog::dyadic();
    const double delta = std::pow(2.0, -12);
    auto mu0 = invariant_measure(dyadic, 4, 12, delta, dirac(dyadic.space, 0.0));
    double lip_dyadic = lipschitz_constant(mu0.measure, LipMode::Exact);
    // all fibers are (numerically) the same Lebesgue grid
    CHECK(lip_dyadic <= 0.05);
    CHECK(lip_dyadic <= paper_constants(dyadic, 0.5).lip_bound);

    auto seq = catalog::sequence_affine();
    auto mu_seq = invariant_measure(seq, 4, 12, delta, dirac(seq.space, 0.0));
    double lip_seq = lipschitz_constant(mu_seq.measure, LipMode::Exact);
    CHECK(lip_seq > 0.01);  // fibers genuinely vary
    CHECK(lip_seq <= paper_constants(seq, 0.5).lip_bound + 0.1);

    // iterated regularity from a constant path stays under C1/(1-theta)
    auto mu = product_leafwise(seq.base, seq.space, dirac(seq.space, 0.0), 9);
    double bound = paper_constants(seq, 0.5).lip_bound;
    for (int n = 1; n <= 6; ++n) {
        mu = transfer_step(seq, mu, 0.0);
        if (mu.word_count() <= 256)
            CHECK(lipschitz_constant(mu, LipMode::Exact) <= bound + 0.1);
        else
            CHECK(lipschitz_constant(mu, LipMode::Sampled) <= bound + 0.1);
    }
}

TEST_CASE("relift copies entries onto refined cylinders") {
    auto sys = catalog::golden_affine();
    Rng rng(3);
    auto mu = random_leafwise(sys.base, sys.space, 3, rng);
    auto lifted = relift(mu, 2);
    CHECK(lifted.depth == 5);
    WordIndex idx5(sys.base, 5);
    WordIndex idx3(sys.base, 3);
    for (std::uint64_t r = 0; r < lifted.word_count(); ++r) {
        auto w = idx5.unrank(r, 5);
        auto parent = idx3.rank(std::span<const int>(w).subspan(0, 3));
        REQUIRE(lifted.entries[r].size() == mu.entries[parent].size());
        for (std::size_t i = 0; i < lifted.entries[r].size(); ++i)
            CHECK(lifted.entries[r][i].position == mu.entries[parent][i].position);
    }
}
