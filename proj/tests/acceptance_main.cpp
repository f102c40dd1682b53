// Acceptance suite: every release criterion with its pinned tolerance, one
// PASS/FAIL line per criterion. Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "fiberlab/catalog.hpp"
#include "fiberlab/cli.hpp"
#include "fiberlab/ifs.hpp"
#include "fiberlab/lifting.hpp"
#include "fiberlab/serialize.hpp"

using namespace fiberlab;

namespace {

const double kDelta = std::pow(2.0, -12);

struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    template <class T>
    void expect_le(T value, T bound, const std::string& what) {
        if (!(value <= bound)) {
            std::ostringstream os;
            os << what << " (" << value << " > " << bound << ")";
            failures.push_back(os.str());
        }
    }
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- criteria ----

void c1_invariant_norms(Check& check) {
    auto sys = catalog::dyadic();
    auto result = invariant_measure(sys, 4, 12, kDelta, dirac(sys.space, 0.0));
    auto norms = strong_norm(result.measure);
    check.expect(norms.weak >= 1.0 - 1e-9 && norms.weak <= 1.0,
                 "weak norm outside [1-1e-9, 1]: " + format_double(norms.weak));
    check.expect(std::abs(norms.strong - 2.0) <= 1e-6,
                 "strong norm outside 2 +/- 1e-6: " + format_double(norms.strong));
}

void c2_dyadic_correlations(Check& check) {
    auto sys = catalog::dyadic();
    const int n_max = 10;
    auto mu0 = invariant_measure(sys, n_max + 1, 12, kDelta, dirac(sys.space, 0.0)).measure;
    auto gap = estimate_basis_gap(sys.base, 10, 8, 3, 7);
    double xi = paper_constants(sys, gap.r).xi;
    auto report =
        correlation_sequence(sys, mu0, observables::z(), observables::z(), n_max, kDelta, xi);
    for (int n = 0; n <= n_max; ++n) {
        double expected = std::pow(2.0, -n) / 12.0;
        double tol = std::max(0.02 * expected, n * kDelta);
        check.expect(std::abs(report.values[n] - expected) <= tol,
                     "C_" + std::to_string(n) + " off the closed form");
    }
    check.expect(report.fitted_rate >= 0.48 && report.fitted_rate <= 0.52,
                 "fitted rate outside [0.48, 0.52]: " + format_double(report.fitted_rate));
}

void c3_decay_rate_bounds(Check& check) {
    const std::vector<Observable> obs = {observables::z(), observables::z_squared(),
                                         observables::first_symbol_times_z()};
    for (const auto& named : catalog::all_systems()) {
        const auto& sys = named.system;
        const int n_max = 8;
        auto gap = estimate_basis_gap(sys.base, 10, 8, 3, 17);
        double xi = paper_constants(sys, gap.r).xi;
        auto mu0 =
            invariant_measure(sys, n_max + 1, 10, kDelta, dirac(sys.space, 0.0)).measure;
        for (const auto& f : obs)
            for (const auto& g : obs) {
                auto report = correlation_sequence(sys, mu0, f, g, n_max, kDelta, xi);
                if (report.degenerate) continue;
                check.expect_le(report.fitted_rate, xi + 0.05,
                                named.name + " " + f.name + "," + g.name + " rate above xi+0.05");
            }
    }
}

void c4_lipschitz_bounds(Check& check) {
    auto dyadic = catalog::dyadic();
    auto mu_d = invariant_measure(dyadic, 4, 12, kDelta, dirac(dyadic.space, 0.0)).measure;
    double slack = 2.0 * 12 * kDelta / std::pow(0.5, 3);
    double lip_d = lipschitz_constant(mu_d, LipMode::Exact);
    check.expect_le(lip_d, 0.05, "dyadic disintegration should be numerically constant");
    check.expect_le(lip_d, paper_constants(dyadic, 1.0).lip_bound + slack,
                    "dyadic Lipschitz bound violated");

    auto seq = catalog::sequence_affine();
    auto mu_s = invariant_measure(seq, 4, 12, kDelta, dirac(seq.space, 0.0)).measure;
    double lip_s = lipschitz_constant(mu_s, LipMode::Exact);
    check.expect(lip_s > 0.01, "sequence-affine disintegration should vary");
    check.expect_le(lip_s, paper_constants(seq, 1.0).lip_bound + slack,
                    "sequence-affine Lipschitz bound violated");
}

void c5_lasota_yorke(Check& check) {
    auto sys = catalog::dyadic();
    auto from_product = product_leafwise(sys.base, sys.space, dirac(sys.space, 0.0), 11);
    auto report = lasota_yorke_check(sys, from_product, 10, kDelta);
    for (const auto& row : report.rows) {
        double budget = row.j * kDelta + 1e-9;
        check.expect(row.iterate_margin >= -budget,
                     "m x delta_0 iterate margin at j=" + std::to_string(row.j));
        check.expect(row.step_margin >= -budget,
                     "m x delta_0 step margin at j=" + std::to_string(row.j));
    }
    for (int t = 0; t < 5; ++t) {
        auto mu = random_leafwise_in_v(sys.base, sys.space, 11, 9000 + t);
        auto r = lasota_yorke_check(sys, mu, 10, kDelta);
        for (const auto& row : r.rows) {
            double budget = row.j * kDelta + 1e-9;
            check.expect(row.iterate_margin >= -budget,
                         "random measure " + std::to_string(t) + " iterate margin at j=" +
                             std::to_string(row.j));
            check.expect(row.step_margin >= -budget,
                         "random measure " + std::to_string(t) + " step margin at j=" +
                             std::to_string(row.j));
        }
    }
}

void c6_equilibrium(Check& check) {
    auto sys = catalog::dyadic();
    auto gap = estimate_basis_gap(sys.base, 10, 8, 3, 23);
    for (int t = 0; t < 5; ++t) {
        auto mu = random_leafwise_in_v(sys.base, sys.space, 11, 5000 + t);
        auto report = equilibrium_rate(sys, mu, 10, 0.0, gap.r);
        if (report.degenerate) continue;
        check.expect_le(report.fitted_rate, report.beta1 + 0.05,
                        "trial " + std::to_string(t) + " rate above beta1+0.05");
    }
}

void c7_flat_metric(Check& check) {
    auto space = FiberSpace::interval(0.0, 1.0);
    Rng rng(31337);
    for (int t = 0; t < 200; ++t) {
        AtomList atoms;
        int n = 1 + rng.uniform_int(4);
        for (int i = 0; i < n; ++i) atoms.push_back({rng.uniform(), rng.symmetric()});
        auto mu = make_measure(space, std::move(atoms));
        int m = static_cast<int>(mu.atoms.size());
        double grid = m <= 2 ? 0.01 : 0.05;
        double lp = wk_norm(mu);
        double oracle = wk_oracle(mu, grid);
        check.expect(lp >= oracle - 1e-9 && lp - oracle <= m * grid + 1e-9,
                     "LP vs oracle disagreement at trial " + std::to_string(t));
    }
    for (int t = 0; t < 200; ++t) {
        AtomList a, b;
        int na = 1 + rng.uniform_int(5), nb = 1 + rng.uniform_int(5);
        for (int i = 0; i < na; ++i) a.push_back({rng.uniform(), rng.symmetric()});
        for (int i = 0; i < nb; ++i) b.push_back({rng.uniform(), rng.symmetric()});
        auto mu = make_measure(space, std::move(a));
        auto nu = make_measure(space, std::move(b));
        double c = rng.symmetric() * 2.0;
        check.expect(wk_norm(mu + nu) <= wk_norm(mu) + wk_norm(nu) + 1e-8,
                     "triangle inequality at trial " + std::to_string(t));
        check.expect(std::abs(wk_norm(c * mu) - std::abs(c) * wk_norm(mu)) <= 1e-8,
                     "homogeneity at trial " + std::to_string(t));
    }
}

void c8_marginal_intertwining(Check& check) {
    Rng rng(64);
    for (const auto& sys : {catalog::dyadic(), catalog::golden_affine()}) {
        for (int t = 0; t < 10; ++t) {
            WordIndex idx(sys.base, 5);
            LeafwiseMeasure mu;
            mu.spec = sys.base;
            mu.space = sys.space;
            mu.depth = 5;
            mu.entries.resize(idx.total(5));
            for (auto& e : mu.entries) {
                int n = 1 + rng.uniform_int(3);
                for (int i = 0; i < n; ++i) e.push_back({rng.uniform(), rng.symmetric()});
                normalize_atoms(e);
            }
            auto expected = perron_frobenius(sys.base, density(mu));
            auto actual = density(transfer_step(sys, mu, kDelta));
            double worst = (expected.values - actual.values).cwiseAbs().maxCoeff();
            check.expect_le(worst, 1e-12, "intertwining residual at trial " + std::to_string(t));
        }
    }
}

void c9_product_structure(Check& check) {
    for (const auto& ifs : {catalog::dyadic_ifs(), catalog::skewed_ifs()}) {
        auto sys = skew_product(ifs);
        auto mu0 = invariant_measure(sys, 4, 12, kDelta, dirac(sys.space, 0.0)).measure;
        auto sampled = chaos_game(ifs, 100000, 200, 101, kDelta);
        double worst = product_structure_check(sys, mu0, sampled);
        check.expect_le(worst, 0.03, "product structure defect");
    }
}

void c10_annealed(Check& check) {
    auto ifs = catalog::dyadic_ifs();
    auto sys = skew_product(ifs);
    const int n_max = 10;
    auto mu0 = invariant_measure(sys, n_max + 1, 12, kDelta, dirac(sys.space, 0.0)).measure;
    auto gap = estimate_basis_gap(sys.base, 10, 8, 3, 5);
    double xi = paper_constants(sys, gap.r).xi;
    auto report = annealed_correlation(ifs, sys, mu0, observables::z(), observables::z(), n_max,
                                       100000, 13, xi, kDelta);
    for (const auto& row : report.rows)
        check.expect(row.agree, "estimators disagree at n=" + std::to_string(row.n));
    check.expect(report.decay.bound_passed,
                 "annealed rate above xi+0.05: " + format_double(report.decay.fitted_rate));
}

void c11_lifting(Check& check) {
    auto sys = catalog::dyadic();
    const int n_max = 10, depth = 13;
    for (const auto& psi :
         {observables::z(), observables::z_squared(), observables::constant(0.7)}) {
        for (int n = 0; n <= n_max; n += 2) {
            auto pair = envelope(sys, psi, n, depth, 9);
            double bound = psi.lip_theta * std::pow(sys.alpha, n) +
                           2.0 * envelope_rep_slack(sys, psi, n, depth) + 1e-9;
            check.expect_le(pair.gap, bound,
                            "gap bound for " + psi.name + " at n=" + std::to_string(n));
        }
    }
    auto lifted = lifted_value(sys, observables::z(), n_max, depth);
    check.expect(std::abs(lifted.value - 0.5) <= std::pow(2.0, -n_max) + 1e-12,
                 "lifted value of z outside 1/2 +/- 2^-10");
    auto inv = invariance_check(sys, observables::z(), n_max, depth + 1);
    check.expect(inv.passed, "invariance check failed");
    auto marginal = lifted_value(sys, observables::first_symbol(), n_max, depth);
    check.expect(std::abs(marginal.value - 0.5) <= marginal.certified_error + 1e-9,
                 "marginal property failed");
}

void c12_determinism(Check& check) {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "fiberlab_acceptance";
    fs::create_directories(dir);
    const std::string cfg = std::string(FIBERLAB_SOURCE_DIR) + "/configs/dyadic.cfg";

    auto run_once = [&](const std::string& tag) {
        std::ostringstream out, err;
        int code = cli::run({"decay", "--config", cfg, "--nmax", "6", "--steps", "8", "--seed",
                             "7", "--json", (dir / (tag + ".json")).string(), "--csv",
                             (dir / (tag + ".csv")).string()},
                            out, err);
        check.expect(code == 0, "decay run exited " + std::to_string(code));
    };
    run_once("a");
    run_once("b");
    check.expect(slurp(dir / "a.json") == slurp(dir / "b.json"), "JSON outputs differ");
    check.expect(slurp(dir / "a.csv") == slurp(dir / "b.csv"), "CSV outputs differ");

    std::ostringstream o1, o2, e;
    cli::run({"wk-dist", "--a", "0:1,0.25:-0.5", "--b", "0.5:1"}, o1, e);
    cli::run({"wk-dist", "--a", "0:1,0.25:-0.5", "--b", "0.5:1"}, o2, e);
    check.expect(o1.str() == o2.str(), "wk-dist stdout differs");
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Check&)> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "invariant-measure norms (weak 1, strong 2)", 10.0, c1_invariant_norms},
        {2, "dyadic closed-form correlations 2^-n/12", 30.0, c2_dyadic_correlations},
        {3, "decay rates below xi + 0.05 across the catalog", 120.0, c3_decay_rate_bounds},
        {4, "Lipschitz disintegration bounds", 60.0, c4_lipschitz_bounds},
        {5, "Lasota-Yorke margin chain", 30.0, c5_lasota_yorke},
        {6, "equilibrium rates below beta1 + 0.05", 60.0, c6_equilibrium},
        {7, "flat-metric LP vs oracle and norm axioms", 60.0, c7_flat_metric},
        {8, "marginal intertwining at 1e-12", 60.0, c8_marginal_intertwining},
        {9, "IFS product structure within 0.03", 60.0, c9_product_structure},
        {10, "annealed estimators agree and decay", 120.0, c10_annealed},
        {11, "lifting gaps, value and invariance", 60.0, c11_lifting},
        {12, "byte-identical CLI outputs", 60.0, c12_determinism},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        Check check;
        auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > criterion.budget_s) {
            std::ostringstream os;
            os << "runtime " << seconds << "s over the " << criterion.budget_s << "s budget";
            check.failures.push_back(os.str());
        }
        if (check.failures.empty()) {
            std::printf("[PASS] C%-2d %s (%.1fs)\n", criterion.id, criterion.name, seconds);
        } else {
            ++failed;
            std::printf("[FAIL] C%-2d %s (%.1fs)\n", criterion.id, criterion.name, seconds);
            for (const auto& why : check.failures) std::printf("       - %s\n", why.c_str());
        }
        std::fflush(stdout);
    }
    if (failed == 0) std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return failed;
}
