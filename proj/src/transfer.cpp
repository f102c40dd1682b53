#include "fiberlab/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include "fiberlab/numerics.hpp"
#include "fiberlab/rng.hpp"

namespace fiberlab {

LeafwiseMeasure product_leafwise(const SubshiftSpec& spec, const FiberSpace& space,
                                 const FiniteSignedMeasure& nu, int depth) {
    if (depth < 1) throw InvalidInput("product_leafwise: depth must be >= 1");
    if (!(nu.space == space)) throw InvalidInput("product_leafwise: nu lives on another space");
    if (!is_probability(nu)) throw InvalidInput("product_leafwise: nu must be a probability");
    WordIndex idx(spec, depth);
    LeafwiseMeasure mu;
    mu.spec = spec;
    mu.space = space;
    mu.depth = depth;
    mu.entries.assign(idx.total(depth), nu.atoms);
    return mu;
}

CylinderFunction density(const LeafwiseMeasure& mu) {
    CylinderFunction phi;
    phi.depth = mu.depth;
    phi.values.resize(static_cast<Eigen::Index>(mu.entries.size()));
    for (std::size_t r = 0; r < mu.entries.size(); ++r)
        phi.values(static_cast<Eigen::Index>(r)) = total_mass(mu.entries[r]);
    return phi;
}

double global_mass(const LeafwiseMeasure& mu) {
    double total = 0.0;
    for_each_word(mu.spec, mu.depth, [&](std::span<const int>, std::uint64_t r, double m) {
        total += m * total_mass(mu.entries[r]);
    });
    return total;
}

FiniteSignedMeasure entry_measure(const LeafwiseMeasure& mu, std::uint64_t rank) {
    return FiniteSignedMeasure{mu.space, mu.entries[rank]};
}

LeafwiseMeasure lw_combine(const LeafwiseMeasure& a, double ca, const LeafwiseMeasure& b,
                           double cb) {
    if (a.depth != b.depth || a.entries.size() != b.entries.size() || !(a.space == b.space))
        throw InvalidInput("lw_combine: measures have different shapes");
    LeafwiseMeasure out;
    out.spec = a.spec;
    out.space = a.space;
    out.depth = a.depth;
    out.entries.resize(a.entries.size());
    for (std::size_t r = 0; r < a.entries.size(); ++r)
        out.entries[r] = linear_combination(a.entries[r], ca, b.entries[r], cb);
    return out;
}

LeafwiseMeasure relift(const LeafwiseMeasure& mu, int extra_depth) {
    LeafwiseMeasure cur = mu;
    for (int e = 0; e < extra_depth; ++e) {
        const int d = cur.depth + 1;
        WordIndex idx(cur.spec, d);
        LeafwiseMeasure next;
        next.spec = cur.spec;
        next.space = cur.space;
        next.depth = d;
        next.entries.resize(idx.total(d));
        // children of a parent word are contiguous in child rank order
        for_each_word(cur.spec, d, [&](std::span<const int> w, std::uint64_t r, double) {
            std::uint64_t parent = idx.rank(w.subspan(0, d - 1));
            next.entries[r] = cur.entries[parent];
        });
        cur = std::move(next);
    }
    return cur;
}

namespace {

void run_chunked(std::uint64_t total, int threads, const std::function<void(std::uint64_t, std::uint64_t)>& body) {
    if (threads <= 1 || total < 2) {
        body(0, total);
        return;
    }
    const int nt = std::min<std::uint64_t>(threads, total);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::uint64_t chunk = (total + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        std::uint64_t lo = t * chunk, hi = std::min(total, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

LeafwiseMeasure transfer_step(const FiberSystem& sys, const LeafwiseMeasure& mu,
                              double compress_res, int threads) {
    if (mu.depth < 2) throw InvalidInput("transfer_step: cannot coarsen below depth 1");
    if (compress_res < 0.0) throw InvalidInput("transfer_step: negative resolution");
    const SubshiftSpec& spec = mu.spec;
    const int n = spec.alphabet_size;
    const int k = mu.depth;
    WordIndex idx(spec, k);

    LeafwiseMeasure out;
    out.spec = spec;
    out.space = mu.space;
    out.depth = k - 1;
    out.entries.resize(idx.total(k - 1));

    // branch weights g_i(i.v) depend only on v0
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int v0 = 0; v0 < n; ++v0)
            if (spec.transition(i, v0)) jac(i, v0) = jacobian_weight(spec, i, v0);

    // first-symbol systems: one map per branch, zero representative error
    std::vector<FiberMap> branch_maps(n);
    if (sys.first_symbol_only) {
        for (int i = 0; i < n; ++i) {
            int w0 = i;  // singleton word {i}
            branch_maps[i] = fiber_map(sys, std::span<const int>(&w0, 1));
        }
    }

    const bool interval = mu.space.kind() == FiberSpace::Kind::Interval;
    const double lo = mu.space.lo(), hi = mu.space.hi();

    run_chunked(out.entries.size(), threads, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<int> v = idx.unrank(begin, k - 1);
        std::vector<int> iv(k);
        AtomList acc;
        for (std::uint64_t r = begin; r < end; ++r) {
            const int v0 = v[0];
            acc.clear();
            for (int i = 0; i < n; ++i) {
                if (spec.transition(i, v0) == 0) continue;
                const std::uint64_t in = idx.prepend_rank(i, r, v0, k - 1);
                const AtomList& src = mu.entries[in];
                const double w = jac(i, v0);
                FiberMap map;
                if (sys.first_symbol_only) {
                    map = branch_maps[i];
                } else {
                    iv[0] = i;
                    std::copy(v.begin(), v.end(), iv.begin() + 1);
                    map = fiber_map(sys, iv);
                }
                for (const Atom& a : src) {
                    double y = map(a.position);
                    if (interval) y = std::clamp(y, lo, hi);
                    acc.push_back({y, w * a.weight});
                }
            }
            normalize_atoms(acc);
            if (compress_res > 0.0) compress_atoms(mu.space, acc, compress_res);
            out.entries[r] = acc;
            if (r + 1 < end) next_word(spec, v);
        }
    });
    return out;
}

double weak_norm(const LeafwiseMeasure& mu) {
    double best = 0.0;
    for (const AtomList& entry : mu.entries) best = std::max(best, wk_norm(mu.space, entry));
    return best;
}

double lipschitz_constant(const LeafwiseMeasure& mu, LipMode mode) {
    const std::uint64_t m = mu.entries.size();
    if (m < 2) throw InvalidInput("lipschitz_constant: need at least two cylinders");
    WordIndex idx(mu.spec, mu.depth);
    const double theta = mu.spec.theta;

    auto pair_ratio = [&](std::uint64_t a, std::uint64_t b, std::span<const int> wa,
                          std::span<const int> wb) {
        double d = d_theta(theta, wa, wb);
        AtomList diff = linear_combination(mu.entries[a], 1.0, mu.entries[b], -1.0);
        return wk_norm(mu.space, diff) / d;
    };

    double best = 0.0;
    if (mode == LipMode::Exact) {
        if (m > 256)
            throw InvalidInput("lipschitz_constant: exact mode allows at most 256 words");
        std::vector<std::vector<int>> words(m);
        for (std::uint64_t r = 0; r < m; ++r) words[r] = idx.unrank(r, mu.depth);
        for (std::uint64_t a = 0; a < m; ++a)
            for (std::uint64_t b = a + 1; b < m; ++b)
                best = std::max(best, pair_ratio(a, b, words[a], words[b]));
    } else {
        constexpr std::uint64_t kPairBudget = 8192;
        Rng rng(0xD15A9B11C0DEULL);
        std::vector<int> wa(mu.depth), wb(mu.depth);
        for (std::uint64_t s = 0; s < kPairBudget; ++s) {
            std::uint64_t a = rng.bits() % m, b = rng.bits() % m;
            if (a == b) continue;
            idx.unrank(a, mu.depth, wa);
            idx.unrank(b, mu.depth, wb);
            best = std::max(best, pair_ratio(a, b, wa, wb));
        }
    }
    return best;
}

NormReport strong_norm(const LeafwiseMeasure& mu) {
    NormReport report;
    report.weak = weak_norm(mu);
    report.marginal_theta = theta_norm(mu.spec, density(mu)).norm;
    report.strong = report.weak + report.marginal_theta;
    report.lip_disint =
        lipschitz_constant(mu, mu.entries.size() <= 256 ? LipMode::Exact : LipMode::Sampled);
    report.truncation_note =
        std::pow(mu.spec.theta, mu.depth) / (1.0 - mu.spec.theta);
    return report;
}

std::uint64_t memory_cap_bytes() {
    if (const char* env = std::getenv("FIBERLAB_MEM_CAP")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v > 0) return static_cast<std::uint64_t>(v);
    }
    return 2ULL << 30;
}

std::uint64_t estimate_run_bytes(const SubshiftSpec& spec, int start_depth, int steps,
                                 std::size_t nu_atoms, double compress_res,
                                 const FiberSpace& space) {
    WordIndex idx(spec, start_depth);
    const double grid_atoms =
        (space.kind() == FiberSpace::Kind::Interval && compress_res > 0.0)
            ? space.diameter() / compress_res + 1.0
            : 1e18;
    constexpr double kAtomBytes = 16.0, kEntryBytes = 40.0;
    double worst = 0.0;
    for (int j = 0; j <= steps; ++j) {
        double words = static_cast<double>(idx.total(start_depth - j));
        double atoms = std::min(static_cast<double>(nu_atoms) *
                                    std::pow(static_cast<double>(spec.alphabet_size), j),
                                grid_atoms);
        worst = std::max(worst, words * (kEntryBytes + atoms * kAtomBytes));
    }
    // input and output of a step coexist
    return static_cast<std::uint64_t>(2.0 * worst);
}

InvariantResult invariant_measure(const FiberSystem& sys, int final_depth, int steps,
                                  double compress_res, const FiniteSignedMeasure& nu0,
                                  int threads, std::uint64_t mem_cap_bytes) {
    if (final_depth < 1) throw InvalidInput("invariant_measure: final depth must be >= 1");
    if (steps < 0) throw InvalidInput("invariant_measure: steps must be >= 0");
    const int start_depth = final_depth + steps;
    const std::uint64_t cap = mem_cap_bytes ? mem_cap_bytes : memory_cap_bytes();
    const std::uint64_t estimate = estimate_run_bytes(sys.base, start_depth, steps,
                                                      std::max<std::size_t>(nu0.atoms.size(), 1),
                                                      compress_res, sys.space);
    if (estimate > cap) {
        std::ostringstream os;
        os << "invariant_measure: estimated " << estimate << " bytes exceeds the cap of " << cap
           << " (depth " << start_depth << "); lower depth/steps or raise FIBERLAB_MEM_CAP";
        throw MemoryLimit(os.str());
    }

    LeafwiseMeasure mu = product_leafwise(sys.base, sys.space, nu0, start_depth);
    for (int j = 0; j < steps; ++j) mu = transfer_step(sys, mu, compress_res, threads);

    // fixed-point residual: relift by one symbol, apply one more step, compare
    LeafwiseMeasure probe = transfer_step(sys, relift(mu, 1), compress_res, threads);
    double residual = 0.0;
    for (std::size_t r = 0; r < mu.entries.size(); ++r) {
        AtomList diff = linear_combination(probe.entries[r], 1.0, mu.entries[r], -1.0);
        residual = std::max(residual, wk_norm(mu.space, diff));
    }

    InvariantResult result;
    result.measure = std::move(mu);
    result.residual = residual;
    result.residual_bound = 2.0 * std::pow(sys.alpha, steps) + steps * compress_res;
    result.steps = steps;
    return result;
}

LasotaYorkeReport lasota_yorke_check(const FiberSystem& sys, const LeafwiseMeasure& mu, int steps,
                                     double compress_res) {
    if (mu.depth < steps + 1)
        throw InvalidInput("lasota_yorke_check: depth too small for the requested steps");
    LasotaYorkeReport report;
    report.weak0 = weak_norm(mu);
    report.sup_phi1 = density(mu).values.cwiseAbs().maxCoeff();
    const double alpha = sys.alpha;

    LeafwiseMeasure cur = mu;
    double prev_weak = report.weak0;
    bool ok = true;
    for (int j = 1; j <= steps; ++j) {
        cur = transfer_step(sys, cur, compress_res, 1);
        LasotaYorkeRow row;
        row.j = j;
        row.weak = weak_norm(cur);
        row.iterate_bound = std::pow(alpha, j) * report.weak0 +
                            report.sup_phi1 / (1.0 - alpha) + j * compress_res;
        row.iterate_margin = row.iterate_bound - row.weak;
        row.step_margin = prev_weak + compress_res - row.weak;
        ok = ok && row.iterate_margin >= -1e-9 && row.step_margin >= -1e-9;
        prev_weak = row.weak;
        report.rows.push_back(row);
    }
    report.all_passed = ok;
    return report;
}

EquilibriumReport equilibrium_rate(const FiberSystem& sys, const LeafwiseMeasure& mu, int steps,
                                   double compress_res, double measured_r) {
    CylinderFunction phi = density(mu);
    if (std::abs(integral_m(mu.spec, phi)) > 1e-10)
        throw InvalidInput("equilibrium_rate: measure is not in V (density has nonzero average)");
    if (mu.depth < steps + 1)
        throw InvalidInput("equilibrium_rate: depth too small for the requested steps");

    EquilibriumReport report;
    report.weak_norms.push_back(weak_norm(mu));
    LeafwiseMeasure cur = mu;
    for (int j = 1; j <= steps; ++j) {
        cur = transfer_step(sys, cur, compress_res, 1);
        report.weak_norms.push_back(weak_norm(cur));
    }
    report.beta1 = std::max(std::sqrt(sys.alpha), std::sqrt(measured_r));

    double top = *std::max_element(report.weak_norms.begin(), report.weak_norms.end());
    if (top < 1e-13) {
        report.degenerate = true;  // nothing to fit; trivially within the bound
        report.passed = true;
        return report;
    }
    RateFit fit = fit_geometric_rate_tail(report.weak_norms, 1e-14);
    report.fitted_rate = fit.ok ? fit.rate : 1.0;
    report.margin = report.beta1 + 0.05 - report.fitted_rate;
    report.passed = report.margin >= 0.0;
    return report;
}

LeafwiseMeasure random_leafwise_in_v(const SubshiftSpec& spec, const FiberSpace& space, int depth,
                                     std::uint64_t seed, int atoms_per_entry) {
    Rng rng(seed);
    WordIndex idx(spec, depth);
    LeafwiseMeasure mu;
    mu.spec = spec;
    mu.space = space;
    mu.depth = depth;
    mu.entries.resize(idx.total(depth));
    const bool interval = space.kind() == FiberSpace::Kind::Interval;
    for (auto& entry : mu.entries) {
        for (int i = 0; i < atoms_per_entry; ++i) {
            double pos = interval ? rng.uniform(space.lo(), space.hi())
                                  : static_cast<double>(rng.uniform_int(space.point_count()));
            entry.push_back({pos, rng.symmetric()});
        }
        normalize_atoms(entry);
    }
    // cancel the average against a constant family, landing the density in ker Pi_sigma
    double mass = global_mass(mu);
    double anchor = interval ? 0.5 * (space.lo() + space.hi()) : 0.0;
    for (auto& entry : mu.entries) {
        entry.push_back({anchor, -mass});
        normalize_atoms(entry);
    }
    return mu;
}

PaperConstants paper_constants(const FiberSystem& sys, double measured_r) {
    const SubshiftSpec& spec = sys.base;
    const int n = spec.alphabet_size;
    PaperConstants c;
    c.alpha = sys.alpha;
    c.H = sys.H;
    c.N = n;
    c.theta = spec.theta;
    c.r = measured_r;

    // branch weight functions w -> g_i(i.w) depend only on w0: the
    // theta-Lipschitz constant is exact over depth-1 pairs (distance 1)
    for (int i = 0; i < n; ++i) {
        double lip = 0.0;
        for (int u = 0; u < n; ++u) {
            if (spec.transition(i, u) == 0) continue;
            for (int v = u + 1; v < n; ++v) {
                if (spec.transition(i, v) == 0) continue;
                lip = std::max(lip, std::abs(jacobian_weight(spec, i, u) -
                                             jacobian_weight(spec, i, v)));
            }
        }
        c.g_theta_max = std::max(c.g_theta_max, lip);
        c.g_theta_sum += lip;
    }

    c.C1 = std::max(c.H * c.theta + c.theta * n * c.g_theta_max, 2.0);
    c.C1_sum_reading = std::max(c.H * c.theta + c.theta * c.g_theta_sum, 2.0);
    c.beta1 = std::max(std::sqrt(c.alpha), std::sqrt(c.r));
    c.lambda0 = std::max(c.beta1, c.theta);
    c.xi = std::sqrt(c.lambda0);
    c.lip_bound = c.C1 / (1.0 - c.theta);
    return c;
}

}  // namespace fiberlab
