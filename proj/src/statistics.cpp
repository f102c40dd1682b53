#include "fiberlab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "fiberlab/numerics.hpp"
#include "fiberlab/rng.hpp"

namespace fiberlab {

namespace observables {

Observable z() {
    return {"z", [](std::span<const int>, double z) { return z; }, 1.0, 1.0, true};
}

Observable z_squared() {
    return {"z2", [](std::span<const int>, double z) { return z * z; }, 2.0, 1.0, true};
}

Observable constant(double c) {
    return {"one", [c](std::span<const int>, double) { return c; }, 0.0, std::abs(c), true};
}

Observable first_symbol() {
    // |x0 - y0| <= (N-1) [x0 != y0] <= (N-1) d_theta(x,y); constants for N = 2
    return {"x0", [](std::span<const int> x, double) { return static_cast<double>(x[0]); }, 1.0,
            1.0, false};
}

Observable first_symbol_times_z() {
    return {"x0z",
            [](std::span<const int> x, double z) { return static_cast<double>(x[0]) * z; }, 2.0,
            1.0, false};
}

Observable from_name(const std::string& name) {
    if (name == "z") return z();
    if (name == "z2") return z_squared();
    if (name == "one") return constant(1.0);
    if (name == "x0") return first_symbol();
    if (name == "x0z") return first_symbol_times_z();
    throw InvalidInput("unknown observable '" + name + "' (choose z, z2, one, x0, x0z)");
}

Observable combine(double a, const Observable& f, const Observable& g) {
    Observable out;
    out.name = std::to_string(a) + "*" + f.name + "+" + g.name;
    auto fe = f.eval, ge = g.eval;
    out.eval = [a, fe, ge](std::span<const int> x, double zz) { return a * fe(x, zz) + ge(x, zz); };
    out.lip_theta = std::abs(a) * f.lip_theta + g.lip_theta;
    out.sup = std::abs(a) * f.sup + g.sup;
    out.fiber_only = f.fiber_only && g.fiber_only;
    return out;
}

Observable compose_with_dynamics(const FiberSystem& sys, const Observable& psi) {
    Observable out;
    out.name = psi.name + "oF";
    auto pe = psi.eval;
    auto s = std::make_shared<const FiberSystem>(sys);
    out.eval = [pe, s](std::span<const int> x, double zz) {
        double gz = evaluate_G(*s, x, zz);
        return pe(x.subspan(1), gz);
    };
    const double theta = sys.base.theta;
    out.lip_theta =
        psi.lip_theta * (std::max(1.0 / theta, 1.0 / (1.0 - theta)) + sys.H + sys.alpha);
    out.sup = psi.sup;
    out.fiber_only = false;
    return out;
}

}  // namespace observables

namespace {

void require_positive(const LeafwiseMeasure& mu, const char* who) {
    for (const auto& entry : mu.entries)
        for (const Atom& a : entry)
            if (a.weight < 0.0)
                throw InvalidInput(std::string(who) + ": requires a positive measure");
}

}  // namespace

double integrate_observable(const Observable& f, const LeafwiseMeasure& mu) {
    const int rep_len = representative_length(mu.spec, mu.depth);
    double total = 0.0;
    std::vector<int> rep;
    for_each_word(mu.spec, mu.depth, [&](std::span<const int> w, std::uint64_t r, double m) {
        const AtomList& entry = mu.entries[r];
        if (entry.empty()) return;
        rep = representative(mu.spec, w, rep_len);
        double s = 0.0;
        for (const Atom& a : entry) s += a.weight * f.eval(rep, a.position);
        total += m * s;
    });
    return total;
}

CylinderFunction observable_marginal(const Observable& f, const LeafwiseMeasure& mu0) {
    require_positive(mu0, "observable_marginal");
    const int rep_len = representative_length(mu0.spec, mu0.depth);
    CylinderFunction out;
    out.depth = mu0.depth;
    out.values.resize(static_cast<Eigen::Index>(mu0.entries.size()));
    std::vector<int> rep;
    for_each_word(mu0.spec, mu0.depth, [&](std::span<const int> w, std::uint64_t r, double) {
        rep = representative(mu0.spec, w, rep_len);
        double s = 0.0;
        for (const Atom& a : mu0.entries[r]) s += a.weight * f.eval(rep, a.position);
        out.values(static_cast<Eigen::Index>(r)) = s;
    });
    return out;
}

LeafwiseMeasure weighted_leafwise(const Observable& f, const LeafwiseMeasure& mu0) {
    require_positive(mu0, "weighted_leafwise");
    const int rep_len = representative_length(mu0.spec, mu0.depth);
    LeafwiseMeasure out;
    out.spec = mu0.spec;
    out.space = mu0.space;
    out.depth = mu0.depth;
    out.entries.resize(mu0.entries.size());
    std::vector<int> rep;
    for_each_word(mu0.spec, mu0.depth, [&](std::span<const int> w, std::uint64_t r, double) {
        rep = representative(mu0.spec, w, rep_len);
        AtomList entry = mu0.entries[r];
        for (Atom& a : entry) a.weight *= f.eval(rep, a.position);
        normalize_atoms(entry);
        out.entries[r] = std::move(entry);
    });
    return out;
}

CorrelationSeries correlation_series(const FiberSystem& sys, const LeafwiseMeasure& mu0,
                                     const Observable& f, const Observable& g, int n_max,
                                     double compress_res, int threads) {
    if (mu0.depth < n_max + 1) {
        std::ostringstream os;
        os << "correlation: need depth >= " << (n_max + 1) << " for n_max = " << n_max
           << ", measure has depth " << mu0.depth;
        throw InvalidInput(os.str());
    }
    CorrelationSeries series;
    series.int_f_mu0 = integrate_observable(f, mu0);
    series.int_g_mu0 = integrate_observable(g, mu0);

    LeafwiseMeasure weighted = weighted_leafwise(f, mu0);
    LeafwiseMeasure plain = mu0;
    for (int n = 0; n <= n_max; ++n) {
        series.iterated.push_back(integrate_observable(g, weighted));
        series.g_on_iterated.push_back(integrate_observable(g, plain));
        if (n < n_max) {
            weighted = transfer_step(sys, weighted, compress_res, threads);
            plain = transfer_step(sys, plain, compress_res, threads);
        }
    }
    return series;
}

namespace {

// Correlations of the catalog systems have no transient, and deep tails sink
// into compression noise, so the fit runs over all lags above the floor
// (unlike the basis-gap fit, which uses the tail half). Sequences that vanish
// analytically (a constant observable on either side) are flagged degenerate:
// their measured values are pure discretization noise and carry no rate.
DecayReport fit_decay(std::vector<double> values, double xi, bool analytically_zero) {
    DecayReport report;
    report.values = std::move(values);
    report.bound_rate = xi;
    double top = 0.0;
    for (double v : report.values) top = std::max(top, v);
    if (analytically_zero || top < 1e-13) {
        report.degenerate = true;
        report.bound_passed = true;
        return report;
    }
    RateFit fit = fit_geometric_rate(report.values, 0,
                                     static_cast<int>(report.values.size()) - 1, 1e-13);
    report.fitted_rate = fit.ok ? fit.rate : 0.0;
    report.bound_passed = report.fitted_rate <= xi + 0.05;
    for (std::size_t n = 0; n < report.values.size(); ++n)
        report.prefactor_estimate = std::max(
            report.prefactor_estimate, report.values[n] / std::pow(xi, static_cast<double>(n)));
    return report;
}

}  // namespace

DecayReport correlation_sequence(const FiberSystem& sys, const LeafwiseMeasure& mu0,
                                 const Observable& f, const Observable& g, int n_max,
                                 double compress_res, double xi, int threads) {
    CorrelationSeries series = correlation_series(sys, mu0, f, g, n_max, compress_res, threads);
    std::vector<double> values(n_max + 1);
    for (int n = 0; n <= n_max; ++n)
        values[n] = std::abs(series.iterated[n] - series.int_g_mu0 * series.int_f_mu0);
    return fit_decay(std::move(values), xi, f.lip_theta == 0.0 || g.lip_theta == 0.0);
}

MonteCarloEstimate monte_carlo_correlation(const FiberSystem& sys, const Observable& f,
                                           const Observable& g, int n, int samples, int burn_in,
                                           std::uint64_t seed) {
    if (samples < 100) throw InvalidInput("monte_carlo_correlation: samples must be >= 100");
    if (burn_in < 50) throw InvalidInput("monte_carlo_correlation: burn_in must be >= 50");
    const SubshiftSpec& spec = sys.base;
    const int nsym = spec.alphabet_size;
    const int tail = representative_length(spec, 1);
    const int length = burn_in + n + tail;

    constexpr int kBatches = 20;
    const int per_batch = samples / kBatches;
    std::vector<double> batch_est;
    double sum_fg = 0.0, sum_f = 0.0, sum_g = 0.0;
    long total_count = 0;

    std::vector<double> row(nsym);
    std::vector<int> x(length);
    for (int b = 0; b < kBatches; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        double bfg = 0.0, bf = 0.0, bg = 0.0;
        for (int s = 0; s < per_batch; ++s) {
            for (int i = 0; i < nsym; ++i) row[i] = spec.stationary(i);
            x[0] = rng.sample(row);
            for (int j = 1; j < length; ++j) {
                for (int i = 0; i < nsym; ++i) row[i] = spec.stochastic(x[j - 1], i);
                x[j] = rng.sample(row);
            }
            double z = sys.space.kind() == FiberSpace::Kind::Interval
                           ? rng.uniform(sys.space.lo(), sys.space.hi())
                           : static_cast<double>(rng.uniform_int(sys.space.point_count()));
            std::span<const int> xs(x);
            for (int j = 0; j < burn_in; ++j) z = evaluate_G(sys, xs.subspan(j), z);
            double fv = f.eval(xs.subspan(burn_in), z);
            double zg = z;
            for (int j = 0; j < n; ++j) zg = evaluate_G(sys, xs.subspan(burn_in + j), zg);
            double gv = g.eval(xs.subspan(burn_in + n), zg);
            bfg += fv * gv;
            bf += fv;
            bg += gv;
        }
        sum_fg += bfg;
        sum_f += bf;
        sum_g += bg;
        total_count += per_batch;
        batch_est.push_back(bfg / per_batch - (bf / per_batch) * (bg / per_batch));
    }

    MonteCarloEstimate out;
    out.estimate =
        sum_fg / total_count - (sum_f / total_count) * (sum_g / total_count);
    double mean = 0.0;
    for (double e : batch_est) mean += e;
    mean /= batch_est.size();
    double var = 0.0;
    for (double e : batch_est) var += (e - mean) * (e - mean);
    var /= (batch_est.size() - 1);
    out.stderr_ = std::sqrt(var / batch_est.size());
    return out;
}

ThetaMembershipReport theta_membership(const Observable& f, const LeafwiseMeasure& mu0,
                                       double slack) {
    ThetaMembershipReport report;
    LeafwiseMeasure weighted = weighted_leafwise(f, mu0);
    report.weighted = strong_norm(weighted);
    report.finite = std::isfinite(report.weighted.strong);

    CylinderFunction marginal = observable_marginal(f, mu0);
    report.marginal_lip = theta_norm(mu0.spec, marginal).lip;
    double mu_weak = weak_norm(mu0);
    double mu_lip =
        lipschitz_constant(mu0, mu0.entries.size() <= 256 ? LipMode::Exact : LipMode::Sampled);
    report.marginal_lip_bound =
        f.lip_theta * mu_weak + std::max(f.lip_theta, f.sup) * mu_lip + slack;
    report.marginal_bound_ok = report.marginal_lip <= report.marginal_lip_bound;
    return report;
}

}  // namespace fiberlab
