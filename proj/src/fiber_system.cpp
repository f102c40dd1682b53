#include "fiberlab/fiber_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fiberlab/rng.hpp"

namespace fiberlab {

FiberSystem make_first_symbol_affine(SubshiftSpec base, FiberSpace space, Eigen::VectorXd a,
                                     Eigen::VectorXd b) {
    const int n = base.alphabet_size;
    if (a.size() != n || b.size() != n)
        throw InvalidInput("first-symbol-affine: need one (a_i, b_i) per symbol");
    if (space.kind() != FiberSpace::Kind::Interval)
        throw InvalidInput("first-symbol-affine: needs an interval fiber space");
    double alpha = 0.0;
    for (int i = 0; i < n; ++i) {
        alpha = std::max(alpha, std::abs(a(i)));
        for (double z : {space.lo(), space.hi()}) {
            double y = a(i) * z + b(i);
            if (y < space.lo() - 1e-12 || y > space.hi() + 1e-12)
                throw InvalidInput("first-symbol-affine: branch maps outside the fiber space");
        }
    }
    if (!(alpha < 1.0)) throw InvalidInput("first-symbol-affine: branches must contract (G1)");
    FiberSystem sys;
    sys.base = std::move(base);
    sys.space = std::move(space);
    sys.dynamics = FirstSymbolAffine{std::move(a), std::move(b)};
    sys.alpha = alpha;
    sys.H = sys.space.diameter() / sys.base.theta;  // diam(K)/theta, the G2 bound
    sys.first_symbol_only = true;
    return sys;
}

FiberSystem make_sequence_affine(SubshiftSpec base, FiberSpace space, double a, double c0) {
    if (space.kind() != FiberSpace::Kind::Interval)
        throw InvalidInput("sequence-affine: needs an interval fiber space");
    if (!(std::abs(a) < 1.0)) throw InvalidInput("sequence-affine: |a| must be < 1 (G1)");
    if (c0 < 0.0) throw InvalidInput("sequence-affine: c0 must be nonnegative");
    const double cmax = c0 * (base.alphabet_size - 1);
    const double img_lo = std::min(a * space.lo(), a * space.hi());
    const double img_hi = std::max(a * space.lo(), a * space.hi()) + cmax;
    if (img_lo < space.lo() - 1e-12 || img_hi > space.hi() + 1e-12)
        throw InvalidInput("sequence-affine: image leaves the fiber space");
    FiberSystem sys;
    const double theta = base.theta;
    const int n = base.alphabet_size;
    sys.base = std::move(base);
    sys.space = std::move(space);
    sys.dynamics = SequenceAffine{a, c0};
    sys.alpha = std::abs(a);
    // |c(x) - c(y)| <= c0 (1-theta) (N-1) d_theta(x, y)
    sys.H = c0 * (1.0 - theta) * (n - 1);
    sys.first_symbol_only = false;
    return sys;
}

FiberSystem make_custom_table(SubshiftSpec base, FiberSpace space, Eigen::MatrixXi table) {
    if (space.kind() != FiberSpace::Kind::Finite)
        throw InvalidInput("custom-table: needs a finite fiber space");
    const int n = base.alphabet_size;
    const int pts = space.point_count();
    if (table.rows() != n || table.cols() != pts)
        throw InvalidInput("custom-table: table must be alphabet x points");
    for (int i = 0; i < n; ++i)
        for (int z = 0; z < pts; ++z)
            if (table(i, z) < 0 || table(i, z) >= pts)
                throw InvalidInput("custom-table: image index out of range");
    double alpha = 0.0, h = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int u = 0; u < pts; ++u)
            for (int v = u + 1; v < pts; ++v) {
                double d = space.distance(u, v);
                if (d > 0.0)
                    alpha = std::max(alpha, space.distance(table(i, u), table(i, v)) / d);
            }
        for (int j = i + 1; j < n; ++j)
            for (int z = 0; z < pts; ++z)
                h = std::max(h, space.distance(table(i, z), table(j, z)));
    }
    if (!(alpha < 1.0)) throw InvalidInput("custom-table: maps must contract (G1)");
    FiberSystem sys;
    sys.base = std::move(base);
    sys.space = std::move(space);
    sys.dynamics = CustomTable{std::move(table)};
    sys.alpha = alpha;
    sys.H = h;  // d_theta >= 1 whenever first symbols differ
    sys.first_symbol_only = true;
    return sys;
}

std::vector<int> representative(const SubshiftSpec& spec, std::span<const int> word, int length) {
    if (word.empty() || !is_admissible(spec, word))
        throw InvalidInput("representative: word must be admissible");
    std::vector<int> out(word.begin(), word.end());
    out.reserve(std::max<std::size_t>(word.size(), length));
    while (static_cast<int>(out.size()) < length) {
        int last = out.back();
        int next = -1;
        for (int s = 0; s < spec.alphabet_size; ++s)
            if (spec.transition(last, s)) {
                next = s;
                break;
            }
        if (next < 0) throw InvalidInput("representative: dead-end symbol (A has a zero row)");
        out.push_back(next);
    }
    return out;
}

int representative_length(const SubshiftSpec& spec, int depth) {
    // theta^L below 1e-18 makes the truncated tail invisible at double precision
    int tail = static_cast<int>(std::ceil(std::log(1e-18) / std::log(spec.theta)));
    return std::max(depth, tail);
}

double evaluate_G(const FiberSystem& sys, std::span<const int> x, double z) {
    if (x.empty()) throw InvalidInput("evaluate_G: empty symbol sequence");
    if (const auto* fsa = std::get_if<FirstSymbolAffine>(&sys.dynamics))
        return fsa->a(x[0]) * z + fsa->b(x[0]);
    if (const auto* sa = std::get_if<SequenceAffine>(&sys.dynamics)) {
        double c = 0.0, pw = 1.0;
        for (int xi : x) {
            c += pw * xi;
            pw *= sys.base.theta;
            if (pw < 1e-19) break;
        }
        return sa->a * z + sa->c0 * (1.0 - sys.base.theta) * c;
    }
    const auto& ct = std::get<CustomTable>(sys.dynamics);
    return static_cast<double>(ct.table(x[0], static_cast<int>(z + 0.5)));
}

FiberMap fiber_map(const FiberSystem& sys, std::span<const int> word) {
    if (word.empty() || !is_admissible(sys.base, word))
        throw InvalidInput("fiber_map: word must be admissible");
    FiberMap map;
    if (const auto* fsa = std::get_if<FirstSymbolAffine>(&sys.dynamics)) {
        map.slope = fsa->a(word[0]);
        map.intercept = fsa->b(word[0]);
        return map;
    }
    if (const auto* sa = std::get_if<SequenceAffine>(&sys.dynamics)) {
        auto rep = representative(sys.base, word,
                                  representative_length(sys.base, static_cast<int>(word.size())));
        map.slope = sa->a;
        map.intercept = evaluate_G(sys, rep, 0.0);
        return map;
    }
    const auto& ct = std::get<CustomTable>(sys.dynamics);
    map.table = &ct.table;
    map.table_row = word[0];
    return map;
}

std::vector<double> orbit(const FiberSystem& sys, const Cylinder& x_word, double z0, int steps) {
    if (x_word.depth() < steps)
        throw InvalidInput("orbit: word too short for the requested number of steps");
    auto rep = representative(sys.base, x_word.word,
                              representative_length(sys.base, x_word.depth()) + steps);
    std::vector<double> zs;
    zs.reserve(steps + 1);
    zs.push_back(z0);
    for (int j = 0; j < steps; ++j) {
        std::span<const int> tail(rep.data() + j, rep.size() - j);
        zs.push_back(evaluate_G(sys, tail, zs.back()));
    }
    return zs;
}

namespace {

std::vector<int> random_admissible_word(const SubshiftSpec& spec, int length, Rng& rng) {
    std::vector<int> w;
    w.reserve(length);
    std::vector<double> row(spec.alphabet_size);
    for (int i = 0; i < spec.alphabet_size; ++i) row[i] = spec.stationary(i);
    w.push_back(rng.sample(row));
    while (static_cast<int>(w.size()) < length) {
        for (int i = 0; i < spec.alphabet_size; ++i) row[i] = spec.stochastic(w.back(), i);
        w.push_back(rng.sample(row));
    }
    return w;
}

double random_point(const FiberSpace& space, Rng& rng) {
    if (space.kind() == FiberSpace::Kind::Interval) return rng.uniform(space.lo(), space.hi());
    return static_cast<double>(rng.uniform_int(space.point_count()));
}

}  // namespace

CertifyReport certify_constants(const FiberSystem& sys, int samples, std::uint64_t seed) {
    if (samples < 1) throw InvalidInput("certify_constants: samples must be >= 1");
    Rng rng(seed);
    const int len = representative_length(sys.base, 24);
    CertifyReport report;
    report.samples = samples;
    for (int s = 0; s < samples; ++s) {
        auto x = random_admissible_word(sys.base, len, rng);
        double z1 = random_point(sys.space, rng);
        double z2 = random_point(sys.space, rng);
        double dz = sys.space.distance(z1, z2);
        if (dz > 0.0) {
            double ratio = sys.space.distance(evaluate_G(sys, x, z1), evaluate_G(sys, x, z2)) / dz;
            if (ratio > sys.alpha + 1e-9) {
                std::ostringstream os;
                os << "G1 ratio " << ratio << " > alpha " << sys.alpha << " at z1=" << z1
                   << " z2=" << z2;
                throw CertificationFailure("certify_constants: G1 violated", os.str());
            }
            report.alpha_observed = std::max(report.alpha_observed, ratio);
        }

        auto y = random_admissible_word(sys.base, len, rng);
        double dx = d_theta(sys.base.theta, x, y);
        if (dx > 0.0) {
            double z = random_point(sys.space, rng);
            double ratio = sys.space.distance(evaluate_G(sys, x, z), evaluate_G(sys, y, z)) / dx;
            if (ratio > sys.H + 1e-9) {
                std::ostringstream os;
                os << "G2 ratio " << ratio << " > H " << sys.H << " at z=" << z;
                throw CertificationFailure("certify_constants: G2 violated", os.str());
            }
            report.H_observed = std::max(report.H_observed, ratio);
        }
    }
    return report;
}

}  // namespace fiberlab
