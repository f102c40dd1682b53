#include "fiberlab/measure.hpp"

#include <algorithm>
#include <cmath>

namespace fiberlab {

namespace {
constexpr double kMergeTol = 1e-12;
constexpr double kDropTol = 1e-15;
}  // namespace

void normalize_atoms(AtomList& atoms) {
    if (atoms.empty()) return;
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.position < b.position; });
    AtomList out;
    out.reserve(atoms.size());
    for (const Atom& a : atoms) {
        if (!out.empty() && a.position - out.back().position <= kMergeTol) {
            out.back().weight += a.weight;
        } else {
            out.push_back(a);
        }
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Atom& a) { return std::abs(a.weight) < kDropTol; }),
              out.end());
    atoms.swap(out);
}

FiniteSignedMeasure make_measure(FiberSpace space, AtomList atoms) {
    for (const Atom& a : atoms)
        if (!space.contains(a.position, 1e-12))
            throw InvalidInput("make_measure: atom position outside the fiber space");
    normalize_atoms(atoms);
    return FiniteSignedMeasure{std::move(space), std::move(atoms)};
}

FiniteSignedMeasure zero_measure(FiberSpace space) {
    return FiniteSignedMeasure{std::move(space), {}};
}

FiniteSignedMeasure dirac(FiberSpace space, double position, double weight) {
    return make_measure(std::move(space), {{position, weight}});
}

double total_mass(std::span<const Atom> atoms) {
    double s = 0.0;
    for (const Atom& a : atoms) s += a.weight;
    return s;
}

double total_mass(const FiniteSignedMeasure& mu) { return total_mass(mu.atoms); }

double total_abs_mass(std::span<const Atom> atoms) {
    double s = 0.0;
    for (const Atom& a : atoms) s += std::abs(a.weight);
    return s;
}

bool is_probability(const FiniteSignedMeasure& mu, double tol) {
    for (const Atom& a : mu.atoms)
        if (a.weight < 0.0) return false;
    return std::abs(total_mass(mu) - 1.0) <= tol;
}

std::pair<FiniteSignedMeasure, FiniteSignedMeasure> jordan(const FiniteSignedMeasure& mu) {
    FiniteSignedMeasure plus{mu.space, {}}, minus{mu.space, {}};
    for (const Atom& a : mu.atoms) {
        if (a.weight > 0.0)
            plus.atoms.push_back(a);
        else
            minus.atoms.push_back({a.position, -a.weight});
    }
    return {std::move(plus), std::move(minus)};
}

double wk_norm(const FiberSpace& space, std::span<const Atom> atoms) {
    if (atoms.empty()) return 0.0;
    bool has_pos = false, has_neg = false;
    for (const Atom& a : atoms) {
        if (a.weight > 0.0) has_pos = true;
        if (a.weight < 0.0) has_neg = true;
    }
    if (!(has_pos && has_neg)) return total_abs_mass(atoms);

    if (space.kind() == FiberSpace::Kind::Interval) return wk::chain_lp(atoms);

    const int n = static_cast<int>(atoms.size());
    std::vector<double> w(n);
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i) {
        w[i] = atoms[i].weight;
        for (int j = 0; j < n; ++j) d(i, j) = space.distance(atoms[i].position, atoms[j].position);
    }
    return wk::dense_lp(w, d);
}

double wk_norm(const FiniteSignedMeasure& mu) { return wk_norm(mu.space, mu.atoms); }

double wk_oracle(const FiniteSignedMeasure& mu, double grid_step) {
    const int n = static_cast<int>(mu.atoms.size());
    if (n > 4) throw InvalidInput("wk_oracle: refuses supports larger than 4 atoms");
    if (n == 0) return 0.0;
    if (!(grid_step > 0.0)) throw InvalidInput("wk_oracle: grid_step must be positive");

    const int levels = static_cast<int>(std::floor(2.0 / grid_step)) + 1;
    std::vector<double> g(n);
    double best = 0.0;  // g == 0 is always feasible
    auto rec = [&](auto&& self, int j, double partial) -> void {
        for (int l = 0; l < levels; ++l) {
            double v = -1.0 + l * grid_step;
            if (v > 1.0) break;
            bool ok = true;
            for (int i = 0; i < j; ++i) {
                double d = mu.space.distance(mu.atoms[i].position, mu.atoms[j].position);
                if (std::abs(g[i] - v) > d + 1e-12) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            g[j] = v;
            double total = partial + mu.atoms[j].weight * v;
            if (j + 1 == n)
                best = std::max(best, total);
            else
                self(self, j + 1, total);
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

FiniteSignedMeasure pushforward(const FiniteSignedMeasure& mu,
                                const std::function<double(double)>& f) {
    AtomList out;
    out.reserve(mu.atoms.size());
    for (const Atom& a : mu.atoms) {
        double y = f(a.position);
        if (!mu.space.contains(y, 1e-12))
            throw InvalidInput("pushforward: map leaves the fiber space");
        if (mu.space.kind() == FiberSpace::Kind::Interval)
            y = std::clamp(y, mu.space.lo(), mu.space.hi());
        out.push_back({y, a.weight});
    }
    normalize_atoms(out);
    return FiniteSignedMeasure{mu.space, std::move(out)};
}

void compress_atoms(const FiberSpace& space, AtomList& atoms, double resolution) {
    if (!(resolution > 0.0)) throw InvalidInput("compress: resolution must be positive");
    if (space.kind() != FiberSpace::Kind::Interval) return;
    const double lo = space.lo(), hi = space.hi();
    for (Atom& a : atoms) {
        double snapped = lo + resolution * std::nearbyint((a.position - lo) / resolution);
        a.position = std::clamp(snapped, lo, hi);
    }
    normalize_atoms(atoms);
}

FiniteSignedMeasure compress(const FiniteSignedMeasure& mu, double resolution) {
    FiniteSignedMeasure out = mu;
    compress_atoms(out.space, out.atoms, resolution);
    return out;
}

AtomList linear_combination(std::span<const Atom> a, double ca, std::span<const Atom> b,
                            double cb) {
    AtomList out;
    out.reserve(a.size() + b.size());
    for (const Atom& at : a) out.push_back({at.position, ca * at.weight});
    for (const Atom& at : b) out.push_back({at.position, cb * at.weight});
    normalize_atoms(out);
    return out;
}

namespace {
void require_same_space(const FiniteSignedMeasure& a, const FiniteSignedMeasure& b) {
    if (!(a.space == b.space))
        throw InvalidInput("measure arithmetic: operands live on different fiber spaces");
}
}  // namespace

FiniteSignedMeasure operator+(const FiniteSignedMeasure& a, const FiniteSignedMeasure& b) {
    require_same_space(a, b);
    return FiniteSignedMeasure{a.space, linear_combination(a.atoms, 1.0, b.atoms, 1.0)};
}

FiniteSignedMeasure operator-(const FiniteSignedMeasure& a, const FiniteSignedMeasure& b) {
    require_same_space(a, b);
    return FiniteSignedMeasure{a.space, linear_combination(a.atoms, 1.0, b.atoms, -1.0)};
}

FiniteSignedMeasure operator*(double c, const FiniteSignedMeasure& mu) {
    FiniteSignedMeasure out{mu.space, mu.atoms};
    for (Atom& a : out.atoms) a.weight *= c;
    normalize_atoms(out.atoms);
    return out;
}

double integrate(const FiniteSignedMeasure& mu, const std::function<double(double)>& f) {
    double s = 0.0;
    for (const Atom& a : mu.atoms) s += a.weight * f(a.position);
    return s;
}

}  // namespace fiberlab
