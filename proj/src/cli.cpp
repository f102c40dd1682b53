#include "fiberlab/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "fiberlab/catalog.hpp"
#include "fiberlab/config.hpp"
#include "fiberlab/ifs.hpp"
#include "fiberlab/lifting.hpp"
#include "fiberlab/rng.hpp"
#include "fiberlab/serialize.hpp"

namespace fiberlab::cli {

namespace {

using nlohmann::json;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string csv_path;
    std::string json_path;
    bool timing = false;

    std::optional<int> depth;
    std::optional<int> steps;
    std::optional<double> compress;
    std::optional<int> nmax;
    std::optional<long> samples;
    std::string f_name = "z";
    std::string g_name = "z";
    std::string psi_name = "z";
    std::string checkpoint;
    std::string atoms_a;
    std::string atoms_b;
};

// Accumulates results/pass flags and renders the summary JSON.
class Summary {
  public:
    Summary(std::string command, json config_echo)
        : command_(std::move(command)), config_(std::move(config_echo)) {}

    json& results() { return results_; }

    void flag(const std::string& name, bool ok) {
        pass_[name] = ok;
        violated_ = violated_ || !ok;
    }

    int exit_code() const { return violated_ ? 2 : 0; }

    json render(bool timing, double wall_ms) const {
        json j{{"command", command_},
               {"config", config_},
               {"results", results_},
               {"pass", pass_.empty() ? json::object() : pass_}};
        if (timing) j["wall_time_ms"] = wall_ms;
        return j;
    }

  private:
    std::string command_;
    json config_;
    json results_;
    json pass_ = json::object();
    bool violated_ = false;
};

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) body_ += ',';
            body_ += header[i];
        }
        body_ += '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    void write(const std::string& path) const {
        if (path.empty()) return;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open CSV output '" + path + "'");
        out << body_;
    }

  private:
    std::string body_;
};

std::string fmt(double v) { return format_double(v); }

json config_echo(const Options& opt, const IniFile* ini) {
    json j = json::object();
    if (ini)
        for (const auto& [k, v] : ini->flatten()) j[k] = v;
    if (opt.seed) j["cli.seed"] = std::to_string(*opt.seed);
    if (opt.depth) j["cli.depth"] = std::to_string(*opt.depth);
    if (opt.steps) j["cli.steps"] = std::to_string(*opt.steps);
    if (opt.compress) j["cli.compress"] = fmt(*opt.compress);
    if (opt.nmax) j["cli.nmax"] = std::to_string(*opt.nmax);
    if (opt.samples) j["cli.samples"] = std::to_string(*opt.samples);
    return j;
}

RunParams resolve_params(const IniFile& ini, const Options& opt) {
    RunParams params = run_params_from_config(ini);
    if (opt.depth) params.depth = *opt.depth;
    if (opt.steps) params.steps = *opt.steps;
    if (opt.compress) params.compress = *opt.compress;
    if (opt.nmax) params.nmax = *opt.nmax;
    if (opt.samples) params.samples = *opt.samples;
    if (opt.seed) params.seed = *opt.seed;
    if (opt.threads) params.threads = *opt.threads;
    return params;
}

std::uint64_t require_seed(const RunParams& params) {
    if (!params.seed)
        throw ConfigError(
            "this command draws random numbers: provide --seed or run.seed "
            "(wall-clock seeding is disabled by the determinism contract)");
    return *params.seed;
}

BasisGap base_gap(const SubshiftSpec& spec, const IniFile& ini, std::uint64_t seed) {
    const int depth = static_cast<int>(ini.get_long("run", "gap_depth", 10));
    const int iters =
        static_cast<int>(ini.get_long("run", "gap_iterations", std::min(8, depth - 2)));
    const int trials = static_cast<int>(ini.get_long("run", "gap_trials", 5));
    return estimate_basis_gap(spec, depth, iters, trials, seed);
}

AtomList parse_atoms(const std::string& text) {
    AtomList atoms;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("atom list entries look like position:weight, got '" + item + "'");
        atoms.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
    normalize_atoms(atoms);
    return atoms;
}

std::string word_string(std::span<const int> w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(w[i]);
    }
    return s;
}

// ---------- commands ----------

int cmd_invariant(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    FiberSystem sys = system_from_config(ini);
    RunParams params = resolve_params(ini, opt);

    auto result = invariant_measure(sys, params.depth, params.steps, params.compress,
                                    dirac(sys.space, params.nu0), params.threads);
    auto norms = strong_norm(result.measure);

    summary.results() = {{"depth", params.depth},
                         {"steps", params.steps},
                         {"compress", params.compress},
                         {"weak_norm", norms.weak},
                         {"marginal_theta", norms.marginal_theta},
                         {"strong_norm", norms.strong},
                         {"lip_disint", norms.lip_disint},
                         {"truncation_note", norms.truncation_note},
                         {"residual", result.residual},
                         {"residual_bound", result.residual_bound}};
    summary.flag("residual_within_bound", result.residual <= result.residual_bound + 1e-12);

    for_each_word(sys.base, result.measure.depth,
                  [&](std::span<const int> w, std::uint64_t r, double mass) {
                      const AtomList& entry = result.measure.entries[r];
                      csv.row({word_string(w), fmt(mass), fmt(total_mass(entry)),
                               std::to_string(entry.size())});
                  });

    if (!opt.checkpoint.empty()) write_checkpoint(result.measure, opt.checkpoint);
    return 0;
}

int cmd_decay(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    FiberSystem sys = system_from_config(ini);
    RunParams params = resolve_params(ini, opt);
    auto gap = base_gap(sys.base, ini, require_seed(params));
    auto constants = paper_constants(sys, gap.r);

    auto mu0 = invariant_measure(sys, params.nmax + 1, params.steps, params.compress,
                                 dirac(sys.space, params.nu0), params.threads);
    Observable f = observables::from_name(opt.f_name);
    Observable g = observables::from_name(opt.g_name);
    auto report = correlation_sequence(sys, mu0.measure, f, g, params.nmax, params.compress,
                                       constants.xi, params.threads);

    for (int n = 0; n <= params.nmax; ++n) {
        double bound = report.degenerate
                           ? 0.0
                           : report.prefactor_estimate * std::pow(constants.xi, n);
        csv.row({std::to_string(n), fmt(report.values[n]), fmt(bound),
                 fmt(bound - report.values[n])});
    }
    summary.results() = {{"f", f.name},
                         {"g", g.name},
                         {"nmax", params.nmax},
                         {"fitted_rate", report.fitted_rate},
                         {"xi", constants.xi},
                         {"r", gap.r},
                         {"prefactor_estimate", report.prefactor_estimate},
                         {"degenerate", report.degenerate},
                         {"values", report.values},
                         {"mu0_residual", mu0.residual}};
    summary.flag("rate_bound", report.bound_passed);
    return 0;
}

int cmd_regularity(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    FiberSystem sys = system_from_config(ini);
    RunParams params = resolve_params(ini, opt);

    auto mu0 = invariant_measure(sys, params.depth, params.steps, params.compress,
                                 dirac(sys.space, params.nu0), params.threads);
    double lip = lipschitz_constant(
        mu0.measure, mu0.measure.word_count() <= 256 ? LipMode::Exact : LipMode::Sampled);
    auto constants = paper_constants(sys, 1.0);  // the regularity bound needs no basis rate
    // compression moves every entry by <= steps * delta in WK; divide by the
    // smallest base distance of distinct depth-k words
    double slack = 2.0 * params.steps * params.compress /
                   std::pow(sys.base.theta, params.depth - 1);

    csv.row({fmt(lip), fmt(constants.lip_bound), fmt(slack)});
    summary.results() = {{"lipschitz_constant", lip},
                         {"bound", constants.lip_bound},
                         {"C1", constants.C1},
                         {"quantization_slack", slack},
                         {"mu0_residual", mu0.residual}};
    summary.flag("lipschitz_bound", lip <= constants.lip_bound + slack);
    return 0;
}

int cmd_constants(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    FiberSystem sys = system_from_config(ini);
    RunParams params = resolve_params(ini, opt);
    auto gap = base_gap(sys.base, ini, require_seed(params));
    auto c = paper_constants(sys, gap.r);

    const std::vector<std::pair<std::string, double>> table = {
        {"alpha", c.alpha},       {"H", c.H},
        {"N", double(c.N)},       {"theta", c.theta},
        {"g_theta_max", c.g_theta_max}, {"g_theta_sum", c.g_theta_sum},
        {"C1", c.C1},             {"C1_sum_reading", c.C1_sum_reading},
        {"r", c.r},               {"D", gap.D},
        {"beta1", c.beta1},       {"lambda0", c.lambda0},
        {"xi", c.xi},             {"lip_bound", c.lip_bound}};
    for (const auto& [name, value] : table) {
        csv.row({name, fmt(value)});
        summary.results()[name] = value;
    }
    summary.flag("basis_contracting", gap.contracting);
    return 0;
}

int cmd_gap(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    SubshiftSpec spec = subshift_from_config(ini);
    RunParams params = resolve_params(ini, opt);
    auto gap = base_gap(spec, ini, require_seed(params));

    for (std::size_t t = 0; t < gap.ratios.size(); ++t)
        for (std::size_t j = 0; j < gap.ratios[t].size(); ++j)
            csv.row({std::to_string(t), std::to_string(j), fmt(gap.ratios[t][j])});
    summary.results() = {{"r", gap.r},
                         {"D", gap.D},
                         {"contracting", gap.contracting},
                         {"trial_rates", gap.trial_rates}};
    summary.flag("contracting", gap.contracting);
    return 0;
}

int cmd_equilibrium(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    FiberSystem sys = system_from_config(ini);
    RunParams params = resolve_params(ini, opt);
    std::uint64_t seed = require_seed(params);
    auto gap = base_gap(sys.base, ini, seed);
    const int trials = static_cast<int>(ini.get_long("run", "eq_trials", 5));

    json fitted = json::array();
    bool all = true;
    for (int t = 0; t < trials; ++t) {
        auto mu = random_leafwise_in_v(sys.base, sys.space, params.nmax + 1,
                                       derive_seed(seed, 1000 + t));
        auto report = equilibrium_rate(sys, mu, params.nmax, params.compress, gap.r);
        for (std::size_t j = 0; j < report.weak_norms.size(); ++j)
            csv.row({std::to_string(t), std::to_string(j), fmt(report.weak_norms[j])});
        fitted.push_back(report.degenerate ? 0.0 : report.fitted_rate);
        all = all && report.passed;
        if (t == 0) summary.results()["beta1"] = report.beta1;
    }
    summary.results()["fitted_rates"] = fitted;
    summary.results()["r"] = gap.r;
    summary.flag("rates_below_beta1", all);
    return 0;
}

int cmd_lift(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    FiberSystem sys = system_from_config(ini);
    RunParams params = resolve_params(ini, opt);
    const int depth = opt.depth ? *opt.depth
                                : static_cast<int>(ini.get_long("run", "lift_depth", 14));
    Observable psi = observables::from_name(opt.psi_name);

    bool gaps_ok = true;
    for (int n = 0; n <= params.nmax; ++n) {
        auto pair = envelope(sys, psi, n, depth, 9);
        double bound = psi.lip_theta * std::pow(sys.alpha, n) +
                       2.0 * envelope_rep_slack(sys, psi, n, depth) + 1e-9;
        gaps_ok = gaps_ok && pair.gap <= bound;
        csv.row({std::to_string(n), fmt(pair.lower), fmt(pair.upper), fmt(pair.gap), fmt(bound)});
    }
    auto lifted = lifted_value(sys, psi, params.nmax, depth);
    auto inv = invariance_check(sys, psi, params.nmax, depth);

    summary.results() = {{"psi", psi.name},
                         {"nmax", params.nmax},
                         {"depth", depth},
                         {"lifted_value", lifted.value},
                         {"certified_error", lifted.certified_error},
                         {"invariance_diff", inv.diff},
                         {"invariance_bound", inv.bound}};
    summary.flag("gap_bounds", gaps_ok);
    summary.flag("invariance", inv.passed);
    return 0;
}

int cmd_ifs_decay(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    IfsSpec ifs = ifs_from_config(ini);
    RunParams params = resolve_params(ini, opt);
    std::uint64_t seed = require_seed(params);

    FiberSystem sys = skew_product(ifs, ini.get_double("system", "theta", 0.5));
    auto gap = base_gap(sys.base, ini, seed);
    auto constants = paper_constants(sys, gap.r);
    auto mu0 = invariant_measure(sys, params.nmax + 1, params.steps, params.compress,
                                 dirac(sys.space, params.nu0), params.threads);
    Observable g1 = observables::from_name(opt.f_name);
    Observable g2 = observables::from_name(opt.g_name);

    auto report = annealed_correlation(ifs, sys, mu0.measure, g1, g2, params.nmax,
                                       params.samples, seed, constants.xi, params.compress);
    for (const auto& row : report.rows) {
        double bound = report.decay.degenerate
                           ? 0.0
                           : report.decay.prefactor_estimate * std::pow(constants.xi, row.n);
        csv.row({std::to_string(row.n), fmt(row.mc), fmt(row.transfer), fmt(row.mc_stderr),
                 fmt(bound)});
    }
    summary.results() = {{"g1", g1.name},
                         {"g2", g2.name},
                         {"fitted_rate", report.decay.fitted_rate},
                         {"xi", constants.xi},
                         {"degenerate", report.decay.degenerate},
                         {"samples", params.samples}};
    summary.flag("estimators_agree", report.all_agree);
    summary.flag("rate_bound", report.decay.bound_passed);
    return 0;
}

int cmd_wk_dist(const Options& opt, Summary& summary, CsvWriter& csv, std::ostream& out) {
    if (opt.atoms_a.empty() || opt.atoms_b.empty())
        throw ConfigError("wk-dist needs --a and --b atom lists (position:weight,...)");
    auto space = FiberSpace::interval(0.0, 1.0);
    auto a = make_measure(space, parse_atoms(opt.atoms_a));
    auto b = make_measure(space, parse_atoms(opt.atoms_b));
    double d = wk_norm(a - b);
    out << fmt(d) << "\n";
    csv.row({fmt(d)});
    summary.results() = {{"distance", d}};
    return 0;
}

int cmd_certify(const Options& opt, Summary& summary, CsvWriter& csv) {
    IniFile ini = IniFile::parse_file(opt.config_path);
    FiberSystem sys = system_from_config(ini);
    RunParams params = resolve_params(ini, opt);
    std::uint64_t seed = require_seed(params);
    const int samples = static_cast<int>(std::min<long>(params.samples, 20000));

    summary.results() = {{"alpha_declared", sys.alpha}, {"H_declared", sys.H}};
    try {
        auto report = certify_constants(sys, samples, seed);
        summary.results()["alpha_observed"] = report.alpha_observed;
        summary.results()["H_observed"] = report.H_observed;
        summary.results()["samples"] = report.samples;
        csv.row({fmt(sys.alpha), fmt(report.alpha_observed), fmt(sys.H), fmt(report.H_observed)});
        summary.flag("constants_certified", true);
    } catch (const CertificationFailure& failure) {
        summary.results()["witness"] = failure.witness;
        csv.row({fmt(sys.alpha), "violated", fmt(sys.H), "violated"});
        summary.flag("constants_certified", false);
    }
    return 0;
}

struct CommandSpec {
    std::string name;
    std::vector<std::string> csv_header;
    bool needs_config = true;
};

const std::vector<CommandSpec>& command_table() {
    static const std::vector<CommandSpec> table = {
        {"invariant", {"word", "markov_mass", "fiber_mass", "atoms"}},
        {"decay", {"n", "C_n", "bound_value", "margin"}},
        {"regularity", {"lipschitz_constant", "bound", "slack"}},
        {"constants", {"name", "value"}},
        {"gap", {"trial", "j", "ratio"}},
        {"equilibrium", {"trial", "j", "weak_norm"}},
        {"lift", {"n", "lower", "upper", "gap", "bound"}},
        {"ifs-decay", {"n", "annealed_mc", "annealed_transfer", "stderr", "bound"}},
        {"wk-dist", {"distance"}, false},
        {"certify", {"alpha_declared", "alpha_observed", "H_declared", "H_observed"}},
    };
    return table;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"fiberlab: invariant measures and decay certificates for contracting-fiber "
                 "skew products over subshifts"};
    app.require_subcommand(1);

    Options opt;
    std::string active;
    for (const auto& spec : command_table()) {
        CLI::App* sub = app.add_subcommand(spec.name, "");
        if (spec.needs_config)
            sub->add_option("--config", opt.config_path, "INI config file")->required();
        sub->add_option("--seed", opt.seed, "RNG seed (overrides run.seed)");
        sub->add_option("--threads", opt.threads, "worker threads");
        sub->add_option("--csv", opt.csv_path, "CSV output path");
        sub->add_option("--json", opt.json_path, "JSON summary path");
        sub->add_flag("--timing", opt.timing, "include wall_time_ms in the summary");
        sub->add_option("--depth", opt.depth, "cylinder depth");
        sub->add_option("--steps", opt.steps, "transfer iterations");
        sub->add_option("--compress", opt.compress, "compression resolution");
        sub->add_option("--nmax", opt.nmax, "largest lag / iteration");
        sub->add_option("--samples", opt.samples, "Monte Carlo samples");
        sub->add_option("--f", opt.f_name, "observable f (z, z2, one, x0, x0z)");
        sub->add_option("--g", opt.g_name, "observable g");
        sub->add_option("--psi", opt.psi_name, "lifted observable");
        sub->add_option("--checkpoint", opt.checkpoint, "binary checkpoint path");
        sub->add_option("--a", opt.atoms_a, "atoms of the first measure (pos:weight,...)");
        sub->add_option("--b", opt.atoms_b, "atoms of the second measure");
        sub->callback([&active, name = spec.name] { active = name; });
    }

    std::vector<const char*> argv;
    argv.push_back("fiberlab");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "fiberlab: " << e.what() << "\n" << app.help();
        return 64;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        const CommandSpec* spec = nullptr;
        for (const auto& s : command_table())
            if (s.name == active) spec = &s;
        if (!spec) {
            err << "fiberlab: unknown command\n";
            return 64;
        }

        json echo;
        if (spec->needs_config) {
            IniFile ini = IniFile::parse_file(opt.config_path);
            echo = config_echo(opt, &ini);
        } else {
            echo = config_echo(opt, nullptr);
        }
        Summary summary(active, echo);
        CsvWriter csv(spec->csv_header);

        if (active == "invariant") cmd_invariant(opt, summary, csv);
        else if (active == "decay") cmd_decay(opt, summary, csv);
        else if (active == "regularity") cmd_regularity(opt, summary, csv);
        else if (active == "constants") cmd_constants(opt, summary, csv);
        else if (active == "gap") cmd_gap(opt, summary, csv);
        else if (active == "equilibrium") cmd_equilibrium(opt, summary, csv);
        else if (active == "lift") cmd_lift(opt, summary, csv);
        else if (active == "ifs-decay") cmd_ifs_decay(opt, summary, csv);
        else if (active == "wk-dist") cmd_wk_dist(opt, summary, csv, out);
        else if (active == "certify") cmd_certify(opt, summary, csv);

        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        csv.write(opt.csv_path);
        json rendered = summary.render(opt.timing, wall_ms);
        if (!opt.json_path.empty()) {
            std::ofstream jout(opt.json_path, std::ios::binary | std::ios::trunc);
            if (!jout) throw Error("cannot open JSON output '" + opt.json_path + "'");
            jout << rendered.dump(2) << "\n";
        }
        if (active != "wk-dist") out << rendered.dump(2) << "\n";
        return summary.exit_code();
    } catch (const ConfigError& e) {
        err << "fiberlab: config error: " << e.what() << "\n";
        return 65;
    } catch (const Error& e) {
        err << "fiberlab: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "fiberlab: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fiberlab::cli
