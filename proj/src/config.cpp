#include "fiberlab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fiberlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    std::ostringstream os;
    os << name << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

double parse_double(const std::string& name, int line, const std::string& raw) {
    const std::string v = trim(raw);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        fail(name, line, "expected a number, got '" + v + "'");
    return out;
}

}  // namespace

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse(in, path);
}

IniFile IniFile::parse(std::istream& in, const std::string& name) {
    IniFile ini;
    ini.name_ = name;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(name, lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail(name, lineno, "empty section name");
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) fail(name, lineno, "expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail(name, lineno, "empty key");
        if (section.empty()) fail(name, lineno, "key outside any [section]");
        auto& sec = ini.sections_[section];
        if (sec.count(key)) fail(name, lineno, "duplicate key '" + key + "'");
        sec[key] = Entry{value, lineno};
    }
    return ini;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

const IniFile::Entry& IniFile::lookup(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end())
        throw ConfigError(name_ + ": missing section [" + section + "]");
    auto k = s->second.find(key);
    if (k == s->second.end())
        throw ConfigError(name_ + ": missing key '" + key + "' in [" + section + "]");
    return k->second;
}

std::string IniFile::get_string(const std::string& section, const std::string& key) const {
    return lookup(section, key).value;
}

double IniFile::get_double(const std::string& section, const std::string& key) const {
    const Entry& e = lookup(section, key);
    return parse_double(name_, e.line, e.value);
}

long IniFile::get_long(const std::string& section, const std::string& key) const {
    const Entry& e = lookup(section, key);
    double v = parse_double(name_, e.line, e.value);
    long out = static_cast<long>(v);
    if (static_cast<double>(out) != v) fail(name_, e.line, "expected an integer");
    return out;
}

std::vector<double> IniFile::get_doubles(const std::string& section,
                                         const std::string& key) const {
    const Entry& e = lookup(section, key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(name_, e.line, item));
    if (out.empty()) fail(name_, e.line, "expected a comma-separated list");
    return out;
}

std::vector<int> IniFile::get_ints(const std::string& section, const std::string& key) const {
    std::vector<int> out;
    for (double v : get_doubles(section, key)) out.push_back(static_cast<int>(v));
    return out;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long IniFile::get_long(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? get_long(section, key) : fallback;
}

std::string IniFile::get_string(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

std::map<std::string, std::string> IniFile::flatten() const {
    std::map<std::string, std::string> out;
    for (const auto& [section, entries] : sections_)
        for (const auto& [key, entry] : entries) out[section + "." + key] = entry.value;
    return out;
}

SubshiftSpec subshift_from_config(const IniFile& ini) {
    const int n = static_cast<int>(ini.get_long("system", "alphabet"));
    auto tr = ini.get_ints("system", "transition");
    auto st = ini.get_doubles("system", "stochastic");
    if (static_cast<int>(tr.size()) != n * n)
        throw ConfigError("system.transition must have alphabet^2 entries");
    if (static_cast<int>(st.size()) != n * n)
        throw ConfigError("system.stochastic must have alphabet^2 entries");
    Eigen::MatrixXi A(n, n);
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            A(i, j) = tr[i * n + j];
            P(i, j) = st[i * n + j];
        }
    const double theta = ini.get_double("system", "theta");
    if (ini.has("system", "stationary")) {
        auto p = ini.get_doubles("system", "stationary");
        if (static_cast<int>(p.size()) != n)
            throw ConfigError("system.stationary must have alphabet entries");
        Eigen::VectorXd pv(n);
        for (int i = 0; i < n; ++i) pv(i) = p[i];
        return make_subshift(A, P, pv, theta);
    }
    return make_subshift(A, P, theta);
}

namespace {

FiberSpace space_from_config(const IniFile& ini, const char* section) {
    if (ini.has(section, "interval")) {
        auto iv = ini.get_doubles(section, "interval");
        if (iv.size() != 2) throw ConfigError(std::string(section) + ".interval needs lo,hi");
        return FiberSpace::interval(iv[0], iv[1]);
    }
    return FiberSpace::interval(0.0, 1.0);
}

}  // namespace

FiberSystem system_from_config(const IniFile& ini) {
    SubshiftSpec base = subshift_from_config(ini);
    FiberSpace space = space_from_config(ini, "fiber");
    const std::string kind = ini.get_string("fiber", "kind");
    FiberSystem sys;
    if (kind == "first-symbol-affine") {
        auto a = ini.get_doubles("fiber", "a");
        auto b = ini.get_doubles("fiber", "b");
        Eigen::VectorXd av(a.size()), bv(b.size());
        for (std::size_t i = 0; i < a.size(); ++i) av(static_cast<int>(i)) = a[i];
        for (std::size_t i = 0; i < b.size(); ++i) bv(static_cast<int>(i)) = b[i];
        sys = make_first_symbol_affine(std::move(base), std::move(space), av, bv);
    } else if (kind == "sequence-affine") {
        sys = make_sequence_affine(std::move(base), std::move(space),
                                   ini.get_double("fiber", "a"), ini.get_double("fiber", "c0"));
    } else {
        throw ConfigError("fiber.kind must be first-symbol-affine or sequence-affine");
    }
    // declared constants may be tightened (never loosened past certification)
    if (ini.has("fiber", "alpha")) sys.alpha = ini.get_double("fiber", "alpha");
    if (ini.has("fiber", "H")) sys.H = ini.get_double("fiber", "H");
    return sys;
}

IfsSpec ifs_from_config(const IniFile& ini) {
    auto a = ini.get_doubles("ifs", "a");
    auto b = ini.get_doubles("ifs", "b");
    auto p = ini.get_doubles("ifs", "p");
    Eigen::VectorXd av(a.size()), bv(b.size()), pv(p.size());
    for (std::size_t i = 0; i < a.size(); ++i) av(static_cast<int>(i)) = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) bv(static_cast<int>(i)) = b[i];
    for (std::size_t i = 0; i < p.size(); ++i) pv(static_cast<int>(i)) = p[i];
    return make_ifs(space_from_config(ini, "ifs"), av, bv, pv);
}

RunParams run_params_from_config(const IniFile& ini) {
    RunParams params;
    params.depth = static_cast<int>(ini.get_long("run", "depth", params.depth));
    params.steps = static_cast<int>(ini.get_long("run", "steps", params.steps));
    params.compress = ini.get_double("run", "compress", params.compress);
    params.nmax = static_cast<int>(ini.get_long("run", "nmax", params.nmax));
    params.samples = ini.get_long("run", "samples", params.samples);
    params.burn_in = static_cast<int>(ini.get_long("run", "burn_in", params.burn_in));
    params.threads = static_cast<int>(ini.get_long("run", "threads", params.threads));
    params.nu0 = ini.get_double("run", "nu0", params.nu0);
    if (ini.has("run", "seed"))
        params.seed = static_cast<std::uint64_t>(ini.get_long("run", "seed"));
    return params;
}

}  // namespace fiberlab
