#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fiberlab/fiber_system.hpp"
#include "fiberlab/ifs.hpp"

namespace fiberlab {

// Flat INI-style config: [section] headers, key = value lines, lists
// comma-separated, comments with '#' or ';'. Parse errors carry line numbers.
class IniFile {
  public:
    static IniFile parse_file(const std::string& path);
    static IniFile parse(std::istream& in, const std::string& name);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    long get_long(const std::string& section, const std::string& key) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key) const;

    // defaulted variants
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;

    // flattened section.key = value view (config echo in summaries)
    std::map<std::string, std::string> flatten() const;

  private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string name_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
    const Entry& lookup(const std::string& section, const std::string& key) const;
};

struct RunParams {
    int depth = 4;
    int steps = 12;
    double compress = 1.0 / 4096.0;
    int nmax = 10;
    long samples = 100000;
    int burn_in = 100;
    std::optional<std::uint64_t> seed;  // no wall-clock default; required where RNG is used
    int threads = 1;
    double nu0 = 0.0;  // initial fiber Dirac position for invariant runs
};

// [system]: alphabet, transition (row-major 0/1), stochastic (row-major),
// theta, optional stationary.
SubshiftSpec subshift_from_config(const IniFile& ini);

// [fiber]: kind (first-symbol-affine | sequence-affine), a, b or c0,
// optional interval lo,hi and declared alpha / H overrides.
FiberSystem system_from_config(const IniFile& ini);

// [ifs]: a, b, p, optional interval.
IfsSpec ifs_from_config(const IniFile& ini);

RunParams run_params_from_config(const IniFile& ini);

}  // namespace fiberlab
