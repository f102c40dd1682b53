#include "fiberlab/serialize.hpp"

#include <charconv>
#include <cstring>
#include <fstream>

namespace fiberlab {

nlohmann::json measure_to_json(const FiniteSignedMeasure& mu) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const Atom& a : mu.atoms) atoms.push_back({a.position, a.weight});
    return atoms;
}

AtomList atoms_from_json(const nlohmann::json& j) {
    AtomList atoms;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2)
            throw InvalidInput("measure JSON must be a list of [position, weight] pairs");
        atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    normalize_atoms(atoms);
    return atoms;
}

nlohmann::json leafwise_to_json(const LeafwiseMeasure& mu) {
    nlohmann::json words = nlohmann::json::array();
    for_each_word(mu.spec, mu.depth, [&](std::span<const int> w, std::uint64_t, double) {
        words.push_back(std::vector<int>(w.begin(), w.end()));
    });
    nlohmann::json entries = nlohmann::json::array();
    for (const AtomList& entry : mu.entries) {
        nlohmann::json atoms = nlohmann::json::array();
        for (const Atom& a : entry) atoms.push_back({a.position, a.weight});
        entries.push_back(std::move(atoms));
    }
    return nlohmann::json{{"depth", mu.depth}, {"words", words}, {"entries", entries}};
}

namespace {

template <class T>
void write_le(std::ofstream& out, T value) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint writer assumes a little-endian host");
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_le(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw InvalidInput("checkpoint: truncated file");
    return value;
}

}  // namespace

void write_checkpoint(const LeafwiseMeasure& mu, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("checkpoint: cannot open '" + path + "' for writing");
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(mu.depth));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(mu.entries.size()));
    for (const AtomList& entry : mu.entries) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(entry.size()));
        for (const Atom& a : entry) {
            write_le<double>(out, a.position);
            write_le<double>(out, a.weight);
        }
    }
    if (!out) throw InvalidInput("checkpoint: write to '" + path + "' failed");
}

LeafwiseMeasure read_checkpoint(const SubshiftSpec& spec, const FiberSpace& space,
                                const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("checkpoint: cannot open '" + path + "'");
    LeafwiseMeasure mu;
    mu.spec = spec;
    mu.space = space;
    mu.depth = static_cast<int>(read_le<std::uint32_t>(in));
    const std::uint32_t words = read_le<std::uint32_t>(in);
    WordIndex idx(spec, mu.depth);
    if (idx.total(mu.depth) != words)
        throw InvalidInput("checkpoint: word count does not match the subshift");
    mu.entries.resize(words);
    for (std::uint32_t r = 0; r < words; ++r) {
        const std::uint32_t atoms = read_le<std::uint32_t>(in);
        AtomList entry(atoms);
        for (std::uint32_t i = 0; i < atoms; ++i) {
            entry[i].position = read_le<double>(in);
            entry[i].weight = read_le<double>(in);
        }
        mu.entries[r] = std::move(entry);
    }
    return mu;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace fiberlab
