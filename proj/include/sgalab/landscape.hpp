#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "sgalab/chromosome.hpp"
#include "sgalab/error.hpp"

namespace sgalab {

enum class LandscapeKind { sharp_peak, one_max_shifted, table };

inline std::string to_string(LandscapeKind k)
{
    switch (k) {
    case LandscapeKind::sharp_peak:
        return "sharp_peak";
    case LandscapeKind::one_max_shifted:
        return "one_max_shifted";
    case LandscapeKind::table:
        return "table";
    }
    return "?";
}

inline constexpr std::size_t max_table_length = 20;

// Fitness function on {0,1}^ell with values in (0, +inf). Immutable once built.
class Landscape {
public:
    LandscapeKind kind() const noexcept { return kind_; }
    std::size_t length() const noexcept { return length_; }
    const std::vector<double>& table() const noexcept { return table_; }

    double operator()(const Chromosome& c) const
    {
        switch (kind_) {
        case LandscapeKind::sharp_peak:
            return c.all_ones() ? 2.0 : 1.0;
        case LandscapeKind::one_max_shifted:
            return 1.0 + static_cast<double>(c.count_ones());
        case LandscapeKind::table:
            return table_[c.to_index()];
        }
        return 0.0;
    }

    // Value of the fittest genotype.
    double max_value() const
    {
        switch (kind_) {
        case LandscapeKind::sharp_peak:
            return 2.0;
        case LandscapeKind::one_max_shifted:
            return 1.0 + static_cast<double>(length_);
        case LandscapeKind::table: {
            double best = 0.0;
            for (double v : table_) {
                best = std::max(best, v);
            }
            return best;
        }
        }
        return 0.0;
    }

    friend Landscape sharp_peak(std::size_t ell);
    friend Landscape one_max_shifted(std::size_t ell);
    friend Landscape table_landscape(std::size_t ell, std::vector<double> values);

private:
    Landscape(LandscapeKind kind, std::size_t ell, std::vector<double> table = {})
        : kind_(kind)
        , length_(ell)
        , table_(std::move(table))
    {
    }

    LandscapeKind kind_;
    std::size_t length_;
    std::vector<double> table_;
};

// f(1...1) = 2, f(u) = 1 otherwise.
inline Landscape sharp_peak(std::size_t ell)
{
    if (ell < 2) {
        throw ConfigError("ell", "sharp peak needs ell >= 2");
    }
    return Landscape(LandscapeKind::sharp_peak, ell);
}

// f(u) = 1 + number of ones. A generic non-flat landscape.
inline Landscape one_max_shifted(std::size_t ell)
{
    if (ell < 2) {
        throw ConfigError("ell", "landscape needs ell >= 2");
    }
    return Landscape(LandscapeKind::one_max_shifted, ell);
}

// values[g] is the fitness of the genotype whose integer code is g
// (Chromosome::to_index ordering).
inline Landscape table_landscape(std::size_t ell, std::vector<double> values)
{
    if (ell < 2 || ell > max_table_length) {
        throw ConfigError("ell", "table landscapes need 2 <= ell <= " + std::to_string(max_table_length));
    }
    if (values.size() != (std::size_t{1} << ell)) {
        throw ConfigError("entries", "table must list all " + std::to_string(std::size_t{1} << ell) + " genotypes");
    }
    for (std::size_t g = 0; g < values.size(); ++g) {
        if (!(values[g] > 0.0) || !std::isfinite(values[g])) {
            throw InvalidLandscape("fitness of " + Chromosome::from_index(g, ell).to_string() +
                " must be finite and > 0, got " + std::to_string(values[g]));
        }
    }
    return Landscape(LandscapeKind::table, ell, std::move(values));
}

// Parse a landscape document:
//
//   kind: sharp_peak | one_max_shifted | table
//   ell: 8
//   entries:            # table only, one [bitstring, fitness] pair per genotype
//     - ["000", 1.0]
inline Landscape load_landscape(const std::string& document)
{
    YAML::Node root;
    try {
        root = YAML::Load(document);
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("landscape document: ") + e.what());
    }
    if (!root.IsMap()) {
        throw ParseError("landscape document must be a key-value map");
    }
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (key != "kind" && key != "ell" && key != "entries") {
            throw ConfigError(key, "unknown landscape key");
        }
    }
    if (!root["kind"]) {
        throw ConfigError("kind", "missing");
    }
    if (!root["ell"]) {
        throw ConfigError("ell", "missing");
    }
    std::string kind;
    long long ell = 0;
    try {
        kind = root["kind"].as<std::string>();
        ell = root["ell"].as<long long>();
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("landscape document: ") + e.what());
    }
    if (ell < 2) {
        throw ConfigError("ell", "must be >= 2");
    }
    const auto length = static_cast<std::size_t>(ell);
    if (kind == "sharp_peak" || kind == "one_max_shifted") {
        if (root["entries"]) {
            throw ConfigError("entries", "only allowed for kind: table");
        }
        return kind == "sharp_peak" ? sharp_peak(length) : one_max_shifted(length);
    }
    if (kind != "table") {
        throw ConfigError("kind", "unknown landscape kind '" + kind + "'");
    }
    if (length > max_table_length) {
        throw ConfigError("ell", "table landscapes need ell <= " + std::to_string(max_table_length));
    }
    const auto entries = root["entries"];
    if (!entries || !entries.IsSequence()) {
        throw ConfigError("entries", "table landscape needs a list of [bitstring, fitness] pairs");
    }
    const std::size_t size = std::size_t{1} << length;
    std::vector<double> values(size, 0.0);
    std::vector<bool> seen(size, false);
    for (const auto& e : entries) {
        if (!e.IsSequence() || e.size() != 2) {
            throw ParseError("each table entry must be a [bitstring, fitness] pair");
        }
        std::string bits;
        double value = 0.0;
        try {
            bits = e[0].as<std::string>();
            value = e[1].as<double>();
        } catch (const YAML::Exception& ex) {
            throw ParseError(std::string("table entry: ") + ex.what());
        }
        if (bits.size() != length) {
            throw ParseError("genotype '" + bits + "' does not have length " + std::to_string(length));
        }
        const auto g = Chromosome::from_string(bits).to_index();
        if (seen[g]) {
            throw ParseError("genotype '" + bits + "' listed twice");
        }
        seen[g] = true;
        values[g] = value;
    }
    for (std::size_t g = 0; g < size; ++g) {
        if (!seen[g]) {
            throw ConfigError("entries", "missing genotype " + Chromosome::from_index(g, length).to_string());
        }
    }
    return table_landscape(length, std::move(values));
}

} // namespace sgalab
