#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"

#include "sgalab/branching.hpp"
#include "sgalab/core.hpp"
#include "sgalab/error.hpp"
#include "sgalab/experiments.hpp"
#include "sgalab/landscape.hpp"
#include "sgalab/lowerchain.hpp"
#include "sgalab/output.hpp"
#include "sgalab/stats.hpp"
#include "sgalab/tuner.hpp"

namespace sgalab::cli {

using json = nlohmann::json;

enum class KeyType { integer, real, boolean, text, real_list };

struct KeySpec {
    std::string name;
    KeyType type;
    json fallback; // null = required
    std::string help;
};

// Keys accepted by every subcommand besides its own. `threads` and `out_dir`
// never enter the config echo, so outputs do not depend on them.
inline const std::vector<KeySpec>& common_keys()
{
    static const std::vector<KeySpec> keys{
        {"seed", KeyType::integer, nullptr, "master seed (required)"},
        {"threads", KeyType::integer, 1, "worker threads"},
        {"out_dir", KeyType::text, "", "output directory (default: $SGALAB_OUT_DIR or ./out)"},
    };
    return keys;
}

inline const std::map<std::string, std::vector<KeySpec>>& subcommand_keys()
{
    static const std::map<std::string, std::vector<KeySpec>> table{
        {"disordered",
            {{"pi", KeyType::real, 0.8, "target pi, 0 < pi < 2(1 - p_c) and pi < 1"},
                {"m", KeyType::integer, 128, "population size (ell = m)"},
                {"p_c", KeyType::real, 0.1, "crossover probability"},
                {"kappa", KeyType::real, 2.0, "horizon ceil(kappa ln m)"},
                {"replicas", KeyType::integer, 100, "independent runs"}}},
        {"quasispecies",
            {{"pi", KeyType::real, 1.5, "target pi > 1"},
                {"m", KeyType::integer, 64, "population size"},
                {"ell", KeyType::integer, 0, "chromosome length (0: ell = m; ignored for landscape files)"},
                {"p_c", KeyType::real, 0.1, "crossover probability"},
                {"kappa", KeyType::real, 2.0, "horizon ceil(kappa ln m)"},
                {"replicas", KeyType::integer, 100, "independent runs"},
                {"landscape", KeyType::text, "sharp_peak", "sharp_peak, one_max_shifted, or a landscape file"}}},
        {"sweep",
            {{"m", KeyType::integer, 64, "population size (ell = m)"},
                {"p_c", KeyType::real, 0.1, "crossover probability"},
                {"grid", KeyType::real_list, json::array({0.5, 0.7, 0.9, 1.1, 1.3, 1.5}), "pi values"},
                {"kappa", KeyType::real, 2.0, "horizon ceil(kappa ln m)"},
                {"replicas", KeyType::integer, 100, "runs per grid point"}}},
        {"dominance-tn",
            {{"pi", KeyType::real, 0.8, "target pi < 1"},
                {"m", KeyType::integer, 64, "population size (ell = m)"},
                {"p_c", KeyType::real, 0.1, "crossover probability"},
                {"horizon", KeyType::integer, 10, "generations compared"},
                {"replicas", KeyType::integer, 10000, "runs of each process"},
                {"confidence", KeyType::real, 0.99, "DKW band level"}}},
        {"dominance-nstar",
            {{"pi", KeyType::real, 0.8, "target pi < 1"},
                {"eps", KeyType::real, 0.01, "nu* perturbation, pi (1 + 5 eps) < 1"},
                {"m", KeyType::integer, 64, "population size (ell = m)"},
                {"p_c", KeyType::real, 0.1, "crossover probability"},
                {"horizon", KeyType::integer, 10, "generations compared"},
                {"replicas", KeyType::integer, 10000, "runs of each process"},
                {"confidence", KeyType::real, 0.99, "DKW band level"}}},
        {"dominance-onestep",
            {{"pi", KeyType::real, 1.3, "target pi > 1"},
                {"m", KeyType::integer, 6, "population size (<= 64)"},
                {"ell", KeyType::integer, 4, "chromosome length (<= 20; ignored for landscape files)"},
                {"p_c", KeyType::real, 0.1, "crossover probability"},
                {"samples", KeyType::integer, 100000, "conditioned samples per state"},
                {"confidence", KeyType::real, 0.99, "DKW band level"},
                {"landscape", KeyType::text, "sharp_peak", "sharp_peak, one_max_shifted, or a landscape file"}}},
        {"gw",
            {{"law", KeyType::text, "poisson", "poisson, scaled_poisson, or nu_star"},
                {"lambda", KeyType::real, 0.5, "Poisson mean"},
                {"scale", KeyType::integer, 1, "integer multiplier for scaled_poisson"},
                {"pi", KeyType::real, 0.5, "nu_star pi"},
                {"eps", KeyType::real, 0.04, "nu_star eps"},
                {"horizon", KeyType::integer, 200, "generations"},
                {"replicas", KeyType::integer, 100000, "trajectories"}}},
        {"lowerchain",
            {{"m", KeyType::integer, 6, "population size"},
                {"pi", KeyType::real, 1.3, "pi > 1"},
                {"ratio", KeyType::real, 12.0 / 7.0, "f0*/f0bar"},
                {"p_c", KeyType::real, 0.1, "crossover probability"},
                {"ell", KeyType::integer, 4, "chromosome length"},
                {"horizon", KeyType::integer, 50, "steps"},
                {"replicas", KeyType::integer, 10000, "chains"},
                {"restart_from_zero", KeyType::boolean, false, "use the chain with 0 -> 1"}}},
        {"tune",
            {{"m", KeyType::integer, 64, "population size"},
                {"ell", KeyType::integer, 0, "chromosome length (0: ell = m; ignored for landscape files)"},
                {"p_c", KeyType::real, 0.1, "initial crossover probability"},
                {"p_m", KeyType::real, 0.01, "initial mutation probability"},
                {"target_pi", KeyType::real, 1.1, "pi to maintain, > 1"},
                {"adjust", KeyType::text, "mutation", "mutation, crossover, both, none"},
                {"p_c_min", KeyType::real, 0.0, "crossover lower bound"},
                {"p_c_max", KeyType::real, 1.0, "crossover upper bound"},
                {"p_m_min", KeyType::real, 0.0, "mutation lower bound"},
                {"p_m_max", KeyType::real, 1.0, "mutation upper bound"},
                {"horizon", KeyType::integer, 50, "generations"},
                {"replicas", KeyType::integer, 10, "independent runs"},
                {"landscape", KeyType::text, "sharp_peak", "sharp_peak, one_max_shifted, or a landscape file"}}},
    };
    return table;
}

struct ExperimentConfig {
    std::string subcommand;
    json params; // every subcommand key plus seed, defaults filled in
    unsigned threads = 1;
    std::filesystem::path out_dir;

    // Single-line JSON, keys sorted; embedded in every output.
    std::string echo() const
    {
        json e = params;
        e["subcommand"] = subcommand;
        return e.dump();
    }

    double real(const std::string& k) const { return params.at(k).get<double>(); }
    std::size_t size(const std::string& k) const { return params.at(k).get<std::size_t>(); }
    std::string text(const std::string& k) const { return params.at(k).get<std::string>(); }
};

namespace detail {

    inline json read_value(const std::string& key, KeyType type, const YAML::Node& node)
    {
        try {
            switch (type) {
            case KeyType::integer: {
                const auto s = node.as<std::string>();
                if (s.empty() || s[0] == '-') {
                    throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
                }
                return node.as<std::uint64_t>();
            }
            case KeyType::real:
                return node.as<double>();
            case KeyType::boolean:
                return node.as<bool>();
            case KeyType::text:
                return node.as<std::string>();
            case KeyType::real_list: {
                if (!node.IsSequence()) {
                    throw ConfigError(key, "expected a list of numbers");
                }
                json arr = json::array();
                for (const auto& v : node) {
                    arr.push_back(v.as<double>());
                }
                return arr;
            }
            }
        } catch (const YAML::Exception&) {
            throw ConfigError(key, "value has the wrong type");
        }
        return nullptr;
    }

    inline void require(bool ok, const std::string& field, const std::string& what)
    {
        if (!ok) {
            throw ConfigError(field, what);
        }
    }

    inline void check_probability(const json& p, const std::string& k)
    {
        const double v = p.at(k).get<double>();
        require(v >= 0.0 && v <= 1.0, k, "must lie in [0, 1]");
    }

    inline void check_even_m(const json& p)
    {
        const auto m = p.at("m").get<std::size_t>();
        require(m >= 2 && m % 2 == 0, "m", "must be an even integer >= 2");
    }

    // Cross-field constraints.
    inline void validate(const std::string& sub, const json& p)
    {
        if (p.contains("p_c")) {
            check_probability(p, "p_c");
        }
        if (p.contains("m")) {
            check_even_m(p);
        }
        if (p.contains("confidence")) {
            const double c = p.at("confidence").get<double>();
            require(c > 0.0 && c < 1.0, "confidence", "must lie in (0, 1)");
        }
        if (p.contains("kappa")) {
            require(p.at("kappa").get<double>() > 0.0, "kappa", "must be > 0");
        }
        if (p.contains("replicas")) {
            require(p.at("replicas").get<std::size_t>() > 0, "replicas", "must be >= 1");
        }
        if (sub == "disordered" || sub == "dominance-tn" || sub == "dominance-nstar") {
            const double pi = p.at("pi").get<double>();
            const double p_c = p.at("p_c").get<double>();
            require(pi > 0.0, "pi", "must be > 0");
            require(pi < 2.0 * (1.0 - p_c), "pi",
                "infeasible: pi must be < 2(1 - p_c) = " + format_real(2.0 * (1.0 - p_c)) + " for a sharp-peak start");
            require(pi < 1.0, "pi", "the disordered regime needs pi < 1");
        }
        if (sub == "dominance-nstar") {
            const double eps = p.at("eps").get<double>();
            require(eps > 0.0, "eps", "must be > 0");
            require(p.at("pi").get<double>() * (1.0 + 5.0 * eps) < 1.0, "eps", "needs pi (1 + 5 eps) < 1");
        }
        if (sub == "quasispecies" || sub == "dominance-onestep" || sub == "lowerchain") {
            require(p.at("pi").get<double>() > 1.0, "pi", "must be > 1");
        }
        if (sub == "dominance-onestep") {
            require(p.at("m").get<std::size_t>() <= max_exact_m, "m", "must be <= 64 (exact lower-chain matrix)");
            require(p.at("ell").get<std::size_t>() <= max_table_length, "ell", "must be <= 20 (genotype enumeration)");
        }
        if (sub == "sweep") {
            require(!p.at("grid").empty(), "grid", "must not be empty");
            for (const auto& v : p.at("grid")) {
                require(v.get<double>() > 0.0 && v.get<double>() != 1.0, "grid", "values must be > 0 and != 1");
                if (v.get<double>() < 1.0) {
                    require(v.get<double>() < 2.0 * (1.0 - p.at("p_c").get<double>()), "grid",
                        "pi < 1 entries must be < 2(1 - p_c)");
                }
            }
        }
        if (sub == "gw") {
            const auto law = p.at("law").get<std::string>();
            require(law == "poisson" || law == "scaled_poisson" || law == "nu_star", "law",
                "must be poisson, scaled_poisson or nu_star");
            require(p.at("lambda").get<double>() >= 0.0, "lambda", "must be >= 0");
            require(p.at("eps").get<double>() >= 0.0, "eps", "must be >= 0");
            require(p.at("pi").get<double>() >= 0.0, "pi", "must be >= 0");
        }
        if (sub == "lowerchain") {
            const double ratio = p.at("ratio").get<double>();
            require(ratio > 1.0, "ratio", "must be > 1");
            require(p.at("pi").get<double>() <= ratio * (1.0 - p.at("p_c").get<double>()), "pi",
                "infeasible: must be <= ratio (1 - p_c)");
            require(p.at("ell").get<std::size_t>() >= 1, "ell", "must be >= 1");
        }
        if (sub == "tune") {
            check_probability(p, "p_m");
            const TunerPolicy policy{p.at("target_pi").get<double>(), parse_tune_target(p.at("adjust").get<std::string>()),
                p.at("p_c_min").get<double>(), p.at("p_c_max").get<double>(), p.at("p_m_min").get<double>(),
                p.at("p_m_max").get<double>()};
            policy.validate();
        }
    }

} // namespace detail

// Validates a key-value document for `subcommand`. Unknown keys, type errors
// and infeasible combinations raise ConfigError naming the field.
inline ExperimentConfig parse_config(const std::string& subcommand, const YAML::Node& doc)
{
    const auto& table = subcommand_keys();
    const auto it = table.find(subcommand);
    if (it == table.end()) {
        throw ConfigError("subcommand", "unknown subcommand '" + subcommand + "'");
    }
    if (doc && !doc.IsNull() && !doc.IsMap()) {
        throw ParseError("config document must be a key-value map");
    }
    std::map<std::string, const KeySpec*> known;
    for (const auto& k : common_keys()) {
        known[k.name] = &k;
    }
    for (const auto& k : it->second) {
        known[k.name] = &k;
    }
    ExperimentConfig cfg;
    cfg.subcommand = subcommand;
    json values = json::object();
    if (doc && doc.IsMap()) {
        for (const auto& kv : doc) {
            const auto key = kv.first.as<std::string>();
            if (key == "subcommand") {
                if (kv.second.as<std::string>() != subcommand) {
                    throw ConfigError("subcommand", "document is for '" + kv.second.as<std::string>() + "'");
                }
                continue;
            }
            const auto k = known.find(key);
            if (k == known.end()) {
                throw ConfigError(key, "unknown key for subcommand " + subcommand);
            }
            values[key] = detail::read_value(key, k->second->type, kv.second);
        }
    }
    for (const auto& [name, spec] : known) {
        if (!values.contains(name)) {
            if (spec->fallback.is_null()) {
                throw ConfigError(name, "missing required key");
            }
            values[name] = spec->fallback;
        }
    }
    cfg.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, values.at("threads").get<std::uint64_t>()));
    auto out = values.at("out_dir").get<std::string>();
    if (out.empty()) {
        const char* env = std::getenv("SGALAB_OUT_DIR");
        out = env != nullptr && *env != '\0' ? env : "out";
    }
    cfg.out_dir = out;
    values.erase("threads");
    values.erase("out_dir");
    detail::validate(subcommand, values);
    cfg.params = std::move(values);
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& subcommand, const std::string& text)
{
    YAML::Node doc;
    try {
        doc = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return parse_config(subcommand, doc);
}

// ---------------------------------------------------------------------------
// Experiment runners. Each returns the files it wrote.

inline Landscape resolve_landscape(const std::string& spec, std::size_t ell)
{
    if (spec == "sharp_peak") {
        return sharp_peak(ell);
    }
    if (spec == "one_max_shifted") {
        return one_max_shifted(ell);
    }
    std::ifstream in(spec);
    if (!in) {
        throw ConfigError("landscape", "not a built-in landscape and not a readable file: " + spec);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_landscape(ss.str());
}

struct RunOutput {
    std::vector<std::filesystem::path> files;
    json summary;
};

namespace detail {

    inline void emit(RunOutput& out, const ExperimentConfig& cfg, const std::string& name, const std::string& content)
    {
        const auto path = cfg.out_dir / name;
        write_file(path, content);
        out.files.push_back(path);
    }

    inline void emit_summary(RunOutput& out, const ExperimentConfig& cfg)
    {
        json s;
        s["schema"] = "sgalab.summary.v1";
        s["config"] = json::parse(cfg.echo());
        s["results"] = out.summary;
        emit(out, cfg, "summary.json", s.dump(2) + "\n");
    }

    inline json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

    inline void write_regime(RunOutput& out, const ExperimentConfig& cfg, const RegimeReport& rep)
    {
        const auto echo = cfg.echo();
        CsvWriter traj("trajectories", echo, {"replica", "gen", "f_star", "f_bar", "n_master", "n_descendants", "d_max"});
        CsvWriter events("events", echo,
            {"replica", "tau0", "tau1", "tau2", "tau_bar", "event_disordered", "event_quasispecies"});
        std::size_t recursion_failures = 0;
        for (const auto& r : rep.replica_reports) {
            for (std::size_t n = 0; n < r.series.size(); ++n) {
                const auto& g = r.series[n];
                traj.row({std::to_string(r.replica), std::to_string(n), format_real(g.f_star), format_real(g.f_bar),
                    std::to_string(g.n_master), std::to_string(g.n_descendants), std::to_string(g.d_max)});
            }
            events.row({std::to_string(r.replica), format_optional(r.times.tau0), format_optional(r.times.tau1),
                format_optional(r.times.tau2), format_optional(r.times.tau_bar), r.event_disordered ? "1" : "0",
                r.event_quasispecies ? "1" : "0"});
            recursion_failures += static_cast<std::size_t>(!r.d_recursion_ok);
        }
        emit(out, cfg, "trajectories.csv", traj.text());
        emit(out, cfg, "events.csv", events.text());
        out.summary["p_m"] = rep.setup.p_m;
        out.summary["horizon"] = rep.reference.horizon;
        out.summary["f_star0"] = rep.reference.f_star0;
        out.summary["f_bar0"] = rep.reference.f_bar0;
        out.summary["replicas"] = rep.replicas;
        out.summary["event"] = rep.setup.protocol;
        out.summary["frequency"] = rep.frequency;
        out.summary["ci95"] = interval_json(rep.ci);
        out.summary["disordered_successes"] = rep.disordered_successes;
        out.summary["quasispecies_successes"] = rep.quasispecies_successes;
        out.summary["d_recursion_failures"] = recursion_failures;
    }

    inline void write_table(RunOutput& out, const ExperimentConfig& cfg, const TailTable& table)
    {
        CsvWriter csv("dominance", cfg.echo(),
            {"n", "k", "dominated", "dominating", "eps_dominated", "eps_dominating", "ok"});
        for (const auto& r : table.rows) {
            csv.row({std::to_string(r.n), std::to_string(r.k), format_real(r.dominated), format_real(r.dominating),
                format_real(r.eps_dominated), format_real(r.eps_dominating), r.ok ? "1" : "0"});
        }
        emit(out, cfg, "dominance.csv", csv.text());
        out.summary["rows"] = table.rows.size();
        out.summary["violations"] = table.violations();
        out.summary["passes"] = table.passes();
    }

} // namespace detail

inline RunOutput run_disordered_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    const auto rep = run_disordered({cfg.real("pi"), cfg.size("m"), cfg.real("p_c"), cfg.real("kappa"),
        cfg.size("replicas"), cfg.params.at("seed").get<std::uint64_t>(), cfg.threads});
    detail::write_regime(out, cfg, rep);
    return out;
}

inline RunOutput run_quasispecies_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    const std::size_t m = cfg.size("m");
    const std::size_t ell = cfg.size("ell") == 0 ? m : cfg.size("ell");
    const auto landscape = resolve_landscape(cfg.text("landscape"), ell);
    const auto initial = master_and_zeros(landscape.length(), m, landscape);
    const auto rep = run_quasispecies({cfg.real("pi"), cfg.real("p_c"), cfg.real("kappa"), cfg.size("replicas"),
                                          cfg.params.at("seed").get<std::uint64_t>(), cfg.threads},
        landscape, initial);
    detail::write_regime(out, cfg, rep);
    return out;
}

inline RunOutput run_sweep_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    SweepConfig sc;
    sc.m = cfg.size("m");
    sc.p_c = cfg.real("p_c");
    sc.grid = cfg.params.at("grid").get<std::vector<double>>();
    sc.kappa = cfg.real("kappa");
    sc.replicas = cfg.size("replicas");
    sc.seed = cfg.params.at("seed").get<std::uint64_t>();
    sc.threads = cfg.threads;
    const auto rows = pi_sweep(sc);
    CsvWriter csv("sweep", cfg.echo(),
        {"pi", "m", "freq_disordered", "ci_lo", "ci_hi", "freq_quasispecies", "qci_lo", "qci_hi"});
    for (const auto& r : rows) {
        csv.row({format_real(r.pi), std::to_string(r.m), format_real(r.freq_disordered), format_real(r.ci_disordered.lo),
            format_real(r.ci_disordered.hi), format_real(r.freq_quasispecies), format_real(r.ci_quasispecies.lo),
            format_real(r.ci_quasispecies.hi)});
    }
    detail::emit(out, cfg, "sweep.csv", csv.text());
    out.summary["points"] = rows.size();
    return out;
}

inline DominanceConfig dominance_config(const ExperimentConfig& cfg)
{
    DominanceConfig dc;
    dc.pi = cfg.real("pi");
    dc.m = cfg.size("m");
    dc.p_c = cfg.real("p_c");
    dc.horizon = cfg.size("horizon");
    dc.replicas = cfg.size("replicas");
    dc.seed = cfg.params.at("seed").get<std::uint64_t>();
    dc.threads = cfg.threads;
    dc.confidence = cfg.real("confidence");
    return dc;
}

inline RunOutput run_dominance_tn_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    detail::write_table(out, cfg, verify_tn_domination(dominance_config(cfg)));
    return out;
}

inline RunOutput run_dominance_nstar_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    detail::write_table(out, cfg, verify_nstar_domination(dominance_config(cfg), cfg.real("eps")));
    return out;
}

inline RunOutput run_dominance_onestep_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    const auto landscape = resolve_landscape(cfg.text("landscape"), cfg.size("ell"));
    const auto initial = master_and_zeros(landscape.length(), cfg.size("m"), landscape);
    OneStepConfig oc;
    oc.pi = cfg.real("pi");
    oc.p_c = cfg.real("p_c");
    oc.samples = cfg.size("samples");
    oc.seed = cfg.params.at("seed").get<std::uint64_t>();
    oc.threads = cfg.threads;
    oc.confidence = cfg.real("confidence");
    const auto rep = verify_one_step_dominance(oc, landscape, initial);
    detail::write_table(out, cfg, rep.table);
    out.summary["p_m"] = rep.chain.p_m;
    out.summary["tested_states"] = rep.tested;
    out.summary["vacuous_states"] = rep.vacuous;
    out.summary["short_sampled_states"] = rep.short_sampled;
    return out;
}

inline ReproductionLaw law_from_config(const ExperimentConfig& cfg)
{
    const auto law = cfg.text("law");
    if (law == "poisson") {
        return ReproductionLaw::poisson(cfg.real("lambda"));
    }
    if (law == "scaled_poisson") {
        return ReproductionLaw::scaled_poisson(cfg.size("scale"), cfg.real("lambda"));
    }
    return ReproductionLaw::nu_star(cfg.real("pi"), cfg.real("eps"));
}

inline RunOutput run_gw_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    const auto law = law_from_config(cfg);
    const std::size_t horizon = cfg.size("horizon");
    const std::size_t replicas = cfg.size("replicas");
    const auto seed = cfg.params.at("seed").get<std::uint64_t>();
    const auto extinct_at = run_indexed(replicas, cfg.threads, [&](std::size_t r) -> long {
        RandomStream rng(derive_seed(seed, r));
        const auto t = gw_simulate(law, horizon, rng);
        return t.extinct_at ? static_cast<long>(*t.extinct_at) : -1;
    });
    std::vector<double> survival(horizon + 1, 0.0);
    std::size_t extinct = 0;
    for (auto e : extinct_at) {
        const std::size_t last = e < 0 ? horizon + 1 : static_cast<std::size_t>(e);
        for (std::size_t n = 0; n < last && n <= horizon; ++n) {
            survival[n] += 1.0;
        }
        extinct += static_cast<std::size_t>(e >= 0);
    }
    CsvWriter csv("gw", cfg.echo(), {"n", "survival"});
    for (std::size_t n = 0; n <= horizon; ++n) {
        survival[n] /= static_cast<double>(replicas);
        csv.row({std::to_string(n), format_real(survival[n])});
    }
    detail::emit(out, cfg, "gw.csv", csv.text());
    const double q = gw_extinction_pgf(law);
    const double freq = static_cast<double>(extinct) / static_cast<double>(replicas);
    const double se = std::sqrt(std::max(q * (1.0 - q), freq * (1.0 - freq)) / static_cast<double>(replicas));
    out.summary["mean"] = law.mean();
    out.summary["extinction_pgf"] = q;
    out.summary["extinction_frequency"] = freq;
    out.summary["standard_error"] = se;
    out.summary["within_3se"] = std::abs(freq - q) <= 3.0 * se;
    if (law.mean() < 1.0) {
        const auto fit = fit_survival_decay(survival, replicas);
        out.summary["decay_slope"] = fit.slope;
        out.summary["decay_r2"] = fit.r2;
    }
    return out;
}

inline RunOutput run_lowerchain_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    auto params = LowerChainParams::from_pi(cfg.size("m"), cfg.real("pi"), cfg.real("ratio"), cfg.real("p_c"), cfg.size("ell"));
    params.restart_from_zero = cfg.params.at("restart_from_zero").get<bool>();
    if (params.m <= max_exact_m) {
        detail::emit(out, cfg, "matrix.txt",
            "# schema: sgalab.matrix.v1\n# config: " + cfg.echo() + "\n" + matrix_to_text(transition_matrix(params)));
    }
    RandomStream rng(cfg.params.at("seed").get<std::uint64_t>());
    const auto hit = hitting_time_tau_star(params, cfg.size("horizon"), cfg.size("replicas"), rng);
    CsvWriter csv("lowerchain", cfg.echo(), {"n", "tau_star_count"});
    for (std::size_t n = 0; n < hit.histogram.size(); ++n) {
        csv.row({std::to_string(n), std::to_string(hit.histogram[n])});
    }
    detail::emit(out, cfg, "lowerchain.csv", csv.text());
    out.summary["p_m"] = params.p_m;
    out.summary["threshold"] = params.threshold();
    out.summary["hit_frequency"] = hit.frequency;
    out.summary["ci95"] = detail::interval_json(wilson_interval(hit.hits, hit.replicas));
    return out;
}

inline RunOutput run_tune_cmd(const ExperimentConfig& cfg)
{
    RunOutput out;
    const std::size_t m = cfg.size("m");
    const std::size_t ell = cfg.size("ell") == 0 ? m : cfg.size("ell");
    const auto landscape = resolve_landscape(cfg.text("landscape"), ell);
    const auto initial = master_and_zeros(landscape.length(), m, landscape);
    const TunerPolicy policy{cfg.real("target_pi"), parse_tune_target(cfg.text("adjust")), cfg.real("p_c_min"),
        cfg.real("p_c_max"), cfg.real("p_m_min"), cfg.real("p_m_max")};
    const GaConfig ga{landscape.length(), m, cfg.real("p_c"), cfg.real("p_m"), cfg.params.at("seed").get<std::uint64_t>()};
    const auto f_star0 = cached_stats(initial, 0.0).f_star;
    const auto runs = run_indexed(cfg.size("replicas"), cfg.threads, [&](std::size_t r) {
        RandomStream rng(derive_seed(ga.seed, r));
        return run_adaptive_ga(landscape, initial, ga, policy, cfg.size("horizon"), rng, f_star0);
    });
    CsvWriter csv("telemetry", cfg.echo(), {"replica", "gen", "pi", "p_c", "p_m", "f_star", "f_bar", "feasible"});
    std::size_t infeasible = 0;
    std::size_t kept_master = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (const auto& t : runs[r].telemetry) {
            csv.row({std::to_string(r), std::to_string(t.gen), format_real(t.pi), format_real(t.p_c), format_real(t.p_m),
                format_real(t.f_star), format_real(t.f_bar), t.feasible ? "1" : "0"});
            infeasible += static_cast<std::size_t>(!t.feasible);
        }
        kept_master += static_cast<std::size_t>(runs[r].stats.back().n_at_least > 0);
    }
    detail::emit(out, cfg, "telemetry.csv", csv.text());
    out.summary["infeasible_generations"] = infeasible;
    out.summary["replicas_keeping_f_star0"] = kept_master;
    return out;
}

inline RunOutput run(const ExperimentConfig& cfg)
{
    static const std::map<std::string, RunOutput (*)(const ExperimentConfig&)> dispatch{
        {"disordered", &run_disordered_cmd},
        {"quasispecies", &run_quasispecies_cmd},
        {"sweep", &run_sweep_cmd},
        {"dominance-tn", &run_dominance_tn_cmd},
        {"dominance-nstar", &run_dominance_nstar_cmd},
        {"dominance-onestep", &run_dominance_onestep_cmd},
        {"gw", &run_gw_cmd},
        {"lowerchain", &run_lowerchain_cmd},
        {"tune", &run_tune_cmd},
    };
    auto out = dispatch.at(cfg.subcommand)(cfg);
    detail::emit_summary(out, cfg);
    return out;
}

enum ExitCode { exit_ok = 0, exit_config = 1, exit_runtime = 2 };

// Parses the document, applies overrides (key -> YAML scalar or flow text),
// and runs. Errors are reported on `err` and mapped onto exit codes.
inline int execute(const std::string& subcommand, const std::string& config_path,
    const std::vector<std::pair<std::string, std::string>>& overrides, std::ostream& err)
{
    ExperimentConfig cfg;
    try {
        YAML::Node doc(YAML::NodeType::Map);
        if (!config_path.empty()) {
            try {
                doc = YAML::LoadFile(config_path);
            } catch (const YAML::BadFile&) {
                throw ConfigError("config", "cannot read " + config_path);
            } catch (const YAML::Exception& e) {
                throw ParseError(config_path + ": " + e.what());
            }
            if (doc.IsNull()) {
                doc = YAML::Node(YAML::NodeType::Map);
            }
        }
        for (const auto& [k, v] : overrides) {
            try {
                doc[k] = YAML::Load(v);
            } catch (const YAML::Exception& e) {
                throw ConfigError(k, std::string("cannot parse value: ") + e.what());
            }
        }
        cfg = parse_config(subcommand, doc);
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    }
    try {
        const auto out = run(cfg);
        for (const auto& f : out.files) {
            err << "wrote " << f.string() << '\n';
        }
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}

} // namespace sgalab::cli
