#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "sgalab/cli.hpp"

int main(int argc, char** argv)
{
    namespace cli = sgalab::cli;
    CLI::App app{"sgalab: simple genetic algorithm regime experiments"};
    app.require_subcommand(1);

    struct Slot {
        std::string config_path;
        std::map<std::string, std::string> values;
    };
    std::map<std::string, Slot> slots;
    std::map<std::string, CLI::App*> subs;

    for (const auto& [name, keys] : cli::subcommand_keys()) {
        auto& slot = slots[name];
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("-c,--config", slot.config_path, "YAML config file");
        auto add = [&](const cli::KeySpec& k) {
            sub->add_option("--" + k.name, slot.values[k.name], k.help);
        };
        for (const auto& k : cli::common_keys()) {
            add(k);
        }
        for (const auto& k : keys) {
            add(k);
        }
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::exit_config;
    }

    for (const auto& [name, sub] : subs) {
        if (!sub->parsed()) {
            continue;
        }
        std::vector<std::pair<std::string, std::string>> overrides;
        for (const auto& [key, value] : slots[name].values) {
            if (sub->count("--" + key) > 0) {
                overrides.emplace_back(key, value);
            }
        }
        return cli::execute(name, slots[name].config_path, overrides, std::cerr);
    }
    return cli::exit_config;
}
