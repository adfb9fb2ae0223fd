// galerkin: batch front end for the verifiers and experiments.
//
//   galerkin <command> [--config file.json] [--threads N] [--key value ...]
//
// Every configuration key of a command is also accepted as --key.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "galerkin/harness.hpp"

namespace {

using galerkin::Json;

// Flag text to JSON, guided by the type of the default.
Json parse_value(const std::string& key, const std::string& text, const Json& like) {
    Json v;
    try {
        v = Json::parse(text);
    } catch (const Json::parse_error&) {
        if (!like.is_string()) throw galerkin::ConfigError("cannot parse value of --" + key + ": '" + text + "'");
        v = text;
    }
    if (like.is_string() && !v.is_string()) v = text;
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral Galerkin verifiers for 2D stochastic Navier-Stokes on the beta-plane"};
    app.set_version_flag("--version", std::string(galerkin::kVersionString));
    app.require_subcommand(1, 1);

    struct Sub {
        CLI::App* app;
        std::string config_file;
        int threads = 0;
        std::map<std::string, std::string> flags;
    };
    std::map<std::string, Sub> subs;
    for (const auto& name : galerkin::commands()) {
        auto& s = subs[name];
        s.app = app.add_subcommand(name, "run the " + name + " command");
        s.app->add_option("--config", s.config_file, "JSON configuration file")->check(CLI::ExistingFile);
        s.app->add_option("--threads", s.threads, "worker threads (default: GALERKIN_THREADS or hardware)")
            ->check(CLI::PositiveNumber);
        const auto defaults = galerkin::default_config(name);
        for (auto& [key, value] : defaults.items())
            s.app->add_option("--" + key, s.flags[key], "default " + value.dump());
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : galerkin::kExitUsage;
    }

    for (auto& [name, s] : subs) {
        if (!s.app->parsed()) continue;
        Json overrides = Json::object();
        try {
            if (!s.config_file.empty()) {
                std::ifstream in(s.config_file);
                overrides = Json::parse(in);
                if (!overrides.is_object()) throw galerkin::ConfigError("configuration file must hold a JSON object");
            }
            const auto defaults = galerkin::default_config(name);
            for (const auto& [key, text] : s.flags)
                if (s.app->count("--" + key) > 0) overrides[key] = parse_value(key, text, defaults.at(key));
        } catch (const std::exception& e) {
            std::cerr << "usage error: " << e.what() << '\n';
            return galerkin::kExitUsage;
        }
        if (s.threads > 0) setenv("GALERKIN_THREADS", std::to_string(s.threads).c_str(), 1);
        try {
            return galerkin::run(name, overrides);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return galerkin::kExitFail;
        }
    }
    return galerkin::kExitUsage;
}
