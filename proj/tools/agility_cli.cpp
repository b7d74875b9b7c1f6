// Command-line front end for the downgrade testbed.

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "agility/errors.hpp"
#include "agility/harness.hpp"
#include "agility/server.hpp"
#include "agility/text.hpp"

using namespace agility;

namespace {

constexpr int kExitVulnerable = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

struct FixtureFlags {
    std::string seed = default_fixture_seed();
    std::uint32_t now = kDefaultFixtureNow;
    unsigned rsa_bits = 2048;
    std::string algorithms = "8,13";
    std::string zones_file;

    void attach(CLI::App& cmd) {
        cmd.add_option("--seed", seed, "key generation seed (default: $" + std::string(kFixtureSeedVariable) + ")");
        cmd.add_option("--now", now, "injected clock, epoch seconds")->capture_default_str();
        cmd.add_option("--rsa-bits", rsa_bits, "RSA modulus size for generated keys")->capture_default_str();
        cmd.add_option("--algorithms", algorithms, "algorithms the validator implements")->capture_default_str();
        cmd.add_option("--zones", zones_file, "zone set JSON ({\"zones\": [...]}) instead of the default fixture")
            ->check(CLI::ExistingFile);
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw std::runtime_error("cannot write " + path);
}

Fixture load_fixture(const FixtureFlags& f) {
    FixtureOptions options;
    options.seed = f.seed;
    options.now = f.now;
    options.rsa_bits = f.rsa_bits;
    options.profile = AlgorithmSupport::parse(f.algorithms);
    auto configs = f.zones_file.empty() ? default_fixture_configs() : ZoneTree::configs_from_json(read_file(f.zones_file));
    return build_fixture(std::move(configs), options);
}

std::vector<AttackScenario> load_scenarios(const Fixture& fixture, const std::vector<std::string>& ids,
                                           const std::string& file) {
    std::vector<AttackScenario> all = file.empty() ? default_scenarios(fixture) : scenarios_from_json(read_file(file));
    if (ids.empty()) return all;
    std::vector<AttackScenario> out;
    for (const auto& id : ids) {
        const auto it = std::find_if(all.begin(), all.end(), [&](const AttackScenario& s) {
            return file.empty() ? s.id == to_string(scenario_from_string(id)) : s.id == id;
        });
        if (it == all.end()) throw MutationError(MutationErrc::InvalidScenario, "no scenario '" + id + "'");
        out.push_back(*it);
    }
    return out;
}

PolicyName parse_policy(const std::string& name) {
    if (const auto p = policy_from_cli(name)) return *p;
    std::string known;
    for (const auto p : kAllPolicies) known += (known.empty() ? "" : ", ") + std::string(cli_name(p));
    throw CLI::ValidationError("--policy", "unknown policy '" + name + "' (one of " + known + ")");
}

void print_outcome(const ProbeOutcome& o, bool verbose) {
    std::cout << o.scenario << " x " << o.target << ": " << to_string(o.classification) << "\n";
    if (!o.error.empty()) std::cout << "  error: " << o.error << "\n";
    const auto& e = o.evidence;
    std::cout << "  rcode " << e.rcode << ", AD " << (e.ad ? 1 : 0) << (e.state.empty() ? "" : ", state " + e.state)
              << (e.forged_observed ? ", forged record observed" : "") << (e.downgraded_by_spec ? ", downgraded by spec" : "")
              << "\n";
    for (const auto& line : e.answer) std::cout << "  | " << line << "\n";
    if (verbose)
        for (const auto& line : e.trace) std::cout << "  trace " << line << "\n";
}

/// Blocks until SIGINT or SIGTERM. Call block_stop_signals() before starting threads.
void block_stop_signals(sigset_t& set) {
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

void wait_for_stop(const sigset_t& set) {
    int sig = 0;
    sigwait(&set, &sig);
}

std::vector<Endpoint> read_allow_list(const std::vector<std::string>& entries, const std::string& file) {
    std::vector<Endpoint> out;
    for (const auto& e : entries) out.push_back(Endpoint::parse(e));
    if (!file.empty()) {
        std::istringstream in(read_file(file));
        for (std::string line; std::getline(in, line);) {
            line.erase(0, line.find_first_not_of(" \t"));
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line.erase(line.find_last_not_of(" \t\r") + 1);
            if (!line.empty()) out.push_back(Endpoint::parse(line));
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DNSSEC algorithm-downgrade testbed: signed fixture zones, a mutating proxy, "
                 "validator policies and a scenario matrix."};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "expand help for every subcommand");

    // fixture build
    FixtureFlags fixture_flags;
    std::string fixture_out;
    auto* fixture_cmd = app.add_subcommand("fixture", "signed fixture zones")->require_subcommand(1);
    auto* fixture_build = fixture_cmd->add_subcommand("build", "build the fixture and print every zone");
    fixture_flags.attach(*fixture_build);
    fixture_build->add_option("--out", fixture_out, "also write the zone set, private keys included, as JSON");

    // attack run
    FixtureFlags attack_flags;
    std::string attack_scenario, attack_policy = "strict", attack_file;
    bool attack_expect = false, attack_json = false, attack_verbose = false;
    auto* attack_cmd = app.add_subcommand("attack", "run one scenario")->require_subcommand(1);
    auto* attack_run = attack_cmd->add_subcommand("run", "run a scenario against an in-process validator policy");
    attack_flags.attach(*attack_run);
    attack_run->add_option("--scenario", attack_scenario, "S1..S5, or an id from --scenario-file")->required();
    attack_run->add_option("--policy", attack_policy, "strict | v1-unknown-rrsig | v2-unknown-ds | v3-bogus-passthrough | v4-mismatch-skip")
        ->capture_default_str();
    attack_run->add_option("--scenario-file", attack_file, "scenario JSON ({\"scenarios\": [...]})")->check(CLI::ExistingFile);
    attack_run->add_flag("--expect-compliant", attack_expect, "exit 1 if the outcome is Vulnerable");
    attack_run->add_flag("--json", attack_json, "print the outcome as a one-cell structured report");
    attack_run->add_flag("-v,--verbose", attack_verbose, "print the validator trace");

    // matrix
    FixtureFlags matrix_flags;
    std::string matrix_out, matrix_file;
    std::vector<std::string> matrix_scenarios, matrix_policies;
    unsigned matrix_jobs = 1;
    bool matrix_expect = false, matrix_json = false;
    auto* matrix_cmd = app.add_subcommand("matrix", "run every scenario against every policy");
    matrix_flags.attach(*matrix_cmd);
    matrix_cmd->add_option("--out", matrix_out, "write the structured report here");
    matrix_cmd->add_option("--scenario", matrix_scenarios, "limit to these scenarios");
    matrix_cmd->add_option("--policy", matrix_policies, "limit to these policies");
    matrix_cmd->add_option("--scenario-file", matrix_file, "scenario JSON")->check(CLI::ExistingFile);
    matrix_cmd->add_option("-j,--jobs", matrix_jobs, "cells run in parallel")->check(CLI::Range(1u, 64u));
    matrix_cmd->add_flag("--expect-compliant", matrix_expect, "exit 1 if any cell is Vulnerable");
    matrix_cmd->add_flag("--json", matrix_json, "print the structured report instead of the table");

    // probe
    FixtureFlags probe_flags;
    std::string probe_resolver, probe_scenario = "S1", probe_proxy = "127.0.0.1:5301", probe_allow_file;
    std::vector<std::string> probe_allow;
    bool probe_attest = false, probe_expect = false;
    auto* probe_cmd = app.add_subcommand("probe", "probe a resolver you operate (it must forward the fixture zones to --proxy-listen)");
    probe_flags.attach(*probe_cmd);
    probe_cmd->add_option("--resolver", probe_resolver, "resolver address ip[:port]")->required();
    probe_cmd->add_option("--scenario", probe_scenario, "S1..S5")->capture_default_str();
    probe_cmd->add_option("--proxy-listen", probe_proxy, "where the mutating proxy listens")->capture_default_str();
    probe_cmd->add_option("--allow", probe_allow, "allow-listed resolver ip:port (repeatable)");
    probe_cmd->add_option("--allow-list", probe_allow_file, "file of allow-listed resolvers, one ip:port per line")
        ->check(CLI::ExistingFile);
    probe_cmd->add_flag("--i-control-this-resolver", probe_attest, "attest that you operate the resolver being probed");
    probe_cmd->add_flag("--expect-compliant", probe_expect, "exit 1 if the outcome is Vulnerable");

    // serve
    FixtureFlags serve_flags;
    std::string serve_listen = "127.0.0.1:" + std::to_string(kDefaultServerPort);
    auto* serve_cmd = app.add_subcommand("serve", "serve the signed fixture over UDP and TCP until interrupted");
    serve_flags.attach(*serve_cmd);
    serve_cmd->add_option("--listen", serve_listen, "ip:port")->capture_default_str();

    // proxy
    FixtureFlags proxy_flags;
    std::string proxy_listen = "127.0.0.1:5301", proxy_upstream = "127.0.0.1:" + std::to_string(kDefaultServerPort);
    std::string proxy_scenario, proxy_file;
    bool proxy_servfail = false;
    auto* proxy_cmd = app.add_subcommand("proxy", "run the mutating proxy in front of an authority until interrupted");
    proxy_flags.attach(*proxy_cmd);
    proxy_cmd->add_option("--listen", proxy_listen, "ip:port")->capture_default_str();
    proxy_cmd->add_option("--upstream", proxy_upstream, "authority ip:port")->capture_default_str();
    proxy_cmd->add_option("--scenario", proxy_scenario, "apply this scenario's rules (none: transparent)");
    proxy_cmd->add_option("--scenario-file", proxy_file, "scenario JSON")->check(CLI::ExistingFile);
    proxy_cmd->add_flag("--servfail-on-timeout", proxy_servfail, "answer SERVFAIL when upstream is silent");

    // scenarios
    FixtureFlags scenarios_flags;
    std::string scenarios_out;
    auto* scenarios_cmd = app.add_subcommand("scenarios", "print the scenario catalog for the fixture as JSON");
    scenarios_flags.attach(*scenarios_cmd);
    scenarios_cmd->add_option("--out", scenarios_out, "write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (fixture_build->parsed()) {
            const Fixture fixture = load_fixture(fixture_flags);
            std::cout << "; fixture " << fixture.hash() << " seed " << fixture.seed << " now " << fixture.now << "\n";
            for (const auto& zone : fixture.tree.zones()) {
                std::cout << "\n; zone " << zone.apex().to_string() << (zone.is_signed() ? "" : " (unsigned)") << "\n";
                for (const auto& [key, rrset] : zone.rrsets()) {
                    for (const auto& rr : rrset.records) std::cout << to_text(rr) << "\n";
                    for (const auto& rr : rrset.signatures) std::cout << to_text(rr) << "\n";
                }
            }
            if (!fixture_out.empty()) {
                const auto configs = fixture.configs_with_keys();
                write_file(fixture_out, ZoneTree::configs_to_json(configs));
                std::cerr << "wrote " << fixture_out << "\n";
            }
            return 0;
        }

        if (attack_run->parsed()) {
            const PolicyName policy = parse_policy(attack_policy);
            const Fixture fixture = load_fixture(attack_flags);
            const auto scenario = load_scenarios(fixture, {attack_scenario}, attack_file).front();
            const ProbeTarget target = InProcessTarget{policy};
            const auto report = run_matrix(std::span(&scenario, 1), std::span(&target, 1), fixture);
            const auto& outcome = report.cells.front();
            if (attack_json) std::cout << report.to_json();
            else print_outcome(outcome, attack_verbose);
            if (outcome.classification == Classification::Error) return kExitFailure;
            return attack_expect && outcome.classification == Classification::Vulnerable ? kExitVulnerable : 0;
        }

        if (matrix_cmd->parsed()) {
            const Fixture fixture = load_fixture(matrix_flags);
            const auto scenarios = load_scenarios(fixture, matrix_scenarios, matrix_file);
            std::vector<ProbeTarget> targets;
            for (const auto& p : matrix_policies) targets.push_back(InProcessTarget{parse_policy(p)});
            if (targets.empty()) targets = default_targets();
            RunOptions options;
            options.jobs = matrix_jobs;
            const auto report = run_matrix(scenarios, targets, fixture, options);
            if (!matrix_out.empty()) write_file(matrix_out, report.to_json());
            std::cout << (matrix_json ? report.to_json() : report.to_table());
            return matrix_expect && report.any(Classification::Vulnerable) ? kExitVulnerable : 0;
        }

        if (probe_cmd->parsed()) {
            const Endpoint resolver = Endpoint::parse(probe_resolver);
            RunOptions options;
            options.gate = {probe_attest, read_allow_list(probe_allow, probe_allow_file)};
            try {
                check_external_allowed(resolver, options.gate);
            } catch (const HarnessError& e) {
                std::cerr << "refused: " << e.what() << "\n"
                          << "Probing sends forged DNSSEC data through a resolver. Only probe resolvers you operate:\n"
                          << "pass --i-control-this-resolver and list the resolver with --allow or --allow-list.\n";
                return kExitUsage;
            }
            const Fixture fixture = load_fixture(probe_flags);
            const auto scenario = load_scenarios(fixture, {probe_scenario}, "").front();
            const auto outcome = run_scenario(scenario, ExternalTarget{resolver, Endpoint::parse(probe_proxy)}, fixture, options);
            print_outcome(outcome, false);
            if (outcome.classification == Classification::Error) return kExitFailure;
            return probe_expect && outcome.classification == Classification::Vulnerable ? kExitVulnerable : 0;
        }

        if (serve_cmd->parsed()) {
            const Fixture fixture = load_fixture(serve_flags);
            sigset_t stop;
            block_stop_signals(stop);
            auto listener = serve(Endpoint::parse(serve_listen), fixture.tree);
            std::cerr << "serving fixture " << fixture.hash().substr(0, 12) << " on " << listener->endpoint().to_string()
                      << " (udp+tcp); trust anchor:\n";
            for (const auto& key : fixture.anchor.keys)
                std::cerr << "  " << to_text(ResourceRecord::make(fixture.anchor.zone, 3600, key)) << "\n";
            wait_for_stop(stop);
            listener->stop();
            return 0;
        }

        if (proxy_cmd->parsed()) {
            std::vector<MutationRule> rules;
            if (!proxy_scenario.empty()) {
                const Fixture fixture = load_fixture(proxy_flags);
                rules = load_scenarios(fixture, {proxy_scenario}, proxy_file).front().rules;
            }
            ProxyOptions options;
            options.context.now = proxy_flags.now;
            options.servfail_on_timeout = proxy_servfail;
            sigset_t stop;
            block_stop_signals(stop);
            auto listener = start_proxy(Endpoint::parse(proxy_listen), Endpoint::parse(proxy_upstream), rules, options);
            std::cerr << "proxy " << listener->endpoint().to_string() << " -> " << proxy_upstream << ", " << rules.size()
                      << " rule(s)\n";
            for (const auto& r : rules) std::cerr << "  " << r.describe() << "\n";
            wait_for_stop(stop);
            listener->stop();
            return 0;
        }

        if (scenarios_cmd->parsed()) {
            const Fixture fixture = load_fixture(scenarios_flags);
            const auto text = scenarios_to_json(default_scenarios(fixture)) + "\n";
            if (scenarios_out.empty()) std::cout << text;
            else write_file(scenarios_out, text);
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == NetErrc::BadEndpoint ? kExitUsage : kExitFailure;
    } catch (const MutationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == MutationErrc::InvalidScenario ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
