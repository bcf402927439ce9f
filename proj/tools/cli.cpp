#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "bam/batch.hpp"
#include "bam/scenario.hpp"
#include "bam/simulator.hpp"
#include "bam/training.hpp"

#ifndef BAM_DATA_DIR
#define BAM_DATA_DIR "data"
#endif

namespace bam::cli {

namespace {

struct IoFailure : Error {
    using Error::Error;
};

struct FlagConflict : Error {
    using Error::Error;
};

std::string read_input(const std::string &path) {
    try {
        return read_text_file(path);
    } catch (const Error &e) {
        throw IoFailure(e.what());
    }
}

void write_output(const std::string &path, const std::string &text, std::ostream &out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text) || !f.flush())
        throw IoFailure("cannot write '" + path + "'");
}

std::optional<bool> on_off(const std::string &text) {
    if (text.empty())
        return std::nullopt;
    if (text == "on")
        return true;
    if (text == "off")
        return false;
    throw FlagConflict("--preemption takes 'on' or 'off'");
}

std::size_t class_count(const Scenario &sc) {
    std::size_t n = 0;
    for (const auto &[link, cfg] : sc.classes)
        n = std::max(n, cfg.size());
    return n;
}

struct Flags {
    std::string scenario;
    std::string policy;
    std::string preemption;
    std::string donor_order;
    std::optional<std::uint64_t> seed;
    std::string trace_out;
    std::string metrics_out;
    std::string manager = "static";
    std::string qtable;
    std::string expected;
    std::string curve_out;
    std::size_t episodes = 0;
    std::optional<double> alpha, gamma, epsilon, epsilon_final;
    std::optional<Units> delta;
    std::optional<int> buckets;
};

RunOptions run_options(const Flags &f, const Scenario &sc) {
    RunOptions opt;
    if (!f.policy.empty()) {
        opt.policy = parse_policy_kind(f.policy);
        if (!opt.policy)
            throw FlagConflict("unknown policy '" + f.policy + "'");
    }
    opt.preemption = on_off(f.preemption);
    if (!f.donor_order.empty()) {
        if (f.donor_order == "descending")
            opt.donor_order = DonorOrder::DescendingPriority;
        else if (f.donor_order == "ascending")
            opt.donor_order = DonorOrder::AscendingPriority;
        else
            throw FlagConflict("--donor-order takes 'descending' or 'ascending'");
    }
    opt.seed = f.seed;
    const auto policy = effective_policy(sc, opt);
    if (policy.kind == PolicyKind::MAM && opt.preemption.value_or(false))
        throw FlagConflict("preemption has no meaning under mam");
    return opt;
}

ManagerConfig manager_config(const Flags &f, const Scenario &sc) {
    auto m = sc.manager;
    if (f.alpha)
        m.alpha = *f.alpha;
    if (f.gamma)
        m.gamma = *f.gamma;
    if (f.epsilon)
        m.epsilon = *f.epsilon;
    if (f.delta)
        m.delta = *f.delta;
    if (f.buckets)
        m.buckets = *f.buckets;
    if (f.seed)
        m.seed = *f.seed;
    if (!(m.alpha > 0 && m.alpha <= 1) || !(m.gamma >= 0 && m.gamma < 1) || !(m.epsilon >= 0 && m.epsilon <= 1) ||
        m.delta <= 0 || m.buckets < 1)
        throw FlagConflict("manager parameters out of range");
    return m;
}

int cmd_validate(const Flags &f, std::ostream &out) {
    auto sc = load_scenario(read_input(f.scenario));
    out << "ok: " << sc.network.nodes().size() << " nodes, " << sc.classes.size() << " directed links, "
        << (sc.workload ? sc.workload->arrivals : sc.events.size()) << (sc.workload ? " generated" : "")
        << " events\n";
    return Ok;
}

int cmd_run(const Flags &f, std::ostream &out) {
    auto sc = load_scenario(read_input(f.scenario));
    const auto opt = run_options(f, sc);
    auto kind = parse_manager_kind(f.manager);
    if (!kind)
        throw FlagConflict("unknown manager '" + f.manager + "'");
    if (*kind == ManagerKind::RL && f.qtable.empty())
        throw FlagConflict("--manager rl needs --qtable");
    if (*kind != ManagerKind::RL && !f.qtable.empty())
        throw FlagConflict("--qtable only applies to --manager rl");
    std::optional<QTable> table;
    if (!f.qtable.empty())
        table = QTable::parse(read_input(f.qtable));
    auto manager = make_manager(*kind, manager_config(f, sc), class_count(sc), table ? &*table : nullptr);
    auto result = run(sc, *manager, opt);
    write_output(f.trace_out, result.trace.to_text(), out);
    if (!f.metrics_out.empty())
        write_output(f.metrics_out, metrics_csv_header() + metrics_csv_rows(manager->name(), result.metrics), out);
    return Ok;
}

int cmd_golden(const Flags &f, std::ostream &out, std::ostream &err) {
    const auto scenario_path = f.scenario.empty() ? std::string(BAM_DATA_DIR "/golden/golden.scn") : f.scenario;
    const auto expected_path =
        f.expected.empty() ? std::string(BAM_DATA_DIR "/golden/golden_preempt.trace") : f.expected;
    auto sc = load_scenario(read_input(scenario_path));
    const auto opt = run_options(f, sc);
    auto expected = parse_trace(read_input(expected_path));
    StaticManager manager;
    auto result = run(sc, manager, opt);
    if (auto d = verify_golden(result.trace, expected)) {
        err << "golden divergence at " << d->describe() << "\n";
        return GoldenDivergence;
    }
    out << "golden trace matches (" << expected.records.size() << " records)\n";
    return Ok;
}

int cmd_train(const Flags &f, std::ostream &out) {
    if (f.episodes < 1)
        throw FlagConflict("--episodes must be at least 1");
    if (f.qtable.empty())
        throw FlagConflict("train needs --qtable for its output");
    auto sc = load_scenario(read_input(f.scenario));
    if (!sc.workload)
        throw FlagConflict("train needs a scenario with a [workload] section");
    TrainConfig tc;
    tc.manager = manager_config(f, sc);
    tc.episodes = f.episodes;
    tc.seed = f.seed.value_or(sc.manager.seed);
    tc.epsilon_final = f.epsilon_final;
    auto result = train(sc, tc);
    write_output(f.qtable, result.table.to_text(class_count(sc)), out);
    if (!f.curve_out.empty()) {
        std::string csv = "episode,epsilon,blocking_ratio\n";
        char buf[96];
        for (std::size_t ep = 0; ep < result.curve.size(); ++ep) {
            std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", ep, epsilon_at(tc, ep), result.curve[ep]);
            csv += buf;
        }
        write_output(f.curve_out, csv, out);
    }
    return Ok;
}

int cmd_compare(const Flags &f, std::ostream &out) {
    auto sc = load_scenario(read_input(f.scenario));
    if (!f.policy.empty())
        throw FlagConflict("compare runs every policy; --policy is not accepted");
    std::vector<RunJob> jobs;
    for (auto kind : {PolicyKind::MAM, PolicyKind::RDM, PolicyKind::ATCS}) {
        RunJob job;
        job.scenario = &sc;
        job.options.policy = kind;
        job.options.preemption = kind == PolicyKind::MAM ? false : on_off(f.preemption).value_or(sc.policy.preemption);
        job.options.seed = f.seed;
        jobs.push_back(job);
    }
    auto results = run_batch_parallel(jobs);
    std::string csv = metrics_csv_header();
    for (std::size_t i = 0; i < jobs.size(); ++i)
        csv += metrics_csv_rows(to_string(*jobs[i].options.policy), results[i].metrics, false);
    write_output(f.metrics_out, csv, out);
    return Ok;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    Flags f;
    CLI::App app{"Bandwidth allocation model simulator", "bamsim"};
    app.require_subcommand(1, 1);

    auto add_scenario = [&](CLI::App *sub, bool required) {
        auto *opt = sub->add_option("--scenario", f.scenario, "Scenario file");
        if (required)
            opt->required();
    };
    auto add_policy_flags = [&](CLI::App *sub) {
        sub->add_option("--preemption", f.preemption, "Override devolution: on|off");
        sub->add_option("--donor-order", f.donor_order)->group("");
    };

    auto *validate = app.add_subcommand("validate", "Check a scenario file");
    add_scenario(validate, true);

    auto *run_cmd = app.add_subcommand("run", "Simulate a scenario, write trace and metrics");
    add_scenario(run_cmd, true);
    run_cmd->add_option("--policy", f.policy, "Override policy: mam|rdm|atcs");
    add_policy_flags(run_cmd);
    run_cmd->add_option("--seed", f.seed, "Workload seed override");
    run_cmd->add_option("--trace", f.trace_out, "Trace output path (default stdout)");
    run_cmd->add_option("--metrics", f.metrics_out, "Metrics CSV output path");
    run_cmd->add_option("--manager", f.manager, "Exhaustion manager: static|random|rl");
    run_cmd->add_option("--qtable", f.qtable, "Trained q-table for --manager rl");

    auto *golden = app.add_subcommand("golden", "Re-run the golden scenario and compare with its fixture");
    add_scenario(golden, false);
    golden->add_option("--expected", f.expected, "Expected trace fixture");
    add_policy_flags(golden);

    auto *train_cmd = app.add_subcommand("train", "Train the q-learning manager on a workload scenario");
    add_scenario(train_cmd, true);
    train_cmd->add_option("--episodes", f.episodes, "Number of episodes")->required();
    train_cmd->add_option("--seed", f.seed, "Training seed");
    train_cmd->add_option("--alpha", f.alpha);
    train_cmd->add_option("--gamma", f.gamma);
    train_cmd->add_option("--epsilon", f.epsilon);
    train_cmd->add_option("--epsilon-final", f.epsilon_final, "Linear epsilon decay target");
    train_cmd->add_option("--delta", f.delta, "Transfer step in units");
    train_cmd->add_option("--buckets", f.buckets, "Utilization buckets per class");
    train_cmd->add_option("--qtable", f.qtable, "Q-table output path");
    train_cmd->add_option("--curve", f.curve_out, "Learning curve CSV output path");

    auto *compare = app.add_subcommand("compare", "Run MAM, RDM and ATCS on the same workload");
    add_scenario(compare, true);
    compare->add_option("--policy", f.policy)->group("");
    compare->add_option("--preemption", f.preemption, "Devolution for rdm/atcs: on|off");
    compare->add_option("--seed", f.seed, "Workload seed override");
    compare->add_option("--metrics", f.metrics_out, "Metrics CSV output path (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return Ok;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return InputError;
    }

    try {
        if (validate->parsed())
            return cmd_validate(f, out);
        if (run_cmd->parsed())
            return cmd_run(f, out);
        if (golden->parsed())
            return cmd_golden(f, out, err);
        if (train_cmd->parsed())
            return cmd_train(f, out);
        if (compare->parsed())
            return cmd_compare(f, out);
    } catch (const IoFailure &e) {
        err << "error: " << e.what() << "\n";
        return IoError;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return InputError;
    }
    return InputError;
}

} // namespace bam::cli
