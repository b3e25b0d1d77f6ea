// batchsim: run single operations or control-range sweeps of the batch
// heating plant and write operations.csv / summary.txt.

#include "batchsim/batchsim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace
{

    using namespace batchsim;

    struct Options
    {
        std::string Config;
        std::string Out;
        std::optional<double> K;
        std::optional<double> Dt;
        std::optional<std::string> Criterion;
        std::string Mode = "per-point";
        unsigned Threads = 0;
    };

    RunConfig load(Options const& o)
    {
        auto cfg = load_config(o.Config);
        if (o.Dt)
        {
            cfg.Sweep.Dt = *o.Dt;
        }
        if (o.Criterion)
        {
            (void)criterion_by_name(*o.Criterion);
            cfg.Sweep.Criterion = *o.Criterion;
        }
        validate(cfg.Sweep);
        return cfg;
    }

    void print_summary(SweepReport const& rep)
    {
        std::cout << summary_text(rep);
    }

    int run_once(Options const& o)
    {
        auto cfg = load(o);
        double const k = o.K.value_or(cfg.Sweep.KMin);
        auto point = run_single_operation(
            cfg.Plant, k, cfg.Sweep.Dt, cfg.Sweep.TickBudget
        );
        point.Record.Index = 1;
        SweepReport rep;
        rep.CriterionName = cfg.Sweep.Criterion;
        rep.Records.push_back(point.Record);
        rep.HeatingTimes.push_back(point.HeatingTime);
        rep.Best = find_extremum(rep.Records, criterion_by_name(rep.CriterionName));
        write_report(rep, o.Out);
        print_summary(rep);
        std::cout << "heating_time: " << format_number(point.HeatingTime) << '\n';
        return 0;
    }

    int sweep(Options const& o)
    {
        auto cfg = load(o);
        SweepOptions opt;
        opt.Mode = o.Mode == "protocol" ? SweepMode::Protocol : SweepMode::PerPoint;
        opt.Threads = o.Threads;
        auto rep = run_sweep(cfg.Plant, cfg.Sweep, opt);
        write_report(rep, o.Out);
        print_summary(rep);
        return 0;
    }

    int validate_cmd(Options const& o)
    {
        auto cfg = load(o);
        auto d = diagnose(cfg);
        std::cout << "k_min_feasible: " << format_number(d.KMinFeasible) << '\n'
                  << "predicted_operations: " << d.PredictedOperations << '\n'
                  << "oracle_heating_time_k_min: " << format_number(d.OracleAtKMin) << '\n'
                  << "oracle_heating_time_k_max: " << format_number(d.OracleAtKMax) << '\n';
        for (auto const& p : d.Problems)
        {
            std::cerr << "error: " << p << '\n';
        }
        return d.ok() ? 0 : 1;
    }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Batch heating plant simulator and control-range sweep"};
    app.require_subcommand(1, 1);

    Options o;

    auto* once = app.add_subcommand("run-once", "Simulate one operation");
    once->add_option("--config", o.Config, "Config file")->required()->check(CLI::ExistingFile);
    once->add_option("--k", o.K, "Load level (default: sweep k_min)");
    once->add_option("--out", o.Out, "Output directory")->required();
    once->add_option("--dt", o.Dt, "Step size override (s)");

    auto* sw = app.add_subcommand("sweep", "Sweep the control range");
    sw->add_option("--config", o.Config, "Config file")->required()->check(CLI::ExistingFile);
    sw->add_option("--out", o.Out, "Output directory")->required();
    sw->add_option("--criterion", o.Criterion, "Criterion override");
    sw->add_option("--dt", o.Dt, "Step size override (s)");
    sw->add_option("--mode", o.Mode, "per-point (default) or protocol")
        ->check(CLI::IsMember({"per-point", "protocol"}));
    sw->add_option("--threads", o.Threads, "Worker threads for per-point mode (0: auto)");

    auto* val = app.add_subcommand("validate", "Check a config without simulating");
    val->add_option("--config", o.Config, "Config file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (once->parsed()) return run_once(o);
        if (sw->parsed()) return sweep(o);
        if (val->parsed()) return validate_cmd(o);
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
