#pragma once

// Control-range sweep: one complete operation (RTB -> PTF) per scanner value,
// identified and latched by the report generator, then reduced to an
// extremum of the chosen criterion.
//
// Two execution modes produce identical reports:
//  - PerPoint: the scanner sequence is enumerated up front and every point
//    runs in its own graph (points are distributed over worker threads);
//  - Protocol: a single graph in which the scanner is strobed by the
//    delayed PTF pulse and halts the system through STS.

#include "batchsim/blocks.hpp"
#include "batchsim/econ.hpp"
#include "batchsim/errors.hpp"
#include "batchsim/kernel.hpp"
#include "batchsim/plant.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace batchsim
{

    struct SweepConfig
    {
        double KMin = 0.6;
        double KMax = 3.0;
        double KStep = 0.2;
        ScanDirection Direction = ScanDirection::Ascending;
        std::string Criterion = "efficiency_default";
        bool StopOnBoundary = true;
        std::uint64_t TickBudget = 1'000'000; // per operation
        double Dt = 0.1;
    };

    enum class SweepMode
    {
        PerPoint,
        Protocol,
    };

    struct SweepOptions
    {
        SweepMode Mode = SweepMode::PerPoint;
        unsigned Threads = 0; // 0: hardware concurrency
        IndicatorFormulas Formulas;
    };

    struct Extremum
    {
        std::size_t Index = 0;
        double ControlK = 0.0;
        double Score = 0.0;
    };

    struct SweepReport
    {
        std::vector<OperationRecord> Records; // scan order
        std::vector<double> HeatingTimes;     // parallel to Records
        std::string CriterionName;
        Extremum Best;

        // Column by name: control_k, t_op, rtv, rpv, ptv, rwv, re, pe, prf,
        // rnt, r, e, heating_time.
        std::vector<double> series(std::string_view column) const
        {
            std::vector<double> out;
            out.reserve(Records.size());
            if (column == "heating_time")
            {
                return HeatingTimes;
            }
            for (auto const& r : Records)
            {
                if (column == "control_k") out.push_back(r.ControlK);
                else if (column == "t_op") out.push_back(r.TOp);
                else if (column == "rtv") out.push_back(r.Volumes.Raw);
                else if (column == "rpv") out.push_back(r.Volumes.Energy);
                else if (column == "ptv") out.push_back(r.Volumes.Output);
                else if (column == "rwv") out.push_back(r.Volumes.Wear);
                else if (column == "re") out.push_back(r.Re);
                else if (column == "pe") out.push_back(r.Pe);
                else if (column == "prf") out.push_back(r.Prf);
                else if (column == "rnt") out.push_back(r.Rnt);
                else if (column == "r") out.push_back(r.R);
                else if (column == "e") out.push_back(r.E);
                else throw Error("unknown series '" + std::string(column) + "'");
            }
            return out;
        }
    };

    // Closed-form heat-phase duration from ambient to setpoint:
    //   h > 0:  t* = -(C/h) ln(1 - h dT / (k P_nom eta))
    //   h = 0:  t* = C dT / (k P_nom eta)
    inline double oracle_heating_time(PlantConfig const& c, double controlK)
    {
        if (!reaches_setpoint(c, controlK))
        {
            throw Infeasible(
                "load level " + std::to_string(controlK)
                + " never reaches the setpoint"
            );
        }
        double const heat = controlK * c.HeaterNominalPower * c.HeaterEfficiency;
        double const dT = c.Setpoint - c.AmbientTemp;
        if (c.LossCoeff == 0.0)
        {
            return c.HeatCapacity * dT / heat;
        }
        return -(c.HeatCapacity / c.LossCoeff)
            * std::log1p(-c.LossCoeff * dT / heat);
    }

    // Index of the highest score among valid records; equal scores go to the
    // lower control level.
    inline Extremum find_extremum(
        std::span<OperationRecord const> records,
        Criterion const& criterion
    )
    {
        bool found = false;
        Extremum best;
        for (std::size_t i = 0; i < records.size(); ++i)
        {
            auto const& r = records[i];
            if (!r.Valid)
            {
                continue;
            }
            double const s = evaluate_criterion(criterion, r);
            if (!found || s > best.Score
                || (s == best.Score && r.ControlK < best.ControlK))
            {
                best = Extremum{i, r.ControlK, s};
                found = true;
            }
        }
        if (!found)
        {
            throw NoValidRecords("no valid operation records to rank");
        }
        return best;
    }

    inline void validate(SweepConfig const& s)
    {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(s.KMin) || !(s.KMin > 0.0))
        {
            throw ValidationError("k_min", "must be positive");
        }
        if (!finite(s.KMax) || !(s.KMax > s.KMin))
        {
            throw ValidationError("k_max", "must exceed k_min");
        }
        if (!finite(s.KStep) || !(s.KStep > 0.0))
        {
            throw ValidationError("k_step", "must be positive");
        }
        if (!finite(s.Dt) || !(s.Dt > 0.0))
        {
            throw ValidationError("dt", "must be positive");
        }
        if (s.TickBudget == 0)
        {
            throw ValidationError("tick_budget", "must be positive");
        }
        (void)criterion_by_name(s.Criterion);
    }

    // Validates both configs and the sweep range against the feasible
    // control range.
    inline void check_sweep(PlantConfig const& p, SweepConfig const& s)
    {
        validate(p);
        validate(s);
        double const kFeasible = feasible_control_range(p);
        if (s.KMax < kFeasible)
        {
            throw InfeasibleRange(
                "k_max=" + std::to_string(s.KMax)
                + " is below the feasible minimum "
                + std::to_string(kFeasible)
            );
        }
        if (s.KMin < kFeasible)
        {
            throw InfeasibleRange(
                "k_min=" + std::to_string(s.KMin)
                + " is below the feasible minimum "
                + std::to_string(kFeasible)
            );
        }
    }

    namespace detail
    {
        // The subsystem around the plant, shared by both graph shapes.
        // `control` drives plant.K and report IN1, `start` plant.STR.
        inline void add_technological_subsystem(
            GraphBuilder& g,
            PlantConfig const& p,
            std::string const& control,
            std::string const& start,
            IndicatorFormulas formulas
        )
        {
            g.add<ConstantBlock>("int", p.ReleaseIntensity);
            g.add<ConstantBlock>("te", p.AmbientTemp);
            g.add<ConstantBlock>("etl", p.Setpoint);
            g.add<PlantBlock>("plant", p);
            g.connect(start, "plant.STR");
            g.connect(control, "plant.K");
            g.connect("int.OUT", "plant.INT");
            g.connect("te.OUT", "plant.TE");
            g.connect("etl.OUT", "plant.ETL");

            g.add<WearBlock>("wear", p);
            g.connect("plant.RP", "wear.IN");

            add_cost_network(
                g, p.Costs,
                CostNetworkSources{
                    "plant.RTB", "plant.PTF", "plant.RT", "plant.RP",
                    "wear.OUT", "plant.PT"
                },
                std::move(formulas)
            );

            g.add<ReportGeneratorBlock>("report");
            g.connect("plant.PTF", "report.STR");
            g.connect(control, "report.IN1");
            g.connect("timer.TIM", "report.IN2");
            g.connect("int_rt.OUT", "report.IN3");
            g.connect("int_rp.OUT", "report.IN4");
            g.connect("int_pt.OUT", "report.IN5");
            g.connect("int_rw.OUT", "report.IN6");
            g.connect("sum_re.OUT", "report.IN7");
            g.connect("mult_pt.OUT", "report.IN8");
            g.connect("ids.R", "report.IN9");
            g.connect("ids.E", "report.IN10");
        }

        inline OperationRecord
        record_from_row(ReportRow const& row, IndicatorFormulas const& f)
        {
            auto const& v = row.Values;
            auto rec = identify_operation(v[6], v[7], v[1], f);
            rec.Index = row.Num;
            rec.ControlK = v[0];
            rec.Volumes = OperationVolumes{v[2], v[3], v[4], v[5]};
            return rec;
        }

        inline std::string k_context(double k)
        {
            return "k=" + std::to_string(k);
        }
    } // namespace detail

    // One operation at a fixed load level; the start command fires at tick 0.
    inline BlockGraph build_point_graph(
        PlantConfig const& p,
        double controlK,
        IndicatorFormulas formulas = {}
    )
    {
        GraphBuilder g;
        g.add<ConstantBlock>("k", controlK);
        g.add<PulseGeneratorBlock>("start", std::vector<std::uint64_t>{0});
        detail::add_technological_subsystem(
            g, p, "k.OUT", "start.OUT", std::move(formulas)
        );
        return std::move(g).build();
    }

    // The full experiment in one graph. The scanner is strobed at tick 0 and
    // then by PTF delayed one tick; the plant start command is the strobe
    // delayed one more tick, so the scanner has already moved when the next
    // operation begins.
    inline BlockGraph build_protocol_graph(
        PlantConfig const& p,
        SweepConfig const& s,
        IndicatorFormulas formulas = {}
    )
    {
        GraphBuilder g;
        g.add<ConstantBlock>("scan_min", s.KMin);
        g.add<ConstantBlock>("scan_max", s.KMax);
        g.add<ConstantBlock>("scan_stp", s.KStep);
        g.add<ConstantBlock>(
            "scan_dir", s.Direction == ScanDirection::Descending ? 1.0 : 0.0
        );
        g.add<ConstantBlock>("scan_sts", s.StopOnBoundary ? 1.0 : 0.0);
        g.add<PulseGeneratorBlock>("start", std::vector<std::uint64_t>{0});
        g.add<UnitDelayBlock>("ptf_delay", PortKind::Pulse);
        g.add<SummatorBlock>("strobe", 2);
        g.add<ScannerBlock>("scan");
        g.add<UnitDelayBlock>("start_delay", PortKind::Pulse);

        g.connect("scan_min.OUT", "scan.MIN");
        g.connect("scan_max.OUT", "scan.MAX");
        g.connect("scan_stp.OUT", "scan.STP");
        g.connect("scan_dir.OUT", "scan.DIR");
        g.connect("scan_sts.OUT", "scan.STS");
        g.connect("start.OUT", "strobe.IN1");
        g.connect("ptf_delay.OUT", "strobe.IN2");
        g.connect("strobe.OUT", "scan.STR");
        g.connect("strobe.OUT", "start_delay.IN");
        g.connect("plant.PTF", "ptf_delay.IN");

        detail::add_technological_subsystem(
            g, p, "scan.OUT", "start_delay.OUT", std::move(formulas)
        );
        return std::move(g).build();
    }

    struct PointResult
    {
        OperationRecord Record;
        double HeatingTime = 0.0;
    };

    // Simulates exactly one operation at load level k.
    inline PointResult run_single_operation(
        PlantConfig const& p,
        double controlK,
        double dt,
        std::uint64_t tickBudget,
        IndicatorFormulas const& formulas = {}
    )
    {
        auto graph = build_point_graph(p, controlK, formulas);
        try
        {
            graph.run_until(
                SimClock(dt),
                [](BlockGraph const& gr, SimClock const&) {
                    return gr.value("report.NUM") >= 1.0;
                },
                tickBudget
            );
        }
        catch (TickBudgetExceeded const& e)
        {
            throw TickBudgetExceeded(e.Tick, detail::k_context(controlK));
        }
        auto const& plant = graph.block<PlantBlock>("plant");
        if (plant.aborted())
        {
            throw NeverReachesSetpoint(plant.last_error());
        }
        auto const& rows = graph.block<ReportGeneratorBlock>("report").rows();
        PointResult out;
        out.Record = detail::record_from_row(rows.front(), formulas);
        out.HeatingTime = plant.history().front().HeatingTime;
        return out;
    }

    inline SweepReport run_sweep(
        PlantConfig const& p,
        SweepConfig const& s,
        SweepOptions const& opt = {}
    )
    {
        check_sweep(p, s);
        auto const ks = scanner_sequence(s.KMin, s.KMax, s.KStep, s.Direction);
        SweepReport rep;
        rep.CriterionName = s.Criterion;

        if (opt.Mode == SweepMode::PerPoint)
        {
            std::vector<PointResult> results(ks.size());
            std::vector<std::exception_ptr> errors(ks.size());
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (auto i = next.fetch_add(1); i < ks.size();
                     i = next.fetch_add(1))
                {
                    try
                    {
                        results[i] = run_single_operation(
                            p, ks[i], s.Dt, s.TickBudget, opt.Formulas
                        );
                        results[i].Record.Index = i + 1;
                    }
                    catch (...)
                    {
                        errors[i] = std::current_exception();
                    }
                }
            };
            unsigned threads = opt.Threads != 0
                ? opt.Threads
                : std::max(1u, std::thread::hardware_concurrency());
            threads = static_cast<unsigned>(
                std::min<std::size_t>(threads, ks.size())
            );
            if (threads <= 1)
            {
                worker();
            }
            else
            {
                std::vector<std::jthread> pool;
                for (unsigned t = 0; t < threads; ++t)
                {
                    pool.emplace_back(worker);
                }
            }
            for (auto const& e : errors)
            {
                if (e)
                {
                    std::rethrow_exception(e);
                }
            }
            for (auto& r : results)
            {
                rep.Records.push_back(r.Record);
                rep.HeatingTimes.push_back(r.HeatingTime);
            }
        }
        else
        {
            auto graph = build_protocol_graph(p, s, opt.Formulas);
            auto const n = static_cast<double>(ks.size());
            bool const halts = s.StopOnBoundary;
            try
            {
                graph.run_until(
                    SimClock(s.Dt),
                    [halts, n](BlockGraph const& gr, SimClock const&) {
                        return !halts && gr.value("report.NUM") >= n;
                    },
                    s.TickBudget * (ks.size() + 1)
                );
            }
            catch (TickBudgetExceeded const& e)
            {
                throw TickBudgetExceeded(
                    e.Tick, detail::k_context(graph.value("scan.OUT"))
                );
            }
            auto const& plant = graph.block<PlantBlock>("plant");
            if (plant.aborted())
            {
                throw NeverReachesSetpoint(plant.last_error());
            }
            auto const& rows = graph.block<ReportGeneratorBlock>("report").rows();
            if (rows.size() != ks.size())
            {
                throw Error(
                    "protocol run produced " + std::to_string(rows.size())
                    + " operations, expected " + std::to_string(ks.size())
                );
            }
            for (auto const& row : rows)
            {
                rep.Records.push_back(detail::record_from_row(row, opt.Formulas));
            }
            for (auto const& op : plant.history())
            {
                if (op.Completed)
                {
                    rep.HeatingTimes.push_back(op.HeatingTime);
                }
            }
        }

        rep.Best = find_extremum(rep.Records, criterion_by_name(s.Criterion));
        return rep;
    }

} // namespace batchsim
