#pragma once

// Operation identification and the cost-aggregation network that
// feeds it. Three key indicators describe an operation: the cost estimate of
// its inputs (RE), of its outputs (PE) and its duration (TO). Everything else
// is derived from them:
//
//   PRF = PE - RE            value added
//   RNT = PRF / RE           profitability
//   R   = RE * TO            resource intensity  (default, pluggable)
//   E   = PRF / (RE * TO)    efficiency          (default, pluggable)

#include "batchsim/blocks.hpp"
#include "batchsim/errors.hpp"
#include "batchsim/kernel.hpp"
#include "batchsim/plant.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace batchsim
{

    using IndicatorFn = std::function<double(double re, double pe, double tOp)>;

    inline double default_resource_intensity(double re, double, double tOp)
    {
        return re * tOp;
    }

    inline double default_efficiency(double re, double pe, double tOp)
    {
        return (pe - re) / (re * tOp);
    }

    struct IndicatorFormulas
    {
        IndicatorFn ResourceIntensity = default_resource_intensity;
        IndicatorFn Efficiency = default_efficiency;
    };

    struct OperationRecord
    {
        std::uint64_t Index = 0;  // NUM, 1-based
        double ControlK = 0.0;
        double TOp = 0.0;         // TO, s
        double Re = 0.0;
        double Pe = 0.0;
        double Prf = 0.0;
        double Rnt = 0.0;
        double R = 0.0;
        double E = 0.0;
        OperationVolumes Volumes;
        // False when RE or TO is zero; derived indicators are then NaN.
        bool Valid = false;
    };

    struct CostEstimate
    {
        double Re = 0.0;
        double Pe = 0.0;
    };

    // Closed-form counterpart of the multiplier/summator network.
    inline CostEstimate
    aggregate_costs(OperationVolumes const& v, UnitCosts const& c)
    {
        return CostEstimate{
            c.Raw * v.Raw + c.Energy * v.Energy + c.Wear * v.Wear,
            c.Output * v.Output
        };
    }

    // Fills the derived indicators from the key ones. Degenerate operations
    // (RE or TO not positive) come back with Valid = false and NaN
    // indicators instead of an exception, so sweep logs keep the gap.
    inline OperationRecord identify_operation(
        double re,
        double pe,
        double tOp,
        IndicatorFormulas const& formulas = {}
    )
    {
        OperationRecord r;
        r.Re = re;
        r.Pe = pe;
        r.TOp = tOp;
        r.Valid = re > 0.0 && tOp > 0.0 && std::isfinite(re)
            && std::isfinite(pe) && std::isfinite(tOp);
        if (!r.Valid)
        {
            constexpr double nan = std::numeric_limits<double>::quiet_NaN();
            r.Prf = r.Rnt = r.R = r.E = nan;
            return r;
        }
        r.Prf = pe - re;
        r.Rnt = r.Prf / re;
        r.R = formulas.ResourceIntensity(re, pe, tOp);
        r.E = formulas.Efficiency(re, pe, tOp);
        return r;
    }

    // ---------------------------------------------------------------------
    // Criteria
    // ---------------------------------------------------------------------

    // A scalar score over the key indicators; higher is better.
    struct Criterion
    {
        std::string Name;
        IndicatorFn Score;
    };

    inline std::vector<Criterion> const& builtin_criteria()
    {
        static std::vector<Criterion> const all{
            {"efficiency_default", default_efficiency},
            {"value_added", [](double re, double pe, double) { return pe - re; }},
            {"profitability",
             [](double re, double pe, double) { return (pe - re) / re; }},
            {"neg_cost", [](double re, double, double) { return -re; }},
        };
        return all;
    }

    inline Criterion const& criterion_by_name(std::string_view name)
    {
        for (auto const& c : builtin_criteria())
        {
            if (c.Name == name)
            {
                return c;
            }
        }
        std::string known;
        for (auto const& c : builtin_criteria())
        {
            known += (known.empty() ? "" : ", ") + c.Name;
        }
        throw ValidationError(
            "criterion", "unknown criterion '" + std::string(name)
                + "' (known: " + known + ")"
        );
    }

    inline double
    evaluate_criterion(Criterion const& c, OperationRecord const& r)
    {
        if (!r.Valid)
        {
            throw Error("criterion '" + c.Name + "' evaluated on an invalid record");
        }
        return c.Score(r.Re, r.Pe, r.TOp);
    }

    // ---------------------------------------------------------------------
    // Blocks
    // ---------------------------------------------------------------------

    // Operation identifier. Indicators are computed once per FIN pulse and held. Invalid
    // operations output 0 with VLD = 0 (the kernel rejects NaN signals).
    class IdentifierBlock final : public Block
    {
    public:
        enum In : std::size_t { RE, PE, FIN, TO };
        enum Out : std::size_t { PRF, RNT, R, E, VLD };

        explicit IdentifierBlock(std::string name, IndicatorFormulas formulas = {})
            : Block(std::move(name)), formulas_(std::move(formulas))
        {
        }

        std::vector<PortSpec> input_ports() const override
        {
            return {{"RE"}, {"PE"}, {"FIN", PortKind::Pulse}, {"TO"}};
        }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"PRF"}, {"RNT"}, {"R"}, {"E"}, {"VLD"}};
        }

        void evaluate(TickContext& ctx) override
        {
            if (!ctx.pulse(FIN))
            {
                return;
            }
            auto rec = identify_operation(
                ctx.in(RE), ctx.in(PE), ctx.in(TO), formulas_
            );
            rec.Index = log_.size() + 1;
            log_.push_back(rec);
            ctx.out(PRF, rec.Valid ? rec.Prf : 0.0);
            ctx.out(RNT, rec.Valid ? rec.Rnt : 0.0);
            ctx.out(R, rec.Valid ? rec.R : 0.0);
            ctx.out(E, rec.Valid ? rec.E : 0.0);
            ctx.out(VLD, rec.Valid ? 1.0 : 0.0);
        }

        std::vector<OperationRecord> const& log() const noexcept { return log_; }

    private:
        IndicatorFormulas formulas_;
        std::vector<OperationRecord> log_;
    };

    // Block names used by add_cost_network.
    namespace cost_net
    {
        inline constexpr std::array<char const*, 4> Channels{"rt", "rp", "rw", "pt"};
        inline constexpr char const* Timer = "timer";
        inline constexpr char const* Sum = "sum_re";
        inline constexpr char const* Identifier = "ids";

        inline std::string integrator(std::string_view ch)
        {
            return "int_" + std::string(ch);
        }
        inline std::string multiplier(std::string_view ch)
        {
            return "mult_" + std::string(ch);
        }
        inline std::string unit_cost(std::string_view ch)
        {
            return "cost_" + std::string(ch);
        }
    } // namespace cost_net

    // Output ports ("block.PORT") that drive the cost network.
    struct CostNetworkSources
    {
        std::string Start;      // start of raw product feed (pulse)
        std::string Finish;     // completion of output release (pulse)
        std::string RawFlow;    // kg/s
        std::string EnergyFlow; // W
        std::string WearFlow;   // wear-units/s
        std::string OutputFlow; // kg/s
    };

    // Timer between Start and Finish; one integrator per flow, reset on
    // Start; each volume multiplied by its unit cost; the three input costs
    // summed into RE, the output cost is PE; the identifier fires on Finish.
    inline void add_cost_network(
        GraphBuilder& g,
        UnitCosts const& costs,
        CostNetworkSources const& src,
        IndicatorFormulas formulas = {}
    )
    {
        using namespace cost_net;
        g.add<TimerBlock>(Timer);
        g.connect(src.Start, std::string(Timer) + ".STR");
        g.connect(src.Finish, std::string(Timer) + ".FIN");

        std::array<std::string const*, 4> flows{
            &src.RawFlow, &src.EnergyFlow, &src.WearFlow, &src.OutputFlow
        };
        std::array<double, 4> unit{costs.Raw, costs.Energy, costs.Wear, costs.Output};
        for (std::size_t i = 0; i < Channels.size(); ++i)
        {
            auto const ch = Channels[i];
            g.add<IntegratorBlock>(integrator(ch));
            g.connect(*flows[i], integrator(ch) + ".IN");
            g.connect(src.Start, integrator(ch) + ".RES");
            g.add<ConstantBlock>(unit_cost(ch), unit[i]);
            g.add<MultiplierBlock>(multiplier(ch));
            g.connect(integrator(ch) + ".OUT", multiplier(ch) + ".IN1");
            g.connect(unit_cost(ch) + ".OUT", multiplier(ch) + ".IN2");
        }
        g.add<SummatorBlock>(Sum, 3);
        g.connect(multiplier("rt") + ".OUT", std::string(Sum) + ".IN1");
        g.connect(multiplier("rp") + ".OUT", std::string(Sum) + ".IN2");
        g.connect(multiplier("rw") + ".OUT", std::string(Sum) + ".IN3");

        g.add<IdentifierBlock>(Identifier, std::move(formulas));
        g.connect(std::string(Sum) + ".OUT", std::string(Identifier) + ".RE");
        g.connect(multiplier("pt") + ".OUT", std::string(Identifier) + ".PE");
        g.connect(src.Finish, std::string(Identifier) + ".FIN");
        g.connect(std::string(Timer) + ".TIM", std::string(Identifier) + ".TO");
    }

} // namespace batchsim
