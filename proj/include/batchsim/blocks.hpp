#pragma once

// Generic instrument blocks: control-range scanner, timer, resettable
// integrator, multiplier, summator and report generator, plus the constant,
// pulse and unit-delay helpers the wiring needs.
//
// Each block is a thin adapter over a pure update function so the update
// rules can be tested without a graph.

#include "batchsim/errors.hpp"
#include "batchsim/kernel.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace batchsim
{

    // ---------------------------------------------------------------------
    // Scanner
    // ---------------------------------------------------------------------

    enum class ScanDirection
    {
        Ascending = 0,
        Descending = 1,
    };

    struct ScannerState
    {
        double Min = 0.0;                                  // MIN
        double Max = 0.0;                                  // MAX
        double Step = 0.0;                                 // STP
        ScanDirection Direction = ScanDirection::Ascending; // DIR
        bool StopOnBoundary = false;                       // STS
        double Current = 0.0;                              // OUT
        bool BoundaryReached = false;                      // RPT
        bool Started = false;
        std::uint64_t Index = 0;
        bool HaltRequested = false;
    };

    namespace detail
    {
        // Overshoot tolerance, relative to the step.
        inline constexpr double ScanTolerance = 1e-9;
    }

    // First strobe: OUT := MIN (ascending) or MAX (descending). Later strobes
    // move OUT by one step, clamping at the far boundary, where RPT latches
    // to 1. OUT values are computed as MIN + n*STP (never by repeated
    // addition). A strobe after RPT leaves OUT alone; with STS set it
    // requests a system halt, since it marks the end of the boundary
    // operation.
    inline ScannerState
    scanner_on_strobe(ScannerState s)
    {
        if (!s.Started)
        {
            if (!(s.Min < s.Max) || !std::isfinite(s.Min)
                || !std::isfinite(s.Max))
            {
                throw InvalidRange("scanner: MIN must be below MAX");
            }
            if (!(s.Step > 0.0) || !std::isfinite(s.Step))
            {
                throw InvalidRange("scanner: STP must be positive");
            }
            s.Started = true;
            s.Index = 0;
            s.BoundaryReached = false;
            s.HaltRequested = false;
            s.Current = s.Direction == ScanDirection::Ascending ? s.Min : s.Max;
            return s;
        }
        if (s.BoundaryReached)
        {
            if (s.StopOnBoundary)
            {
                s.HaltRequested = true;
            }
            return s;
        }
        ++s.Index;
        double const offset = static_cast<double>(s.Index) * s.Step;
        double const tol = detail::ScanTolerance * s.Step;
        if (s.Direction == ScanDirection::Ascending)
        {
            double next = s.Min + offset;
            if (next >= s.Max - tol)
            {
                next = s.Max;
                s.BoundaryReached = true;
            }
            s.Current = next;
        }
        else
        {
            double next = s.Max - offset;
            if (next <= s.Min + tol)
            {
                next = s.Min;
                s.BoundaryReached = true;
            }
            s.Current = next;
        }
        return s;
    }

    // The full OUT sequence a scanner emits before RPT.
    inline std::vector<double>
    scanner_sequence(double min, double max, double step, ScanDirection dir)
    {
        ScannerState s;
        s.Min = min;
        s.Max = max;
        s.Step = step;
        s.Direction = dir;
        std::vector<double> out;
        s = scanner_on_strobe(s);
        out.push_back(s.Current);
        while (!s.BoundaryReached)
        {
            s = scanner_on_strobe(s);
            out.push_back(s.Current);
        }
        return out;
    }

    class ScannerBlock final : public Block
    {
    public:
        enum In : std::size_t { MIN, MAX, STP, DIR, STS, STR };
        enum Out : std::size_t { OUT, RPT };

        using Block::Block;

        std::vector<PortSpec> input_ports() const override
        {
            return {
                {"MIN"}, {"MAX"}, {"STP"}, {"DIR"}, {"STS"},
                {"STR", PortKind::Pulse}
            };
        }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"OUT"}, {"RPT"}};
        }

        void evaluate(TickContext& ctx) override
        {
            if (ctx.pulse(STR))
            {
                if (!state_.Started)
                {
                    // Configuration sections are read once, at the first strobe.
                    state_.Min = ctx.in(MIN);
                    state_.Max = ctx.in(MAX);
                    state_.Step = ctx.in(STP);
                    state_.Direction = ctx.in(DIR) >= 0.5
                        ? ScanDirection::Descending
                        : ScanDirection::Ascending;
                    state_.StopOnBoundary = ctx.in(STS) >= 0.5;
                }
                bool const wasHalting = state_.HaltRequested;
                state_ = scanner_on_strobe(state_);
                if (state_.HaltRequested && !wasHalting)
                {
                    ctx.request_halt();
                }
            }
            ctx.out(OUT, state_.Started ? state_.Current : 0.0);
            ctx.out(RPT, state_.BoundaryReached ? 1.0 : 0.0);
        }

        ScannerState const& state() const noexcept { return state_; }

    private:
        ScannerState state_;
    };

    // ---------------------------------------------------------------------
    // Timer
    // ---------------------------------------------------------------------

    struct TimerState
    {
        std::optional<std::uint64_t> StartTick;
        double Measured = 0.0; // TIM
    };

    // STR is processed before FIN, so both in one tick measure zero. TIM is
    // (fin_tick - start_tick) * dt.
    inline TimerState
    timer_update(TimerState s, bool str, bool fin, SimClock const& now)
    {
        if (str)
        {
            s.StartTick = now.tick_index();
        }
        if (fin && s.StartTick)
        {
            s.Measured =
                static_cast<double>(now.tick_index() - *s.StartTick) * now.dt();
            s.StartTick.reset();
        }
        return s;
    }

    class TimerBlock final : public Block
    {
    public:
        enum In : std::size_t { STR, FIN };
        enum Out : std::size_t { TIM };

        using Block::Block;

        std::vector<PortSpec> input_ports() const override
        {
            return {{"STR", PortKind::Pulse}, {"FIN", PortKind::Pulse}};
        }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"TIM"}};
        }

        void evaluate(TickContext& ctx) override
        {
            state_ = timer_update(
                state_, ctx.pulse(STR), ctx.pulse(FIN), ctx.clock()
            );
            ctx.out(TIM, state_.Measured);
        }

        TimerState const& state() const noexcept { return state_; }

    private:
        TimerState state_;
    };

    // ---------------------------------------------------------------------
    // Integrator with reset (left rectangle rule)
    // ---------------------------------------------------------------------

    inline double
    integrator_update(double acc, double in, bool reset, double dt)
    {
        if (reset)
        {
            acc = 0.0;
        }
        return acc + in * dt;
    }

    class IntegratorBlock final : public Block
    {
    public:
        enum In : std::size_t { IN, RES };
        enum Out : std::size_t { OUT };

        using Block::Block;

        std::vector<PortSpec> input_ports() const override
        {
            return {{"IN"}, {"RES", PortKind::Pulse}};
        }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"OUT"}};
        }

        void evaluate(TickContext& ctx) override
        {
            acc_ = integrator_update(
                acc_, ctx.in(IN), ctx.pulse(RES), ctx.clock().dt()
            );
            ctx.out(OUT, acc_);
        }

    private:
        double acc_ = 0.0;
    };

    // ---------------------------------------------------------------------
    // Multiplier / summator
    // ---------------------------------------------------------------------

    inline double mult(double a, double b) { return a * b; }

    inline double sum(std::span<double const> inputs)
    {
        return std::accumulate(inputs.begin(), inputs.end(), 0.0);
    }

    class MultiplierBlock final : public Block
    {
    public:
        enum In : std::size_t { IN1, IN2 };
        enum Out : std::size_t { OUT };

        using Block::Block;

        std::vector<PortSpec> input_ports() const override
        {
            return {{"IN1"}, {"IN2"}};
        }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"OUT"}};
        }

        void evaluate(TickContext& ctx) override
        {
            ctx.out(OUT, mult(ctx.in(IN1), ctx.in(IN2)));
        }
    };

    class SummatorBlock final : public Block
    {
    public:
        SummatorBlock(std::string name, std::size_t inputs)
            : Block(std::move(name)), scratch_(inputs, 0.0)
        {
        }

        std::vector<PortSpec> input_ports() const override
        {
            std::vector<PortSpec> ports;
            for (std::size_t i = 0; i < scratch_.size(); ++i)
            {
                ports.push_back({"IN" + std::to_string(i + 1)});
            }
            return ports;
        }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"OUT"}};
        }

        void evaluate(TickContext& ctx) override
        {
            for (std::size_t i = 0; i < scratch_.size(); ++i)
            {
                scratch_[i] = ctx.in(i);
            }
            ctx.out(0, sum(scratch_));
        }

    private:
        std::vector<double> scratch_;
    };

    // ---------------------------------------------------------------------
    // Report generator
    // ---------------------------------------------------------------------

    inline constexpr std::size_t ReportChannels = 10;

    struct ReportRow
    {
        std::uint64_t Num = 0;
        std::array<double, ReportChannels> Values{};
    };

    inline std::vector<ReportRow>
    report_latch(
        std::vector<ReportRow> rows,
        bool strobe,
        std::span<double const> inputs
    )
    {
        if (inputs.size() > ReportChannels)
        {
            throw Error("report generator accepts at most 10 inputs");
        }
        if (strobe)
        {
            ReportRow row;
            row.Num = rows.empty() ? 1 : rows.back().Num + 1;
            std::copy(inputs.begin(), inputs.end(), row.Values.begin());
            rows.push_back(row);
        }
        return rows;
    }

    class ReportGeneratorBlock final : public Block
    {
    public:
        enum In : std::size_t { STR };
        enum Out : std::size_t { NUM };

        using Block::Block;

        std::vector<PortSpec> input_ports() const override
        {
            std::vector<PortSpec> ports{{"STR", PortKind::Pulse}};
            for (std::size_t i = 1; i <= ReportChannels; ++i)
            {
                ports.push_back({"IN" + std::to_string(i)});
            }
            return ports;
        }
        std::vector<PortSpec> output_ports() const override
        {
            std::vector<PortSpec> ports{{"NUM"}};
            for (std::size_t i = 1; i <= ReportChannels; ++i)
            {
                ports.push_back({"OUT" + std::to_string(i)});
            }
            return ports;
        }

        void evaluate(TickContext& ctx) override
        {
            if (ctx.pulse(STR))
            {
                std::array<double, ReportChannels> in{};
                for (std::size_t i = 0; i < ReportChannels; ++i)
                {
                    in[i] = ctx.in(1 + i);
                }
                rows_ = report_latch(std::move(rows_), true, in);
            }
            if (rows_.empty())
            {
                return; // outputs stay 0
            }
            auto const& last = rows_.back();
            ctx.out(NUM, static_cast<double>(last.Num));
            for (std::size_t i = 0; i < ReportChannels; ++i)
            {
                ctx.out(1 + i, last.Values[i]);
            }
        }

        std::vector<ReportRow> const& rows() const noexcept { return rows_; }

    private:
        std::vector<ReportRow> rows_;
    };

    // ---------------------------------------------------------------------
    // Helpers
    // ---------------------------------------------------------------------

    class ConstantBlock final : public Block
    {
    public:
        ConstantBlock(std::string name, double value)
            : Block(std::move(name)), value_(value)
        {
        }

        std::vector<PortSpec> input_ports() const override { return {}; }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"OUT"}};
        }

        void evaluate(TickContext& ctx) override { ctx.out(0, value_); }

        void set(double value) noexcept { value_ = value; }

    private:
        double value_;
    };

    // Emits a one-tick pulse at each listed tick index.
    class PulseGeneratorBlock final : public Block
    {
    public:
        PulseGeneratorBlock(std::string name, std::vector<std::uint64_t> ticks)
            : Block(std::move(name)), ticks_(std::move(ticks))
        {
        }

        std::vector<PortSpec> input_ports() const override { return {}; }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"OUT", PortKind::Pulse}};
        }

        void evaluate(TickContext& ctx) override
        {
            auto const now = ctx.clock().tick_index();
            for (auto t : ticks_)
            {
                if (t == now)
                {
                    ctx.emit(0);
                }
            }
        }

    private:
        std::vector<std::uint64_t> ticks_;
    };

    // OUT(tick n) = IN(tick n-1); OUT(0) = 0.
    class UnitDelayBlock final : public Block
    {
    public:
        explicit UnitDelayBlock(std::string name, PortKind outKind = PortKind::Level)
            : Block(std::move(name)), kind_(outKind)
        {
        }

        std::vector<PortSpec> input_ports() const override { return {{"IN"}}; }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"OUT", kind_}};
        }

        bool direct_feedthrough() const override { return false; }

        void evaluate(TickContext& ctx) override { ctx.out(0, held_); }

        void commit(TickContext& ctx) override { held_ = ctx.in(0); }

    private:
        PortKind kind_;
        double held_ = 0.0;
    };

} // namespace batchsim
