#pragma once

// Batch liquid-heating technological subsystem: an
// Idle -> Filling -> Heating -> Releasing phase machine over a lumped
// single-node thermal model, and the heater wear-rate generator.
//
// Heating follows  C dT/dt = k P_nom eta - h (T - T_amb),  integrated with
// explicit Euler at the kernel step. Wear follows the service-life law
// T = T_n k^-alpha; the wear rate is its reciprocal (life fraction per
// second) and accrues only while the heater is on.

#include "batchsim/errors.hpp"
#include "batchsim/kernel.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace batchsim
{

    struct UnitCosts
    {
        double Raw = 0.1;    // RTS, cost/kg
        double Energy = 1e-6; // RPS, cost/J
        double Wear = 500.0;  // RWS, cost/wear-unit
        double Output = 0.6;  // PTS, cost/kg
    };

    // Defaults are the reference configuration.
    struct PlantConfig
    {
        double BatchVolume = 10.0;        // kg per operation
        double FillRate = 1.0;            // kg/s
        double ReleaseIntensity = 1.0;    // INT, kg/s
        double AmbientTemp = 20.0;        // TE, degC
        double Setpoint = 70.0;           // ETL, degC
        double HeatCapacity = 41860.0;    // J/K for one batch
        double LossCoeff = 20.0;          // W/K
        double HeaterNominalPower = 2000.0; // W
        double HeaterEfficiency = 0.95;
        double WearTNominal = 3.6e6;      // s
        double WearAlpha = 4.0;
        UnitCosts Costs;
    };

    inline PlantConfig reference_plant_config() { return PlantConfig{}; }

    // Throws ValidationError naming the first offending field.
    inline void validate(PlantConfig const& c)
    {
        auto positive = [](double v, char const* field) {
            if (!(v > 0.0) || !std::isfinite(v))
            {
                throw ValidationError(field, "must be positive and finite");
            }
        };
        auto finite = [](double v, char const* field) {
            if (!std::isfinite(v))
            {
                throw ValidationError(field, "must be finite");
            }
        };
        positive(c.BatchVolume, "batch_volume");
        positive(c.FillRate, "fill_rate");
        positive(c.ReleaseIntensity, "release_intensity");
        finite(c.AmbientTemp, "ambient_temp");
        finite(c.Setpoint, "setpoint");
        if (!(c.Setpoint > c.AmbientTemp))
        {
            throw ValidationError("setpoint", "must exceed ambient_temp");
        }
        positive(c.HeatCapacity, "heat_capacity");
        if (!(c.LossCoeff >= 0.0) || !std::isfinite(c.LossCoeff))
        {
            throw ValidationError("loss_coeff", "must be non-negative and finite");
        }
        positive(c.HeaterNominalPower, "heater_nominal_power");
        if (!(c.HeaterEfficiency > 0.0 && c.HeaterEfficiency <= 1.0))
        {
            throw ValidationError("heater_efficiency", "must lie in (0, 1]");
        }
        positive(c.WearTNominal, "t_nominal");
        if (!(c.WearAlpha >= 0.0) || !std::isfinite(c.WearAlpha))
        {
            throw ValidationError("alpha", "must be non-negative and finite");
        }
        positive(c.Costs.Raw, "costs.raw");
        positive(c.Costs.Energy, "costs.energy");
        positive(c.Costs.Wear, "costs.wear");
        positive(c.Costs.Output, "costs.output");
    }

    // Life fraction consumed per second at load level k: k^alpha / T_n.
    inline double wear_rate(double controlK, PlantConfig const& c)
    {
        return std::pow(controlK, c.WearAlpha) / c.WearTNominal;
    }

    inline constexpr double FeasibilityMargin = 0.05;

    // Smallest load level that still reaches the setpoint, raised by the
    // feasibility margin. With no losses any positive feed works and the
    // margin itself is returned.
    inline double feasible_control_range(PlantConfig const& c)
    {
        double const loss = c.LossCoeff * (c.Setpoint - c.AmbientTemp);
        double const bound = loss / (c.HeaterNominalPower * c.HeaterEfficiency);
        return bound > 0.0 ? bound * (1.0 + FeasibilityMargin)
                           : FeasibilityMargin;
    }

    // True when the asymptotic temperature at load k lies above the setpoint.
    inline bool reaches_setpoint(PlantConfig const& c, double controlK)
    {
        double const heat = controlK * c.HeaterNominalPower * c.HeaterEfficiency;
        return controlK > 0.0
            && heat > c.LossCoeff * (c.Setpoint - c.AmbientTemp);
    }

    enum class PlantPhase
    {
        Idle,
        Filling,
        Heating,
        Releasing,
    };

    inline char const* to_string(PlantPhase p)
    {
        switch (p)
        {
            case PlantPhase::Idle: return "Idle";
            case PlantPhase::Filling: return "Filling";
            case PlantPhase::Heating: return "Heating";
            case PlantPhase::Releasing: return "Releasing";
        }
        return "?";
    }

    struct OperationVolumes
    {
        double Raw = 0.0;    // RTV, kg
        double Energy = 0.0; // RPV, J
        double Output = 0.0; // PTV, kg
        double Wear = 0.0;   // RWV, wear-units
    };

    struct PlantState
    {
        PlantPhase Phase = PlantPhase::Idle;
        double Temp = 0.0;         // TMP
        double MassInVessel = 0.0; // kg
        OperationVolumes Volumes;
        double LoadLevel = 0.0;    // CL
        std::uint64_t HeatTicks = 0;
        // Heat-phase duration with the setpoint crossing interpolated inside
        // the final tick; valid once RED has fired.
        double HeatingTime = 0.0;
    };

    inline PlantState initial_plant_state(PlantConfig const& c)
    {
        PlantState s;
        s.Temp = c.AmbientTemp;
        return s;
    }

    struct PulseOutputs
    {
        bool Rtb = false;
        bool Rtf = false;
        bool Red = false;
        bool Ptf = false;
    };

    // Mean flow rates over the tick; integrating them reproduces the volumes.
    struct FlowRates
    {
        double Raw = 0.0;    // kg/s
        double Energy = 0.0; // W
        double Output = 0.0; // kg/s
    };

    struct PlantTick
    {
        PlantState State;
        PulseOutputs Pulses;
        FlowRates Flows;
    };

    namespace detail
    {
        // Moves up to rate*dt of `remaining`; true when this tick finishes.
        inline bool
        transfer(double remaining, double rate, double dt, double& moved)
        {
            double const inc = rate * dt;
            if (remaining <= inc * (1.0 + 1e-9))
            {
                moved = remaining;
                return true;
            }
            moved = inc;
            return false;
        }
    } // namespace detail

    // One tick of the phase machine. An Idle plant starts an operation when
    // `start` is set: it emits RTB, resets the operation volumes, refills
    // with raw product at ambient temperature and fills during the same
    // tick. RTF, RED and PTF fire on the ticks that complete the fill, the
    // heating and the release; each following phase begins on the next tick.
    inline PlantTick plant_tick(
        PlantState s,
        PlantConfig const& c,
        double controlK,
        double dt,
        bool start = true
    )
    {
        PlantTick r;
        r.Flows = {};
        s.LoadLevel = 0.0;

        if (s.Phase == PlantPhase::Idle && start)
        {
            if (!(controlK > 0.0))
            {
                throw Error("plant: control load level must be positive");
            }
            validate(c);
            r.Pulses.Rtb = true;
            s.Phase = PlantPhase::Filling;
            s.Volumes = {};
            s.MassInVessel = 0.0;
            s.Temp = c.AmbientTemp;
            s.HeatTicks = 0;
            s.HeatingTime = 0.0;
        }

        switch (s.Phase)
        {
            case PlantPhase::Idle:
                break;

            case PlantPhase::Filling:
            {
                double moved = 0.0;
                bool done = detail::transfer(
                    c.BatchVolume - s.MassInVessel, c.FillRate, dt, moved
                );
                r.Flows.Raw = moved / dt;
                if (done)
                {
                    s.MassInVessel = c.BatchVolume;
                    s.Volumes.Raw = c.BatchVolume;
                    if (!reaches_setpoint(c, controlK))
                    {
                        throw NeverReachesSetpoint(
                            "load level " + std::to_string(controlK)
                            + " cannot lift the batch to the setpoint"
                        );
                    }
                    r.Pulses.Rtf = true;
                    s.Phase = PlantPhase::Heating;
                }
                else
                {
                    s.MassInVessel += moved;
                    s.Volumes.Raw += moved;
                }
                break;
            }

            case PlantPhase::Heating:
            {
                if (!reaches_setpoint(c, controlK))
                {
                    throw NeverReachesSetpoint(
                        "load level " + std::to_string(controlK)
                        + " cannot lift the batch to the setpoint"
                    );
                }
                double const power = controlK * c.HeaterNominalPower;
                double const wear = wear_rate(controlK, c);
                double const prev = s.Temp;
                s.Temp += dt
                    * (power * c.HeaterEfficiency
                       - c.LossCoeff * (s.Temp - c.AmbientTemp))
                    / c.HeatCapacity;
                s.Volumes.Energy += power * dt;
                s.Volumes.Wear += wear * dt;
                s.LoadLevel = controlK;
                ++s.HeatTicks;
                r.Flows.Energy = power;
                if (s.Temp >= c.Setpoint)
                {
                    double const frac = (c.Setpoint - prev) / (s.Temp - prev);
                    s.HeatingTime =
                        (static_cast<double>(s.HeatTicks - 1) + frac) * dt;
                    r.Pulses.Red = true;
                    s.Phase = PlantPhase::Releasing;
                }
                break;
            }

            case PlantPhase::Releasing:
            {
                double moved = 0.0;
                bool done = detail::transfer(
                    s.MassInVessel, c.ReleaseIntensity, dt, moved
                );
                r.Flows.Output = moved / dt;
                if (done)
                {
                    s.MassInVessel = 0.0;
                    s.Volumes.Output = c.BatchVolume;
                    r.Pulses.Ptf = true;
                    s.Phase = PlantPhase::Idle;
                }
                else
                {
                    s.MassInVessel -= moved;
                    s.Volumes.Output += moved;
                }
                break;
            }
        }
        r.State = s;
        return r;
    }

    // Per-operation bookkeeping kept by PlantBlock.
    struct OperationTrace
    {
        double ControlK = 0.0;
        double HeatingTime = 0.0;
        OperationVolumes Volumes;
        std::uint64_t RtbTick = 0;
        std::uint64_t RtfTick = 0;
        std::uint64_t RedTick = 0;
        std::uint64_t PtfTick = 0;
        bool Completed = false;
    };

    class PlantBlock final : public Block
    {
    public:
        // STR (start command) lets the control side decide when the next
        // operation begins; an Idle plant ignores ticks without it.
        enum In : std::size_t { STR, K, INT, TE, ETL };
        enum Out : std::size_t {
            RTB, RTF, RED, PTF, RT, RP, PT, TMP, CL, RTV, RPV, PTV, RWV, RWM, THT
        };

        PlantBlock(std::string name, PlantConfig config)
            : Block(std::move(name)),
              config_(config),
              state_(initial_plant_state(config))
        {
        }

        std::vector<PortSpec> input_ports() const override
        {
            return {
                {"STR", PortKind::Pulse}, {"K"}, {"INT"}, {"TE"}, {"ETL"}
            };
        }

        std::vector<PortSpec> output_ports() const override
        {
            return {
                {"RTB", PortKind::Pulse}, {"RTF", PortKind::Pulse},
                {"RED", PortKind::Pulse}, {"PTF", PortKind::Pulse},
                {"RT"}, {"RP"}, {"PT"}, {"TMP"}, {"CL"},
                {"RTV"}, {"RPV"}, {"PTV"}, {"RWV"}, {"RWM"}, {"THT"}
            };
        }

        void evaluate(TickContext& ctx) override
        {
            config_.ReleaseIntensity = ctx.in(INT);
            config_.AmbientTemp = ctx.in(TE);
            config_.Setpoint = ctx.in(ETL);
            double const k = ctx.in(K);
            auto const tick = ctx.clock().tick_index();

            PlantTick r;
            try
            {
                r = plant_tick(state_, config_, k, ctx.clock().dt(), ctx.pulse(STR));
            }
            catch (NeverReachesSetpoint const& e)
            {
                // Abort: dump the batch, flag RWM and stop the system.
                aborted_ = true;
                lastError_ = e.what();
                if (!history_.empty() && !history_.back().Completed)
                {
                    history_.pop_back();
                }
                state_ = initial_plant_state(config_);
                ctx.request_halt();
                write_outputs(ctx, PlantTick{state_, {}, {}});
                return;
            }
            state_ = r.State;

            if (r.Pulses.Rtb)
            {
                history_.push_back(OperationTrace{});
                history_.back().ControlK = k;
                history_.back().RtbTick = tick;
            }
            if (!history_.empty())
            {
                auto& op = history_.back();
                if (r.Pulses.Rtf) op.RtfTick = tick;
                if (r.Pulses.Red)
                {
                    op.RedTick = tick;
                    op.HeatingTime = state_.HeatingTime;
                }
                if (r.Pulses.Ptf)
                {
                    op.PtfTick = tick;
                    op.Volumes = state_.Volumes;
                    op.Completed = true;
                }
            }
            write_outputs(ctx, r);
        }

        PlantState const& state() const noexcept { return state_; }
        std::vector<OperationTrace> const& history() const noexcept
        {
            return history_;
        }
        bool aborted() const noexcept { return aborted_; }
        std::string const& last_error() const noexcept { return lastError_; }

    private:
        void write_outputs(TickContext& ctx, PlantTick const& r)
        {
            if (r.Pulses.Rtb) ctx.emit(RTB);
            if (r.Pulses.Rtf) ctx.emit(RTF);
            if (r.Pulses.Red) ctx.emit(RED);
            if (r.Pulses.Ptf) ctx.emit(PTF);
            ctx.out(RT, r.Flows.Raw);
            ctx.out(RP, r.Flows.Energy);
            ctx.out(PT, r.Flows.Output);
            ctx.out(TMP, state_.Temp);
            ctx.out(CL, state_.LoadLevel);
            ctx.out(RTV, state_.Volumes.Raw);
            ctx.out(RPV, state_.Volumes.Energy);
            ctx.out(PTV, state_.Volumes.Output);
            ctx.out(RWV, state_.Volumes.Wear);
            ctx.out(RWM, aborted_ ? 1.0 : 0.0);
            ctx.out(THT, state_.HeatingTime);
        }

        PlantConfig config_;
        PlantState state_;
        std::vector<OperationTrace> history_;
        bool aborted_ = false;
        std::string lastError_;
    };

    // Wear generator: IN is the current energy feed rate (W), OUT the wear rate.
    // A switched-off heater (IN <= 0) does not wear.
    class WearBlock final : public Block
    {
    public:
        enum In : std::size_t { IN };
        enum Out : std::size_t { OUT };

        WearBlock(std::string name, PlantConfig config)
            : Block(std::move(name)), config_(config)
        {
        }

        std::vector<PortSpec> input_ports() const override { return {{"IN"}}; }
        std::vector<PortSpec> output_ports() const override
        {
            return {{"OUT"}};
        }

        void evaluate(TickContext& ctx) override
        {
            double const feed = ctx.in(IN);
            ctx.out(
                OUT,
                feed > 0.0
                    ? wear_rate(feed / config_.HeaterNominalPower, config_)
                    : 0.0
            );
        }

    private:
        PlantConfig config_;
    };

} // namespace batchsim
