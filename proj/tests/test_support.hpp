#pragma once

#include "batchsim/kernel.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace testing
{

    // Records its IN port every tick.
    class ProbeBlock final : public batchsim::Block
    {
    public:
        using Block::Block;

        std::vector<batchsim::PortSpec> input_ports() const override
        {
            return {{"IN"}};
        }
        std::vector<batchsim::PortSpec> output_ports() const override
        {
            return {};
        }
        void evaluate(batchsim::TickContext& ctx) override
        {
            seen.push_back(ctx.in(0));
        }

        std::vector<double> seen;
    };

    // OUT = IN (direct feedthrough), for building loops in tests.
    class PassBlock final : public batchsim::Block
    {
    public:
        using Block::Block;

        std::vector<batchsim::PortSpec> input_ports() const override
        {
            return {{"IN"}};
        }
        std::vector<batchsim::PortSpec> output_ports() const override
        {
            return {{"OUT"}};
        }
        void evaluate(batchsim::TickContext& ctx) override
        {
            ctx.out(0, ctx.in(0));
        }
    };

    // Outputs NaN from tick `at` on.
    class FaultyBlock final : public batchsim::Block
    {
    public:
        FaultyBlock(std::string name, std::uint64_t at)
            : Block(std::move(name)), at_(at)
        {
        }

        std::vector<batchsim::PortSpec> input_ports() const override
        {
            return {};
        }
        std::vector<batchsim::PortSpec> output_ports() const override
        {
            return {{"OUT"}};
        }
        void evaluate(batchsim::TickContext& ctx) override
        {
            ctx.out(
                0, ctx.clock().tick_index() >= at_
                       ? std::numeric_limits<double>::quiet_NaN()
                       : 1.0
            );
        }

    private:
        std::uint64_t at_;
    };

    // OUT = t (a ramp).
    class RampBlock final : public batchsim::Block
    {
    public:
        using Block::Block;

        std::vector<batchsim::PortSpec> input_ports() const override
        {
            return {};
        }
        std::vector<batchsim::PortSpec> output_ports() const override
        {
            return {{"OUT"}};
        }
        void evaluate(batchsim::TickContext& ctx) override
        {
            ctx.out(0, ctx.clock().t());
        }
    };

    inline double rel_err(double a, double b)
    {
        return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
    }

} // namespace testing
