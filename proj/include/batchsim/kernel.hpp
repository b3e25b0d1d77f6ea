#pragma once

// Synchronous fixed-step dataflow kernel.
//
// Every tick: pulse outputs are cleared, each block is evaluated once in a
// topological order computed over direct-feedthrough edges, then every block
// gets a commit() call (unit delays latch their input there). Unconnected
// inputs read 0.

#include "batchsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace batchsim
{

    enum class PortKind
    {
        Level,
        Pulse,
    };

    struct PortSpec
    {
        std::string Name;
        PortKind Kind = PortKind::Level;
    };

    // Time base. t is always recomputed from the tick index so repeated
    // stepping never accumulates rounding drift.
    class SimClock
    {
    public:
        explicit SimClock(double dt = 0.1, std::uint64_t tickIndex = 0)
            : dt_(dt), tick_(tickIndex)
        {
            if (!(dt > 0.0) || !std::isfinite(dt))
            {
                throw Error("SimClock: dt must be positive and finite");
            }
        }

        double dt() const noexcept { return dt_; }
        std::uint64_t tick_index() const noexcept { return tick_; }
        double t() const noexcept { return static_cast<double>(tick_) * dt_; }

        SimClock next() const noexcept
        {
            SimClock c = *this;
            ++c.tick_;
            return c;
        }

        friend bool operator==(SimClock const&, SimClock const&) = default;

    private:
        double dt_;
        std::uint64_t tick_;
    };

    class TickContext;

    class Block
    {
    public:
        explicit Block(std::string name) : name_(std::move(name)) {}
        virtual ~Block() = default;

        Block(Block const&) = delete;
        Block& operator=(Block const&) = delete;

        std::string const& name() const noexcept { return name_; }

        virtual std::vector<PortSpec> input_ports() const = 0;
        virtual std::vector<PortSpec> output_ports() const = 0;

        // False when outputs depend only on state from earlier ticks. Edges
        // into such a block do not constrain evaluation order, so they may
        // close a feedback cycle.
        virtual bool direct_feedthrough() const { return true; }

        virtual void evaluate(TickContext& ctx) = 0;

        // Called for every block after all evaluations of the tick.
        virtual void commit(TickContext&) {}

    private:
        std::string name_;
    };

    class TickContext
    {
    public:
        double in(std::size_t port) const
        {
            auto src = inputs_[port];
            return src < 0 ? 0.0 : values_[static_cast<std::size_t>(src)];
        }

        bool pulse(std::size_t port) const { return in(port) >= 0.5; }

        void out(std::size_t port, double value)
        {
            values_[outOffset_ + port] = value;
        }

        void emit(std::size_t port) { out(port, 1.0); }

        double current_out(std::size_t port) const
        {
            return values_[outOffset_ + port];
        }

        SimClock const& clock() const noexcept { return clock_; }

        void request_halt() noexcept { haltRequested_ = true; }

    private:
        friend class BlockGraph;
        TickContext(
            std::span<double> values,
            std::span<std::int64_t const> inputs,
            std::size_t outOffset,
            SimClock const& clock,
            bool& haltRequested
        )
            : values_(values),
              inputs_(inputs),
              outOffset_(outOffset),
              clock_(clock),
              haltRequested_(haltRequested)
        {
        }

        std::span<double> values_;
        std::span<std::int64_t const> inputs_;
        std::size_t outOffset_;
        SimClock const& clock_;
        bool& haltRequested_;
    };

    struct PortRef
    {
        std::string Block;
        std::string Port;

        // "block.PORT"
        static PortRef parse(std::string_view dotted)
        {
            auto dot = dotted.find('.');
            if (dot == std::string_view::npos || dot == 0
                || dot + 1 == dotted.size())
            {
                throw UnknownPort(
                    "malformed port reference '" + std::string(dotted)
                    + "' (expected block.PORT)"
                );
            }
            return PortRef{
                std::string(dotted.substr(0, dot)),
                std::string(dotted.substr(dot + 1))
            };
        }

        std::string str() const { return Block + "." + Port; }
    };

    struct Wire
    {
        PortRef From;
        PortRef To;
    };

    class BlockGraph
    {
    public:
        BlockGraph(BlockGraph&&) noexcept = default;
        BlockGraph& operator=(BlockGraph&&) noexcept = default;

        static BlockGraph
        build(std::vector<std::unique_ptr<Block>> blocks, std::vector<Wire> const& wires)
        {
            BlockGraph g;
            g.blocks_ = std::move(blocks);
            std::size_t const n = g.blocks_.size();
            g.nodes_.resize(n);

            std::size_t offset = 0;
            for (std::size_t i = 0; i < n; ++i)
            {
                auto& b = *g.blocks_[i];
                auto& node = g.nodes_[i];
                if (b.name().empty() || b.name().find('.') != std::string::npos)
                {
                    throw Error("invalid block name '" + b.name() + "'");
                }
                if (!g.byName_.emplace(b.name(), i).second)
                {
                    throw Error("duplicate block name '" + b.name() + "'");
                }
                node.Inputs = b.input_ports();
                node.Outputs = b.output_ports();
                check_unique_ports(b.name(), node.Inputs, "input");
                check_unique_ports(b.name(), node.Outputs, "output");
                node.OutOffset = offset;
                for (std::size_t p = 0; p < node.Outputs.size(); ++p)
                {
                    if (node.Outputs[p].Kind == PortKind::Pulse)
                    {
                        g.pulseSlots_.push_back(offset + p);
                    }
                }
                offset += node.Outputs.size();
                node.InputSources.assign(node.Inputs.size(), -1);
            }
            g.values_.assign(offset, 0.0);

            // Adjacency over direct-feedthrough edges only.
            std::vector<std::vector<std::size_t>> succ(n);
            std::vector<std::size_t> indegree(n, 0);
            for (auto const& w : wires)
            {
                auto [fromBlock, fromPort] = g.resolve(w.From, false);
                auto [toBlock, toPort] = g.resolve(w.To, true);
                auto& src = g.nodes_[toBlock].InputSources[toPort];
                if (src >= 0)
                {
                    throw MultipleDrivers(
                        "input " + w.To.str() + " already has a driver"
                    );
                }
                src = static_cast<std::int64_t>(
                    g.nodes_[fromBlock].OutOffset + fromPort
                );
                if (g.blocks_[toBlock]->direct_feedthrough())
                {
                    succ[fromBlock].push_back(toBlock);
                    ++indegree[toBlock];
                }
            }

            // Kahn's algorithm; ties resolved by insertion order.
            std::priority_queue<
                std::size_t,
                std::vector<std::size_t>,
                std::greater<>>
                ready;
            for (std::size_t i = 0; i < n; ++i)
            {
                if (indegree[i] == 0)
                {
                    ready.push(i);
                }
            }
            while (!ready.empty())
            {
                auto i = ready.top();
                ready.pop();
                g.order_.push_back(i);
                for (auto j : succ[i])
                {
                    if (--indegree[j] == 0)
                    {
                        ready.push(j);
                    }
                }
            }
            if (g.order_.size() != n)
            {
                std::string members;
                for (std::size_t i = 0; i < n; ++i)
                {
                    if (indegree[i] > 0)
                    {
                        members += (members.empty() ? "" : ", ")
                            + g.blocks_[i]->name();
                    }
                }
                throw AlgebraicLoop(
                    "cycle without a unit delay through: " + members
                );
            }
            return g;
        }

        // Advances one tick and returns the advanced clock.
        SimClock step(SimClock const& clock)
        {
            for (auto slot : pulseSlots_)
            {
                values_[slot] = 0.0;
            }
            bool haltRequested = false;
            for (auto i : order_)
            {
                auto& node = nodes_[i];
                TickContext ctx(
                    values_, node.InputSources, node.OutOffset, clock,
                    haltRequested
                );
                blocks_[i]->evaluate(ctx);
                for (std::size_t p = 0; p < node.Outputs.size(); ++p)
                {
                    if (!std::isfinite(values_[node.OutOffset + p]))
                    {
                        throw NumericFault(
                            blocks_[i]->name(), clock.tick_index()
                        );
                    }
                }
            }
            for (auto i : order_)
            {
                auto& node = nodes_[i];
                TickContext ctx(
                    values_, node.InputSources, node.OutOffset, clock,
                    haltRequested
                );
                blocks_[i]->commit(ctx);
            }
            if (haltRequested)
            {
                halted_ = true;
            }
            return clock.next();
        }

        // Steps until `stop(graph, clock)` holds after a tick, the halt flag
        // is raised, or `tickBudget` ticks have run (TickBudgetExceeded).
        template <typename Predicate>
        SimClock run_until(
            SimClock clock,
            Predicate&& stop,
            std::uint64_t tickBudget
        )
        {
            for (std::uint64_t n = 0; n < tickBudget; ++n)
            {
                if (halted_)
                {
                    return clock;
                }
                clock = step(clock);
                if (halted_ || stop(std::as_const(*this), std::as_const(clock)))
                {
                    return clock;
                }
            }
            throw TickBudgetExceeded(clock.tick_index());
        }

        bool halted() const noexcept { return halted_; }

        double value(PortRef const& ref) const
        {
            auto [b, p] = resolve(ref, false);
            return values_[nodes_[b].OutOffset + p];
        }

        double value(std::string_view dotted) const
        {
            return value(PortRef::parse(dotted));
        }

        // Flat snapshot of every output port, in block insertion order.
        std::span<double const> values() const noexcept { return values_; }

        std::vector<std::string> evaluation_order() const
        {
            std::vector<std::string> out;
            out.reserve(order_.size());
            for (auto i : order_)
            {
                out.push_back(blocks_[i]->name());
            }
            return out;
        }

        template <typename T>
        T& block(std::string_view name)
        {
            return dynamic_cast<T&>(*blocks_.at(index_of(name)));
        }

        template <typename T>
        T const& block(std::string_view name) const
        {
            return dynamic_cast<T const&>(*blocks_.at(index_of(name)));
        }

    private:
        BlockGraph() = default;

        struct Node
        {
            std::vector<PortSpec> Inputs;
            std::vector<PortSpec> Outputs;
            std::vector<std::int64_t> InputSources;
            std::size_t OutOffset = 0;
        };

        static void check_unique_ports(
            std::string const& block,
            std::vector<PortSpec> const& ports,
            char const* what
        )
        {
            for (std::size_t i = 0; i < ports.size(); ++i)
            {
                for (std::size_t j = i + 1; j < ports.size(); ++j)
                {
                    if (ports[i].Name == ports[j].Name)
                    {
                        throw Error(
                            "block '" + block + "' declares " + what
                            + " port '" + ports[i].Name + "' twice"
                        );
                    }
                }
            }
        }

        std::size_t index_of(std::string_view name) const
        {
            auto it = byName_.find(std::string(name));
            if (it == byName_.end())
            {
                throw UnknownPort("no block named '" + std::string(name) + "'");
            }
            return it->second;
        }

        std::pair<std::size_t, std::size_t>
        resolve(PortRef const& ref, bool input) const
        {
            auto b = index_of(ref.Block);
            auto const& ports = input ? nodes_[b].Inputs : nodes_[b].Outputs;
            for (std::size_t p = 0; p < ports.size(); ++p)
            {
                if (ports[p].Name == ref.Port)
                {
                    return {b, p};
                }
            }
            throw UnknownPort(
                std::string(input ? "input" : "output") + " port '"
                + ref.str() + "' does not exist"
            );
        }

        std::vector<std::unique_ptr<Block>> blocks_;
        std::vector<Node> nodes_;
        std::unordered_map<std::string, std::size_t> byName_;
        std::vector<std::size_t> order_;
        std::vector<std::size_t> pulseSlots_;
        std::vector<double> values_;
        bool halted_ = false;
    };

    // Accumulates blocks and wires, then validates them into a BlockGraph.
    class GraphBuilder
    {
    public:
        template <typename B, typename... Args>
        B& add(std::string name, Args&&... args)
        {
            auto block =
                std::make_unique<B>(std::move(name), std::forward<Args>(args)...);
            B& ref = *block;
            blocks_.push_back(std::move(block));
            return ref;
        }

        GraphBuilder& connect(std::string_view from, std::string_view to)
        {
            wires_.push_back(Wire{PortRef::parse(from), PortRef::parse(to)});
            return *this;
        }

        BlockGraph build() &&
        {
            return BlockGraph::build(std::move(blocks_), wires_);
        }

    private:
        std::vector<std::unique_ptr<Block>> blocks_;
        std::vector<Wire> wires_;
    };

} // namespace batchsim
