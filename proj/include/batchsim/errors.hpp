#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace batchsim
{

    // Root of every error raised by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Graph construction.
    class UnknownPort : public Error
    {
    public:
        using Error::Error;
    };

    class MultipleDrivers : public Error
    {
    public:
        using Error::Error;
    };

    class AlgebraicLoop : public Error
    {
    public:
        using Error::Error;
    };

    // Execution.
    class NumericFault : public Error
    {
    public:
        NumericFault(std::string block, std::uint64_t tick)
            : Error(
                  "non-finite output from block '" + block + "' at tick "
                  + std::to_string(tick)
              ),
              Block(std::move(block)),
              Tick(tick)
        {
        }
        std::string Block;
        std::uint64_t Tick;
    };

    class TickBudgetExceeded : public Error
    {
    public:
        TickBudgetExceeded(std::uint64_t tick, std::string const& context = {})
            : Error(
                  "tick budget exhausted at tick " + std::to_string(tick)
                  + (context.empty() ? std::string{} : " (" + context + ")")
              ),
              Tick(tick)
        {
        }
        std::uint64_t Tick;
    };

    class InvalidRange : public Error
    {
    public:
        using Error::Error;
    };

    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    class NeverReachesSetpoint : public Error
    {
    public:
        using Error::Error;
    };

    class NoValidRecords : public Error
    {
    public:
        using Error::Error;
    };

    class InfeasibleRange : public Error
    {
    public:
        using Error::Error;
    };

    class Infeasible : public Error
    {
    public:
        using Error::Error;
    };

    class ParseError : public Error
    {
    public:
        using Error::Error;
    };

    class ValidationError : public Error
    {
    public:
        ValidationError(std::string field, std::string const& constraint)
            : Error("invalid '" + field + "': " + constraint),
              Field(std::move(field))
        {
        }
        std::string Field;
    };

    class IoError : public Error
    {
    public:
        using Error::Error;
    };

} // namespace batchsim
