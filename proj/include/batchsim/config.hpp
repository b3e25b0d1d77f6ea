#pragma once

// Run configuration: a flat INI document with [plant], [wear], [costs] and
// [sweep] sections, one key per line. Unknown sections or keys are rejected.
//
//   [plant]
//   batch_volume = 10
//   ...
//   [sweep]
//   k_min = 0.6

#include "batchsim/blocks.hpp"
#include "batchsim/econ.hpp"
#include "batchsim/errors.hpp"
#include "batchsim/harness.hpp"
#include "batchsim/plant.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace batchsim
{

    struct RunConfig
    {
        PlantConfig Plant;
        SweepConfig Sweep;
    };

    namespace detail
    {
        inline double parse_real(std::string const& field, std::string const& text)
        {
            double v = 0.0;
            auto const* first = text.data();
            auto const* last = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last || text.empty())
            {
                throw ValidationError(field, "expected a number, got '" + text + "'");
            }
            return v;
        }

        inline bool parse_flag(std::string const& field, std::string const& text)
        {
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            throw ValidationError(field, "expected true/false, got '" + text + "'");
        }

        inline std::uint64_t
        parse_count(std::string const& field, std::string const& text)
        {
            std::uint64_t v = 0;
            auto const* last = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(text.data(), last, v);
            if (ec != std::errc{} || ptr != last || text.empty())
            {
                throw ValidationError(
                    field, "expected a non-negative integer, got '" + text + "'"
                );
            }
            return v;
        }

        using Setter = std::function<void(RunConfig&, std::string const&)>;

        struct KeySpec
        {
            Setter Set;
            bool Required;
        };

        inline std::map<std::string, KeySpec> const& config_keys()
        {
            auto real = [](double PlantConfig::*m, std::string key) {
                return KeySpec{
                    [m, key](RunConfig& c, std::string const& v) {
                        c.Plant.*m = parse_real(key, v);
                    },
                    true
                };
            };
            auto cost = [](double UnitCosts::*m, std::string key) {
                return KeySpec{
                    [m, key](RunConfig& c, std::string const& v) {
                        c.Plant.Costs.*m = parse_real(key, v);
                    },
                    true
                };
            };
            auto sweepReal = [](double SweepConfig::*m, std::string key, bool req) {
                return KeySpec{
                    [m, key](RunConfig& c, std::string const& v) {
                        c.Sweep.*m = parse_real(key, v);
                    },
                    req
                };
            };
            static std::map<std::string, KeySpec> const keys{
                {"plant.batch_volume", real(&PlantConfig::BatchVolume, "batch_volume")},
                {"plant.fill_rate", real(&PlantConfig::FillRate, "fill_rate")},
                {"plant.release_intensity",
                 real(&PlantConfig::ReleaseIntensity, "release_intensity")},
                {"plant.ambient_temp", real(&PlantConfig::AmbientTemp, "ambient_temp")},
                {"plant.setpoint", real(&PlantConfig::Setpoint, "setpoint")},
                {"plant.heat_capacity", real(&PlantConfig::HeatCapacity, "heat_capacity")},
                {"plant.loss_coeff", real(&PlantConfig::LossCoeff, "loss_coeff")},
                {"plant.heater_nominal_power",
                 real(&PlantConfig::HeaterNominalPower, "heater_nominal_power")},
                {"plant.heater_efficiency",
                 real(&PlantConfig::HeaterEfficiency, "heater_efficiency")},
                {"wear.t_nominal", real(&PlantConfig::WearTNominal, "t_nominal")},
                {"wear.alpha", real(&PlantConfig::WearAlpha, "alpha")},
                {"costs.raw", cost(&UnitCosts::Raw, "costs.raw")},
                {"costs.energy", cost(&UnitCosts::Energy, "costs.energy")},
                {"costs.wear", cost(&UnitCosts::Wear, "costs.wear")},
                {"costs.output", cost(&UnitCosts::Output, "costs.output")},
                {"sweep.k_min", sweepReal(&SweepConfig::KMin, "k_min", true)},
                {"sweep.k_max", sweepReal(&SweepConfig::KMax, "k_max", true)},
                {"sweep.k_step", sweepReal(&SweepConfig::KStep, "k_step", true)},
                {"sweep.dt", sweepReal(&SweepConfig::Dt, "dt", false)},
                {"sweep.direction",
                 KeySpec{
                     [](RunConfig& c, std::string const& v) {
                         if (v == "ascending" || v == "0")
                             c.Sweep.Direction = ScanDirection::Ascending;
                         else if (v == "descending" || v == "1")
                             c.Sweep.Direction = ScanDirection::Descending;
                         else
                             throw ValidationError(
                                 "direction",
                                 "expected ascending/descending, got '" + v + "'"
                             );
                     },
                     false}},
                {"sweep.criterion",
                 KeySpec{
                     [](RunConfig& c, std::string const& v) {
                         (void)criterion_by_name(v);
                         c.Sweep.Criterion = v;
                     },
                     false}},
                {"sweep.stop_on_boundary",
                 KeySpec{
                     [](RunConfig& c, std::string const& v) {
                         c.Sweep.StopOnBoundary = parse_flag("stop_on_boundary", v);
                     },
                     false}},
                {"sweep.tick_budget",
                 KeySpec{
                     [](RunConfig& c, std::string const& v) {
                         c.Sweep.TickBudget = parse_count("tick_budget", v);
                     },
                     false}},
            };
            return keys;
        }
    } // namespace detail

    // Throws ParseError for malformed documents and ValidationError for
    // unknown, missing or out-of-range fields.
    inline RunConfig parse_config(std::string const& text)
    {
        namespace pt = boost::property_tree;
        pt::ptree tree;
        std::istringstream in(text);
        try
        {
            pt::read_ini(in, tree);
        }
        catch (pt::ini_parser_error const& e)
        {
            throw ParseError(
                "config line " + std::to_string(e.line()) + ": " + e.message()
            );
        }

        auto const& keys = detail::config_keys();
        RunConfig cfg;
        std::set<std::string> seen;
        for (auto const& [section, body] : tree)
        {
            if (body.empty())
            {
                throw ValidationError(section, "key outside of any section");
            }
            for (auto const& [key, value] : body)
            {
                std::string const full = section + "." + key;
                auto it = keys.find(full);
                if (it == keys.end())
                {
                    throw ValidationError(full, "unknown key");
                }
                it->second.Set(cfg, value.data());
                seen.insert(full);
            }
        }
        for (auto const& [name, spec] : keys)
        {
            if (spec.Required && !seen.contains(name))
            {
                throw ValidationError(name, "missing required key");
            }
        }
        validate(cfg.Plant);
        validate(cfg.Sweep);
        return cfg;
    }

    inline RunConfig load_config(std::string const& path)
    {
        std::ifstream f(path);
        if (!f)
        {
            throw IoError("cannot open config '" + path + "'");
        }
        std::stringstream buf;
        buf << f.rdbuf();
        return parse_config(buf.str());
    }

    // Checks a configuration without simulating.
    struct Diagnostics
    {
        double KMinFeasible = 0.0;
        std::size_t PredictedOperations = 0;
        double OracleAtKMin = std::numeric_limits<double>::quiet_NaN();
        double OracleAtKMax = std::numeric_limits<double>::quiet_NaN();
        std::vector<std::string> Problems;

        bool ok() const noexcept { return Problems.empty(); }
    };

    inline Diagnostics diagnose(RunConfig const& cfg)
    {
        Diagnostics d;
        auto const& p = cfg.Plant;
        auto const& s = cfg.Sweep;
        d.KMinFeasible = feasible_control_range(p);
        d.PredictedOperations =
            scanner_sequence(s.KMin, s.KMax, s.KStep, s.Direction).size();
        auto endpoint = [&](double k, char const* name, double& oracle) {
            if (k < d.KMinFeasible)
            {
                std::ostringstream msg;
                msg << name << "=" << k << " is below the feasible minimum "
                    << d.KMinFeasible;
                d.Problems.push_back(msg.str());
            }
            if (reaches_setpoint(p, k))
            {
                oracle = oracle_heating_time(p, k);
            }
        };
        endpoint(s.KMin, "k_min", d.OracleAtKMin);
        endpoint(s.KMax, "k_max", d.OracleAtKMax);
        return d;
    }

} // namespace batchsim
