#include "catch_amalgamated.hpp"

#include "batchsim/config.hpp"
#include "batchsim/report_io.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace batchsim;
namespace fs = std::filesystem;

namespace
{
    std::string slurp(fs::path const& p)
    {
        std::ifstream f(p, std::ios::binary);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    }

    std::string reference_text()
    {
        return slurp(BATCHSIM_REFERENCE_CONFIG);
    }

    std::string replace(std::string text, std::string const& from, std::string const& to)
    {
        auto pos = text.find(from);
        REQUIRE(pos != std::string::npos);
        return text.replace(pos, from.size(), to);
    }

    fs::path scratch_dir(std::string const& name)
    {
        auto dir = fs::temp_directory_path() / ("batchsim_test_" + name);
        fs::remove_all(dir);
        return dir;
    }

    SweepReport small_report()
    {
        SweepReport rep;
        rep.CriterionName = "value_added";
        auto a = identify_operation(4.0, 6.0, 1000.0);
        a.Index = 1;
        a.ControlK = 0.8;
        a.Volumes = OperationVolumes{10, 2.1e6, 10, 0.0123};
        auto b = identify_operation(0.0, 6.0, 900.0);
        b.Index = 2;
        b.ControlK = 1.0;
        rep.Records = {a, b};
        rep.HeatingTimes = {800.0, 700.0};
        rep.Best = find_extremum(rep.Records, criterion_by_name(rep.CriterionName));
        return rep;
    }
} // namespace

TEST_CASE("reference config parses to the reference values", "[cli][config]")
{
    auto const cfg = parse_config(reference_text());
    auto const ref = reference_plant_config();
    CHECK(cfg.Plant.BatchVolume == ref.BatchVolume);
    CHECK(cfg.Plant.FillRate == ref.FillRate);
    CHECK(cfg.Plant.ReleaseIntensity == ref.ReleaseIntensity);
    CHECK(cfg.Plant.AmbientTemp == ref.AmbientTemp);
    CHECK(cfg.Plant.Setpoint == ref.Setpoint);
    CHECK(cfg.Plant.HeatCapacity == ref.HeatCapacity);
    CHECK(cfg.Plant.LossCoeff == ref.LossCoeff);
    CHECK(cfg.Plant.HeaterNominalPower == ref.HeaterNominalPower);
    CHECK(cfg.Plant.HeaterEfficiency == ref.HeaterEfficiency);
    CHECK(cfg.Plant.WearTNominal == ref.WearTNominal);
    CHECK(cfg.Plant.WearAlpha == ref.WearAlpha);
    CHECK(cfg.Plant.Costs.Raw == ref.Costs.Raw);
    CHECK(cfg.Plant.Costs.Energy == ref.Costs.Energy);
    CHECK(cfg.Plant.Costs.Wear == ref.Costs.Wear);
    CHECK(cfg.Plant.Costs.Output == ref.Costs.Output);

    SweepConfig const defaults;
    CHECK(cfg.Sweep.KMin == defaults.KMin);
    CHECK(cfg.Sweep.KMax == defaults.KMax);
    CHECK(cfg.Sweep.KStep == defaults.KStep);
    CHECK(cfg.Sweep.Direction == ScanDirection::Ascending);
    CHECK(cfg.Sweep.Criterion == "efficiency_default");
    CHECK(cfg.Sweep.StopOnBoundary);
    CHECK(cfg.Sweep.TickBudget == defaults.TickBudget);
    CHECK(cfg.Sweep.Dt == defaults.Dt);
}

TEST_CASE("config validation names the offending field", "[cli][config]")
{
    auto const text = reference_text();
    auto field_of = [](std::string const& doc) -> std::string {
        try
        {
            parse_config(doc);
        }
        catch (ValidationError const& e)
        {
            return e.Field;
        }
        return "";
    };
    CHECK(field_of(replace(text, "setpoint = 70", "setpoint = 10")) == "setpoint");
    CHECK(field_of(replace(text, "[plant]\n", "[plant]\nheater_color = red\n")) == "plant.heater_color");
    CHECK(field_of(replace(text, "[sweep]\n", "[paint]\ncolor = 1\n[sweep]\n")) == "paint.color");
    CHECK(field_of(replace(text, "loss_coeff = 20\n", "")) == "plant.loss_coeff");
    CHECK(field_of(replace(text, "k_step = 0.2", "k_step = fast")) == "k_step");
    CHECK(field_of(replace(text, "k_step = 0.2", "k_step = -0.2")) == "k_step");
    CHECK(field_of(replace(text, "direction = ascending", "direction = sideways")) == "direction");
    CHECK(field_of(replace(text, "criterion = efficiency_default", "criterion = luck")) == "criterion");
}

TEST_CASE("malformed config is a parse error", "[cli][config]")
{
    CHECK_THROWS_AS(parse_config("[plant\nbatch_volume = 10\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[plant]\nbatch_volume = 1\nbatch_volume = 2\n"), ParseError);
    CHECK_THROWS_AS(load_config("/nonexistent/batchsim.ini"), IoError);
}

TEST_CASE("diagnose reports feasibility without simulating", "[cli][config]")
{
    auto cfg = parse_config(reference_text());
    auto d = diagnose(cfg);
    CHECK(d.ok());
    CHECK(d.KMinFeasible == Catch::Approx(1000.0 / 1900.0 * 1.05).epsilon(1e-12));
    CHECK(d.KMinFeasible == Catch::Approx(0.553).margin(5e-4));
    CHECK(d.PredictedOperations == 13);
    CHECK(d.OracleAtKMin == Catch::Approx(oracle_heating_time(cfg.Plant, 0.6)));
    CHECK(d.OracleAtKMax == Catch::Approx(oracle_heating_time(cfg.Plant, 3.0)));

    auto lossless = cfg;
    lossless.Plant.LossCoeff = 0.0;
    CHECK(diagnose(lossless).KMinFeasible == FeasibilityMargin);

    auto low = cfg;
    low.Sweep.KMin = 0.3;
    auto bad = diagnose(low);
    REQUIRE(bad.Problems.size() == 1);
    CHECK(bad.Problems[0].find("k_min") != std::string::npos);
    CHECK(std::isnan(bad.OracleAtKMin));
}

TEST_CASE("number formatting", "[cli][report]")
{
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(1.0) == "1.00000000");
    CHECK(format_number(1046.5) == "1046.50000");
    CHECK(format_number(-0.000123456789) == "-0.000123456789");
    CHECK(format_number(2.093e6) == "2093000.00");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("operations.csv layout and round trip", "[cli][report]")
{
    auto const rep = small_report();
    auto const csv = operations_csv(rep);
    std::istringstream in(csv);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == OperationsHeader);
    CHECK(lines[2].ends_with(",nan,nan,nan,nan,0"));
    CHECK(lines[1].ends_with(",1"));

    auto const back = read_operations_csv(csv);
    REQUIRE(back.size() == rep.Records.size());
    auto close = [](double a, double b) {
        if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
        return std::fabs(a - b) <= 1e-8 * std::max(1e-300, std::fabs(b)) || a == b;
    };
    for (std::size_t i = 0; i < back.size(); ++i)
    {
        auto const& a = back[i];
        auto const& b = rep.Records[i];
        CHECK(a.Index == b.Index);
        CHECK(a.Valid == b.Valid);
        for (auto [x, y] : {std::pair{a.ControlK, b.ControlK}, {a.TOp, b.TOp},
                            {a.Volumes.Raw, b.Volumes.Raw}, {a.Volumes.Energy, b.Volumes.Energy},
                            {a.Volumes.Output, b.Volumes.Output}, {a.Volumes.Wear, b.Volumes.Wear},
                            {a.Re, b.Re}, {a.Pe, b.Pe}, {a.Prf, b.Prf}, {a.Rnt, b.Rnt},
                            {a.R, b.R}, {a.E, b.E}})
        {
            CHECK(close(x, y));
        }
    }
}

TEST_CASE("reference sweep report files", "[cli][report]")
{
    auto const cfg = parse_config(reference_text());
    auto const rep = run_sweep(cfg.Plant, cfg.Sweep);
    auto const d1 = scratch_dir("run1");
    auto const d2 = scratch_dir("run2");
    auto files = write_report(rep, d1);
    write_report(run_sweep(cfg.Plant, cfg.Sweep), d2);
    REQUIRE(files.size() == 2);

    auto const csv = slurp(d1 / "operations.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 14);
    CHECK(csv == slurp(d2 / "operations.csv"));
    CHECK(slurp(d1 / "summary.txt") == slurp(d2 / "summary.txt"));
    auto const summary = slurp(d1 / "summary.txt");
    CHECK(summary.find("criterion: efficiency_default") != std::string::npos);
    CHECK(summary.find("extremum_control_k: ") != std::string::npos);
    CHECK(summary.find("extremum_score: ") != std::string::npos);
    CHECK_FALSE(fs::exists(d1 / "operations.csv.tmp"));

    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("report writing failures leave no files behind", "[cli][report]")
{
    auto const dir = scratch_dir("blocked");
    fs::create_directories(dir);
    // A directory where the output file should go makes the rename fail.
    fs::create_directories(dir / "operations.csv" / "occupied");
    CHECK_THROWS_AS(write_report(small_report(), dir), IoError);
    CHECK_FALSE(fs::exists(dir / "operations.csv.tmp"));
    CHECK_FALSE(fs::exists(dir / "summary.txt"));

    // The output directory itself cannot be created under a regular file.
    std::ofstream(dir / "plain") << "x";
    CHECK_THROWS_AS(write_report(small_report(), dir / "plain" / "sub"), IoError);

    CHECK_THROWS_AS(write_report(SweepReport{}, dir / "empty"), Error);
    CHECK_FALSE(fs::exists(dir / "empty"));
    fs::remove_all(dir);
}
