#pragma once

// Sweep report files.
//
// operations.csv: header
//   num,control_k,t_op,rtv,rpv,ptv,rwv,re,pe,prf,rnt,r,e,valid
// then one row per record in scan order. Numbers are fixed notation with 9
// significant digits; indicators of invalid records are written as `nan`.
//
// summary.txt: the criterion and its extremum, key: value per line.
//
// Both files are written to a temporary sibling and renamed into place.

#include "batchsim/econ.hpp"
#include "batchsim/errors.hpp"
#include "batchsim/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace batchsim
{

    inline constexpr std::string_view OperationsHeader =
        "num,control_k,t_op,rtv,rpv,ptv,rwv,re,pe,prf,rnt,r,e,valid";

    inline std::string format_number(double v)
    {
        if (std::isnan(v)) return "nan";
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        if (v == 0.0) return "0";
        int const magnitude = static_cast<int>(std::floor(std::log10(std::fabs(v))));
        int const decimals = std::max(0, 8 - magnitude);
        char buf[512];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
        return buf;
    }

    inline std::string operations_csv(SweepReport const& rep)
    {
        std::string out(OperationsHeader);
        out += '\n';
        for (auto const& r : rep.Records)
        {
            auto const& v = r.Volumes;
            double const fields[] = {
                r.ControlK, r.TOp, v.Raw, v.Energy, v.Output, v.Wear,
                r.Re, r.Pe, r.Prf, r.Rnt, r.R, r.E
            };
            out += std::to_string(r.Index);
            for (double f : fields)
            {
                out += ',';
                out += format_number(f);
            }
            out += r.Valid ? ",1\n" : ",0\n";
        }
        return out;
    }

    inline std::string summary_text(SweepReport const& rep)
    {
        std::size_t valid = 0;
        for (auto const& r : rep.Records)
        {
            valid += r.Valid ? 1 : 0;
        }
        std::ostringstream s;
        s << "criterion: " << rep.CriterionName << '\n'
          << "operations: " << rep.Records.size() << '\n'
          << "valid_operations: " << valid << '\n'
          << "extremum_num: " << rep.Records.at(rep.Best.Index).Index << '\n'
          << "extremum_control_k: " << format_number(rep.Best.ControlK) << '\n'
          << "extremum_score: " << format_number(rep.Best.Score) << '\n';
        return s.str();
    }

    // Parses operations.csv back into records (volumes and indicators to the
    // emitted precision).
    inline std::vector<OperationRecord> read_operations_csv(std::string const& text)
    {
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line) || line != OperationsHeader)
        {
            throw ParseError("operations.csv: missing or unexpected header");
        }
        std::vector<OperationRecord> out;
        std::size_t lineNo = 1;
        while (std::getline(in, line))
        {
            ++lineNo;
            if (line.empty()) continue;
            std::vector<std::string> cells;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ','))
            {
                cells.push_back(cell);
            }
            if (cells.size() != 14)
            {
                throw ParseError(
                    "operations.csv line " + std::to_string(lineNo)
                    + ": expected 14 columns"
                );
            }
            auto num = [&](std::size_t i) {
                char* end = nullptr;
                double v = std::strtod(cells[i].c_str(), &end);
                if (end == cells[i].c_str() || *end != '\0')
                {
                    throw ParseError(
                        "operations.csv line " + std::to_string(lineNo)
                        + ": bad number '" + cells[i] + "'"
                    );
                }
                return v;
            };
            OperationRecord r;
            r.Index = static_cast<std::uint64_t>(num(0));
            r.ControlK = num(1);
            r.TOp = num(2);
            r.Volumes = OperationVolumes{num(3), num(4), num(5), num(6)};
            r.Re = num(7);
            r.Pe = num(8);
            r.Prf = num(9);
            r.Rnt = num(10);
            r.R = num(11);
            r.E = num(12);
            r.Valid = num(13) != 0.0;
            out.push_back(r);
        }
        return out;
    }

    // Writes `content` to a temporary file next to `path`, then renames it.
    inline void atomic_write(std::filesystem::path const& path, std::string const& content)
    {
        namespace fs = std::filesystem;
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f)
            {
                throw IoError("cannot create '" + tmp.string() + "'");
            }
            f.write(content.data(), static_cast<std::streamsize>(content.size()));
            f.flush();
            if (!f)
            {
                std::error_code ignore;
                fs::remove(tmp, ignore);
                throw IoError("failed writing '" + tmp.string() + "'");
            }
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec)
        {
            std::error_code ignore;
            fs::remove(tmp, ignore);
            throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
        }
    }

    // Writes operations.csv and summary.txt into `dir` (created if needed).
    inline std::vector<std::filesystem::path>
    write_report(SweepReport const& rep, std::filesystem::path const& dir)
    {
        namespace fs = std::filesystem;
        if (rep.Records.empty())
        {
            throw Error("refusing to write an empty report");
        }
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir))
        {
            throw IoError("cannot create output directory '" + dir.string() + "'");
        }
        // Render both before touching the filesystem.
        auto const csv = operations_csv(rep);
        auto const summary = summary_text(rep);
        auto const csvPath = dir / "operations.csv";
        auto const summaryPath = dir / "summary.txt";
        atomic_write(csvPath, csv);
        atomic_write(summaryPath, summary);
        return {csvPath, summaryPath};
    }

} // namespace batchsim
