#include "opachain/trace_io.hpp"

#include "opachain/errors.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace opachain
{
namespace
{
std::string_view strip_cr(std::string_view s)
{
    if (!s.empty() && s.back() == '\r')
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true)
    {
        const auto c = s.find(',', pos);
        out.push_back(s.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
        if (c == std::string_view::npos)
            break;
        pos = c + 1;
    }
    return out;
}

// "line 3 (row 2)": file line, and data row counted from 1 after the header.
std::string at(int line, int row = 0)
{
    std::ostringstream os;
    os << "line " << line;
    if (row > 0)
        os << " (row " << row << ")";
    return os.str();
}

double parse_field(std::string_view field, const std::string &where, std::string_view what)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    {
        std::ostringstream os;
        os << where << ": malformed " << what << " `" << field << "`";
        fail(ErrorKind::Parse, os.str());
    }
    return v;
}

} // namespace

std::string format_number(double value)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc())
        fail(ErrorKind::Domain, "cannot format number");
    return {buf.data(), ptr};
}

void write_trace(std::ostream &out, const SpectrumTrace &trace)
{
    const auto &meta = trace.metadata();
    if (meta.resolution_nm != 0.0)
        out << "# resolution_nm=" << format_number(meta.resolution_nm) << '\n';
    if (meta.smoothing_nm != 0.0)
        out << "# smoothing_nm=" << format_number(meta.smoothing_nm) << '\n';
    if (!meta.label.empty())
        out << "# label=" << meta.label << '\n';
    out << "wavelength_nm,value,unit\n";
    const char *unit = trace.unit() == TraceUnit::Db ? "db" : "ratio";
    for (const auto &p : trace.points())
        out << format_number(p.wavelength_nm) << ',' << format_number(p.value) << ',' << unit << '\n';
}

SpectrumTrace read_trace(std::istream &in)
{
    TraceMetadata meta;
    std::vector<TracePoint> points;
    std::optional<TraceUnit> unit;
    bool header = false;
    std::string raw;
    int line = 0;
    int row = 0;
    while (std::getline(in, raw))
    {
        ++line;
        const auto s = strip_cr(raw);
        if (!header)
        {
            if (s.empty())
                continue;
            if (s.front() == '#')
            {
                auto body = s.substr(1);
                body.remove_prefix(std::min(body.find_first_not_of(' '), body.size()));
                const auto eq = body.find('=');
                if (eq == std::string_view::npos)
                    continue;
                const auto key = body.substr(0, eq);
                const auto value = body.substr(eq + 1);
                if (key == "resolution_nm")
                    meta.resolution_nm = parse_field(value, at(line), "resolution_nm");
                else if (key == "smoothing_nm")
                    meta.smoothing_nm = parse_field(value, at(line), "smoothing_nm");
                else if (key == "label")
                    meta.label = std::string(value);
                continue;
            }
            if (s != "wavelength_nm,value,unit")
            {
                std::ostringstream os;
                os << "line " << line << ": expected header `wavelength_nm,value,unit`";
                fail(ErrorKind::Parse, os.str());
            }
            header = true;
            continue;
        }
        if (s.empty())
            continue;
        ++row;
        const auto fields = split_commas(s);
        if (fields.size() != 3)
        {
            std::ostringstream os;
            os << at(line, row) << ": expected 3 fields, got " << fields.size();
            fail(ErrorKind::Parse, os.str());
        }
        TraceUnit u;
        if (fields[2] == "db")
            u = TraceUnit::Db;
        else if (fields[2] == "ratio")
            u = TraceUnit::Ratio;
        else
        {
            std::ostringstream os;
            os << at(line, row) << ": unit must be db or ratio, got `" << fields[2] << "`";
            fail(ErrorKind::Parse, os.str());
        }
        if (unit && *unit != u)
        {
            std::ostringstream os;
            os << at(line, row) << ": unit changes within the trace";
            fail(ErrorKind::Parse, os.str());
        }
        unit = u;
        const TracePoint p{parse_field(fields[0], at(line, row), "wavelength"), parse_field(fields[1], at(line, row), "value")};
        if (!points.empty() && !(p.wavelength_nm > points.back().wavelength_nm))
        {
            std::ostringstream os;
            os << at(line, row) << ": wavelength " << fields[0] << " is not above the previous row";
            fail(ErrorKind::Validation, os.str());
        }
        points.push_back(p);
    }
    if (!header)
        fail(ErrorKind::Parse, "trace has no header");
    if (points.empty())
        fail(ErrorKind::Parse, "trace has no data rows");
    return {std::move(points), *unit, std::move(meta)};
}

void write_sweep(std::ostream &out, std::span<const SweepPoint> points)
{
    out << "pump_w,r_minus_db,r_plus_db\n";
    for (const auto &p : points)
        out << format_number(p.pump_w) << ',' << format_number(p.r_minus_db) << ',' << format_number(p.r_plus_db)
            << '\n';
}

std::vector<SweepPoint> read_sweep(std::istream &in)
{
    std::vector<SweepPoint> out;
    std::string raw;
    int line = 0;
    int row = 0;
    bool header = false;
    while (std::getline(in, raw))
    {
        ++line;
        const auto s = strip_cr(raw);
        if (s.empty() || s.front() == '#')
            continue;
        if (!header)
        {
            if (s != "pump_w,r_minus_db,r_plus_db")
            {
                std::ostringstream os;
                os << "line " << line << ": expected header `pump_w,r_minus_db,r_plus_db`";
                fail(ErrorKind::Parse, os.str());
            }
            header = true;
            continue;
        }
        ++row;
        const auto f = split_commas(s);
        if (f.size() != 3)
        {
            std::ostringstream os;
            os << at(line, row) << ": expected 3 fields, got " << f.size();
            fail(ErrorKind::Parse, os.str());
        }
        out.push_back({parse_field(f[0], at(line, row), "pump_w"), parse_field(f[1], at(line, row), "r_minus_db"),
                       parse_field(f[2], at(line, row), "r_plus_db")});
    }
    if (!header)
        fail(ErrorKind::Parse, "sweep has no header");
    return out;
}

void write_lock_trace(std::ostream &out, const LockResult &result, const LockLoopConfig &config)
{
    out << "step,time_s,pd3,error,phi_actuated,phi_drift\n";
    for (const auto &s : result.trace)
    {
        out << s.step << ',' << format_number(static_cast<double>(s.step) * config.dt_s) << ','
            << format_number(s.pd3) << ',' << format_number(config.target - s.pd3) << ','
            << format_number(s.phi_actuated) << ',' << format_number(s.phi_drift) << '\n';
    }
}

void write_file_atomic(const std::string &path, const std::string &contents)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path())
    {
        fs::create_directories(target.parent_path(), ec);
        if (ec)
            fail(ErrorKind::Io, "cannot create directory " + target.parent_path().string() + ": " + ec.message());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            fail(ErrorKind::Io, "cannot write " + tmp.string());
        f << contents;
        f.flush();
        if (!f)
        {
            f.close();
            fs::remove(tmp, ec);
            fail(ErrorKind::Io, "write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, target, ec);
    if (ec)
    {
        fs::remove(tmp, ec);
        fail(ErrorKind::Io, "cannot move output into place at " + path);
    }
}

} // namespace opachain
