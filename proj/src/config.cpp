#include "opachain/config.hpp"

#include "opachain/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace opachain
{
namespace
{
enum class ValueType
{
    Number,
    Count,
    Text,
    Flag,
};

struct KeySpec
{
    std::string_view section;
    std::string_view key;
    ValueType type;
    bool required;
};

constexpr KeySpec kKeys[] = {
    {"squeezer", "a", ValueType::Number, true},
    {"squeezer", "loss", ValueType::Number, true},
    {"squeezer", "pump", ValueType::Number, true},
    {"levels", "r_minus_db", ValueType::Number, true},
    {"levels", "r_plus_db", ValueType::Number, true},
    {"measured", "r_minus_db", ValueType::Number, true},
    {"measured", "r_plus_db", ValueType::Number, true},
    {"gain", "g", ValueType::Number, false},
    {"gain", "g_db", ValueType::Number, false},
    {"dispersion", "d", ValueType::Number, true},
    {"dispersion", "f0_thz", ValueType::Number, false},
    {"dispersion", "phi0", ValueType::Number, false},
    {"grid", "start_nm", ValueType::Number, true},
    {"grid", "stop_nm", ValueType::Number, true},
    {"grid", "step_nm", ValueType::Number, true},
    {"lockloop", "ki", ValueType::Number, false},
    {"lockloop", "dt", ValueType::Number, false},
    {"lockloop", "target", ValueType::Number, false},
    {"lockloop", "lock_wavelength_nm", ValueType::Number, false},
    {"lockloop", "noise_rms", ValueType::Number, false},
    {"lockloop", "drift_rate", ValueType::Number, false},
    {"lockloop", "max_steps", ValueType::Count, false},
    {"lockloop", "tolerance", ValueType::Number, false},
    {"lockloop", "initial_phase", ValueType::Number, false},
    {"lockloop", "drift_steps", ValueType::Count, false},
    {"lockloop", "auto_sign", ValueType::Flag, false},
    {"lockloop", "min_slope_fraction", ValueType::Number, false},
    {"fit", "sweep_csv", ValueType::Text, true},
    {"output", "dir", ValueType::Text, true},
    {"run", "seed", ValueType::Count, true},
};

struct Entry
{
    std::string value;
    int line = 0;
    ValueType type = ValueType::Text;
};

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class Parser
{
public:
    explicit Parser(std::string_view source) : source_(source) {}

    [[noreturn]] void error(ErrorKind kind, int line, const std::string &msg) const
    {
        std::ostringstream os;
        os << source_ << ":" << line << ": " << msg;
        fail(kind, os.str());
    }

    [[noreturn]] void invalid(const std::string &field, const std::string &msg) const
    {
        const auto it = entries_.find(field);
        std::ostringstream os;
        os << source_;
        if (it != entries_.end())
            os << ":" << it->second.line;
        os << ": " << field << ": " << msg;
        fail(ErrorKind::Validation, os.str());
    }

    void read(std::string_view text)
    {
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size())
        {
            const auto nl = text.find('\n', pos);
            const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;

            auto line = raw;
            if (const auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty())
                continue;

            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                error(ErrorKind::Parse, line_no, "expected `section.key = value`");
            const auto name = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));
            const auto dot = name.find('.');
            if (dot == std::string_view::npos || dot == 0 || dot + 1 == name.size())
                error(ErrorKind::Parse, line_no, "key `" + std::string(name) + "` is not of the form section.key");
            if (value.empty())
                error(ErrorKind::Parse, line_no, "missing value for `" + std::string(name) + "`");

            const auto section = name.substr(0, dot);
            const auto key = name.substr(dot + 1);
            const auto spec = std::find_if(std::begin(kKeys), std::end(kKeys), [&](const KeySpec &k) {
                return k.section == section && k.key == key;
            });
            if (spec == std::end(kKeys))
                error(ErrorKind::Validation, line_no, "unknown key `" + std::string(name) + "`");

            const std::string full(name);
            if (const auto prev = entries_.find(full); prev != entries_.end())
            {
                std::ostringstream os;
                os << "duplicate key `" << full << "` (first set on line " << prev->second.line << ", again on line "
                   << line_no << ")";
                error(ErrorKind::Validation, line_no, os.str());
            }
            entries_[full] = Entry{std::string(value), line_no, spec->type};
        }
    }

    bool section_present(std::string_view section) const
    {
        return std::any_of(entries_.begin(), entries_.end(), [&](const auto &kv) {
            return std::string_view(kv.first).substr(0, kv.first.find('.')) == section;
        });
    }

    void check_complete(std::string_view section) const
    {
        if (!section_present(section))
            return;
        for (const auto &k : kKeys)
        {
            if (k.section != section || !k.required)
                continue;
            const std::string field = std::string(section) + "." + std::string(k.key);
            if (!entries_.count(field))
                fail(ErrorKind::Validation,
                     std::string(source_) + ": " + field + ": required when [" + std::string(section) + "] is used");
        }
    }

    bool has(const std::string &field) const { return entries_.count(field) != 0; }

    double number(const std::string &field) const
    {
        const auto &e = entries_.at(field);
        double v = 0.0;
        const auto *first = e.value.data();
        const auto *last = first + e.value.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            error(ErrorKind::Parse, e.line, field + ": expected a number, got `" + e.value + "`");
        return v;
    }

    double number_or(const std::string &field, double fallback) const { return has(field) ? number(field) : fallback; }

    std::uint64_t count(const std::string &field) const
    {
        const auto &e = entries_.at(field);
        std::uint64_t v = 0;
        const auto *first = e.value.data();
        const auto *last = first + e.value.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            error(ErrorKind::Parse, e.line, field + ": expected a non-negative integer, got `" + e.value + "`");
        return v;
    }

    bool flag(const std::string &field) const
    {
        const auto &e = entries_.at(field);
        if (e.value == "true" || e.value == "1" || e.value == "yes")
            return true;
        if (e.value == "false" || e.value == "0" || e.value == "no")
            return false;
        error(ErrorKind::Parse, e.line, field + ": expected true/false, got `" + e.value + "`");
    }

    const std::string &text(const std::string &field) const { return entries_.at(field).value; }

    // Constructs a domain object, relabelling domain errors with the section.
    template <typename F>
    auto build(const std::string &section, F &&make) const
    {
        try
        {
            return make();
        }
        catch (const Error &e)
        {
            if (e.kind() != ErrorKind::Domain)
                throw;
            invalid(section, e.what());
        }
    }

private:
    std::string_view source_;
    std::map<std::string, Entry> entries_;
};

} // namespace

QuadLevels ScenarioConfig::resolve_levels() const
{
    if (levels)
        return QuadLevels::from_db(levels->r_minus_db, levels->r_plus_db);
    if (squeezer)
        return true_levels(*squeezer);
    fail(ErrorKind::Validation, "config needs a [levels] or [squeezer] section");
}

const DispersionSection &ScenarioConfig::require_dispersion(std::string_view who) const
{
    if (!dispersion)
        fail(ErrorKind::Validation, std::string(who) + " needs a [dispersion] section");
    return *dispersion;
}

const GridSection &ScenarioConfig::require_grid(std::string_view who) const
{
    if (!grid)
        fail(ErrorKind::Validation, std::string(who) + " needs a [grid] section");
    return *grid;
}

OpaGain ScenarioConfig::require_gain(std::string_view who) const
{
    if (!gain)
        fail(ErrorKind::Validation, std::string(who) + " needs a [gain] section");
    return *gain;
}

ScenarioConfig parse_config(std::string_view text, std::string_view source)
{
    Parser p(source);
    p.read(text);
    for (const auto *section : {"squeezer", "levels", "measured", "dispersion", "grid", "fit", "output", "run"})
        p.check_complete(section);

    ScenarioConfig cfg;
    if (p.section_present("squeezer"))
        cfg.squeezer = p.build("squeezer", [&] {
            return SqueezerParams(p.number("squeezer.a"), p.number("squeezer.loss"), p.number("squeezer.pump"));
        });
    for (const auto *name : {"levels", "measured"})
    {
        if (!p.section_present(name))
            continue;
        const std::string s(name);
        LevelsSection lv{p.number(s + ".r_minus_db"), p.number(s + ".r_plus_db")};
        if (!std::isfinite(lv.r_minus_db) || !std::isfinite(lv.r_plus_db) || lv.r_minus_db > lv.r_plus_db)
            p.invalid(s + ".r_minus_db", "must be finite and not above r_plus_db");
        (s == "levels" ? cfg.levels : cfg.measured) = lv;
    }
    if (p.section_present("gain"))
    {
        if (p.has("gain.g") == p.has("gain.g_db"))
            p.invalid("gain", "set exactly one of gain.g and gain.g_db");
        cfg.gain = p.build("gain", [&] {
            return p.has("gain.g") ? OpaGain(p.number("gain.g")) : OpaGain::from_db(p.number("gain.g_db"));
        });
    }
    if (p.section_present("dispersion"))
    {
        DispersionSection d{p.number("dispersion.d"), p.number_or("dispersion.f0_thz", 194.0),
                            p.number_or("dispersion.phi0", 0.0)};
        p.build("dispersion", [&] { return d.model(); });
        cfg.dispersion = d;
    }
    if (p.section_present("grid"))
    {
        GridSection g{p.number("grid.start_nm"), p.number("grid.stop_nm"), p.number("grid.step_nm")};
        if (!(g.step_nm > 0.0))
            p.invalid("grid.step_nm", "must be > 0");
        p.build("grid", [&] { return g.wavelengths(); });
        cfg.grid = g;
    }
    if (p.section_present("lockloop"))
    {
        LockSection ls;
        auto &c = ls.config;
        c.ki = p.number_or("lockloop.ki", c.ki);
        c.dt_s = p.number_or("lockloop.dt", c.dt_s);
        ls.target_set = p.has("lockloop.target");
        c.target = p.number_or("lockloop.target", c.target);
        c.lock_wavelength_nm = p.number_or("lockloop.lock_wavelength_nm", c.lock_wavelength_nm);
        c.noise_rms = p.number_or("lockloop.noise_rms", c.noise_rms);
        c.drift_rate = p.number_or("lockloop.drift_rate", c.drift_rate);
        if (p.has("lockloop.max_steps"))
            c.max_steps = p.count("lockloop.max_steps");
        c.tolerance = p.number_or("lockloop.tolerance", c.tolerance);
        c.initial_phase = p.number_or("lockloop.initial_phase", c.initial_phase);
        if (p.has("lockloop.drift_steps"))
            c.drift_steps = p.count("lockloop.drift_steps");
        if (p.has("lockloop.auto_sign"))
            c.auto_sign = p.flag("lockloop.auto_sign");
        c.min_slope_fraction = p.number_or("lockloop.min_slope_fraction", c.min_slope_fraction);
        try
        {
            c.validate();
        }
        catch (const Error &e)
        {
            const std::string msg = e.what();
            p.invalid(msg.substr(0, msg.find(' ')), msg);
        }
        cfg.lockloop = ls;
    }
    if (p.has("fit.sweep_csv"))
        cfg.sweep_csv = p.text("fit.sweep_csv");
    if (p.has("output.dir"))
        cfg.output_dir = p.text("output.dir");
    if (p.has("run.seed"))
        cfg.seed = p.count("run.seed");
    return cfg;
}

ScenarioConfig load_config(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::Io, "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace opachain
