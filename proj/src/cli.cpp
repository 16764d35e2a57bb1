#include "opachain/cli.hpp"

#include "opachain/calibration.hpp"
#include "opachain/config.hpp"
#include "opachain/dispersion.hpp"
#include "opachain/errors.hpp"
#include "opachain/lockloop.hpp"
#include "opachain/opa_measurement.hpp"
#include "opachain/replication.hpp"
#include "opachain/report.hpp"
#include "opachain/trace_io.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace opachain
{
namespace
{
constexpr double kDegPerRad = 180.0 / std::numbers::pi;

// A numeric flag that remembers whether it was given.
struct Flag
{
    double value = 0.0;
    CLI::Option *option = nullptr;

    bool set() const { return option != nullptr && option->count() > 0; }
    double or_else(double fallback) const { return set() ? value : fallback; }
};

std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s)
    {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out;
}

int report_error(std::ostream &err, std::string_view kind, std::string_view message)
{
    err << "error kind=" << kind << " message=\"" << escape(message) << "\"\n";
    return kind == to_string(ErrorKind::Io) ? 2 : 1;
}

ScenarioConfig config_or_empty(const std::string &path)
{
    return path.empty() ? ScenarioConfig{} : load_config(path);
}

std::string read_text_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::Io, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

OpaGain resolve_gain(const Flag &gain, const Flag &gain_db, const ScenarioConfig &cfg, std::string_view who)
{
    if (gain.set() && gain_db.set())
        fail(ErrorKind::Validation, "give only one of --gain and --gain-db");
    if (gain.set())
        return OpaGain(gain.value);
    if (gain_db.set())
        return OpaGain::from_db(gain_db.value);
    return cfg.require_gain(who);
}

QuadLevels resolve_levels(const Flag &minus_db, const Flag &plus_db, const ScenarioConfig &cfg)
{
    if (minus_db.set() != plus_db.set())
        fail(ErrorKind::Validation, "give both --minus-db and --plus-db");
    if (minus_db.set())
        return QuadLevels::from_db(minus_db.value, plus_db.value);
    return cfg.resolve_levels();
}

struct DispersionFlags
{
    Flag d, f0, phi0;

    void add(CLI::App *app)
    {
        d.option = app->add_option("--d", d.value, "2nd-order dispersion, ps/nm");
        f0.option = app->add_option("--f0", f0.value, "center frequency, THz (default 194)");
        phi0.option = app->add_option("--phi0", phi0.value, "lock-point phase offset, rad (default 0)");
    }

    DispersionModel resolve(const ScenarioConfig &cfg, std::string_view who) const
    {
        DispersionSection s;
        if (cfg.dispersion)
            s = *cfg.dispersion;
        else if (!d.set())
            fail(ErrorKind::Validation, std::string(who) + " needs --d or a [dispersion] section");
        s.d_ps_per_nm = d.or_else(s.d_ps_per_nm);
        s.f0_thz = f0.or_else(s.f0_thz);
        s.phi0_rad = phi0.or_else(s.phi0_rad);
        return s.model();
    }
};

struct GridFlags
{
    Flag start, stop, step;

    void add(CLI::App *app)
    {
        start.option = app->add_option("--start", start.value, "grid start, nm (default 1500)");
        stop.option = app->add_option("--stop", stop.value, "grid stop, nm (default 1590)");
        step.option = app->add_option("--step", step.value, "grid step, nm (default 0.1)");
    }

    GridSection resolve(const ScenarioConfig &cfg) const
    {
        GridSection g = cfg.grid.value_or(GridSection{1500.0, 1590.0, 0.1});
        g.start_nm = start.or_else(g.start_nm);
        g.stop_nm = stop.or_else(g.stop_nm);
        g.step_nm = step.or_else(g.step_nm);
        return g;
    }
};

struct LevelFlags
{
    Flag minus_db, plus_db;

    void add(CLI::App *app, const std::string &what = "")
    {
        minus_db.option = app->add_option("--minus-db", minus_db.value, "squeezing level" + what + ", dB");
        plus_db.option = app->add_option("--plus-db", plus_db.value, "anti-squeezing level" + what + ", dB");
    }
};

// Echoes the level inputs as given, so the report re-runs exactly.
void echo_level_inputs(RunReport &r, const LevelFlags &flags, const ScenarioConfig &cfg)
{
    if (flags.minus_db.set())
    {
        r.input("r_minus_db", flags.minus_db.value).input("r_plus_db", flags.plus_db.value);
    }
    else if (cfg.levels)
    {
        r.input("r_minus_db", cfg.levels->r_minus_db).input("r_plus_db", cfg.levels->r_plus_db);
    }
    else if (cfg.squeezer)
    {
        r.input("squeezer_a", cfg.squeezer->efficiency_per_w()).input("squeezer_loss", cfg.squeezer->loss());
        r.input("squeezer_pump", cfg.squeezer->pump_w());
    }
}

void echo_levels(RunReport &r, const std::string &prefix, const QuadLevels &lv)
{
    r.output(prefix + "r_minus", lv.r_minus());
    r.output(prefix + "r_plus", lv.r_plus());
    r.output(prefix + "r_minus_db", lv.r_minus_db());
    r.output(prefix + "r_plus_db", lv.r_plus_db());
    r.output_fixed(prefix + "r_minus_db_1dp", lv.r_minus_db(), 1);
    r.output_fixed(prefix + "r_plus_db_1dp", lv.r_plus_db(), 1);
}

void echo_model(RunReport &r, const DispersionModel &m)
{
    r.input("d_ps_per_nm", m.d_ps_per_nm());
    r.input("f0_thz", m.f0_thz());
    r.input("phi0_rad", m.phi0_rad());
}

std::string output_dir(const std::string &flag, const ScenarioConfig &cfg)
{
    if (!flag.empty())
        return flag;
    return cfg.output_dir.value_or(".");
}

std::string join_path(const std::string &dir, const std::string &name)
{
    return (std::filesystem::path(dir) / name).string();
}

std::uint64_t resolve_seed(const Flag &seed_flag, const ScenarioConfig &cfg)
{
    if (seed_flag.set())
    {
        if (!(seed_flag.value >= 0.0) || seed_flag.value != std::floor(seed_flag.value))
            fail(ErrorKind::Validation, "--seed must be a non-negative integer");
        return static_cast<std::uint64_t>(seed_flag.value);
    }
    if (const char *env = std::getenv("OPACHAIN_SEED"); env != nullptr && *env != '\0')
    {
        std::uint64_t v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size())
            fail(ErrorKind::Validation, "OPACHAIN_SEED must be a non-negative integer");
        return v;
    }
    return cfg.seed.value_or(0);
}

std::pair<std::string, double> parse_pair(const std::string &text, const char *what)
{
    const auto colon = text.rfind(':');
    if (colon == std::string::npos)
        fail(ErrorKind::Validation, std::string(what) + " `" + text + "` must be label:value");
    const std::string num = text.substr(colon + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (num.empty() || ec != std::errc() || ptr != num.data() + num.size())
        fail(ErrorKind::Validation, std::string(what) + " `" + text + "` has a malformed number");
    return {text.substr(0, colon), v};
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Cascaded-OPA squeezed-light detection toolkit", "opachain"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    // theta-eff
    auto *theta = app.add_subcommand("theta-eff", "effective phase deviation of a finite OPA gain");
    Flag th_gain, th_gain_db;
    std::string th_config;
    th_gain.option = theta->add_option("--gain", th_gain.value, "linear gain G");
    th_gain_db.option = theta->add_option("--gain-db", th_gain_db.value, "gain in dB");
    theta->add_option("--config", th_config, "scenario file");

    // correct-squeezing
    auto *correct = app.add_subcommand("correct-squeezing", "true levels from finite-gain measured levels");
    Flag cs_gain, cs_gain_db;
    LevelFlags cs_meas;
    std::string cs_config;
    cs_gain.option = correct->add_option("--gain", cs_gain.value, "linear gain G");
    cs_gain_db.option = correct->add_option("--gain-db", cs_gain_db.value, "gain in dB");
    cs_meas.minus_db.option = correct->add_option("--measured-minus-db", cs_meas.minus_db.value, "measured R-', dB");
    cs_meas.plus_db.option = correct->add_option("--measured-plus-db", cs_meas.plus_db.value, "measured R+', dB");
    correct->add_option("--config", cs_config, "scenario file");

    // required-gain
    auto *reqgain = app.add_subcommand("required-gain", "smallest gain reading the squeezing level correctly");
    LevelFlags rg_levels;
    rg_levels.add(reqgain);
    double rg_tol = 0.05;
    double rg_step = 1.0;
    std::string rg_config;
    reqgain->add_option("--tolerance-db", rg_tol, "allowed squeezing bias, dB")->capture_default_str();
    reqgain->add_option("--gain-step-db", rg_step, "report gain on this dB grid; 0 for continuous")
        ->capture_default_str();
    reqgain->add_option("--config", rg_config, "scenario file");

    // simulate-spectrum
    auto *simspec = app.add_subcommand("simulate-spectrum", "rippled spectrum after the second OPA");
    DispersionFlags ss_disp;
    GridFlags ss_grid;
    LevelFlags ss_levels;
    ss_disp.add(simspec);
    ss_grid.add(simspec);
    ss_levels.add(simspec);
    std::string ss_config, ss_output, ss_outdir, ss_unit = "ratio", ss_label;
    simspec->add_option("--config", ss_config, "scenario file");
    simspec->add_option("--unit", ss_unit, "value unit in the CSV")
        ->check(CLI::IsMember({"ratio", "db"}))
        ->capture_default_str();
    simspec->add_option("--label", ss_label, "trace label");
    simspec->add_option("--output", ss_output, "trace CSV path (default <output-dir>/spectrum.csv)");
    simspec->add_option("--output-dir", ss_outdir, "artifact directory");

    // estimate-dispersion
    auto *estdisp = app.add_subcommand("estimate-dispersion", "dispersion from a rippled spectrum");
    std::string ed_input;
    double ed_f0 = 194.0;
    ExtremumOptions ed_opts;
    estdisp->add_option("--input", ed_input, "trace CSV")->required();
    estdisp->add_option("--f0", ed_f0, "center frequency, THz")->capture_default_str();
    estdisp->add_option("--smoothing-nm", ed_opts.smoothing_nm, "moving-average window, nm")->capture_default_str();
    estdisp->add_option("--prominence", ed_opts.prominence_fraction, "extremum hysteresis, fraction of range")
        ->capture_default_str();

    // design-dcf
    auto *dcf = app.add_subcommand("design-dcf", "compensating fiber length");
    std::vector<std::string> dcf_segments;
    Flag dcf_net;
    double dcf_rate = 0.0;
    double dcf_target = 0.0;
    dcf->add_option("--segment", dcf_segments, "link fiber as length_m:ps_per_nm_per_m (repeatable)");
    dcf_net.option = dcf->add_option("--net", dcf_net.value, "additional net link dispersion, ps/nm");
    dcf->add_option("--dcf-rate", dcf_rate, "compensating fiber dispersion, ps/nm/m")->required();
    dcf->add_option("--target", dcf_target, "residual dispersion to leave, ps/nm")->capture_default_str();

    // band
    auto *band = app.add_subcommand("band", "bandwidth over which the lock phase is maintained");
    DispersionFlags bd_disp;
    GridFlags bd_grid;
    LevelFlags bd_levels;
    Flag bd_lock, bd_maxdev;
    double bd_degradation = 1.0;
    std::string bd_config;
    bd_disp.add(band);
    bd_grid.add(band);
    bd_levels.add(band);
    bd_lock.option = band->add_option("--lock-nm", bd_lock.value, "lock wavelength, nm (default 1545)");
    bd_maxdev.option = band->add_option("--max-dev", bd_maxdev.value, "allowed phase deviation, rad");
    band->add_option("--degradation-db", bd_degradation, "default threshold: squeezing degraded by this much, dB")
        ->capture_default_str();
    band->add_option("--config", bd_config, "scenario file");

    // fit-calibration
    auto *fitcal = app.add_subcommand("fit-calibration", "fit efficiency and loss to a pump sweep");
    std::string fc_input, fc_config;
    fitcal->add_option("--input", fc_input, "sweep CSV (pump_w,r_minus_db,r_plus_db)");
    fitcal->add_option("--config", fc_config, "scenario file");

    // chain
    auto *chain = app.add_subcommand("chain", "efficiency of a loss chain");
    std::vector<std::string> ch_elements;
    Flag ch_total;
    chain->add_option("--element", ch_elements, "label:transmission (repeatable)");
    ch_total.option = chain->add_option("--total", ch_total.value, "overall transmission; infers the remaining stage");

    // simulate-lock
    auto *simlock = app.add_subcommand("simulate-lock", "integral phase-lock simulation");
    DispersionFlags sl_disp;
    LevelFlags sl_levels;
    sl_disp.add(simlock);
    sl_levels.add(simlock);
    Flag sl_ki, sl_dt, sl_target, sl_lock, sl_noise, sl_drift, sl_steps, sl_tol, sl_init, sl_drift_steps, sl_seed,
        sl_min_slope;
    bool sl_no_auto_sign = false;
    std::string sl_config, sl_outdir;
    sl_ki.option = simlock->add_option("--ki", sl_ki.value, "integrator gain, 1/(ratio s)");
    sl_dt.option = simlock->add_option("--dt", sl_dt.value, "time step, s");
    sl_target.option = simlock->add_option("--target", sl_target.value, "PD3 target (default mid-slope)");
    sl_lock.option = simlock->add_option("--lock-nm", sl_lock.value, "filter wavelength, nm");
    sl_noise.option = simlock->add_option("--noise-rms", sl_noise.value, "PD3 noise rms, ratio");
    sl_drift.option = simlock->add_option("--drift-rate", sl_drift.value, "phase drift, rad/sqrt(s)");
    sl_steps.option = simlock->add_option("--max-steps", sl_steps.value, "number of steps");
    sl_tol.option = simlock->add_option("--tolerance", sl_tol.value, "lock tolerance (default 1% of swing)");
    sl_init.option = simlock->add_option("--initial-phase", sl_init.value, "initial actuated phase, rad");
    sl_drift_steps.option = simlock->add_option("--drift-steps", sl_drift_steps.value, "stop drift after N steps");
    sl_min_slope.option = simlock->add_option("--min-slope-fraction", sl_min_slope.value, "off-slope threshold");
    sl_seed.option = simlock->add_option("--seed", sl_seed.value, "random seed");
    simlock->add_flag("--no-auto-sign", sl_no_auto_sign, "use --ki sign as given");
    simlock->add_option("--config", sl_config, "scenario file");
    simlock->add_option("--output-dir", sl_outdir, "artifact directory");

    // replicate-paper
    auto *replicate = app.add_subcommand("replicate-paper", "run the reference scenario checks");
    std::string rp_config;
    replicate->add_option("--config", rp_config, "scenario file (defaults to the built-in reference values)");

    std::vector<const char *> argv;
    argv.push_back("opachain");
    for (const auto &a : args)
        argv.push_back(a.c_str());
    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::ParseError &e)
    {
        return report_error(err, "usage", e.what());
    }

    try
    {
        if (theta->parsed())
        {
            const auto cfg = config_or_empty(th_config);
            const auto gain = resolve_gain(th_gain, th_gain_db, cfg, "theta-eff");
            const double rad = effective_phase_deviation(gain);
            RunReport r("theta-eff");
            r.input("gain", gain.linear()).input("gain_db", gain.db());
            r.output("theta_eff_rad", rad);
            r.output("theta_eff_deg", rad * kDegPerRad);
            r.output_fixed("theta_eff_deg_2dp", rad * kDegPerRad, 2);
            r.output_fixed("theta_eff_deg_1dp", rad * kDegPerRad, 1);
            out << r.str();
            return 0;
        }
        if (correct->parsed())
        {
            const auto cfg = config_or_empty(cs_config);
            const auto gain = resolve_gain(cs_gain, cs_gain_db, cfg, "correct-squeezing");
            if (cs_meas.minus_db.set() != cs_meas.plus_db.set())
                fail(ErrorKind::Validation, "give both --measured-minus-db and --measured-plus-db");
            LevelsSection meas_db;
            if (cs_meas.minus_db.set())
                meas_db = {cs_meas.minus_db.value, cs_meas.plus_db.value};
            else if (cfg.measured)
                meas_db = *cfg.measured;
            else
                fail(ErrorKind::Validation, "correct-squeezing needs measured levels (flags or [measured])");
            const MeasuredLevels meas(ratio_from_db(meas_db.r_minus_db), ratio_from_db(meas_db.r_plus_db));
            const auto levels = true_from_measured(meas, gain);
            RunReport r("correct-squeezing");
            r.input("gain", gain.linear());
            r.input("measured_r_minus_db", meas_db.r_minus_db).input("measured_r_plus_db", meas_db.r_plus_db);
            echo_levels(r, "", levels);
            r.output("theta_eff_deg", effective_phase_deviation(gain) * kDegPerRad);
            out << r.str();
            return 0;
        }
        if (reqgain->parsed())
        {
            const auto cfg = config_or_empty(rg_config);
            const auto levels = resolve_levels(rg_levels.minus_db, rg_levels.plus_db, cfg);
            GainSearch search;
            search.step_db = rg_step;
            const auto g = required_gain(levels, rg_tol, search);
            GainSearch continuous;
            continuous.step_db = 0.0;
            const auto gc = required_gain(levels, rg_tol, continuous);
            RunReport r("required-gain");
            echo_level_inputs(r, rg_levels, cfg);
            r.input("tolerance_db", rg_tol).input("gain_step_db", rg_step);
            r.output("gain", g.linear());
            r.output("gain_db", g.db());
            r.output_fixed("gain_db_1dp", g.db(), 1);
            r.output("continuous_gain", gc.linear());
            r.output("squeezing_bias_db", squeezing_bias_db(levels, g));
            out << r.str();
            return 0;
        }
        if (simspec->parsed())
        {
            const auto cfg = config_or_empty(ss_config);
            const auto model = ss_disp.resolve(cfg, "simulate-spectrum");
            const auto levels = resolve_levels(ss_levels.minus_db, ss_levels.plus_db, cfg);
            const auto grid = ss_grid.resolve(cfg);
            const auto wl = grid.wavelengths();
            auto trace = spectrum(model, levels, wl);
            if (!ss_label.empty())
                trace = SpectrumTrace({trace.points().begin(), trace.points().end()}, trace.unit(),
                                      TraceMetadata{0.0, 0.0, ss_label});
            if (ss_unit == "db")
                trace = trace.to_db();
            const auto dir = output_dir(ss_outdir, cfg);
            const auto path = ss_output.empty() ? join_path(dir, "spectrum.csv") : ss_output;

            RunReport r("simulate-spectrum");
            echo_model(r, model);
            echo_level_inputs(r, ss_levels, cfg);
            r.input("start_nm", grid.start_nm).input("stop_nm", grid.stop_nm).input("step_nm", grid.step_nm);
            r.input("unit", ss_unit);
            r.output("points", static_cast<double>(trace.size()));
            r.output("trace", path);

            std::ostringstream csv;
            write_trace(csv, trace);
            write_file_atomic(path, csv.str());
            write_file_atomic(join_path(dir, "simulate-spectrum.report"), r.str());
            out << r.str();
            return 0;
        }
        if (estdisp->parsed())
        {
            std::istringstream in(read_text_file(ed_input));
            const auto trace = read_trace(in);
            const auto est = estimate_dispersion(trace, ed_f0, ed_opts);
            RunReport r("estimate-dispersion");
            r.input("trace", ed_input).input("f0_thz", ed_f0).input("smoothing_nm", ed_opts.smoothing_nm);
            r.input("prominence", ed_opts.prominence_fraction);
            r.output("d_ps_per_nm", est.d_ps_per_nm);
            r.output("phi0_rad", est.phi0_rad);
            r.output("r_minus_db", db_from_ratio(est.r_minus));
            r.output("r_plus_db", db_from_ratio(est.r_plus));
            r.output("extrema", static_cast<double>(est.extrema));
            r.output("ripple_estimate_ps_per_nm", est.ripple_estimate ? format_number(*est.ripple_estimate) : "none");
            r.output("residual_rms", est.residual_rms);
            out << r.str();
            return 0;
        }
        if (dcf->parsed())
        {
            std::vector<FiberSegment> segments;
            for (const auto &s : dcf_segments)
            {
                const auto [len, rate] = parse_pair(s, "--segment");
                double length = 0.0;
                const auto [ptr, ec] = std::from_chars(len.data(), len.data() + len.size(), length);
                if (len.empty() || ec != std::errc() || ptr != len.data() + len.size())
                    fail(ErrorKind::Validation, "--segment `" + s + "` has a malformed length");
                segments.push_back({length, rate});
            }
            if (dcf_net.set())
                segments.push_back({1.0, dcf_net.value});
            const double length = design_dcf(segments, dcf_rate, dcf_target);
            RunReport r("design-dcf");
            for (const auto &s : dcf_segments)
                r.input("segment", s);
            if (dcf_net.set())
                r.input("net", dcf_net.value);
            r.input("dcf_rate_ps_per_nm_per_m", dcf_rate).input("target_ps_per_nm", dcf_target);
            r.output("link_dispersion_ps_per_nm", net_dispersion(segments));
            r.output("dcf_length_m", length);
            r.output_fixed("dcf_length_cm", 100.0 * length, 1);
            out << r.str();
            return 0;
        }
        if (band->parsed())
        {
            const auto cfg = config_or_empty(bd_config);
            const auto model = bd_disp.resolve(cfg, "band");
            const auto grid = bd_grid.resolve(cfg);
            const double lock_nm =
                bd_lock.or_else(cfg.lockloop ? cfg.lockloop->config.lock_wavelength_nm : 1545.0);
            double max_dev = bd_maxdev.value;
            std::optional<QuadLevels> levels;
            if (!bd_maxdev.set())
            {
                levels = resolve_levels(bd_levels.minus_db, bd_levels.plus_db, cfg);
                max_dev = degradation_phase(*levels, bd_degradation);
            }
            const FrequencyBand limits{frequency_thz(grid.stop_nm), frequency_thz(grid.start_nm)};
            const auto b = phase_maintained_band(model, frequency_thz(lock_nm), max_dev, limits);
            RunReport r("band");
            echo_model(r, model);
            r.input("lock_nm", lock_nm).input("start_nm", grid.start_nm).input("stop_nm", grid.stop_nm);
            if (levels)
            {
                echo_level_inputs(r, bd_levels, cfg);
                r.input("degradation_db", bd_degradation);
            }
            r.output("max_dev_rad", max_dev);
            r.output("f_lo_thz", b.band.f_lo_thz).output("f_hi_thz", b.band.f_hi_thz);
            r.output("width_thz", b.band.width_thz());
            r.output("toward_shorter_thz", b.toward_shorter_thz());
            r.output("toward_longer_thz", b.toward_longer_thz());
            r.output_fixed("shortest_nm", wavelength_nm(b.band.f_hi_thz), 2);
            r.output_fixed("longest_nm", wavelength_nm(b.band.f_lo_thz), 2);
            out << r.str();
            return 0;
        }
        if (fitcal->parsed())
        {
            const auto cfg = config_or_empty(fc_config);
            std::string path = fc_input;
            if (path.empty())
            {
                if (!cfg.sweep_csv)
                    fail(ErrorKind::Validation, "fit-calibration needs --input or fit.sweep_csv");
                path = *cfg.sweep_csv;
            }
            std::istringstream in(read_text_file(path));
            const auto points = read_sweep(in);
            const auto fit = fit_calibration(points);
            RunReport r("fit-calibration");
            r.input("sweep", path);
            r.output("a_per_w", fit.efficiency_per_w);
            r.output("a_sigma", fit.efficiency_sigma());
            r.output("loss", fit.loss);
            r.output("loss_sigma", fit.loss_sigma());
            r.output_fixed("loss_percent_1dp", 100.0 * fit.loss, 1);
            r.output("cov_a_a", fit.covariance[0][0]);
            r.output("cov_a_l", fit.covariance[0][1]);
            r.output("cov_l_l", fit.covariance[1][1]);
            r.output("residual_rms_db", fit.residual_rms_db);
            r.output("iterations", static_cast<double>(fit.iterations));
            for (const auto &w : fit.warnings)
                r.output("warning", w);
            out << r.str();
            return 0;
        }
        if (chain->parsed())
        {
            LossChain lc;
            for (const auto &e : ch_elements)
            {
                const auto [label, t] = parse_pair(e, "--element");
                lc.add(label, t);
            }
            const double eff = chain_efficiency(lc);
            RunReport r("chain");
            for (const auto &e : ch_elements)
                r.input("element", e);
            r.output("efficiency", eff);
            r.output_fixed("efficiency_percent", 100.0 * eff, 0);
            if (ch_total.set())
            {
                r.input("total", ch_total.value);
                const double stage = infer_stage_efficiency(ch_total.value, eff);
                r.output("stage_efficiency", stage);
                r.output_fixed("stage_efficiency_2dp", stage, 2);
                r.output_fixed("stage_loss_percent", 100.0 * (1.0 - stage), 1);
            }
            out << r.str();
            return 0;
        }
        if (simlock->parsed())
        {
            const auto cfg = config_or_empty(sl_config);
            const auto model = sl_disp.resolve(cfg, "simulate-lock");
            const auto levels = resolve_levels(sl_levels.minus_db, sl_levels.plus_db, cfg);
            LockSection ls = cfg.lockloop.value_or(LockSection{});
            auto &c = ls.config;
            c.ki = sl_ki.or_else(c.ki);
            c.dt_s = sl_dt.or_else(c.dt_s);
            if (sl_target.set())
            {
                c.target = sl_target.value;
                ls.target_set = true;
            }
            if (!ls.target_set)
                c.target = 0.5 * (levels.r_minus() + levels.r_plus());
            c.lock_wavelength_nm = sl_lock.or_else(c.lock_wavelength_nm);
            c.noise_rms = sl_noise.or_else(c.noise_rms);
            c.drift_rate = sl_drift.or_else(c.drift_rate);
            if (sl_steps.set())
            {
                if (!(sl_steps.value >= 1.0) || sl_steps.value != std::floor(sl_steps.value))
                    fail(ErrorKind::Validation, "--max-steps must be a positive integer");
                c.max_steps = static_cast<std::size_t>(sl_steps.value);
            }
            c.tolerance = sl_tol.or_else(c.tolerance);
            c.initial_phase = sl_init.or_else(c.initial_phase);
            if (sl_drift_steps.set())
            {
                if (!(sl_drift_steps.value >= 0.0) || sl_drift_steps.value != std::floor(sl_drift_steps.value))
                    fail(ErrorKind::Validation, "--drift-steps must be a non-negative integer");
                c.drift_steps = static_cast<std::size_t>(sl_drift_steps.value);
            }
            c.min_slope_fraction = sl_min_slope.or_else(c.min_slope_fraction);
            if (sl_no_auto_sign)
                c.auto_sign = false;
            c.validate();
            const auto seed = resolve_seed(sl_seed, cfg);
            const auto dir = output_dir(sl_outdir, cfg);
            const auto result = run_lock(c, model, levels, seed);

            RunReport r("simulate-lock");
            r.seed(seed);
            echo_model(r, model);
            echo_level_inputs(r, sl_levels, cfg);
            r.input("ki", c.ki).input("dt", c.dt_s).input("target", c.target);
            r.input("lock_wavelength_nm", c.lock_wavelength_nm).input("noise_rms", c.noise_rms);
            r.input("drift_rate", c.drift_rate).input("max_steps", static_cast<double>(c.max_steps));
            r.input("tolerance", result.tolerance).input("initial_phase", c.initial_phase);
            if (c.drift_steps)
                r.input("drift_steps", static_cast<double>(*c.drift_steps));
            r.input("auto_sign", c.auto_sign ? "true" : "false");
            r.input("min_slope_fraction", c.min_slope_fraction);
            r.output("status", to_string(result.status));
            r.output("locked", result.locked ? "true" : "false");
            r.output("settle_step", result.settle_step ? std::to_string(*result.settle_step) : "none");
            r.output("steady_state_rms_error", result.steady_state_rms_error);
            r.output("signed_ki", result.signed_ki);
            r.output("operating_slope", result.operating.slope);
            r.output("loop_gain", result.operating.loop_gain);
            r.output("final_phi_actuated", result.trace.back().phi_actuated);
            const auto path = join_path(dir, "lock_trace.csv");
            r.output("trace", path);

            std::ostringstream csv;
            write_lock_trace(csv, result, c);
            write_file_atomic(path, csv.str());
            write_file_atomic(join_path(dir, "simulate-lock.report"), r.str());
            out << r.str();
            return 0;
        }
        if (replicate->parsed())
        {
            const auto cfg = config_or_empty(rp_config);
            const auto results = run_reference_checks(ReplicaScenario::from_config(cfg));
            out << format_table(results);
            if (!all_passed(results))
            {
                std::string failed;
                for (const auto &res : results)
                    if (res.verdict == Verdict::Fail)
                        failed += (failed.empty() ? "" : ",") + std::to_string(res.id);
                return report_error(err, to_string(ErrorKind::Validation), "checks failed: " + failed);
            }
            return 0;
        }
    }
    catch (const Error &e)
    {
        return report_error(err, to_string(e.kind()), e.what());
    }
    catch (const std::exception &e)
    {
        return report_error(err, "internal", e.what());
    }
    return report_error(err, "usage", "no subcommand");
}

} // namespace opachain
