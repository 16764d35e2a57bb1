#include "opachain/replication.hpp"

#include "opachain/calibration.hpp"
#include "opachain/dispersion.hpp"
#include "opachain/errors.hpp"
#include "opachain/lockloop.hpp"
#include "opachain/opa_measurement.hpp"
#include "opachain/report.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace opachain
{
namespace
{
constexpr double kPi = std::numbers::pi;
constexpr int kRandomTrials = 10000;

double degrees(double rad) { return rad * 180.0 / kPi; }

// Wrap into (-pi/2, pi/2]; lock phases are only defined modulo pi.
double wrap_half_pi(double x)
{
    double r = std::fmod(x + kPi / 2.0, kPi);
    if (r <= 0.0)
        r += kPi;
    return r - kPi / 2.0;
}

struct RandomTriple
{
    QuadLevels levels;
    OpaGain gain;
};

std::vector<RandomTriple> random_triples(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rm_db(-15.0, 0.0);
    std::uniform_real_distribution<double> rp_db(0.0, 30.0);
    std::uniform_real_distribution<double> g_db(0.2, 40.0);
    std::vector<RandomTriple> out;
    out.reserve(kRandomTrials);
    for (int i = 0; i < kRandomTrials; ++i)
    {
        const double a = rm_db(rng);
        const double b = rp_db(rng);
        const double g = g_db(rng);
        out.push_back({QuadLevels::from_db(a, b), OpaGain::from_db(g)});
    }
    return out;
}

CriterionResult finite_gain_cases()
{
    CriterionResult r{1, "finite-gain worked cases", Verdict::Fail, {}};
    const auto g1 = required_gain(QuadLevels::from_db(-3.0, 3.0), 0.05);
    const auto g2 = required_gain(QuadLevels::from_db(-3.0, 15.0), 0.05);
    GainSearch continuous;
    continuous.step_db = 0.0;
    const auto c1 = required_gain(QuadLevels::from_db(-3.0, 3.0), 0.05, continuous);
    const auto c2 = required_gain(QuadLevels::from_db(-3.0, 15.0), 0.05, continuous);
    const bool ok = std::abs(g1.linear() - 20.0) <= 1.0 && std::abs(g2.linear() - 80.0) <= 3.0;
    std::ostringstream os;
    os << "G=" << fixed(g1.linear(), 2) << " (" << fixed(g1.db(), 0) << " dB), G=" << fixed(g2.linear(), 2) << " ("
       << fixed(g2.db(), 0) << " dB); continuous minima " << fixed(c1.linear(), 2) << ", " << fixed(c2.linear(), 2);
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    r.detail = os.str();
    return r;
}

CriterionResult effective_phase(const ReplicaScenario &s)
{
    CriterionResult r{2, "effective phase deviation at G", Verdict::Fail, {}};
    const double deg = degrees(effective_phase_deviation(OpaGain(s.gain)));
    const bool ok = std::abs(deg - 0.286) <= 0.01 && fixed(deg, 1) == "0.3";
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    r.detail = "G=" + fixed(s.gain, 1) + ": " + fixed(deg, 4) + " deg, displayed " + fixed(deg, 1) + " deg";
    return r;
}

CriterionResult correction_inversion(std::uint64_t seed)
{
    CriterionResult r{3, "correction inverts finite-gain measurement", Verdict::Fail, {}};
    double worst = 0.0;
    for (const auto &t : random_triples(seed))
    {
        if (!(t.gain.linear() > 1.0))
            continue;
        const auto back = true_from_measured(measured_from_true(t.levels, t.gain), t.gain);
        worst = std::max({worst, std::abs(back.r_minus() - t.levels.r_minus()) / t.levels.r_minus(),
                          std::abs(back.r_plus() - t.levels.r_plus()) / t.levels.r_plus()});
    }
    std::ostringstream os;
    os << kRandomTrials << " triples, worst relative error " << worst;
    r.verdict = worst < 1e-9 ? Verdict::Pass : Verdict::Fail;
    r.detail = os.str();
    return r;
}

CriterionResult phase_equivalence(std::uint64_t seed)
{
    CriterionResult r{4, "finite gain equals phase deviation", Verdict::Fail, {}};
    double worst = 0.0;
    for (const auto &t : random_triples(seed + 1))
    {
        const double meas = measured_from_true(t.levels, t.gain).r_minus_meas();
        const double vx = variance_at_phase(t.levels, PhaseAngle(effective_phase_deviation(t.gain))).vx;
        worst = std::max(worst, std::abs(meas - vx) / meas);
    }
    std::ostringstream os;
    os << kRandomTrials << " triples, worst relative difference " << worst;
    r.verdict = worst < 1e-12 ? Verdict::Pass : Verdict::Fail;
    r.detail = os.str();
    return r;
}

CriterionResult loss_chain()
{
    CriterionResult r{5, "detection-efficiency bookkeeping", Verdict::Fail, {}};
    LossChain chain;
    chain.add("beamsplitter excess loss", 0.86).add("circuit noise", 0.98).add("detector quantum efficiency", 0.93);
    const double bhd = chain_efficiency(chain);
    const double opa2 = infer_stage_efficiency(1.0 - 0.487, 1.0 - 0.27);
    const double opa1_loss = 1.0 - infer_stage_efficiency(0.575, bhd);
    const bool ok = std::abs(bhd - 0.7836) <= 5e-4 && fixed(100.0 * bhd, 0) == "78" &&
                    std::abs(opa2 - 0.703) <= 5e-4 && fixed(opa2, 2) == "0.70" &&
                    std::abs(opa1_loss - 0.266) <= 5e-4 && std::abs(std::round(100.0 * opa1_loss) - 27.0) <= 1.0;
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    r.detail = "homodyne efficiency " + fixed(bhd, 4) + " (" + fixed(100.0 * bhd, 0) + "%), OPA2 " + fixed(opa2, 3) +
               " (" + fixed(opa2, 2) + "), OPA1 loss " + fixed(100.0 * opa1_loss, 1) + "%";
    return r;
}

CriterionResult calibration()
{
    CriterionResult r{6, "calibration fit", Verdict::Fail, {}};
    const double pumps[] = {0.05, 0.1, 0.2};
    double worst = 0.0;
    for (const auto &[a, l] : {std::pair{19.1, 0.425}, std::pair{20.1, 0.487}})
    {
        const auto fit = fit_calibration(synthesize_sweep(a, l, pumps));
        worst = std::max({worst, std::abs(fit.efficiency_per_w - a) / a, std::abs(fit.loss - l) / l});
    }
    const SweepPoint all_optical[] = {{0.05, -2.7, 5.6}, {0.1, -3.2, 9.9}, {0.2, -2.2, 14.9}};
    const auto fit = fit_calibration(all_optical);
    const bool synth_ok = worst < 1e-5;
    const bool a_ok = std::abs(fit.efficiency_per_w - 20.1) <= 0.1 * 20.1;
    const bool l_ok = std::abs(fit.loss - 0.487) <= 0.03;
    std::ostringstream os;
    os << "synthetic worst rel err " << worst << "; measured points -> a=" << fixed(fit.efficiency_per_w, 2) << "+-"
       << fixed(fit.efficiency_sigma(), 2) << " /W" << (a_ok ? "" : " [out of 20.1+-10%]") << ", L=" << fixed(fit.loss, 4)
       << "+-" << fixed(fit.loss_sigma(), 3) << (l_ok ? "" : " [out of 0.487+-0.03]");
    r.verdict = synth_ok && a_ok && l_ok ? Verdict::Pass : Verdict::Fail;
    r.detail = os.str();
    return r;
}

CriterionResult dispersion_round_trip(const ReplicaScenario &s)
{
    CriterionResult r{7, "dispersion re-estimated from synthesized ripples", Verdict::Fail, {}};
    const auto grid = s.grid.wavelengths();
    const auto levels = true_levels(SqueezerParams(s.efficiency_per_w, s.loss, s.pump_w));
    bool ok = true;
    std::ostringstream os;
    for (double d : {0.0045, 0.033})
    {
        const auto trace = spectrum(DispersionModel(d, s.f0_thz, s.phi0_rad), levels, grid);
        const auto est = estimate_dispersion(trace, s.f0_thz);
        const double rel = std::abs(est.d_ps_per_nm - d) / d;
        ok = ok && rel <= 0.03;
        os << "D=" << d << " -> " << fixed(est.d_ps_per_nm, 5) << " (" << fixed(100.0 * rel, 3) << "%); ";
    }
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    r.detail = os.str();
    return r;
}

CriterionResult maintained_band(const ReplicaScenario &s)
{
    CriterionResult r{8, "phase maintained over 1 THz only with compensation", Verdict::Fail, {}};
    const auto levels = QuadLevels::from_db(-1.2, 7.1);
    const double max_dev = degradation_phase(levels, 1.0);
    const double lock = frequency_thz(s.lock_wavelength_nm);
    const FrequencyBand limits{frequency_thz(s.grid.stop_nm), frequency_thz(s.grid.start_nm)};
    const auto with_dcf = phase_maintained_band(DispersionModel(0.0045, s.f0_thz), lock, max_dev, limits);
    const auto without = phase_maintained_band(DispersionModel(0.033, s.f0_thz), lock, max_dev, limits);
    const bool ok = with_dcf.toward_shorter_thz() >= 1.0 && without.toward_shorter_thz() < 1.0;
    std::ostringstream os;
    os << "threshold " << fixed(max_dev, 3) << " rad; D=0.0045: " << fixed(with_dcf.toward_shorter_thz(), 2)
       << " THz (to " << fixed(wavelength_nm(with_dcf.band.f_hi_thz), 1) << " nm); D=0.033: "
       << fixed(without.toward_shorter_thz(), 2) << " THz (to " << fixed(wavelength_nm(without.band.f_hi_thz), 1)
       << " nm)";
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    r.detail = os.str();
    return r;
}

CriterionResult lock_loop(const ReplicaScenario &s)
{
    CriterionResult r{9, "integral lock on slope, wavelength-selected phase", Verdict::Fail, {}};
    const auto levels = true_levels(SqueezerParams(s.efficiency_per_w, s.loss, s.pump_w));
    const DispersionModel model(s.d_ps_per_nm, s.f0_thz, s.phi0_rad);
    const double disp_lock = dispersion_phase(model, frequency_thz(s.lock_wavelength_nm));

    LockLoopConfig cfg;
    cfg.target = 0.5 * (levels.r_minus() + levels.r_plus());
    cfg.lock_wavelength_nm = s.lock_wavelength_nm;
    // Start on the rising slope, below the target.
    cfg.initial_phase = kPi / 2.0 + 0.4 - disp_lock - s.phi0_rad;
    const auto mid = run_lock(cfg, model, levels, s.seed);
    bool monotone = true;
    for (std::size_t i = 1; i < mid.trace.size(); ++i)
        monotone = monotone && std::abs(cfg.target - mid.trace[i].pd3) <= std::abs(cfg.target - mid.trace[i - 1].pd3);
    const double final_err = std::abs(cfg.target - mid.trace.back().pd3);

    LockLoopConfig peak = cfg;
    peak.target = levels.r_plus();
    const auto at_peak = run_lock(peak, model, levels, s.seed);

    LockLoopConfig other = cfg;
    other.lock_wavelength_nm = s.lock_wavelength_nm - 5.0;
    const auto moved = run_lock(other, model, levels, s.seed);
    const double predicted = -(dispersion_phase(model, frequency_thz(other.lock_wavelength_nm)) - disp_lock);
    const double observed = wrap_half_pi(moved.trace.back().phi_actuated - mid.trace.back().phi_actuated);
    const double shift_err = std::abs(observed - predicted) / std::abs(predicted);

    const bool ok = mid.locked && monotone && final_err < 1e-6 && !at_peak.locked && moved.locked && shift_err <= 0.01;
    std::ostringstream os;
    os << "mid-slope " << to_string(mid.status) << (monotone ? ", monotone" : ", NOT monotone") << ", final error "
       << final_err << "; peak target " << to_string(at_peak.status) << "; " << fixed(other.lock_wavelength_nm, 0)
       << " nm shifts phase " << fixed(observed, 4) << " rad vs predicted " << fixed(predicted, 4) << " ("
       << fixed(100.0 * shift_err, 3) << "%)";
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    r.detail = os.str();
    return r;
}

template <typename F>
CriterionResult guarded(int id, const char *title, F &&check)
{
    try
    {
        return check();
    }
    catch (const Error &e)
    {
        return {id, title, Verdict::Fail, std::string("error: ") + e.what()};
    }
}

} // namespace

ReplicaScenario ReplicaScenario::from_config(const ScenarioConfig &config)
{
    ReplicaScenario s;
    if (config.squeezer)
    {
        s.efficiency_per_w = config.squeezer->efficiency_per_w();
        s.loss = config.squeezer->loss();
        s.pump_w = config.squeezer->pump_w();
    }
    if (config.gain)
        s.gain = config.gain->linear();
    if (config.dispersion)
    {
        s.d_ps_per_nm = config.dispersion->d_ps_per_nm;
        s.f0_thz = config.dispersion->f0_thz;
        s.phi0_rad = config.dispersion->phi0_rad;
    }
    if (config.grid)
        s.grid = *config.grid;
    if (config.lockloop)
        s.lock_wavelength_nm = config.lockloop->config.lock_wavelength_nm;
    if (config.seed)
        s.seed = *config.seed;
    return s;
}

std::vector<CriterionResult> run_reference_checks(const ReplicaScenario &s)
{
    std::vector<CriterionResult> out;
    out.push_back(guarded(1, "finite-gain worked cases", [] { return finite_gain_cases(); }));
    out.push_back(guarded(2, "effective phase deviation at G", [&] { return effective_phase(s); }));
    out.push_back(guarded(3, "correction inverts finite-gain measurement", [&] { return correction_inversion(s.seed); }));
    out.push_back(guarded(4, "finite gain equals phase deviation", [&] { return phase_equivalence(s.seed); }));
    out.push_back(guarded(5, "detection-efficiency bookkeeping", [] { return loss_chain(); }));
    out.push_back(guarded(6, "calibration fit", [] { return calibration(); }));
    out.push_back(guarded(7, "dispersion re-estimated from synthesized ripples", [&] { return dispersion_round_trip(s); }));
    out.push_back(guarded(8, "phase maintained over 1 THz only with compensation", [&] { return maintained_band(s); }));
    out.push_back(guarded(9, "integral lock on slope, wavelength-selected phase", [&] { return lock_loop(s); }));
    out.push_back({10, "raw optical-spectrum traces", Verdict::NotApplicable,
                   "experimental data; covered at model level by checks 6-8"});
    return out;
}

std::string format_table(const std::vector<CriterionResult> &results)
{
    std::ostringstream os;
    for (const auto &r : results)
    {
        const char *tag = r.verdict == Verdict::Pass ? "PASS" : r.verdict == Verdict::Fail ? "FAIL" : "N/A ";
        os << (r.id < 10 ? " " : "") << r.id << "  " << tag << "  " << r.title << ": " << r.detail << '\n';
    }
    return os.str();
}

bool all_passed(const std::vector<CriterionResult> &results)
{
    return std::none_of(results.begin(), results.end(), [](const auto &r) { return r.verdict == Verdict::Fail; });
}

} // namespace opachain
