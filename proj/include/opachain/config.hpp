#ifndef OPACHAIN_CONFIG_HPP
#define OPACHAIN_CONFIG_HPP

// Scenario files: one `section.key = value` per line, `#` starts a comment.
//
//   squeezer.a = 20.1          # 1/W
//   squeezer.loss = 0.487
//   squeezer.pump = 0.1        # W
//   gain.g_db = 23
//   dispersion.d = 0.033       # ps/nm
//   grid.start_nm = 1500
//
// Sections: squeezer, levels, measured, gain, dispersion, grid, lockloop,
// fit, output, run. Unknown or duplicate keys are errors that carry the
// line number.

#include "opachain/dispersion.hpp"
#include "opachain/lockloop.hpp"
#include "opachain/opa_measurement.hpp"
#include "opachain/sideband_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace opachain
{
struct LevelsSection
{
    double r_minus_db = 0.0;
    double r_plus_db = 0.0;
};

struct DispersionSection
{
    double d_ps_per_nm = 0.0;
    double f0_thz = 194.0;
    double phi0_rad = 0.0;

    DispersionModel model() const { return {d_ps_per_nm, f0_thz, phi0_rad}; }
};

struct GridSection
{
    double start_nm = 0.0;
    double stop_nm = 0.0;
    double step_nm = 0.0;

    std::vector<double> wavelengths() const { return wavelength_grid(start_nm, stop_nm, step_nm); }
};

struct LockSection
{
    LockLoopConfig config;
    // Without an explicit target the lock sits mid-slope, (R- + R+)/2.
    bool target_set = false;
};

struct ScenarioConfig
{
    std::optional<SqueezerParams> squeezer;
    std::optional<LevelsSection> levels;
    std::optional<LevelsSection> measured;
    std::optional<OpaGain> gain;
    std::optional<DispersionSection> dispersion;
    std::optional<GridSection> grid;
    std::optional<LockSection> lockloop;
    std::optional<std::string> sweep_csv;
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;

    // Levels from [levels] if present, otherwise generated by [squeezer].
    QuadLevels resolve_levels() const;

    // Accessors that fail with a Validation error naming the missing section.
    const DispersionSection &require_dispersion(std::string_view who) const;
    const GridSection &require_grid(std::string_view who) const;
    OpaGain require_gain(std::string_view who) const;
};

ScenarioConfig parse_config(std::string_view text, std::string_view source = "<config>");
ScenarioConfig load_config(const std::string &path);

} // namespace opachain

#endif // OPACHAIN_CONFIG_HPP
