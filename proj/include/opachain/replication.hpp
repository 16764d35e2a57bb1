#ifndef OPACHAIN_REPLICATION_HPP
#define OPACHAIN_REPLICATION_HPP

// Reference scenario: reproduces the published summary numbers of the
// cascaded-OPA squeezing experiment at model level and reports pass/fail
// per check. Used by `opachain replicate-paper`.

#include "opachain/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace opachain
{
struct ReplicaScenario
{
    double efficiency_per_w = 20.1;
    double loss = 0.487;
    double pump_w = 0.1;
    double gain = 200.0;
    double d_ps_per_nm = 0.033;
    double f0_thz = 194.0;
    // Lock in the middle of a ripple at the center wavelength.
    double phi0_rad = 0.7853981633974483;
    double lock_wavelength_nm = 1545.0;
    GridSection grid{1500.0, 1590.0, 0.1};
    std::uint64_t seed = 1;

    static ReplicaScenario from_config(const ScenarioConfig &config);
};

enum class Verdict
{
    Pass,
    Fail,
    NotApplicable,
};

struct CriterionResult
{
    int id = 0;
    std::string title;
    Verdict verdict = Verdict::Fail;
    std::string detail;
};

std::vector<CriterionResult> run_reference_checks(const ReplicaScenario &scenario);

std::string format_table(const std::vector<CriterionResult> &results);

bool all_passed(const std::vector<CriterionResult> &results);

} // namespace opachain

#endif // OPACHAIN_REPLICATION_HPP
