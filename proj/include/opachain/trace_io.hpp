#ifndef OPACHAIN_TRACE_IO_HPP
#define OPACHAIN_TRACE_IO_HPP

// CSV formats.
//
// Spectrum trace:   wavelength_nm,value,unit   (unit is `db` or `ratio`)
//   Optional `# key=value` lines before the header carry metadata
//   (resolution_nm, smoothing_nm, label).
// Sweep:            pump_w,r_minus_db,r_plus_db
// Lock trace:       step,time_s,pd3,error,phi_actuated,phi_drift
//
// Numbers are written in shortest round-trip form, so write -> read is
// bit-exact. Decimal point only, LF line endings.

#include "opachain/calibration.hpp"
#include "opachain/dispersion.hpp"
#include "opachain/lockloop.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace opachain
{
std::string format_number(double value);

void write_trace(std::ostream &out, const SpectrumTrace &trace);
SpectrumTrace read_trace(std::istream &in);

void write_sweep(std::ostream &out, std::span<const SweepPoint> points);
std::vector<SweepPoint> read_sweep(std::istream &in);

void write_lock_trace(std::ostream &out, const LockResult &result, const LockLoopConfig &config);

// Writes via a temporary file renamed into place, so a failure never leaves
// a partial file at `path`.
void write_file_atomic(const std::string &path, const std::string &contents);

} // namespace opachain

#endif // OPACHAIN_TRACE_IO_HPP
