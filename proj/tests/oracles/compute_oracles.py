"""Independent reference values for the unit and acceptance tests.

Run once and paste the printed constants into tests/oracles.hpp.
Uses only numpy/scipy, no code from the C++ library.
"""
import math

import numpy as np
from scipy.optimize import brentq, least_squares

C = 2.99792458e5  # nm/ps


def true_levels(a, loss, p):
    s = 2.0 * math.sqrt(a * p)
    return loss + (1 - loss) * math.exp(-s), loss + (1 - loss) * math.exp(s)


def measured(rm, rp, g):
    g2 = g * g
    return (g2 * rm + rp) / (1 + g2), (g2 * rp + rm) / (1 + g2)


def theta_eff(g):
    return math.asin(math.sqrt(1.0 / (1.0 + g * g)))


def db(r):
    return 10.0 * math.log10(r)


def min_gain(rm_db, rp_db, tol):
    rm, rp = 10 ** (rm_db / 10), 10 ** (rp_db / 10)
    bias = lambda g: db(measured(rm, rp, g)[0]) - rm_db - tol
    return brentq(bias, 1.0, 1e6, xtol=1e-14, rtol=1e-15)


def band_one_sided(d, f0, max_dev):
    # pi D c (u/f0)^2 = max_dev
    return f0 * math.sqrt(max_dev / (math.pi * abs(d) * C))


def degradation_phase(rm_db, rp_db, deg_db):
    rm, rp = 10 ** (rm_db / 10), 10 ** (rp_db / 10)
    return math.asin(math.sqrt(rm * (10 ** (deg_db / 10) - 1) / (rp - rm)))


def fit_db(points):
    p = np.array([x[0] for x in points])
    ym = np.array([x[1] for x in points])
    yp = np.array([x[2] for x in points])

    def res(x):
        a, loss = x
        s = 2 * np.sqrt(a * p)
        return np.concatenate([10 * np.log10(loss + (1 - loss) * np.exp(-s)) - ym,
                               10 * np.log10(loss + (1 - loss) * np.exp(s)) - yp])

    sol = least_squares(res, [15.0, 0.4], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return sol.x


def main():
    out = {}
    out["tl_20_1_minus"], out["tl_20_1_plus"] = true_levels(20.1, 0.487, 0.1)
    out["tl_19_1_minus"], out["tl_19_1_plus"] = true_levels(19.1, 0.425, 0.2)
    rm, rp = 0.5012, 1.9953
    th = 0.05
    out["vx_0_05"] = rm * math.cos(th) ** 2 + rp * math.sin(th) ** 2
    out["vp_0_05"] = rm * math.sin(th) ** 2 + rp * math.cos(th) ** 2
    out["ratio_9_9_db"] = 10 ** 0.99
    out["meas_g20_minus"], out["meas_g20_plus"] = measured(10 ** -0.3, 10 ** 0.3, 20)
    out["meas_g80_minus"], _ = measured(10 ** -0.3, 10 ** 1.5, 80)
    out["theta_g200_deg"] = math.degrees(theta_eff(200))
    out["theta_g20_deg"] = math.degrees(theta_eff(20))
    out["theta_23db_deg"] = math.degrees(theta_eff(10 ** 2.3))
    out["min_gain_3_3"] = min_gain(-3.0, 3.0, 0.05)
    out["min_gain_3_15"] = min_gain(-3.0, 15.0, 0.05)
    out["grid_gain_3_3"] = 10 ** (math.ceil(10 * math.log10(out["min_gain_3_3"])) / 10)
    out["grid_gain_3_15"] = 10 ** (math.ceil(10 * math.log10(out["min_gain_3_15"])) / 10)
    out["dcf_rate"] = -(0.033 - 0.0045) / 0.7
    out["dcf_len_target0"] = 0.033 / ((0.033 - 0.0045) / 0.7)
    out["band_0045_0_12"] = band_one_sided(0.0045, 194.0, 0.12)
    out["band_033_0_12"] = band_one_sided(0.033, 194.0, 0.12)
    out["deg_phase_1db"] = degradation_phase(-1.2, 7.1, 1.0)
    # Vertex at 194 THz, lock at 1545 nm: extent toward shorter wavelengths
    # where pi D c ((f0 - f)^2 - (f0 - f_lock)^2) / f0^2 stays below the threshold.
    f_lock = 299792.458 / 1545.0
    out["f_lock_1545"] = f_lock
    for name, d in (("band_0045_deg", 0.0045), ("band_033_deg", 0.033)):
        u_lock = 194.0 - f_lock
        outer = math.sqrt(u_lock ** 2 + out["deg_phase_1db"] * 194.0 ** 2 / (math.pi * d * C))
        out[name] = 194.0 + outer - f_lock
    # First phase = pi point away from the vertex for D=0.033, f0=194.
    out["first_pi_offset_thz"] = 194.0 * math.sqrt(1.0 / (0.033 * C))
    a, loss = fit_db([(0.05, -2.7, 5.6), (0.1, -3.2, 9.9), (0.2, -2.2, 14.9)])
    out["fit_all_optical_a"] = a
    out["fit_all_optical_l"] = loss
    out["chain_bhd"] = 0.86 * 0.98 * 0.93
    out["opa2_eff"] = (1 - 0.487) / (1 - 0.27)
    out["opa1_loss"] = 1 - (1 - 0.425) / out["chain_bhd"]
    for k, v in out.items():
        print(f"inline constexpr double {k} = {float(v)!r};")


if __name__ == "__main__":
    main()
