#ifndef OPACHAIN_TESTS_ORACLES_HPP
#define OPACHAIN_TESTS_ORACLES_HPP

// Frozen output of oracles/compute_oracles.py (numpy/scipy, independent of
// the library). Regenerate with: python3 tests/oracles/compute_oracles.py

namespace oracle
{
inline constexpr double tl_20_1_minus = 0.517107866087348;
inline constexpr double tl_20_1_plus = 9.227871878349069;
inline constexpr double tl_19_1_minus = 0.4365352317639315;
inline constexpr double tl_19_1_plus = 29.087189608864406;
inline constexpr double vx_0_05 = 0.5049321383290509;
inline constexpr double vp_0_05 = 1.9915678616709493;
inline constexpr double ratio_9_9_db = 9.772372209558107;
inline constexpr double meas_g20_minus = 0.5049131066480742;
inline constexpr double meas_g20_plus = 1.9915364419480777;
inline constexpr double meas_g80_minus = 0.506049222280304;
inline constexpr double theta_g200_deg = 0.2864765102770745;
inline constexpr double theta_g20_deg = 2.8624052261117474;
inline constexpr double theta_23db_deg = 0.287156727992608;
inline constexpr double min_gain_3_3 = 16.013897794935055;
inline constexpr double min_gain_3_15 = 73.222801585586;
inline constexpr double grid_gain_3_3 = 19.952623149688797;
inline constexpr double grid_gain_3_15 = 79.43282347242814;
inline constexpr double dcf_rate = -0.04071428571428572;
inline constexpr double dcf_len_target0 = 0.8105263157894737;
inline constexpr double band_0045_0_12 = 1.0322878322180304;
inline constexpr double band_033_0_12 = 0.38119754516262183;
inline constexpr double deg_phase_1db = 0.21362549892610266;
inline constexpr double f_lock_1545 = 194.04042588996762;
inline constexpr double band_0045_deg = 1.337493203054521;
inline constexpr double band_033_deg = 0.4697894780949241;
inline constexpr double first_pi_offset_thz = 1.9504481448427435;
inline constexpr double fit_all_optical_a = 21.16008465757078;
inline constexpr double fit_all_optical_l = 0.5203628746162444;
inline constexpr double chain_bhd = 0.7838040000000001;
inline constexpr double opa2_eff = 0.7027397260273973;
inline constexpr double opa1_loss = 0.26639823221111414;
} // namespace oracle

#endif // OPACHAIN_TESTS_ORACLES_HPP
