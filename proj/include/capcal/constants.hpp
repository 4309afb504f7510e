#ifndef CAPCAL_CONSTANTS_HPP
#define CAPCAL_CONSTANTS_HPP

namespace capcal {

// Vacuum permittivity, F/m (CODATA 2018). Single source of truth for the
// whole process.
inline constexpr double vacuum_permittivity = 8.8541878128e-12;

// Unit factors for the I/O boundaries. Internal quantities are always SI
// (m, F, N, J, V); picofarads, nanometers and friends appear only when
// reading or writing.
namespace units {
inline constexpr double pf_per_f = 1e12;
inline constexpr double f_per_pf = 1e-12;
inline constexpr double m_per_um = 1e-6;
inline constexpr double m_per_nm = 1e-9;
inline constexpr double nm_per_m = 1e9;
inline constexpr double um_per_m = 1e6;
}  // namespace units

}  // namespace capcal

#endif
