#pragma once

// Internal unit system: Hartree atomic units with hbar = 1. Everything
// user-facing is in fs, cm^-1, amu and bohr and goes through these helpers.

namespace decoh::units {

inline constexpr double kAtomicTimePerFs = 41.341374575751;
inline constexpr double kHartreePerWavenumber = 4.556335252912e-6;
inline constexpr double kElectronMassPerAmu = 1822.888486209;
inline constexpr double kBohrPerAngstrom = 1.0 / 0.529177210903;

constexpr double fs_to_au(double fs) { return fs * kAtomicTimePerFs; }
constexpr double au_to_fs(double t) { return t / kAtomicTimePerFs; }

constexpr double cm1_to_hartree(double wavenumber) { return wavenumber * kHartreePerWavenumber; }
constexpr double hartree_to_cm1(double e) { return e / kHartreePerWavenumber; }

constexpr double amu_to_me(double amu) { return amu * kElectronMassPerAmu; }
constexpr double me_to_amu(double m) { return m / kElectronMassPerAmu; }

constexpr double angstrom_to_bohr(double a) { return a * kBohrPerAngstrom; }

}  // namespace decoh::units
