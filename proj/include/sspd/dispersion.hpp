#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace sspd::tmm {

/// Tabulated complex refractive index ñ(λ) = n + ik, sampled on a strictly
/// increasing wavelength grid. Queries interpolate linearly in both n and k;
/// queries outside the sampled range are an error (no extrapolation).
class DispersionTable {
public:
    /// Builds a table from parallel arrays. Validates: at least two samples,
    /// strictly increasing wavelengths, n > 0, k >= 0.
    DispersionTable(std::string name,
                    std::vector<double> wavelength_nm,
                    std::vector<double> n,
                    std::vector<double> k);

    /// Parses a whitespace-separated text file with lines
    ///   wavelength_nm  n  k
    /// and '#' comment lines. Same validation as the array constructor.
    static DispersionTable from_file(const std::filesystem::path& path,
                                     const std::string& name);

    /// Linear interpolation at the given wavelength. Throws ConfigError
    /// naming the material and the supported range when out of bounds.
    std::complex<double> at(double wavelength_nm) const;

    const std::string& name() const { return name_; }
    double min_wavelength_nm() const { return wavelength_nm_.front(); }
    double max_wavelength_nm() const { return wavelength_nm_.back(); }
    std::size_t size() const { return wavelength_nm_.size(); }

private:
    std::string name_;
    std::vector<double> wavelength_nm_;
    std::vector<double> n_;
    std::vector<double> k_;
};

/// An optical material: either a wavelength-independent complex index, a
/// dispersion table, or an effective-medium mixture of another material
/// with vacuum.
class Material {
public:
    /// Constant complex index ñ = n + ik at every wavelength.
    static Material constant_index(std::string name, std::complex<double> index);

    /// Index looked up in a dispersion table.
    static Material tabulated(DispersionTable table);

    /// Volume-fraction mixture of `inclusion` with vacuum:
    /// ε_eff = f·ε_inclusion + (1−f)·1, ñ_eff = sqrt(ε_eff) with Im >= 0.
    /// `fill_fraction` must lie in [0, 1].
    static Material effective_medium(const Material& inclusion,
                                     double fill_fraction,
                                     std::string name);

    std::complex<double> refractive_index(double wavelength_nm) const;
    const std::string& name() const { return name_; }

private:
    Material() = default;

    enum class Kind { Constant, Table, Mixture };
    Kind kind_ = Kind::Constant;
    std::string name_;
    std::complex<double> constant_{1.0, 0.0};
    std::shared_ptr<const DispersionTable> table_;
    std::shared_ptr<const Material> inner_;
    double fill_fraction_ = 1.0;
};

/// Built-in materials shipped with the toolkit (same values as the data/
/// directory tables, compiled in so tools work from any directory).
namespace builtin {
Material vacuum();
Material silicon();        ///< crystalline Si substrate table
Material silica();         ///< fused SiO2 (Sellmeier-derived table, k = 0)
Material nbn();            ///< thin-film NbN table
} // namespace builtin

} // namespace sspd::tmm
