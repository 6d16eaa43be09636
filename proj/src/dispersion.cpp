#include "sspd/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sspd/errors.hpp"

namespace sspd::tmm {

DispersionTable::DispersionTable(std::string name,
                                 std::vector<double> wavelength_nm,
                                 std::vector<double> n,
                                 std::vector<double> k)
    : name_(std::move(name)),
      wavelength_nm_(std::move(wavelength_nm)),
      n_(std::move(n)),
      k_(std::move(k)) {
    if (wavelength_nm_.size() < 2)
        throw ConfigError("dispersion table '" + name_ + "': need at least 2 samples");
    if (n_.size() != wavelength_nm_.size() || k_.size() != wavelength_nm_.size())
        throw ConfigError("dispersion table '" + name_ + "': column lengths differ");
    for (std::size_t i = 0; i < wavelength_nm_.size(); ++i) {
        if (!std::isfinite(wavelength_nm_[i]) || !std::isfinite(n_[i]) ||
            !std::isfinite(k_[i]))
            throw ConfigError("dispersion table '" + name_ + "': non-finite entry");
        if (i > 0 && wavelength_nm_[i] <= wavelength_nm_[i - 1])
            throw ConfigError("dispersion table '" + name_ +
                              "': wavelengths must be strictly increasing (row " +
                              std::to_string(i + 1) + ")");
        if (n_[i] <= 0.0)
            throw ConfigError("dispersion table '" + name_ + "': n must be > 0");
        if (k_[i] < 0.0)
            throw ConfigError("dispersion table '" + name_ + "': k must be >= 0");
    }
}

DispersionTable DispersionTable::from_file(const std::filesystem::path& path,
                                           const std::string& name) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dispersion file: " + path.string());
    std::vector<double> wl, n, k;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        double w, nn, kk;
        if (!(row >> w)) continue; // blank or comment-only line
        if (!(row >> nn >> kk))
            throw ConfigError("dispersion file " + path.string() + ":" +
                              std::to_string(lineno) +
                              ": expected 'wavelength_nm n k'");
        std::string extra;
        if (row >> extra)
            throw ConfigError("dispersion file " + path.string() + ":" +
                              std::to_string(lineno) + ": trailing token '" +
                              extra + "'");
        wl.push_back(w);
        n.push_back(nn);
        k.push_back(kk);
    }
    return DispersionTable(name, std::move(wl), std::move(n), std::move(k));
}

std::complex<double> DispersionTable::at(double wavelength_nm) const {
    if (wavelength_nm < wavelength_nm_.front() ||
        wavelength_nm > wavelength_nm_.back()) {
        std::ostringstream msg;
        msg << "material '" << name_ << "': wavelength " << wavelength_nm
            << " nm outside tabulated range [" << wavelength_nm_.front() << ", "
            << wavelength_nm_.back() << "] nm";
        throw ConfigError(msg.str());
    }
    const auto it = std::lower_bound(wavelength_nm_.begin(), wavelength_nm_.end(),
                                     wavelength_nm);
    const std::size_t hi = static_cast<std::size_t>(
        std::max<std::ptrdiff_t>(1, it - wavelength_nm_.begin()));
    const std::size_t lo = hi - 1;
    const double t = (wavelength_nm - wavelength_nm_[lo]) /
                     (wavelength_nm_[hi] - wavelength_nm_[lo]);
    return {n_[lo] + t * (n_[hi] - n_[lo]), k_[lo] + t * (k_[hi] - k_[lo])};
}

Material Material::constant_index(std::string name, std::complex<double> index) {
    if (index.real() <= 0.0 || index.imag() < 0.0)
        throw ConfigError("material '" + name +
                          "': constant index needs Re > 0 and Im >= 0");
    Material m;
    m.kind_ = Kind::Constant;
    m.name_ = std::move(name);
    m.constant_ = index;
    return m;
}

Material Material::tabulated(DispersionTable table) {
    Material m;
    m.kind_ = Kind::Table;
    m.name_ = table.name();
    m.table_ = std::make_shared<const DispersionTable>(std::move(table));
    return m;
}

Material Material::effective_medium(const Material& inclusion,
                                    double fill_fraction, std::string name) {
    if (!(fill_fraction >= 0.0 && fill_fraction <= 1.0))
        throw ConfigError("effective medium '" + name +
                          "': fill fraction must lie in [0, 1]");
    Material m;
    m.kind_ = Kind::Mixture;
    m.name_ = std::move(name);
    m.inner_ = std::make_shared<const Material>(inclusion);
    m.fill_fraction_ = fill_fraction;
    return m;
}

std::complex<double> Material::refractive_index(double wavelength_nm) const {
    switch (kind_) {
        case Kind::Constant:
            return constant_;
        case Kind::Table:
            return table_->at(wavelength_nm);
        case Kind::Mixture: {
            const std::complex<double> n_inc = inner_->refractive_index(wavelength_nm);
            const std::complex<double> eps =
                fill_fraction_ * n_inc * n_inc + (1.0 - fill_fraction_);
            std::complex<double> n_eff = std::sqrt(eps);
            if (n_eff.imag() < 0.0) n_eff = -n_eff; // passive branch
            return n_eff;
        }
    }
    throw NumericError("material '" + name_ + "': corrupt kind");
}

} // namespace sspd::tmm
