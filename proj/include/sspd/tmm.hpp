#pragma once

#include <array>
#include <complex>
#include <vector>

#include "sspd/dispersion.hpp"

namespace sspd::tmm {

/// 2x2 complex matrix, row-major: [[a, b], [c, d]].
struct Matrix2 {
    std::complex<double> a, b, c, d;

    Matrix2 operator*(const Matrix2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    std::complex<double> determinant() const { return a * d - b * c; }
};

/// One finite layer of a planar stack.
struct Layer {
    Material material;
    double thickness_nm = 0.0;
};

/// A planar multilayer at normal incidence: ambient medium (lossless),
/// finite layers from the illuminated side down, and a semi-infinite
/// substrate.
struct LayerStack {
    Material ambient = builtin::vacuum();
    std::vector<Layer> layers;
    Material substrate = builtin::vacuum();
};

/// Power budget of a stack at one wavelength. All quantities are fractions
/// of the incident power; reflectance + transmittance + sum(layer_absorption)
/// equals 1 up to floating-point error.
struct StackResponse {
    double wavelength_nm = 0.0;
    double reflectance = 0.0;
    double transmittance = 0.0;
    std::vector<double> layer_absorption; ///< one entry per finite layer

    double total_absorption() const {
        double s = 0.0;
        for (double a : layer_absorption) s += a;
        return s;
    }
};

/// Characteristic matrix of a homogeneous layer at normal incidence for the
/// e^{-iωt} time convention with ñ = n + ik:
///   M = [[cos δ, −i sin δ / ñ], [−i ñ sin δ, cos δ]],  δ = 2π ñ t / λ.
/// det M = 1 for any layer.
Matrix2 characteristic_matrix(std::complex<double> refractive_index,
                              double thickness_nm,
                              double wavelength_nm);

/// Solves the stack at one wavelength: reflectance, transmittance into the
/// substrate, and per-layer absorbed fractions (via interface Poynting
/// fluxes, so the power budget closes identically).
StackResponse stack_response(const LayerStack& stack, double wavelength_nm);

/// stack_response evaluated over a wavelength list.
std::vector<StackResponse> spectrum(const LayerStack& stack,
                                    const std::vector<double>& wavelengths_nm);

/// Absorbed fraction of one layer (by index) over a wavelength list.
std::vector<double> absorption_spectrum(const LayerStack& stack,
                                        const std::vector<double>& wavelengths_nm,
                                        std::size_t layer_index);

/// Parameters of the default detector optical stack: a meander absorber
/// modeled as an effective medium (absorber material mixed with vacuum at
/// the meander fill factor) on a dielectric spacer over a thick substrate.
struct MeanderStackParams {
    double fill_factor = 0.6;
    double absorber_thickness_nm = 4.0;
    double spacer_thickness_nm = 160.0;
};

/// Builds the default stack: NbN effective-medium absorber / SiO2 spacer /
/// semi-infinite Si, in vacuum ambient.
LayerStack default_meander_stack(const MeanderStackParams& params = {});

} // namespace sspd::tmm
