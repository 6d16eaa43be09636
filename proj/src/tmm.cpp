#include "sspd/tmm.hpp"

#include <cmath>
#include <numbers>

#include "sspd/errors.hpp"

namespace sspd::tmm {

namespace {

/// Column vector (E, H) at an interface.
struct FieldVec {
    std::complex<double> e, h;
};

FieldVec apply(const Matrix2& m, const FieldVec& v) {
    return {m.a * v.e + m.b * v.h, m.c * v.e + m.d * v.h};
}

/// Forward power flux Re(E·H*) carried by a field vector.
double poynting(const FieldVec& v) { return (v.e * std::conj(v.h)).real(); }

} // namespace

Matrix2 characteristic_matrix(std::complex<double> refractive_index,
                              double thickness_nm, double wavelength_nm) {
    if (wavelength_nm <= 0.0)
        throw ConfigError("characteristic_matrix: wavelength must be > 0");
    if (thickness_nm < 0.0)
        throw ConfigError("characteristic_matrix: thickness must be >= 0");
    const std::complex<double> delta =
        2.0 * std::numbers::pi * refractive_index * thickness_nm / wavelength_nm;
    const std::complex<double> c = std::cos(delta);
    const std::complex<double> s = std::sin(delta);
    const std::complex<double> i(0.0, 1.0);
    return {c, -i * s / refractive_index, -i * refractive_index * s, c};
}

StackResponse stack_response(const LayerStack& stack, double wavelength_nm) {
    const std::complex<double> eta_a = stack.ambient.refractive_index(wavelength_nm);
    if (std::abs(eta_a.imag()) > 1e-12)
        throw ConfigError("stack_response: ambient medium must be lossless");
    const std::complex<double> eta_s = stack.substrate.refractive_index(wavelength_nm);

    const std::size_t nlayers = stack.layers.size();

    // Field vectors at each interface, built from the substrate side:
    // vs[j] is (E, H) at the top of layer j (vs[nlayers] at the substrate),
    // normalized to unit transmitted E-field.
    std::vector<FieldVec> vs(nlayers + 1);
    vs[nlayers] = {1.0, eta_s};
    for (std::size_t j = nlayers; j-- > 0;) {
        const Layer& layer = stack.layers[j];
        const Matrix2 m = characteristic_matrix(
            layer.material.refractive_index(wavelength_nm), layer.thickness_nm,
            wavelength_nm);
        vs[j] = apply(m, vs[j + 1]);
    }

    const std::complex<double> b = vs[0].e;
    const std::complex<double> c = vs[0].h;
    const std::complex<double> denom = eta_a * b + c;
    if (std::abs(denom) == 0.0)
        throw NumericError("stack_response: degenerate stack (zero admittance sum)");

    const std::complex<double> r = (eta_a * b - c) / denom;
    // Incident power for the unit-transmitted normalization.
    const double p_inc = std::norm(denom) / (4.0 * eta_a.real());

    StackResponse resp;
    resp.wavelength_nm = wavelength_nm;
    resp.reflectance = std::norm(r);
    resp.transmittance = eta_s.real() / p_inc;
    resp.layer_absorption.resize(nlayers);
    for (std::size_t j = 0; j < nlayers; ++j)
        resp.layer_absorption[j] = (poynting(vs[j]) - poynting(vs[j + 1])) / p_inc;
    return resp;
}

std::vector<StackResponse> spectrum(const LayerStack& stack,
                                    const std::vector<double>& wavelengths_nm) {
    std::vector<StackResponse> out;
    out.reserve(wavelengths_nm.size());
    for (double wl : wavelengths_nm) out.push_back(stack_response(stack, wl));
    return out;
}

std::vector<double> absorption_spectrum(const LayerStack& stack,
                                        const std::vector<double>& wavelengths_nm,
                                        std::size_t layer_index) {
    if (layer_index >= stack.layers.size())
        throw ConfigError("absorption_spectrum: layer index " +
                          std::to_string(layer_index) + " out of range (stack has " +
                          std::to_string(stack.layers.size()) + " layers)");
    std::vector<double> out;
    out.reserve(wavelengths_nm.size());
    for (double wl : wavelengths_nm)
        out.push_back(stack_response(stack, wl).layer_absorption[layer_index]);
    return out;
}

LayerStack default_meander_stack(const MeanderStackParams& params) {
    LayerStack stack;
    stack.ambient = builtin::vacuum();
    stack.layers = {
        {Material::effective_medium(builtin::nbn(), params.fill_factor,
                                    "NbN meander (effective medium)"),
         params.absorber_thickness_nm},
        {builtin::silica(), params.spacer_thickness_nm},
    };
    stack.substrate = builtin::silicon();
    return stack;
}

} // namespace sspd::tmm
