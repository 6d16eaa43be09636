#include "sspd/experiments.hpp"

namespace sspd::cli {

namespace {

const Preset kPresets[] = {
    {"fig1c",
     "Absorption spectrum of the layered absorber stack, plus the "
     "spacer-thickness sweep at 700 nm",
     "kind = tmm-spectrum\n"
     "# 60% fill, 4 nm absorber on a 160 nm silica spacer over silicon\n"
     "stack.fill_factor = 0.6\n"
     "stack.absorber_thickness_nm = 4\n"
     "stack.spacer_thickness_nm = 160\n"
     "sweep.min_nm = 480\n"
     "sweep.max_nm = 1000\n"
     "sweep.step_nm = 2\n"
     "thickness_sweep.enable = true\n"
     "thickness_sweep.min_nm = 0\n"
     "thickness_sweep.max_nm = 400\n"
     "thickness_sweep.step_nm = 1\n"
     "thickness_sweep.wavelength_nm = 700\n"},

    {"fig2e",
     "Measured g2(0) vs emitter lifetime for five detector scenarios at "
     "high signal-to-background",
     "kind = g2-zero-sweep\n"
     "mode = lifetime\n"
     "# bright emitter: 80 kcps signal, 0.8 kcps background at 20% reference QE\n"
     "scene.signal_cps = 80000\n"
     "scene.background_cps = 800\n"
     "scene.reference_qe = 0.2\n"
     "emitter.pump_rate_per_ns = 0.033333333333333333\n"
     "scenarios = apd_real, apd_ideal, apd_datasheet, sspd, sspd_high_qe\n"},

    {"fig3a",
     "Voltage-stabilized output count rate vs input photon flux at 0.70 I_c",
     "kind = count-rate\n"
     "regime = voltage\n"
     "bias_fraction = 0.70\n"
     "sweep.n_in_min_cps = 1e5\n"
     "sweep.n_in_max_cps = 1e13\n"
     "sweep.points_per_decade = 4\n"},

    {"fig3b",
     "Current-stabilized sweep at 0.62 I_c showing the abrupt jump to the "
     "high-current branch",
     "kind = count-rate\n"
     "regime = current\n"
     "bias_fraction = 0.62\n"
     "sweep.n_in_min_cps = 1e7\n"
     "sweep.n_in_max_cps = 1e10\n"
     "sweep.points_per_decade = 10\n"},

    {"fig3c",
     "Current-stabilized sweep at 0.55 I_c: lower peak rate, then latching",
     "kind = count-rate\n"
     "regime = current\n"
     "bias_fraction = 0.55\n"
     "sweep.n_in_min_cps = 1e8\n"
     "sweep.n_in_max_cps = 1e11\n"
     "sweep.points_per_decade = 10\n"},

    {"fig3d",
     "Near-saturation operating point with the detection-recovery curve "
     "after a firing",
     "kind = count-rate\n"
     "regime = voltage\n"
     "bias_fraction = 0.80\n"
     "# single flux point giving ~123 MHz output; recovery probed out to 10 ns\n"
     "sweep.n_in_min_cps = 1.55e9\n"
     "sweep.n_in_max_cps = 1.55e9\n"
     "sweep.points_per_decade = 1\n"
     "recovery.enable = true\n"
     "recovery.max_ns = 10\n"
     "recovery.step_ns = 0.05\n"},

    {"fig6a",
     "Measured g2(0) vs emitter lifetime at signal-to-background 2.16 with "
     "slower avalanche-diode response",
     "kind = g2-zero-sweep\n"
     "mode = lifetime\n"
     "# dim emitter: 80 kcps signal over 37 kcps background at 20% reference QE\n"
     "scene.signal_cps = 80000\n"
     "scene.background_cps = 37000\n"
     "scene.reference_qe = 0.2\n"
     "emitter.pump_rate_per_ns = 0.033333333333333333\n"
     "scenarios = apd_real, apd_ideal, apd_datasheet, sspd, sspd_high_qe\n"
     "scenario.apd_real.jitter_fwhm_ns = 0.35\n"
     "scenario.apd_ideal.jitter_fwhm_ns = 0.35\n"
     "scenario.apd_ideal.dark_cps = 0\n"
     "scenario.apd_datasheet.jitter_fwhm_ns = 0.35\n"},

    {"fig6b",
     "Measured g2(0) vs detector quantum efficiency for a 3 ns emitter at "
     "signal-to-background 2.16",
     "kind = g2-zero-sweep\n"
     "mode = qe\n"
     "scene.signal_cps = 80000\n"
     "scene.background_cps = 37000\n"
     "scene.reference_qe = 0.2\n"
     "emitter.lifetime_ns = 3\n"
     "# sweep QE upward from 0.1%\n"
     "qes = 0.001, 0.00158, 0.00251, 0.00398, 0.00631, 0.01, 0.0158, 0.0251, "
     "0.0398, 0.0631, 0.1, 0.158, 0.251, 0.398, 0.631, 1.0\n"
     "scenarios = sspd, apd_real\n"
     "scenario.apd_real.jitter_fwhm_ns = 0.35\n"},
};

} // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all(std::begin(kPresets), std::end(kPresets));
    return all;
}

const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

} // namespace sspd::cli
