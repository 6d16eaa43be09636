// Built-in material tables. Generated from the same source values as the
// data/*.nk files; keep the two in sync (see tools in the repository notes).

#include "sspd/dispersion.hpp"

namespace sspd::tmm::builtin {
namespace {

struct Row { double wl, n, k; };

constexpr Row kSilicon[] = {
    {480.0, 4.36, 0.06},
    {500.0, 4.294, 0.045},
    {550.0, 4.08, 0.028},
    {600.0, 3.94, 0.02},
    {633.0, 3.88, 0.018},
    {650.0, 3.85, 0.016},
    {700.0, 3.78, 0.011},
    {750.0, 3.73, 0.0072},
    {800.0, 3.69, 0.0047},
    {850.0, 3.66, 0.003},
    {900.0, 3.64, 0.0022},
    {950.0, 3.63, 0.0013},
    {1000.0, 3.61, 0.00051},
    {1050.0, 3.6, 0.0003},
    {1100.0, 3.59, 3.1e-05},
    {1150.0, 3.58, 1e-05},
    {1200.0, 3.575, 3e-06},
    {1250.0, 3.57, 1e-06},
    {1300.0, 3.567, 4e-07},
    {1350.0, 3.563, 2e-07}
};

constexpr Row kSilica[] = {
    {480.0, 1.4635021746006414, 0.0},
    {490.0, 1.4628966820387057, 0.0},
    {500.0, 1.4623264867003778, 0.0},
    {510.0, 1.4617886176674606, 0.0},
    {520.0, 1.461280408056225, 0.0},
    {530.0, 1.4607994580422927, 0.0},
    {540.0, 1.4603436030766004, 0.0},
    {550.0, 1.4599108864687285, 0.0},
    {560.0, 1.4594995356592282, 0.0},
    {570.0, 1.4591079416197614, 0.0},
    {580.0, 1.4587346409148338, 0.0},
    {590.0, 1.4583783000362256, 0.0},
    {600.0, 1.4580377016844404, 0.0},
    {610.0, 1.4577117327234501, 0.0},
    {620.0, 1.4573993735778328, 0.0},
    {630.0, 1.4570996888768784, 0.0},
    {640.0, 1.4568118191797217, 0.0},
    {650.0, 1.4565349736401405, 0.0},
    {660.0, 1.4562684234902543, 0.0},
    {670.0, 1.4560114962396424, 0.0},
    {680.0, 1.4557635705009624, 0.0},
    {690.0, 1.4555240713654725, 0.0},
    {700.0, 1.4552924662622837, 0.0},
    {710.0, 1.4550682612440513, 0.0},
    {720.0, 1.4548509976493673, 0.0},
    {730.0, 1.4546402490985908, 0.0},
    {740.0, 1.4544356187853857, 0.0},
    {750.0, 1.4542367370309937, 0.0},
    {760.0, 1.4540432590723713, 0.0},
    {770.0, 1.4538548630588606, 0.0},
    {780.0, 1.453671248235113, 0.0},
    {790.0, 1.45349213329065, 0.0},
    {800.0, 1.4533172548587419, 0.0},
    {810.0, 1.453146366149297, 0.0},
    {820.0, 1.4529792357022007, 0.0},
    {830.0, 1.452815646249081, 0.0},
    {840.0, 1.4526553936728075, 0.0},
    {850.0, 1.4524982860552091, 0.0},
    {860.0, 1.4523441428045392, 0.0},
    {870.0, 1.4521927938551105, 0.0},
    {880.0, 1.452044078932333, 0.0},
    {890.0, 1.4518978468770973, 0.0},
    {900.0, 1.4517539550240655, 0.0},
    {910.0, 1.4516122686289965, 0.0},
    {920.0, 1.4514726603407175, 0.0},
    {930.0, 1.4513350097137934, 0.0},
    {940.0, 1.451199202758338, 0.0},
    {950.0, 1.4510651315237548, 0.0},
    {960.0, 1.4509326937135074, 0.0},
    {970.0, 1.4508017923282956, 0.0},
    {980.0, 1.4506723353352597, 0.0},
    {990.0, 1.4505442353610596, 0.0},
    {1000.0, 1.450417409406875, 0.0},
    {1010.0, 1.4502917785835465, 0.0},
    {1020.0, 1.450167267865247, 0.0},
    {1030.0, 1.4500438058602083, 0.0},
    {1040.0, 1.4499213245971632, 0.0},
    {1050.0, 1.4497997593262841, 0.0},
    {1060.0, 1.4496790483334954, 0.0},
    {1070.0, 1.4495591327671453, 0.0},
    {1080.0, 1.449439956476098, 0.0},
    {1090.0, 1.4493214658583975, 0.0},
    {1100.0, 1.4492036097197127, 0.0},
    {1110.0, 1.4490863391408533, 0.0},
    {1120.0, 1.4489696073536897, 0.0},
    {1130.0, 1.4488533696248764, 0.0},
    {1140.0, 1.4487375831468192, 0.0},
    {1150.0, 1.4486222069353727, 0.0},
    {1160.0, 1.4485072017338005, 0.0},
    {1170.0, 1.448392529922557, 0.0},
    {1180.0, 1.4482781554344928, 0.0},
    {1190.0, 1.4481640436751153, 0.0},
    {1200.0, 1.4480501614475572, 0.0},
    {1210.0, 1.4479364768819405, 0.0},
    {1220.0, 1.4478229593688432, 0.0},
    {1230.0, 1.4477095794965955, 0.0},
    {1240.0, 1.447596308992159, 0.0},
    {1250.0, 1.4474831206653516, 0.0},
    {1260.0, 1.4473699883562041, 0.0},
    {1270.0, 1.447256886885254, 0.0},
    {1280.0, 1.4471437920065802, 0.0},
    {1290.0, 1.4470306803634156, 0.0},
    {1300.0, 1.4469175294461718, 0.0},
    {1310.0, 1.4468043175527276, 0.0},
    {1320.0, 1.4466910237508444, 0.0},
    {1330.0, 1.4465776278425762, 0.0},
    {1340.0, 1.4464641103305553, 0.0},
    {1350.0, 1.4463504523860415, 0.0}
};

constexpr Row kNbn[] = {
    {480.0, 2.35, 3.8},
    {550.0, 2.41, 3.5},
    {600.0, 2.45, 3.27},
    {650.0, 2.52, 2.78},
    {700.0, 2.6, 2.4},
    {750.0, 2.64, 2.09},
    {800.0, 2.68, 1.84},
    {850.0, 2.72, 1.63},
    {900.0, 2.77, 1.45},
    {950.0, 2.81, 1.3},
    {1000.0, 2.85, 1.18},
    {1100.0, 2.92, 0.97},
    {1200.0, 2.98, 0.82},
    {1350.0, 3.05, 0.7}
};

template <std::size_t N>
Material make(const char* name, const Row (&rows)[N]) {
    std::vector<double> wl, n, k;
    wl.reserve(N); n.reserve(N); k.reserve(N);
    for (const Row& r : rows) {
        wl.push_back(r.wl);
        n.push_back(r.n);
        k.push_back(r.k);
    }
    return Material::tabulated(DispersionTable(name, std::move(wl), std::move(n), std::move(k)));
}

} // namespace

Material vacuum() { return Material::constant_index("vacuum", {1.0, 0.0}); }
Material silicon() { static const Material m = make("Si", kSilicon); return m; }
Material silica() { static const Material m = make("SiO2", kSilica); return m; }
Material nbn() { static const Material m = make("NbN", kNbn); return m; }

} // namespace sspd::tmm::builtin
