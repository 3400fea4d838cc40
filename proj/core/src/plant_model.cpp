#include "hybridpv/plant_model.hpp"

#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>

namespace hpv::plant {

void PlantParameters::validate() const {
    pv.validate();
    pack.validate();
    if (pv_arrays < 1) {
        throw std::invalid_argument("PlantParameters: need at least one PV array");
    }
    auto eff_ok = [](double e) { return e > 0.0 && e <= 1.0; };
    if (!eff_ok(eta_pv) || !eff_ok(eta_charge) || !eff_ok(eta_discharge)) {
        throw std::invalid_argument("PlantParameters: efficiencies must lie in (0, 1]");
    }
    if (!(ib_rate > 0.0 && ppv_rate > 0.0 && pv_inverter_rating > 0.0)) {
        throw std::invalid_argument("PlantParameters: ramp limits and ratings must be positive");
    }
}

double PlantParameters::available_pv_power(double g, double t_cell) const {
    return pv_arrays * pv::array_mpp_at(pv, g, t_cell).p_mp;
}

StateVector PlantState::vector() const {
    StateVector x;
    x << soc, v_cts, v_ctl, i_b, p_pv;
    return x;
}

PlantState PlantState::from_vector(const StateVector& x) { return {x(0), x(1), x(2), x(3), x(4)}; }

OutputVector PlantOutputs::vector() const {
    OutputVector y;
    y << p_out, i_b, soc, p_res, p_pv;
    return y;
}

double eta_bess(double i_b, const PlantParameters& p) { return i_b >= 0.0 ? p.eta_discharge : p.eta_charge; }

double battery_dc_power(const PlantState& x, const PlantParameters& p) {
    return battery::terminal_voltage(x.battery(), x.i_b, p.pack) * x.i_b;
}

double battery_ac_power(const PlantState& x, const PlantParameters& p) {
    return eta_bess(x.i_b, p) * battery_dc_power(x, p);
}

PlantOutputs output_map(const PlantState& x, double u3, const PlantParameters& p) {
    const double eta = eta_bess(x.i_b, p);
    const double p_bess_dc = battery_dc_power(x, p);
    PlantOutputs y;
    y.p_out = eta * p_bess_dc + p.eta_pv * x.p_pv;
    y.i_b = x.i_b;
    y.soc = x.soc;
    y.p_res = eta * (p.pack.p_nominal - p_bess_dc) + p.eta_pv * (u3 - x.p_pv);
    y.p_pv = x.p_pv;
    return y;
}

ContinuousModel build_continuous(const PlantParameters& p) {
    const auto& pk = p.pack;
    ContinuousModel m;
    m.a(0, 3) = -1.0 / pk.capacity_coulomb();
    m.a(1, 1) = -1.0 / pk.tau_ts();
    m.a(1, 3) = 1.0 / pk.c_ts;
    m.a(2, 2) = -1.0 / pk.tau_tl();
    m.a(2, 3) = 1.0 / pk.c_tl;
    m.b(3, 0) = 1.0;
    m.b(4, 1) = 1.0;
    return m;
}

OutputLinearization linearize_outputs(const PlantState& x, double u3, const PlantParameters& p) {
    const double eta = eta_bess(x.i_b, p);
    const double voc = battery::pack_voc(x.soc, p.pack);
    const double dvoc = battery::pack_voc_derivative(x.soc, p.pack);

    OutputLinearization lin;
    auto& c = lin.c;
    // P_out row.
    c(0, 0) = eta * dvoc * x.i_b;
    c(0, 1) = -eta * x.i_b;
    c(0, 2) = -eta * x.i_b;
    c(0, 3) = eta * (voc - x.v_cts - x.v_ctl - 2.0 * p.pack.r_s * x.i_b);
    c(0, 4) = p.eta_pv;
    // Selectors.
    c(1, 3) = 1.0;
    c(2, 0) = 1.0;
    c(4, 4) = 1.0;
    // P_res row mirrors the battery and PV terms.
    c.row(3) = -c.row(0);
    lin.d(3, 2) = p.eta_pv;

    const StateVector xv = x.vector();
    Eigen::Matrix<double, kNumInputs, 1> u;
    u << 0.0, 0.0, u3;
    lin.offset = output_map(x, u3, p).vector() - c * xv - lin.d * u;
    return lin;
}

void discretize_zoh(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double ts, Eigen::MatrixXd& ad,
                    Eigen::MatrixXd& bd) {
    if (!(ts > 0.0)) {
        throw std::invalid_argument("discretize_zoh: ts must be positive");
    }
    if (a.rows() != a.cols() || b.rows() != a.rows()) {
        throw std::invalid_argument("discretize_zoh: shape mismatch");
    }
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = a * ts;
    aug.topRightCorner(n, m) = b * ts;
    const Eigen::MatrixXd e = aug.exp();
    ad = e.topLeftCorner(n, n);
    bd = e.topRightCorner(n, m);
}

DiscreteModel discretize_zoh(const ContinuousModel& m, double ts) {
    Eigen::MatrixXd ad;
    Eigen::MatrixXd bd;
    discretize_zoh(m.a, m.b, ts, ad, bd);
    DiscreteModel d;
    d.ad = ad;
    d.bd = bd;
    d.ts = ts;
    return d;
}

int controllability_rank(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel_tol) {
    if (a.rows() != a.cols() || b.rows() != a.rows()) {
        throw std::invalid_argument("controllability_rank: shape mismatch");
    }
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    Eigen::MatrixXd krylov(n, n * m);
    Eigen::MatrixXd block = b;
    for (Eigen::Index k = 0; k < n; ++k) {
        krylov.middleCols(k * m, m) = block;
        block = a * block;
    }
    if (krylov.cwiseAbs().maxCoeff() == 0.0) {
        return 0;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(krylov);
    qr.setThreshold(rel_tol);
    return static_cast<int>(qr.rank());
}

int plant_controllability_rank(const PlantParameters& p) {
    const ContinuousModel m = build_continuous(p);
    Eigen::Matrix<double, kNumStates, 1> scale;
    scale << 1.0, 1.0, 1.0, 1000.0, 1.0e6;
    const StateMatrix s = scale.asDiagonal();
    const StateMatrix s_inv = scale.cwiseInverse().asDiagonal();
    const StateMatrix a_scaled = s_inv * m.a * s;
    // Only u1 and u2 are manipulated; u3 enters the outputs only.
    const Eigen::Matrix<double, kNumStates, 2> b_scaled = s_inv * m.b.leftCols(2);
    return controllability_rank(a_scaled, b_scaled, 1e-10);
}

LinearModel linearize(const PlantState& x, double u3, const PlantParameters& p, double ts) {
    LinearModel lm;
    lm.continuous = build_continuous(p);
    lm.discrete = discretize_zoh(lm.continuous, ts);
    lm.output = linearize_outputs(x, u3, p);
    lm.eta_bess = eta_bess(x.i_b, p);
    return lm;
}

}  // namespace hpv::plant
