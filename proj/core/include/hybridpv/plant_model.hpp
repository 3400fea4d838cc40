#pragma once

#include <Eigen/Core>

#include "hybridpv/battery_model.hpp"
#include "hybridpv/pv_model.hpp"

namespace hpv::plant {

inline constexpr int kNumStates = 5;
inline constexpr int kNumInputs = 3;  // u1 = dIb/dt, u2 = dPpv/dt, u3 = Pmp (measured disturbance)
inline constexpr int kNumOutputs = 5;

using StateVector = Eigen::Matrix<double, kNumStates, 1>;
using OutputVector = Eigen::Matrix<double, kNumOutputs, 1>;
using StateMatrix = Eigen::Matrix<double, kNumStates, kNumStates>;
using InputMatrix = Eigen::Matrix<double, kNumStates, kNumInputs>;
using OutputMatrix = Eigen::Matrix<double, kNumOutputs, kNumStates>;
using FeedthroughMatrix = Eigen::Matrix<double, kNumOutputs, kNumInputs>;

/// Immutable physical description of the hybrid PV + BESS plant.
struct PlantParameters {
    pv::PvReferenceParams pv = pv::cs6p_250p_array();
    int pv_arrays = 4;
    double pv_inverter_rating = 2.0e6;  ///< total PV inverter rating [W]
    battery::PackParams pack = battery::reference_pack();
    double eta_pv = 0.965;
    double eta_charge = 0.965;
    double eta_discharge = 0.965;
    double ib_rate = 130.0;     ///< |dIb/dt| limit [A/s]
    double ppv_rate = 400.0e3;  ///< |dPpv/dt| limit [W/s]

    void validate() const;
    /// Plant-level maximum available dc PV power at (g, t_cell).
    double available_pv_power(double g, double t_cell) const;
};

/// x = (SOC, V_Cts, V_Ctl, I_b, P_pv).
struct PlantState {
    double soc = 0.0;
    double v_cts = 0.0;
    double v_ctl = 0.0;
    double i_b = 0.0;
    double p_pv = 0.0;

    StateVector vector() const;
    static PlantState from_vector(const StateVector& x);
    battery::BatteryState battery() const { return {soc, v_cts, v_ctl}; }
};

/// y = (P_out, I_b, SOC, P_res, P_pv).
struct PlantOutputs {
    double p_out = 0.0;
    double i_b = 0.0;
    double soc = 0.0;
    double p_res = 0.0;
    double p_pv = 0.0;

    OutputVector vector() const;
};

struct ContinuousModel {
    StateMatrix a = StateMatrix::Zero();
    InputMatrix b = InputMatrix::Zero();
};

struct DiscreteModel {
    StateMatrix ad = StateMatrix::Identity();
    InputMatrix bd = InputMatrix::Zero();
    double ts = 0.0;
};

/// Affine output model y = C x + D u + offset, exact at the linearization point.
struct OutputLinearization {
    OutputMatrix c = OutputMatrix::Zero();
    FeedthroughMatrix d = FeedthroughMatrix::Zero();
    OutputVector offset = OutputVector::Zero();
};

struct LinearModel {
    ContinuousModel continuous;
    DiscreteModel discrete;
    OutputLinearization output;
    double eta_bess = 0.0;  ///< efficiency branch frozen for this model
};

/// Discharge efficiency for i_b >= 0, charge efficiency otherwise.
double eta_bess(double i_b, const PlantParameters& p);

/// Battery dc power V_b * I_b.
double battery_dc_power(const PlantState& x, const PlantParameters& p);
/// Battery ac power eta_bess * V_b * I_b.
double battery_ac_power(const PlantState& x, const PlantParameters& p);

/// Nonlinear output map; u3 is the maximum available PV power.
PlantOutputs output_map(const PlantState& x, double u3, const PlantParameters& p);

ContinuousModel build_continuous(const PlantParameters& p);

/// Exact Jacobian of output_map at (x, u3) with the efficiency branch frozen
/// at the sign of x.i_b, plus the offset that makes the affine model exact
/// there.
OutputLinearization linearize_outputs(const PlantState& x, double u3, const PlantParameters& p);

/// Zero-order-hold discretization via the augmented-matrix exponential.
/// Throws std::invalid_argument for ts <= 0 or mismatched shapes.
void discretize_zoh(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double ts,
                    Eigen::MatrixXd& ad, Eigen::MatrixXd& bd);
DiscreteModel discretize_zoh(const ContinuousModel& m, double ts);

/// Numerical rank of [B AB ... A^{n-1}B] by column-pivoted QR.
int controllability_rank(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel_tol = 1e-10);

/// Plant controllability rank with states scaled by (1, 1 V, 1 V, 1000 A, 1 MW).
int plant_controllability_rank(const PlantParameters& p);

/// Continuous + discrete (at ts) + output linearization at (x, u3).
LinearModel linearize(const PlantState& x, double u3, const PlantParameters& p, double ts);

}  // namespace hpv::plant
