#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

#include "hybridpv/plant_model.hpp"
#include "hybridpv/qp_solver.hpp"
#include "hybridpv/scenario.hpp"

namespace hpv::mpc {

inline constexpr int kNumMoves = 2;  // u1, u2

/// Tuning and bounds. Defaults are the reference controller constants.
struct MpcConfig {
    double t_mpc = 3.0;  ///< [s]
    int p = 400;         ///< prediction steps
    int m = 20;          ///< control-move steps
    std::array<double, 5> w_y{3.0, 0.0, 0.1, 0.0, 0.0};
    std::array<double, 5> s_y{2.0e6, 1200.0, 1.0, 4.0e6, 2.0e6};
    std::array<double, 2> w_du{0.01, 0.002};
    std::array<double, 2> s_du{280.0, 800.0e3};
    std::array<double, 5> ecr_min{1.0, 0.5, 0.5, 4.0, 0.3};
    std::array<double, 5> ecr_max{1.0, 0.5, 0.5, 5.0, 0.3};
    std::array<double, 2> u_min{-130.0, -400.0e3};
    std::array<double, 2> u_max{130.0, 400.0e3};
    std::array<double, 5> y_min{-1.0e6, -550.0, 0.295, -3.0e6, 0.0};
    std::array<double, 5> y_max{3.0e6, 650.0, 0.975, 3.0e6, 2.0e6};
    double rho_eps = 1.0e5;
    int max_qp_iterations = 0;  ///< 0 = solver default

    int num_variables() const { return kNumMoves * m + 1; }
    int num_rows() const { return 2 * plant::kNumOutputs * p; }
    /// Row of the soft bound for prediction step i (0-based), output j, side
    /// 0 = upper / 1 = lower.
    static int row_index(int i, int j, int side) { return (i * plant::kNumOutputs + j) * 2 + side; }

    void validate() const;
};

/// Per-step references and time-varying bounds over the prediction horizon.
struct ReferencePreview {
    std::vector<double> p_out_ref;  ///< y1 setpoint
    std::vector<double> soc_ref;    ///< y3 setpoint
    std::vector<double> reserve_min;  ///< y4 lower bound
    std::vector<double> p_mp;       ///< u3 preview; also caps y5

    void validate(int p) const;
};

/// Builds the preview: baseline schedule plus the regulation value held over
/// the horizon, constant SOC target, reserve bound from the policy applied to
/// the held regulation value, and the supplied P_mp preview.
ReferencePreview reference_builder(const std::vector<double>& baseline, double reg_now, double soc_target,
                                   const scenario::ReservePolicy& policy, const std::vector<double>& p_mp_preview);

struct QpBuild {
    qp::QpProblem problem;
    Eigen::MatrixXd phi;       ///< (p*5) x (2m): output sensitivity to scaled moves, row i*5+j
    Eigen::VectorXd free_out;  ///< (p*5): outputs with all moves zero
    Eigen::VectorXd row_scale_ecr;  ///< ECR gain of each soft row
};

/// Assembles the dense QP. `last_move` is the move applied over the previous
/// interval (u(-1) of the move penalty). Throws std::invalid_argument on
/// dimension mismatch.
QpBuild build_qp(const plant::LinearModel& model, const plant::PlantState& x0, const std::array<double, 2>& last_move,
                 const ReferencePreview& refs, const MpcConfig& cfg);

/// Predicted outputs (p x 5) for decision vector z.
Eigen::MatrixXd predicted_outputs(const QpBuild& qp, const Eigen::VectorXd& z, int p);

struct ControlMove {
    double u1 = 0.0;  ///< [A/s]
    double u2 = 0.0;  ///< [W/s]
    double eps = 0.0;
    bool fault = false;
    qp::QpStatus status = qp::QpStatus::optimal;
    int iterations = 0;
    double kkt_residual = 0.0;
    int active_output_rows = 0;  ///< soft output rows in the final active set
    Eigen::MatrixXd predicted;   ///< p x 5
};

/// Adaptive MPC: relinearizes at every call, solves, returns the first move,
/// and keeps warm-start memory.
class Controller {
public:
    Controller(MpcConfig cfg, plant::PlantParameters plant);

    /// x_est: (SOC, V_Cts, V_Ctl) from the estimator, I_b and P_pv measured.
    ControlMove solve_step(const plant::PlantState& x_est, const ReferencePreview& refs);

    const MpcConfig& config() const { return cfg_; }
    const QpBuild& last_build() const { return last_build_; }
    const qp::QpSolution* last_solution() const;
    void reset();

private:
    qp::WarmStart shifted_warm_start(const QpBuild& build) const;

    MpcConfig cfg_;
    plant::PlantParameters plant_;
    plant::DiscreteModel discrete_;
    qp::ActiveSetSolver solver_;
    QpBuild last_build_;
    Eigen::VectorXd prev_z_;
    std::vector<int> prev_active_;
    std::array<double, 2> last_move_{0.0, 0.0};
};

}  // namespace hpv::mpc
