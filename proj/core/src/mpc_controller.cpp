#include "hybridpv/mpc_controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hpv::mpc {

namespace {

constexpr int kNy = plant::kNumOutputs;

}  // namespace

void MpcConfig::validate() const {
    if (!(t_mpc > 0.0) || m < 1 || p < m) {
        throw std::invalid_argument("MpcConfig: need t_mpc > 0 and p >= m >= 1");
    }
    for (int j = 0; j < kNy; ++j) {
        if (!(w_y[j] >= 0.0 && s_y[j] > 0.0 && ecr_min[j] >= 0.0 && ecr_max[j] >= 0.0)) {
            throw std::invalid_argument("MpcConfig: output weights and ECR gains must be >= 0, scales > 0");
        }
        if (!(y_min[j] <= y_max[j]) || !std::isfinite(y_min[j]) || !std::isfinite(y_max[j])) {
            throw std::invalid_argument("MpcConfig: output bounds must be finite with min <= max");
        }
    }
    for (int l = 0; l < kNumMoves; ++l) {
        if (!(w_du[l] >= 0.0 && s_du[l] > 0.0 && u_min[l] < u_max[l])) {
            throw std::invalid_argument("MpcConfig: move weights >= 0, scales > 0, u_min < u_max required");
        }
    }
    if (!(rho_eps > 0.0)) {
        throw std::invalid_argument("MpcConfig: rho_eps must be positive");
    }
}

void ReferencePreview::validate(int p) const {
    const auto n = static_cast<std::size_t>(p);
    if (p_out_ref.size() != n || soc_ref.size() != n || reserve_min.size() != n || this->p_mp.size() != n) {
        throw std::invalid_argument("ReferencePreview: every sequence must have p entries");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(reserve_min[i] >= 0.0) || !(this->p_mp[i] >= 0.0)) {
            throw std::invalid_argument("ReferencePreview: reserve targets and P_mp preview must be >= 0");
        }
    }
}

ReferencePreview reference_builder(const std::vector<double>& baseline, double reg_now, double soc_target,
                                   const scenario::ReservePolicy& policy, const std::vector<double>& p_mp_preview) {
    if (baseline.size() != p_mp_preview.size()) {
        throw std::invalid_argument("reference_builder: baseline and P_mp preview lengths differ");
    }
    const std::size_t n = baseline.size();
    ReferencePreview r;
    r.p_out_ref.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.p_out_ref[i] = baseline[i] + reg_now;
    }
    r.soc_ref.assign(n, soc_target);
    r.reserve_min.assign(n, scenario::reserve_target(reg_now, policy));
    r.p_mp = p_mp_preview;
    return r;
}

QpBuild build_qp(const plant::LinearModel& model, const plant::PlantState& x0, const std::array<double, 2>& last_move,
                 const ReferencePreview& refs, const MpcConfig& cfg) {
    cfg.validate();
    refs.validate(cfg.p);
    const int p = cfg.p;
    const int m = cfg.m;
    const int nu = kNumMoves * m;
    const int nz = nu + 1;
    const int eps = nu;

    const auto& ad = model.discrete.ad;
    Eigen::Matrix<double, plant::kNumStates, kNumMoves> bu = model.discrete.bd.leftCols(kNumMoves);
    for (int l = 0; l < kNumMoves; ++l) {
        bu.col(l) *= cfg.s_du[l];
    }
    const auto& c = model.output.c;
    const Eigen::Matrix<double, kNy, 1> d_u3 = model.output.d.col(2);
    const auto& offset = model.output.offset;

    QpBuild out;
    out.phi.resize(static_cast<Eigen::Index>(p) * kNy, nu);
    out.free_out.resize(static_cast<Eigen::Index>(p) * kNy);

    // Sensitivity recursion; moves beyond the control horizon repeat the last one.
    Eigen::Matrix<double, plant::kNumStates, Eigen::Dynamic> g =
        Eigen::Matrix<double, plant::kNumStates, Eigen::Dynamic>::Zero(plant::kNumStates, nu);
    plant::StateVector x_free = x0.vector();
    for (int i = 0; i < p; ++i) {
        g = ad * g;
        const int k = std::min(i, m - 1);
        g.middleCols(kNumMoves * k, kNumMoves) += bu;
        x_free = ad * x_free;
        out.phi.middleRows(static_cast<Eigen::Index>(i) * kNy, kNy).noalias() = c * g;
        out.free_out.segment(static_cast<Eigen::Index>(i) * kNy, kNy) = c * x_free + d_u3 * refs.p_mp[i] + offset;
    }

    auto& qp = out.problem;
    qp.h = Eigen::MatrixXd::Zero(nz, nz);
    qp.f = Eigen::VectorXd::Zero(nz);

    // Tracking. Outputs without a preview track zero.
    for (int j = 0; j < kNy; ++j) {
        if (cfg.w_y[j] == 0.0) {
            continue;
        }
        const double q = (cfg.w_y[j] / cfg.s_y[j]) * (cfg.w_y[j] / cfg.s_y[j]);
        Eigen::MatrixXd phi_j(p, nu);
        Eigen::VectorXd resid(p);
        for (int i = 0; i < p; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(i) * kNy + j;
            phi_j.row(i) = out.phi.row(row);
            double ref = 0.0;
            if (j == 0) {
                ref = refs.p_out_ref[i];
            } else if (j == 2) {
                ref = refs.soc_ref[i];
            }
            resid(i) = out.free_out(row) - ref;
        }
        qp.h.topLeftCorner(nu, nu).noalias() += 2.0 * q * phi_j.transpose() * phi_j;
        qp.f.head(nu).noalias() += 2.0 * q * phi_j.transpose() * resid;
    }

    // Move suppression on scaled increments, u(-1) = last applied move.
    for (int l = 0; l < kNumMoves; ++l) {
        const double w2 = cfg.w_du[l] * cfg.w_du[l];
        for (int k = 0; k < m; ++k) {
            const int v = kNumMoves * k + l;
            qp.h(v, v) += 2.0 * w2;
            if (k > 0) {
                const int prev = v - kNumMoves;
                qp.h(prev, prev) += 2.0 * w2;
                qp.h(v, prev) -= 2.0 * w2;
                qp.h(prev, v) -= 2.0 * w2;
            }
        }
        qp.f(l) -= 2.0 * w2 * last_move[l] / cfg.s_du[l];
    }

    qp.h(eps, eps) += 2.0 * cfg.rho_eps;

    // Soft output bounds, scaled by s_y and relaxed by ECR * eps.
    const int rows = cfg.num_rows();
    qp.a = Eigen::MatrixXd::Zero(rows, nz);
    qp.b.resize(rows);
    out.row_scale_ecr.resize(rows);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < kNy; ++j) {
            const Eigen::Index src = static_cast<Eigen::Index>(i) * kNy + j;
            const double inv_s = 1.0 / cfg.s_y[j];
            const double c_ij = out.free_out(src);
            double y_hi = cfg.y_max[j];
            double y_lo = cfg.y_min[j];
            if (j == 3) {
                y_lo = refs.reserve_min[i];
            } else if (j == 4) {
                y_hi = std::min(y_hi, refs.p_mp[i]);
            }
            const int up = MpcConfig::row_index(i, j, 0);
            const int lo = MpcConfig::row_index(i, j, 1);
            qp.a.row(up).head(nu) = out.phi.row(src) * inv_s;
            qp.a(up, eps) = -cfg.ecr_max[j];
            qp.b(up) = (y_hi - c_ij) * inv_s;
            qp.a.row(lo).head(nu) = -out.phi.row(src) * inv_s;
            qp.a(lo, eps) = -cfg.ecr_min[j];
            qp.b(lo) = (c_ij - y_lo) * inv_s;
            out.row_scale_ecr(up) = cfg.ecr_max[j];
            out.row_scale_ecr(lo) = cfg.ecr_min[j];
        }
    }

    qp.lower.resize(nz);
    qp.upper.resize(nz);
    for (int k = 0; k < m; ++k) {
        for (int l = 0; l < kNumMoves; ++l) {
            qp.lower(kNumMoves * k + l) = cfg.u_min[l] / cfg.s_du[l];
            qp.upper(kNumMoves * k + l) = cfg.u_max[l] / cfg.s_du[l];
        }
    }
    qp.lower(eps) = 0.0;
    qp.upper(eps) = std::numeric_limits<double>::infinity();
    return out;
}

Eigen::MatrixXd predicted_outputs(const QpBuild& qp, const Eigen::VectorXd& z, int p) {
    const Eigen::VectorXd y = qp.free_out + qp.phi * z.head(qp.phi.cols());
    Eigen::MatrixXd out(p, kNy);
    for (int i = 0; i < p; ++i) {
        out.row(i) = y.segment(static_cast<Eigen::Index>(i) * kNy, kNy).transpose();
    }
    return out;
}

Controller::Controller(MpcConfig cfg, plant::PlantParameters plant)
    : cfg_(cfg), plant_(std::move(plant)), solver_(qp::SolverOptions{1e-9, 1e-6, cfg.max_qp_iterations}) {
    cfg_.validate();
    plant_.validate();
    discrete_ = plant::discretize_zoh(plant::build_continuous(plant_), cfg_.t_mpc);
}

const qp::QpSolution* Controller::last_solution() const {
    return solver_.last() ? &*solver_.last() : nullptr;
}

void Controller::reset() {
    solver_.reset();
    prev_z_.resize(0);
    prev_active_.clear();
    last_move_ = {0.0, 0.0};
}

qp::WarmStart Controller::shifted_warm_start(const QpBuild& build) const {
    const int m = cfg_.m;
    const int nu = kNumMoves * m;
    const int nz = nu + 1;
    const int rows = cfg_.num_rows();

    qp::WarmStart ws;
    ws.z = Eigen::VectorXd::Zero(nz);
    for (int k = 0; k < m; ++k) {
        const int src = std::min(k + 1, m - 1);
        ws.z.segment(kNumMoves * k, kNumMoves) = prev_z_.segment(kNumMoves * src, kNumMoves);
    }
    for (int v = 0; v < nu; ++v) {
        ws.z(v) = std::clamp(ws.z(v), build.problem.lower(v), build.problem.upper(v));
    }
    // Smallest slack that makes the shifted moves feasible.
    const Eigen::VectorXd viol = build.problem.a.leftCols(nu) * ws.z.head(nu) - build.problem.b;
    double e = 0.0;
    for (int r = 0; r < rows; ++r) {
        if (viol(r) > 0.0 && build.row_scale_ecr(r) > 0.0) {
            e = std::max(e, viol(r) / build.row_scale_ecr(r));
        }
    }
    ws.z(nu) = e;

    const int shift_rows = 2 * kNy;
    for (int idx : prev_active_) {
        if (idx < rows) {
            if (idx >= shift_rows) {
                ws.active_set.push_back(idx - shift_rows);
            }
        } else if (idx < rows + nz) {
            const int v = idx - rows;
            ws.active_set.push_back(v == nu ? idx : (v >= kNumMoves ? idx - kNumMoves : idx));
        } else {
            const int v = idx - rows - nz;
            ws.active_set.push_back(v >= kNumMoves && v < nu ? idx - kNumMoves : idx);
        }
    }
    return ws;
}

ControlMove Controller::solve_step(const plant::PlantState& x_est, const ReferencePreview& refs) {
    plant::PlantState x_lin = x_est;
    x_lin.soc = std::clamp(x_lin.soc, 0.0, 1.0);

    plant::LinearModel lm;
    lm.discrete = discrete_;
    lm.output = plant::linearize_outputs(x_lin, refs.p_mp.empty() ? 0.0 : refs.p_mp.front(), plant_);
    lm.eta_bess = plant::eta_bess(x_lin.i_b, plant_);

    last_build_ = build_qp(lm, x_est, last_move_, refs, cfg_);

    qp::WarmStart ws;
    const bool have_warm = prev_z_.size() == cfg_.num_variables();
    if (have_warm) {
        ws = shifted_warm_start(last_build_);
    }
    const qp::QpSolution sol = solver_.solve(last_build_.problem, have_warm ? &ws : nullptr);

    ControlMove mv;
    mv.status = sol.status;
    mv.iterations = sol.iterations;
    mv.kkt_residual = sol.kkt_residual;
    if (sol.status != qp::QpStatus::optimal) {
        // Hold: zero rates keep I_b and P_pv where they are.
        mv.fault = true;
        prev_z_.resize(0);
        prev_active_.clear();
        last_move_ = {0.0, 0.0};
        mv.predicted = predicted_outputs(last_build_, Eigen::VectorXd::Zero(cfg_.num_variables()), cfg_.p);
        return mv;
    }

    mv.u1 = std::clamp(sol.z(0) * cfg_.s_du[0], cfg_.u_min[0], cfg_.u_max[0]);
    mv.u2 = std::clamp(sol.z(1) * cfg_.s_du[1], cfg_.u_min[1], cfg_.u_max[1]);
    mv.eps = std::max(0.0, sol.z(cfg_.num_variables() - 1));
    for (int idx : sol.active_set) {
        if (idx < cfg_.num_rows()) {
            ++mv.active_output_rows;
        }
    }
    mv.predicted = predicted_outputs(last_build_, sol.z, cfg_.p);
    prev_z_ = sol.z;
    prev_active_ = sol.active_set;
    last_move_ = {mv.u1, mv.u2};
    return mv;
}

}  // namespace hpv::mpc
