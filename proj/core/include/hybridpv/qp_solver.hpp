#pragma once

#include <Eigen/Core>

#include <optional>
#include <string_view>
#include <vector>

namespace hpv::qp {

/// min 0.5 z'Hz + f'z  s.t.  A z <= b,  lower <= z <= upper.
/// Empty lower/upper vectors mean "no bound"; infinite entries are skipped.
struct QpProblem {
    Eigen::MatrixXd h;
    Eigen::VectorXd f;
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int num_variables() const { return static_cast<int>(f.size()); }
    int num_general() const { return static_cast<int>(b.size()); }
    /// Throws std::invalid_argument on shape mismatch or an asymmetric H.
    void validate() const;
};

enum class QpStatus { optimal, max_iterations, infeasible };

std::string_view to_string(QpStatus s);

/// Normalized first-order optimality measures.
struct KktResiduals {
    double stationarity = 0.0;
    double primal = 0.0;
    double complementarity = 0.0;

    double max() const;
};

/// Constraint indices: general rows 0..m-1, then lower bounds m..m+n-1,
/// then upper bounds m+n..m+2n-1.
struct QpSolution {
    Eigen::VectorXd z;
    std::vector<int> active_set;
    Eigen::VectorXd multipliers;  ///< one per constraint index, zero when inactive
    KktResiduals kkt;
    double kkt_residual = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool used_phase1 = false;
    QpStatus status = QpStatus::infeasible;
};

struct WarmStart {
    Eigen::VectorXd z;
    std::vector<int> active_set;
};

struct SolverOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-6;
    int max_iterations = 0;  ///< 0 selects 50 * (n + m)
};

/// Primal active-set solver (null-space method). Carries warm-start memory
/// between calls; one instance per controller.
class ActiveSetSolver {
public:
    explicit ActiveSetSolver(SolverOptions opts = {}) : opts_(opts) {}

    /// Solves p. Uses `warm` if given and primal feasible, otherwise starts a
    /// phase-1 elastic solve. Throws std::invalid_argument if H is not
    /// positive definite or the problem is malformed.
    QpSolution solve(const QpProblem& p, const WarmStart* warm = nullptr);

    /// Most recent solution, if any.
    const std::optional<QpSolution>& last() const { return last_; }
    void reset() { last_.reset(); }

private:
    SolverOptions opts_;
    std::optional<QpSolution> last_;
};

/// One-shot cold solve.
QpSolution solve_qp(const QpProblem& p, const SolverOptions& opts = {});

double objective(const QpProblem& p, const Eigen::VectorXd& z);

/// Normalized KKT residuals of (z, multipliers) for p.
KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& multipliers);

/// Largest violation of any constraint at z (0 when feasible).
double max_violation(const QpProblem& p, const Eigen::VectorXd& z);

}  // namespace hpv::qp
