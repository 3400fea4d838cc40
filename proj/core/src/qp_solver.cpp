#include "hybridpv/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hpv::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform view over general rows and variable bounds.
class Rows {
public:
    Rows(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
        : a_(a), b_(b), lo_(lo), hi_(hi), m_(static_cast<int>(b.size())), n_(static_cast<int>(a.cols())) {
        norms_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            norms_[i] = a_.row(i).norm();
        }
    }

    int m() const { return m_; }
    int n() const { return n_; }
    int total() const { return m_ + 2 * n_; }

    bool exists(int i) const {
        if (i < m_) {
            return true;
        }
        if (i < m_ + n_) {
            return lo_.size() > 0 && std::isfinite(lo_(i - m_));
        }
        return hi_.size() > 0 && std::isfinite(hi_(i - m_ - n_));
    }

    double dot(int i, const Eigen::VectorXd& v) const {
        if (i < m_) {
            return a_.row(i).dot(v);
        }
        if (i < m_ + n_) {
            return -v(i - m_);
        }
        return v(i - m_ - n_);
    }

    double rhs(int i) const {
        if (i < m_) {
            return b_(i);
        }
        if (i < m_ + n_) {
            return -lo_(i - m_);
        }
        return hi_(i - m_ - n_);
    }

    double norm(int i) const { return i < m_ ? norms_[i] : 1.0; }

    void fill(int i, Eigen::Ref<Eigen::VectorXd> col) const {
        if (i < m_) {
            col = a_.row(i).transpose();
            return;
        }
        col.setZero();
        if (i < m_ + n_) {
            col(i - m_) = -1.0;
        } else {
            col(i - m_ - n_) = 1.0;
        }
    }

    // All products A_i v in one pass.
    void all_dots(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
        out.resize(total());
        if (m_ > 0) {
            out.head(m_).noalias() = a_ * v;
        }
        out.segment(m_, n_) = -v;
        out.tail(n_) = v;
    }

private:
    const Eigen::MatrixXd& a_;
    const Eigen::VectorXd& b_;
    const Eigen::VectorXd& lo_;
    const Eigen::VectorXd& hi_;
    int m_;
    int n_;
    std::vector<double> norms_;
};

struct CoreResult {
    Eigen::VectorXd z;
    std::vector<int> working;
    Eigen::VectorXd lambda;  // aligned with working
    int iterations = 0;
    bool converged = false;
};

Eigen::MatrixXd working_matrix(const Rows& rows, const std::vector<int>& w) {
    Eigen::MatrixXd aw(rows.n(), static_cast<Eigen::Index>(w.size()));
    for (std::size_t k = 0; k < w.size(); ++k) {
        rows.fill(w[k], aw.col(static_cast<Eigen::Index>(k)));
    }
    return aw;
}

// Keeps only rows active at z and linearly independent of those already kept.
std::vector<int> sanitize_working_set(const Rows& rows, const Eigen::VectorXd& z, const std::vector<int>& candidates,
                                      double feas_tol) {
    std::vector<int> sorted = candidates;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<int> kept;
    for (int i : sorted) {
        if (i < 0 || i >= rows.total() || !rows.exists(i)) {
            continue;
        }
        const double r = rows.rhs(i);
        if (std::abs(r - rows.dot(i, z)) > feas_tol * std::max(1.0, std::abs(r))) {
            continue;
        }
        if (static_cast<int>(kept.size()) >= rows.n()) {
            break;
        }
        std::vector<int> trial = kept;
        trial.push_back(i);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(working_matrix(rows, trial));
        qr.setThreshold(1e-10);
        if (qr.rank() == static_cast<Eigen::Index>(trial.size())) {
            kept = std::move(trial);
        }
    }
    return kept;
}

CoreResult active_set_core(const Eigen::MatrixXd& h, const Eigen::VectorXd& f, const Rows& rows, Eigen::VectorXd z,
                           std::vector<int> working, int max_iter) {
    const int n = rows.n();
    const int total = rows.total();
    CoreResult res;

    std::vector<char> in_w(total, 0);
    for (int i : working) {
        in_w[i] = 1;
    }

    Eigen::LLT<Eigen::MatrixXd> h_llt(h);
    Eigen::VectorXd g;
    Eigen::VectorXd p(n);
    Eigen::VectorXd ap;
    Eigen::VectorXd az;
    rows.all_dots(z, az);
    bool at_subspace_min = false;
    bool bland = false;
    int degenerate_run = 0;

    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        g.noalias() = h * z;
        g += f;
        const int k = static_cast<int>(working.size());

        Eigen::MatrixXd y;
        Eigen::MatrixXd r;
        if (k == 0) {
            p = -h_llt.solve(g);
        } else {
            const Eigen::MatrixXd aw = working_matrix(rows, working);
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(aw);
            const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
            y = q.leftCols(k);
            r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
            if (k >= n) {
                p.setZero();
            } else {
                const Eigen::MatrixXd zb = q.rightCols(n - k);
                const Eigen::MatrixXd hr = zb.transpose() * h * zb;
                Eigen::LLT<Eigen::MatrixXd> llt(hr);
                if (llt.info() != Eigen::Success) {
                    throw std::invalid_argument("solve_qp: reduced Hessian not positive definite");
                }
                p = -(zb * llt.solve(zb.transpose() * g));
            }
        }

        const double step_tol = 1e-14 * std::max(1.0, z.lpNorm<Eigen::Infinity>());
        if (at_subspace_min || p.lpNorm<Eigen::Infinity>() <= step_tol) {
            at_subspace_min = false;
            if (k == 0) {
                res.converged = true;
                break;
            }
            // A_W' lambda = -g  =>  R lambda = -Y' g.
            const Eigen::VectorXd lam =
                r.triangularView<Eigen::Upper>().solve(-(y.transpose() * g));
            const double lam_tol = 1e-10 * std::max(1.0, g.lpNorm<Eigen::Infinity>());
            int drop = -1;
            double most_negative = -lam_tol;
            for (int j = 0; j < k; ++j) {
                if (bland) {
                    if (lam(j) < -lam_tol && (drop < 0 || working[j] < working[drop])) {
                        drop = j;
                    }
                } else if (lam(j) < most_negative ||
                           (drop >= 0 && lam(j) == most_negative && working[j] < working[drop])) {
                    most_negative = lam(j);
                    drop = j;
                }
            }
            if (drop < 0) {
                res.lambda = lam;
                res.converged = true;
                break;
            }
            in_w[working[drop]] = 0;
            working.erase(working.begin() + drop);
            continue;
        }

        rows.all_dots(p, ap);
        const double p_norm = p.norm();
        // Rows already tight give a zero step. Among those prefer the steepest,
        // which skips along chains of nearly parallel rows that are tight
        // together; Bland's smallest index once degenerate steps pile up.
        double alpha = 1.0;
        double steep = 0.0;
        int blocking = -1;
        for (int i = 0; i < total; ++i) {
            if (in_w[i] || !rows.exists(i)) {
                continue;
            }
            if (ap(i) <= 1e-12 * rows.norm(i) * p_norm) {
                continue;
            }
            double slack = rows.rhs(i) - az(i);
            if (slack <= 1e-13 * std::max(1.0, std::abs(rows.rhs(i)))) {
                slack = 0.0;
            }
            const double a_i = slack / ap(i);
            const double s_i = ap(i) / rows.norm(i);
            if (a_i < alpha) {
                alpha = a_i;
                steep = s_i;
                blocking = i;
            } else if (a_i == 0.0 && alpha == 0.0 && !bland && s_i > steep) {
                steep = s_i;
                blocking = i;
            }
        }
        degenerate_run = (blocking >= 0 && alpha == 0.0) ? degenerate_run + 1 : 0;
        bland = bland || degenerate_run > 4 * n;
        z += alpha * p;
        az += alpha * ap;
        if ((it + 1) % 32 == 0) {
            rows.all_dots(z, az);  // bound drift
        }
        if (blocking >= 0) {
            working.push_back(blocking);
            in_w[blocking] = 1;
        } else {
            at_subspace_min = true;
        }
    }

    if (res.converged && res.lambda.size() != static_cast<Eigen::Index>(working.size())) {
        res.lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(working.size()));
    }
    res.z = std::move(z);
    res.working = std::move(working);
    return res;
}

double inf_norm(const Eigen::MatrixXd& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

void QpProblem::validate() const {
    const auto n = f.size();
    if (h.rows() != n || h.cols() != n) {
        throw std::invalid_argument("QpProblem: H must be n x n with n = size(f)");
    }
    if (a.rows() != b.size() || (a.rows() > 0 && a.cols() != n)) {
        throw std::invalid_argument("QpProblem: A must be m x n with m = size(b)");
    }
    if ((lower.size() != 0 && lower.size() != n) || (upper.size() != 0 && upper.size() != n)) {
        throw std::invalid_argument("QpProblem: bound vectors must be empty or of size n");
    }
    const double tol = 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff());
    if (n > 0 && (h - h.transpose()).cwiseAbs().maxCoeff() > tol) {
        throw std::invalid_argument("QpProblem: H is not symmetric");
    }
}

std::string_view to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal:
            return "optimal";
        case QpStatus::max_iterations:
            return "max_iterations";
        case QpStatus::infeasible:
            return "infeasible";
    }
    return "unknown";
}

double KktResiduals::max() const { return std::max({stationarity, primal, complementarity}); }

double objective(const QpProblem& p, const Eigen::VectorXd& z) { return 0.5 * z.dot(p.h * z) + p.f.dot(z); }

double max_violation(const QpProblem& p, const Eigen::VectorXd& z) {
    const Eigen::MatrixXd a = p.a.rows() > 0 ? p.a : Eigen::MatrixXd(0, z.size());
    Rows rows(a, p.b, p.lower, p.upper);
    double worst = 0.0;
    for (int i = 0; i < rows.total(); ++i) {
        if (rows.exists(i)) {
            worst = std::max(worst, rows.dot(i, z) - rows.rhs(i));
        }
    }
    return worst;
}

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& multipliers) {
    const Eigen::MatrixXd a = p.a.rows() > 0 ? p.a : Eigen::MatrixXd(0, z.size());
    Rows rows(a, p.b, p.lower, p.upper);
    const Eigen::VectorXd hz = p.h * z;
    const double scale = std::max({1.0, p.f.size() ? p.f.lpNorm<Eigen::Infinity>() : 0.0,
                                   hz.size() ? hz.lpNorm<Eigen::Infinity>() : 0.0});
    const double z_scale = std::max(1.0, z.size() ? z.lpNorm<Eigen::Infinity>() : 0.0);

    Eigen::VectorXd grad = hz + p.f;
    Eigen::VectorXd col(z.size());
    KktResiduals k;
    for (int i = 0; i < rows.total(); ++i) {
        if (!rows.exists(i)) {
            continue;
        }
        const double lam = i < multipliers.size() ? multipliers(i) : 0.0;
        const double slack = rows.rhs(i) - rows.dot(i, z);
        k.primal = std::max(k.primal, -slack / std::max(1.0, std::abs(rows.rhs(i))));
        if (lam != 0.0) {
            rows.fill(i, col);
            grad += lam * col;
            k.complementarity = std::max(k.complementarity, std::abs(lam * slack) / (scale * z_scale));
            k.complementarity = std::max(k.complementarity, -lam / scale);
        }
    }
    k.stationarity = grad.size() ? grad.lpNorm<Eigen::Infinity>() / scale : 0.0;
    return k;
}

QpSolution ActiveSetSolver::solve(const QpProblem& prob, const WarmStart* warm) {
    prob.validate();
    const int n = prob.num_variables();
    const int m = prob.num_general();
    const Eigen::MatrixXd a_empty(0, n);
    const Eigen::MatrixXd& a = m > 0 ? prob.a : a_empty;
    Rows rows(a, prob.b, prob.lower, prob.upper);
    const int max_iter = opts_.max_iterations > 0 ? opts_.max_iterations : 50 * (n + m) + 1;

    if (n > 0) {
        Eigen::LLT<Eigen::MatrixXd> llt(prob.h);
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("solve_qp: H must be positive definite");
        }
    }

    QpSolution sol;
    sol.multipliers = Eigen::VectorXd::Zero(rows.total());

    // Starting point: warm z (or zero) clipped into the variable box.
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    if (warm != nullptr && warm->z.size() == n) {
        z = warm->z;
    }
    for (int j = 0; j < n; ++j) {
        const double lo = prob.lower.size() ? prob.lower(j) : -kInf;
        const double hi = prob.upper.size() ? prob.upper(j) : kInf;
        if (lo > hi) {
            sol.z = z;
            sol.status = QpStatus::infeasible;
            last_ = sol;
            return sol;
        }
        z(j) = std::clamp(z(j), lo, hi);
    }

    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        worst = std::max(worst, (rows.dot(i, z) - rows.rhs(i)) / std::max(1.0, std::abs(rows.rhs(i))));
    }

    std::vector<int> working;
    int used_iters = 0;
    if (worst > opts_.feasibility_tol) {
        // Phase 1: elastic problem with one shared slack s >= 0 and an exact
        // penalty M*s, escalated until s vanishes.
        sol.used_phase1 = true;
        const int ne = n + 1;
        Eigen::MatrixXd he = Eigen::MatrixXd::Zero(ne, ne);
        he.topLeftCorner(n, n) = prob.h;
        he(n, n) = 1.0;
        double big_m = 1e4 * (1.0 + (n ? prob.f.lpNorm<Eigen::Infinity>() : 0.0) + inf_norm(prob.h));
        Eigen::VectorXd fe(ne);
        fe.head(n) = prob.f;
        Eigen::MatrixXd ae(m, ne);
        ae.leftCols(n) = a;
        ae.col(n).setConstant(-1.0);
        Eigen::VectorXd lo_e = Eigen::VectorXd::Constant(ne, -kInf);
        Eigen::VectorXd hi_e = Eigen::VectorXd::Constant(ne, kInf);
        if (prob.lower.size()) lo_e.head(n) = prob.lower;
        if (prob.upper.size()) hi_e.head(n) = prob.upper;
        lo_e(n) = 0.0;
        Rows rows_e(ae, prob.b, lo_e, hi_e);

        Eigen::VectorXd ze(ne);
        ze.head(n) = z;
        double s0 = 0.0;
        for (int i = 0; i < m; ++i) {
            s0 = std::max(s0, rows.dot(i, z) - rows.rhs(i));
        }
        ze(n) = s0;
        std::vector<int> we;
        bool feasible = false;
        for (int attempt = 0; attempt < 5; ++attempt) {
            fe(n) = big_m;
            CoreResult cr = active_set_core(he, fe, rows_e, ze, we, max_iter - used_iters);
            used_iters += cr.iterations;
            ze = cr.z;
            we = cr.working;
            const double s_scale = std::max(1.0, m ? prob.b.lpNorm<Eigen::Infinity>() : 0.0);
            if (cr.converged && ze(n) <= opts_.feasibility_tol * s_scale) {
                feasible = true;
                break;
            }
            if (!cr.converged && used_iters >= max_iter) {
                break;
            }
            big_m *= 1e3;
        }
        z = ze.head(n);
        if (!feasible) {
            sol.z = z;
            sol.iterations = used_iters;
            sol.status = used_iters >= max_iter ? QpStatus::max_iterations : QpStatus::infeasible;
            sol.objective = objective(prob, z);
            last_ = sol;
            return sol;
        }
        // Map elastic working rows back; the s >= 0 bound has no counterpart.
        std::vector<int> mapped;
        for (int i : we) {
            if (i < m) {
                mapped.push_back(i);
            } else if (i < m + ne) {
                if (i - m < n) mapped.push_back(m + (i - m));
            } else if (i - m - ne < n) {
                mapped.push_back(m + n + (i - m - ne));
            }
        }
        working = sanitize_working_set(rows, z, mapped, 1e-8);
    } else if (warm != nullptr) {
        working = sanitize_working_set(rows, z, warm->active_set, opts_.feasibility_tol);
    }

    CoreResult cr = active_set_core(prob.h, prob.f, rows, z, working, std::max(1, max_iter - used_iters));
    used_iters += cr.iterations;

    sol.z = cr.z;
    sol.iterations = used_iters;
    sol.active_set = cr.working;
    for (std::size_t k = 0; k < cr.working.size(); ++k) {
        sol.multipliers(cr.working[k]) = cr.lambda.size() ? cr.lambda(static_cast<Eigen::Index>(k)) : 0.0;
    }
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.kkt = kkt_residuals(prob, sol.z, sol.multipliers);
    sol.kkt_residual = sol.kkt.max();
    sol.objective = objective(prob, sol.z);
    if (!cr.converged) {
        sol.status = QpStatus::max_iterations;
    } else {
        sol.status = QpStatus::optimal;
    }
    last_ = sol;
    return sol;
}

QpSolution solve_qp(const QpProblem& p, const SolverOptions& opts) {
    ActiveSetSolver solver(opts);
    return solver.solve(p);
}

}  // namespace hpv::qp
