#include "omx/least_squares.hpp"

#include "omx/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace omx {

std::size_t FitResult::index(std::string_view name) const
{
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("no fit parameter named " + std::string(name));
    return static_cast<std::size_t>(it - names.begin());
}

double FitResult::value(std::string_view name) const
{
    return values[static_cast<Eigen::Index>(index(name))];
}

double FitResult::stderr_of(std::string_view name) const
{
    const auto k = static_cast<Eigen::Index>(index(name));
    if (covariance.rows() != values.size()) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(std::max(0.0, covariance(k, k)));
}

namespace {

struct Workspace {
    const LeastSquaresProblem& problem;
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;

    double cost(const Eigen::VectorXd& p)
    {
        problem.residuals(p, r, nullptr);
        return 0.5 * r.squaredNorm();
    }

    double cost_and_jacobian(const Eigen::VectorXd& p)
    {
        problem.residuals(p, r, &jac);
        return 0.5 * r.squaredNorm();
    }
};

Eigen::VectorXd project(const LeastSquaresProblem& pb, Eigen::VectorXd p)
{
    if (pb.lower.size() == p.size()) p = p.cwiseMax(pb.lower);
    if (pb.upper.size() == p.size()) p = p.cwiseMin(pb.upper);
    return p;
}

bool at_lower(const LeastSquaresProblem& pb, const Eigen::VectorXd& p, Eigen::Index k)
{
    return pb.lower.size() == p.size() && p[k] <= pb.lower[k];
}

bool at_upper(const LeastSquaresProblem& pb, const Eigen::VectorXd& p, Eigen::Index k)
{
    return pb.upper.size() == p.size() && p[k] >= pb.upper[k];
}

} // namespace

FitResult solve_least_squares(const LeastSquaresProblem& problem, Eigen::VectorXd initial,
                              const SolverOptions& options)
{
    const auto n = initial.size();
    if (static_cast<std::size_t>(n) != problem.names.size()) {
        throw std::invalid_argument("initial guess does not match parameter names");
    }
    if (problem.residual_count < static_cast<std::size_t>(n)) {
        throw std::invalid_argument("fewer residuals than free parameters");
    }

    FitResult result;
    result.names = problem.names;
    Workspace ws{problem, {}, {}};
    Eigen::VectorXd p = project(problem, std::move(initial));
    double cost = ws.cost_and_jacobian(p);
    if (!std::isfinite(cost)) throw std::invalid_argument("residuals are not finite at the initial guess");

    std::vector<bool> frozen(static_cast<std::size_t>(n), false);
    bool converged = false;
    int iter = 0;
    for (; iter < options.max_iterations && !converged; ++iter) {
        if (cost == 0.0) {
            converged = true;
            break;
        }

        // Active set: frozen parameters plus bounds the unconstrained step would cross.
        std::vector<bool> held = frozen;
        Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
        for (int pass = 0; pass <= n; ++pass) {
            std::vector<Eigen::Index> free_cols;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (!held[static_cast<std::size_t>(k)]) free_cols.push_back(k);
            }
            step.setZero();
            if (free_cols.empty()) break;
            Eigen::MatrixXd jf(ws.jac.rows(), static_cast<Eigen::Index>(free_cols.size()));
            for (std::size_t c = 0; c < free_cols.size(); ++c) {
                jf.col(static_cast<Eigen::Index>(c)) = ws.jac.col(free_cols[c]);
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jf);
            qr.setThreshold(1e-12);
            if (qr.rank() < jf.cols()) {
                // Drop the columns the pivoting ranked as dependent.
                const auto& perm = qr.colsPermutation().indices();
                for (Eigen::Index c = qr.rank(); c < jf.cols(); ++c) {
                    const auto k = free_cols[static_cast<std::size_t>(perm[c])];
                    frozen[static_cast<std::size_t>(k)] = true;
                    held[static_cast<std::size_t>(k)] = true;
                    result.frozen.push_back(problem.names[static_cast<std::size_t>(k)]);
                    warn("singular Jacobian: freezing parameter '" + problem.names[static_cast<std::size_t>(k)] +
                         "'");
                }
                continue;
            }
            const Eigen::VectorXd sub = qr.solve(-ws.r);
            for (std::size_t c = 0; c < free_cols.size(); ++c) step[free_cols[c]] = sub[static_cast<Eigen::Index>(c)];

            bool changed = false;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (held[static_cast<std::size_t>(k)]) continue;
                if ((step[k] < 0.0 && at_lower(problem, p, k)) || (step[k] > 0.0 && at_upper(problem, p, k))) {
                    held[static_cast<std::size_t>(k)] = true;
                    changed = true;
                }
            }
            if (!changed) break;
        }

        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial;
        double trial_cost = cost;
        for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
            trial = project(problem, p + t * step);
            trial_cost = ws.cost(trial);
            if (std::isfinite(trial_cost) && trial_cost < cost) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // No descent along the Gauss-Newton direction: stationary to rounding.
            const double rel = step.norm() / (p.norm() + 1e-300);
            converged = rel < 1e-6 || step.norm() == 0.0;
            if (!converged) result.message = "line search failed";
            break;
        }

        const double rel_step = (trial - p).norm() / (trial.norm() + 1e-300);
        const double rel_change = (cost - trial_cost) / cost;
        p = trial;
        cost = ws.cost_and_jacobian(p);
        if (rel_step < options.step_tolerance || rel_change < options.residual_tolerance || cost == 0.0) {
            converged = true;
        }
    }
    if (!converged && result.message.empty()) result.message = "iteration cap reached";

    result.values = p;
    result.iterations = iter;
    result.converged = converged;
    result.residual_norm = std::sqrt(2.0 * cost);
    if (converged) {
        std::vector<Eigen::Index> free_cols;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!frozen[static_cast<std::size_t>(k)]) free_cols.push_back(k);
        }
        const auto nf = static_cast<Eigen::Index>(free_cols.size());
        Eigen::MatrixXd jf(ws.jac.rows(), nf);
        for (Eigen::Index c = 0; c < nf; ++c) jf.col(c) = ws.jac.col(free_cols[static_cast<std::size_t>(c)]);
        Eigen::MatrixXd info = jf.transpose() * jf;
        Eigen::MatrixXd inv = info.ldlt().solve(Eigen::MatrixXd::Identity(nf, nf));
        inv = 0.5 * (inv + inv.transpose());
        const auto dof = static_cast<double>(ws.r.size()) - static_cast<double>(nf);
        const double variance = options.scale_covariance ? (dof > 0 ? 2.0 * cost / dof : 0.0) : 1.0;
        result.covariance = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index a = 0; a < nf; ++a) {
            for (Eigen::Index b = 0; b < nf; ++b) {
                result.covariance(free_cols[static_cast<std::size_t>(a)], free_cols[static_cast<std::size_t>(b)]) =
                    variance * inv(a, b);
            }
        }
    }
    return result;
}

} // namespace omx
