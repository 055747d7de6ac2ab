#include "mvml/solver.hpp"

#include "mvml/error.hpp"
#include "mvml/random.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace mvml {

std::string_view to_string(Variant v) noexcept
{
    switch (v) {
    case Variant::Full: return "full";
    case Variant::LossOnly: return "loss-only";
    case Variant::LossPlusLocal: return "loss-plus-local";
    }
    return "full";
}

Variant variant_from_string(std::string_view name)
{
    if (name == "full") return Variant::Full;
    if (name == "loss-only") return Variant::LossOnly;
    if (name == "loss-plus-local") return Variant::LossPlusLocal;
    throw Error(ErrorKind::InvalidInput, "unknown solver variant '" + std::string(name) + "'");
}

void SolverConfig::validate() const
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorKind::InvalidInput, "solver: lambda must be finite and >= 0");
    }
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw Error(ErrorKind::InvalidInput, "solver: mu must be finite and > 0");
    }
    if (max_iters < 1) {
        throw Error(ErrorKind::InvalidInput, "solver: max_iters must be >= 1");
    }
    if (!(rel_tol >= 0.0)) {
        throw Error(ErrorKind::InvalidInput, "solver: rel_tol must be >= 0");
    }
}

Solver::Solver(const MultiViewDataset& ds, SolverConfig config)
    : ds_(&ds), config_(config), blocks_(LabelBlocks::from(ds))
{
    config_.validate();
    for (std::size_t k = 0; k < blocks_.rows.size(); ++k) {
        if (!blocks_.empty(k)) {
            active_.push_back(k);
        }
    }
    for (const ViewData& v : ds.views()) {
        indicators_.push_back(indicator_from(v));
    }
    if (config_.variant == Variant::LossOnly) {
        return;
    }
    // mu sum_k X_k^T X_k = mu X^T diag(m) X, m_j = stacks that row j joins.
    for (std::size_t i = 0; i < ds.num_views(); ++i) {
        const ViewData& v = ds.view(i);
        Vector multiplicity = Vector::Zero(v.rows());
        for (std::size_t k : active_) {
            for (Eigen::Index j : blocks_.rows[k][i]) {
                multiplicity(j) += 1.0;
            }
        }
        Matrix gram = config_.mu * (v.features.transpose() * multiplicity.asDiagonal() * v.features);
        if (!all_finite(gram)) {
            // finite features whose Gram product overflows
            throw Error(ErrorKind::SingularSystem, "W-update system of view " + std::to_string(i) + " overflowed");
        }
        systems_.emplace_back(gram, config_.kernel);
    }
}

SolverState Solver::init_state() const
{
    SolverState state;
    Rng rng(config_.init_seed);
    for (const ViewData& v : ds_->views()) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(v.dim(), 1)));
        Matrix w(v.dim(), ds_->c());
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index q = 0; q < w.cols(); ++q) {
                w(r, q) = scale * rng.normal();
            }
        }
        state.w.weights.push_back(std::move(w));
    }
    for (std::size_t k : active_) {
        const auto rows = static_cast<Eigen::Index>(blocks_.stack_rows(k));
        state.z.push_back(Matrix::Zero(rows, ds_->c()));
        state.lambda_mult.push_back(Matrix::Zero(rows, ds_->c()));
    }
    return state;
}

Matrix Solver::global_stack(const WeightStack& w) const
{
    return stack_predictions(*ds_, w, blocks_.present);
}

Matrix Solver::label_stack(const WeightStack& w, std::size_t a) const
{
    return stack_predictions(*ds_, w, blocks_.rows[active_.at(a)]);
}

Matrix Solver::w_update_rhs(const SolverState& state, const Matrix& grad_prev, std::size_t i) const
{
    const ViewData& v = ds_->view(i);

    // Accumulate, row by row of view i, lambda G - P .* (X W - Y) + sum_k (mu Z_k - L_k).
    Matrix target = -indicators_[i].cwiseProduct(v.features * state.w.weights[i] - v.labels);

    Eigen::Index offset = 0;
    for (std::size_t prior = 0; prior < i; ++prior) {
        offset += static_cast<Eigen::Index>(blocks_.present[prior].size());
    }
    const IndexList& present = blocks_.present[i];
    if (grad_prev.rows() > 0 && config_.lambda != 0.0) {
        for (std::size_t r = 0; r < present.size(); ++r) {
            target.row(present[r]) += config_.lambda * grad_prev.row(offset + static_cast<Eigen::Index>(r));
        }
    }

    for (std::size_t a = 0; a < active_.size(); ++a) {
        const auto& per_view = blocks_.rows[active_[a]];
        Eigen::Index block = 0;
        for (std::size_t prior = 0; prior < i; ++prior) {
            block += static_cast<Eigen::Index>(per_view[prior].size());
        }
        const IndexList& rows = per_view[i];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const Eigen::Index s = block + static_cast<Eigen::Index>(r);
            target.row(rows[r]) += config_.mu * state.z[a].row(s) - state.lambda_mult[a].row(s);
        }
    }
    return v.features.transpose() * target;
}

WeightStack Solver::update_w(const SolverState& state, const Matrix& grad_prev) const
{
    if (config_.variant == Variant::LossOnly) {
        throw Error(ErrorKind::InvalidInput, "update_w: not used by the loss-only variant");
    }
    Eigen::Index expected_rows = 0;
    for (const IndexList& p : blocks_.present) {
        expected_rows += static_cast<Eigen::Index>(p.size());
    }
    if (grad_prev.rows() != expected_rows || grad_prev.cols() != ds_->c()) {
        throw Error(ErrorKind::InvalidInput, "update_w: subgradient has the wrong shape");
    }
    WeightStack out;
    for (std::size_t i = 0; i < ds_->num_views(); ++i) {
        out.weights.push_back(systems_[i].solve(w_update_rhs(state, grad_prev, i)));
    }
    return out;
}

std::vector<Matrix> Solver::update_z(const SolverState& state) const
{
    std::vector<Matrix> out;
    out.reserve(active_.size());
    const double tau = config_.lambda / config_.mu;
    for (std::size_t a = 0; a < active_.size(); ++a) {
        Matrix arg = label_stack(state.w, a) + state.lambda_mult[a] / config_.mu;
        out.push_back(svt(arg, tau, config_.kernel));
    }
    return out;
}

std::vector<Matrix> Solver::update_multipliers(const SolverState& state) const
{
    std::vector<Matrix> out;
    out.reserve(active_.size());
    for (std::size_t a = 0; a < active_.size(); ++a) {
        out.push_back(state.lambda_mult[a] + config_.mu * (label_stack(state.w, a) - state.z[a]));
    }
    return out;
}

double Solver::loss(const WeightStack& w) const
{
    double total = 0.0;
    for (std::size_t i = 0; i < ds_->num_views(); ++i) {
        const ViewData& v = ds_->view(i);
        total += 0.5 * indicators_[i].cwiseProduct(v.features * w.weights[i] - v.labels).squaredNorm();
    }
    return total;
}

double Solver::local_term(const WeightStack& w) const
{
    double total = 0.0;
    for (std::size_t a = 0; a < active_.size(); ++a) {
        total += nuclear_norm(label_stack(w, a), config_.kernel);
    }
    return total;
}

double Solver::objective_value(const WeightStack& w) const
{
    const double l = loss(w);
    switch (config_.variant) {
    case Variant::LossOnly: return l;
    case Variant::LossPlusLocal: return l + config_.lambda * local_term(w);
    case Variant::Full:
        return l + config_.lambda * (local_term(w) - nuclear_norm(global_stack(w), config_.kernel));
    }
    return l;
}

double Solver::surrogate_value(const WeightStack& w, const Matrix& grad_prev) const
{
    double value = loss(w);
    if (config_.variant == Variant::LossOnly) {
        return value;
    }
    value += config_.lambda * local_term(w);
    if (grad_prev.size() > 0) {
        value -= config_.lambda * (global_stack(w).cwiseProduct(grad_prev)).sum();
    }
    return value;
}

double Solver::max_primal_residual(const SolverState& state) const
{
    double worst = 0.0;
    for (std::size_t a = 0; a < state.z.size(); ++a) {
        worst = std::max(worst, (label_stack(state.w, a) - state.z[a]).norm());
    }
    return worst;
}

FitResult Solver::fit_least_squares() const
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    FitResult result;
    const SolverState init = init_state();
    result.trace.initial_objective = loss(init.w);
    for (std::size_t i = 0; i < ds_->num_views(); ++i) {
        const ViewData& v = ds_->view(i);
        const Matrix& p = indicators_[i];
        Matrix w(v.dim(), ds_->c());
        // Column k: (X^T diag(P_k) X) w_k = X^T (P_k .* Y_k).
        for (Eigen::Index k = 0; k < ds_->c(); ++k) {
            const Matrix gram = v.features.transpose() * p.col(k).asDiagonal() * v.features;
            const Vector rhs = v.features.transpose() * p.col(k).cwiseProduct(v.labels.col(k));
            if (gram.trace() == 0.0) {
                w.col(k).setZero();
                continue;
            }
            w.col(k) = spd_solve(gram, rhs, config_.kernel);
        }
        result.weights.weights.push_back(std::move(w));
    }
    IterationRecord rec;
    rec.iteration = 1;
    rec.objective = loss(result.weights);
    rec.surrogate = rec.objective;
    rec.seconds = std::chrono::duration<double>(clock::now() - start).count();
    if (!std::isfinite(rec.objective)) {
        throw Error(ErrorKind::NonFiniteObjective, "objective is not finite at iteration 1");
    }
    result.trace.records.push_back(rec);
    result.trace.converged = true;
    return result;
}

FitResult Solver::fit() const
{
    if (config_.variant == Variant::LossOnly) {
        return fit_least_squares();
    }
    using clock = std::chrono::steady_clock;
    FitResult result;
    SolverState state = init_state();
    double f_prev = objective_value(state.w);
    result.trace.initial_objective = f_prev;

    Eigen::Index global_rows = 0;
    for (const IndexList& p : blocks_.present) {
        global_rows += static_cast<Eigen::Index>(p.size());
    }

    for (int t = 1; t <= config_.max_iters; ++t) {
        const auto start = clock::now();
        Matrix grad = config_.variant == Variant::Full
                          ? trace_norm_subgradient(global_stack(state.w), config_.kernel)
                          : Matrix::Zero(global_rows, ds_->c());
        state.w = update_w(state, grad);
        for (const Matrix& wi : state.w.weights) {
            if (!all_finite(wi)) {
                throw Error(ErrorKind::NonFiniteObjective,
                            "weights diverged at iteration " + std::to_string(t));
            }
        }
        state.z = update_z(state);
        state.lambda_mult = update_multipliers(state);
        state.iteration = t;
        const double seconds = std::chrono::duration<double>(clock::now() - start).count();

        IterationRecord rec;
        rec.iteration = t;
        rec.objective = objective_value(state.w);
        rec.surrogate = surrogate_value(state.w, grad);
        rec.residual = max_primal_residual(state);
        rec.seconds = seconds;
        if (!std::isfinite(rec.objective)) {
            throw Error(ErrorKind::NonFiniteObjective,
                        "objective is not finite at iteration " + std::to_string(t));
        }
        result.trace.records.push_back(rec);

        const double change = std::abs(f_prev - rec.objective);
        f_prev = rec.objective;
        if (change <= config_.rel_tol * std::max(std::abs(rec.objective), 1e-300)) {
            result.trace.converged = true;
            break;
        }
    }
    result.weights = std::move(state.w);
    return result;
}

SolverState init_state(const MultiViewDataset& ds, const SolverConfig& config)
{
    return Solver(ds, config).init_state();
}

FitResult fit(const MultiViewDataset& ds, const SolverConfig& config)
{
    return Solver(ds, config).fit();
}

Matrix predict(const WeightStack& w, const MultiViewDataset& test)
{
    w.validate(test.dims(), test.c());
    if (test.num_views() > 1 && !test.aligned()) {
        throw Error(ErrorKind::InvalidInput, "predict: multi-view test data must be aligned");
    }
    const Eigen::Index n = test.n();
    Matrix scores = Matrix::Zero(n, test.c());
    Vector count = Vector::Zero(n);
    for (std::size_t i = 0; i < test.num_views(); ++i) {
        const ViewData& v = test.view(i);
        const Matrix part = v.features * w.weights[i];
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!v.is_missing(j)) {
                scores.row(j) += part.row(j);
                count(j) += 1.0;
            }
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (count(j) == 0.0) {
            throw Error(ErrorKind::AllViewsMissing, "sample " + std::to_string(j) + " is absent from every view");
        }
        scores.row(j) /= count(j);
    }
    return scores;
}

} // namespace mvml
