#pragma once

// Difference-of-convex solver: CCCP linearizes the concave -lambda ||XW||_*
// term at the previous iterate, and one ADMM sweep with the splitting
// Z_k = X_k W handles the convex part. A single flattened loop performs, per
// iteration,
//
//   G     = subgradient of ||X W_{t-1}||_*
//   W_t   = (mu sum_k X_k^T X_k)^{-1} { lambda X^T G + sum_k X_k^T (mu Z_k - L_k)
//                                       - X^T [P .* (X W_{t-1} - Y)] }
//   Z_k   = svt(X_k W_t + L_k / mu, lambda / mu)
//   L_k  += mu (X_k W_t - Z_k)
//
// X is block diagonal over views, so the W update splits into one d_i x d_i
// SPD solve per view whose factorization is computed once.

#include "mvml/dataset.hpp"
#include "mvml/regularizer.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace mvml {

enum class Variant {
    Full,          // loss + lambda (local - global)
    LossOnly,      // masked least squares
    LossPlusLocal, // loss + lambda local, no global term
};

std::string_view to_string(Variant v) noexcept;
Variant variant_from_string(std::string_view name);

struct SolverConfig {
    double lambda = 0.5;
    double mu = 5.0;
    int max_iters = 200;
    double rel_tol = 1e-6;
    Variant variant = Variant::Full;
    std::uint64_t init_seed = 0;
    KernelTolerances kernel{};

    void validate() const;
};

struct SolverState {
    WeightStack w;
    std::vector<Matrix> z;           // one per active label
    std::vector<Matrix> lambda_mult; // same shapes as z
    int iteration = 0;
};

struct IterationRecord {
    int iteration = 0;
    double objective = 0.0; // f at W_t
    double surrogate = 0.0; // J at W_t, linearized at W_{t-1}
    double residual = 0.0;  // max_k ||X_k W_t - Z_k||_F
    double seconds = 0.0;   // wall time of the iteration
};

struct SolverTrace {
    double initial_objective = 0.0;
    std::vector<IterationRecord> records;
    bool converged = false;
};

struct FitResult {
    WeightStack weights;
    SolverTrace trace;
};

/// Training problem with every loop-invariant quantity precomputed: label
/// blocks, indicator matrices and the factorized per-view W-update systems.
class Solver {
public:
    Solver(const MultiViewDataset& ds, SolverConfig config);

    const MultiViewDataset& dataset() const noexcept { return *ds_; }
    const SolverConfig& config() const noexcept { return config_; }
    const LabelBlocks& blocks() const noexcept { return blocks_; }
    /// Labels with a non-empty stack, ascending. z[a] belongs to active_labels()[a].
    const std::vector<std::size_t>& active_labels() const noexcept { return active_; }

    SolverState init_state() const;

    /// Stacked predictions over all present rows (view order, ascending rows).
    Matrix global_stack(const WeightStack& w) const;
    /// Stacked predictions X_k W for active label index a.
    Matrix label_stack(const WeightStack& w, std::size_t a) const;

    /// Right-hand side of the W update for view i.
    Matrix w_update_rhs(const SolverState& state, const Matrix& grad_prev, std::size_t i) const;
    /// (mu sum_k X_k^(i)T X_k^(i) + eps I), the factorized matrix for view i.
    const Matrix& w_update_matrix(std::size_t i) const { return systems_.at(i).regularized(); }

    /// grad_prev is the trace-norm subgradient of global_stack(state.w), or
    /// zero (rows of the global stack, c columns) to drop the global term.
    WeightStack update_w(const SolverState& state, const Matrix& grad_prev) const;
    std::vector<Matrix> update_z(const SolverState& state) const;
    std::vector<Matrix> update_multipliers(const SolverState& state) const;

    /// Objective of the configured variant at w.
    double objective_value(const WeightStack& w) const;
    /// Linearized surrogate at w with subgradient grad_prev of the previous iterate.
    double surrogate_value(const WeightStack& w, const Matrix& grad_prev) const;
    double max_primal_residual(const SolverState& state) const;

    FitResult fit() const;

private:
    FitResult fit_least_squares() const;
    double loss(const WeightStack& w) const;
    double local_term(const WeightStack& w) const;

    const MultiViewDataset* ds_;
    SolverConfig config_;
    LabelBlocks blocks_;
    std::vector<std::size_t> active_;
    std::vector<Matrix> indicators_;
    std::vector<SpdFactorization> systems_;
};

/// Free-function forms of the solver steps; each builds the precomputation.
SolverState init_state(const MultiViewDataset& ds, const SolverConfig& config);
FitResult fit(const MultiViewDataset& ds, const SolverConfig& config);

/// Scores per sample: mean over present views of x_j^(i) W_i.
/// Throws AllViewsMissing if a sample is absent from every view.
Matrix predict(const WeightStack& w, const MultiViewDataset& test);

} // namespace mvml
