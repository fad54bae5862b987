#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "narrm/dataset.hpp"
#include "narrm/narnn.hpp"

namespace narrm {

/// Levenberg-Marquardt hyperparameters (classic Marquardt damping schedule).
struct LmConfig {
    std::size_t max_epochs = 200;
    double damping_init = 1e-3;
    double damping_up = 10.0;
    double damping_down = 0.1;
    double damping_max = 1e10;
    double goal_sse = 0.0;
    double min_gradient = 1e-7;
    std::uint64_t seed = 1;

    void validate() const;
};

enum class StopReason { max_epochs, goal_reached, gradient_small, damping_ceiling };
std::string_view to_string(StopReason r);

/// One proposed step. sse_after is +inf when the damped system could not be factored.
struct EpochRecord {
    double sse_before = 0.0;
    double sse_after = 0.0;
    double lambda = 0.0;
    bool accepted = false;
    double grad_norm = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    StopReason stop = StopReason::max_epochs;

    std::size_t accepted_steps() const;
    double final_sse() const;
};

/// e_i = y_i - yhat_i over a dataset already normalized with the model's normalizer.
Eigen::VectorXd residuals(const NarnnModel& model, const WindowedDataset& data);
double sse(const NarnnModel& model, const WindowedDataset& data);

/// J(i, j) = d e_i / d theta_j by backpropagation through the hidden layer,
/// theta in NarnnModel::parameters() order.
Eigen::MatrixXd jacobian(const NarnnModel& model, const WindowedDataset& data);

/// J^T J, J^T e and e^T e accumulated in fixed row blocks, without forming J.
struct NormalEquations {
    Eigen::MatrixXd jtj;
    Eigen::VectorXd jte;
    double sse = 0.0;
};
NormalEquations normal_equations(const NarnnModel& model, const WindowedDataset& data);

/// Solves (J^T J + lambda I) delta = J^T e with a Cholesky factorization.
/// Returns nullopt when the system is not numerically positive definite.
/// lambda = 0 is allowed here (plain Gauss-Newton).
std::optional<Eigen::VectorXd> solve_damped(const Eigen::MatrixXd& jtj, const Eigen::VectorXd& jte,
                                            double lambda);

struct LmStep {
    NarnnModel candidate;
    Eigen::VectorXd delta;  // solution of the damped system; theta' = theta - delta
    double step_norm = 0.0;
};

/// One damped Gauss-Newton step. nullopt when the damped system is singular.
std::optional<LmStep> lm_step(const NarnnModel& model, const WindowedDataset& data, double lambda);
std::optional<LmStep> lm_step(const NarnnModel& model, const NormalEquations& ne, double lambda);

/// Full-batch LM training on normalized data. Throws training_error if the
/// starting SSE is not finite.
std::pair<NarnnModel, TrainHistory> train(NarnnModel model, const WindowedDataset& train_data,
                                          const LmConfig& config);

/// `epoch,sse_before,sse_after,lambda,accepted,grad_norm`
void write_history_csv(std::ostream& out, const TrainHistory& history);

}  // namespace narrm
