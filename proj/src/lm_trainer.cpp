#include "narrm/lm_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "narrm/csv.hpp"

namespace narrm {

void LmConfig::validate() const {
    require(damping_up > 1.0, "trainer.damping_up must be > 1");
    require(damping_down > 0.0 && damping_down < 1.0, "trainer.damping_down must lie in (0, 1)");
    require(damping_init > 0.0, "trainer.damping_init must be > 0");
    require(damping_max >= 0.0, "trainer.damping_max must be >= 0");
    require(goal_sse >= 0.0, "trainer.goal_sse must be >= 0");
    require(min_gradient >= 0.0, "trainer.min_gradient must be >= 0");
}

std::string_view to_string(StopReason r) {
    switch (r) {
    case StopReason::max_epochs:
        return "max_epochs";
    case StopReason::goal_reached:
        return "goal_reached";
    case StopReason::gradient_small:
        return "gradient_small";
    case StopReason::damping_ceiling:
        return "damping_ceiling";
    }
    return "?";
}

std::size_t TrainHistory::accepted_steps() const {
    return static_cast<std::size_t>(
        std::count_if(epochs.begin(), epochs.end(), [](const EpochRecord& r) { return r.accepted; }));
}

double TrainHistory::final_sse() const {
    double s = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : epochs) {
        if (std::isnan(s)) {
            s = r.sse_before;
        }
        if (r.accepted) {
            s = r.sse_after;
        }
    }
    return s;
}

namespace {

// Rows per block. Fixed so that every reduction happens in the same order
// whatever the dataset size or caller.
constexpr Eigen::Index kBlockRows = 2048;

struct BlockPass {
    Eigen::MatrixXd hidden;     // rows x H
    Eigen::MatrixXd slope;      // rows x H, f'(z)
    Eigen::VectorXd residual;   // rows
};

void check_data(const NarnnModel& model, const WindowedDataset& data) {
    require(static_cast<std::size_t>(data.inputs.cols()) == model.topology.n_delays,
            "trainer: dataset width does not match n_delays");
    require(data.inputs.rows() == data.targets.size(), "trainer: inputs and targets differ in length");
}

BlockPass block_pass(const NarnnModel& model, const WindowedDataset& data, Eigen::Index start,
                     Eigen::Index rows, bool with_slope) {
    const Activation kind = model.topology.hidden_activation;
    const Eigen::MatrixXd z =
        (data.inputs.middleRows(start, rows) * model.w1.transpose()).rowwise() + model.b1.transpose();
    BlockPass p;
    p.hidden = z.unaryExpr([kind](double v) { return activation(kind, v); });
    if (with_slope) {
        p.slope = z.unaryExpr([kind](double v) { return activation_derivative(kind, v); });
    }
    const Eigen::VectorXd yhat = (p.hidden * model.w2).array() + model.b2;
    p.residual = data.targets.segment(start, rows) - yhat;
    return p;
}

// d e / d theta for one block; e = y - yhat, so every entry is -d yhat / d theta.
void fill_jacobian_block(const NarnnModel& model, const WindowedDataset& data, Eigen::Index start,
                         const BlockPass& p, Eigen::Ref<Eigen::MatrixXd> jb) {
    const auto n = static_cast<Eigen::Index>(model.topology.n_delays);
    const auto h = static_cast<Eigen::Index>(model.topology.n_hidden);
    const Eigen::Index rows = p.residual.size();
    const auto x = data.inputs.middleRows(start, rows);
    // dyhat/dz_h = w2_h f'(z_h)
    const Eigen::MatrixXd g = p.slope * model.w2.asDiagonal();
    for (Eigen::Index k = 0; k < h; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            jb.col(k * n + j) = -(g.col(k).array() * x.col(j).array()).matrix();
        }
    }
    jb.middleCols(h * n, h) = -g;
    jb.middleCols(h * n + h, h) = -p.hidden;
    jb.col(h * n + 2 * h).setConstant(-1.0);
}

}  // namespace

Eigen::VectorXd residuals(const NarnnModel& model, const WindowedDataset& data) {
    check_data(model, data);
    const Eigen::Index m = data.targets.size();
    Eigen::VectorXd e(m);
    for (Eigen::Index start = 0; start < m; start += kBlockRows) {
        const Eigen::Index rows = std::min(kBlockRows, m - start);
        e.segment(start, rows) = block_pass(model, data, start, rows, false).residual;
    }
    return e;
}

double sse(const NarnnModel& model, const WindowedDataset& data) {
    check_data(model, data);
    const Eigen::Index m = data.targets.size();
    double total = 0.0;
    for (Eigen::Index start = 0; start < m; start += kBlockRows) {
        const Eigen::Index rows = std::min(kBlockRows, m - start);
        total += block_pass(model, data, start, rows, false).residual.squaredNorm();
    }
    return total;
}

Eigen::MatrixXd jacobian(const NarnnModel& model, const WindowedDataset& data) {
    check_data(model, data);
    const Eigen::Index m = data.targets.size();
    const auto p = static_cast<Eigen::Index>(model.topology.parameter_count());
    Eigen::MatrixXd j(m, p);
    for (Eigen::Index start = 0; start < m; start += kBlockRows) {
        const Eigen::Index rows = std::min(kBlockRows, m - start);
        const BlockPass pass = block_pass(model, data, start, rows, true);
        fill_jacobian_block(model, data, start, pass, j.middleRows(start, rows));
    }
    return j;
}

NormalEquations normal_equations(const NarnnModel& model, const WindowedDataset& data) {
    check_data(model, data);
    const Eigen::Index m = data.targets.size();
    const auto p = static_cast<Eigen::Index>(model.topology.parameter_count());
    NormalEquations ne;
    ne.jtj = Eigen::MatrixXd::Zero(p, p);
    ne.jte = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd jb(std::min(kBlockRows, m), p);
    for (Eigen::Index start = 0; start < m; start += kBlockRows) {
        const Eigen::Index rows = std::min(kBlockRows, m - start);
        const BlockPass pass = block_pass(model, data, start, rows, true);
        auto block = jb.topRows(rows);
        fill_jacobian_block(model, data, start, pass, block);
        ne.jtj.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
        ne.jte.noalias() += block.transpose() * pass.residual;
        ne.sse += pass.residual.squaredNorm();
    }
    ne.jtj.triangularView<Eigen::StrictlyUpper>() = ne.jtj.transpose();
    return ne;
}

std::optional<Eigen::VectorXd> solve_damped(const Eigen::MatrixXd& jtj, const Eigen::VectorXd& jte,
                                            double lambda) {
    Eigen::MatrixXd a = jtj;
    a.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        return std::nullopt;
    }
    Eigen::VectorXd delta = llt.solve(jte);
    if (!delta.allFinite()) {
        return std::nullopt;
    }
    return delta;
}

std::optional<LmStep> lm_step(const NarnnModel& model, const NormalEquations& ne, double lambda) {
    auto delta = solve_damped(ne.jtj, ne.jte, lambda);
    if (!delta) {
        return std::nullopt;
    }
    LmStep step;
    step.candidate = model;
    step.candidate.set_parameters(model.parameters() - *delta);
    step.step_norm = delta->norm();
    step.delta = std::move(*delta);
    return step;
}

std::optional<LmStep> lm_step(const NarnnModel& model, const WindowedDataset& data, double lambda) {
    require(lambda >= 0.0, "lm_step: lambda must be >= 0");
    return lm_step(model, normal_equations(model, data), lambda);
}

std::pair<NarnnModel, TrainHistory> train(NarnnModel model, const WindowedDataset& train_data,
                                          const LmConfig& config) {
    config.validate();
    model.validate();
    require(train_data.size() >= 1, "train: empty training set");

    NormalEquations ne = normal_equations(model, train_data);
    if (!std::isfinite(ne.sse)) {
        throw training_error("train: initial SSE is not finite (" + csv::format(ne.sse) + ")");
    }

    TrainHistory history;
    double lambda = config.damping_init;
    while (true) {
        if (ne.sse <= config.goal_sse) {
            history.stop = StopReason::goal_reached;
            break;
        }
        const double grad = ne.jte.lpNorm<Eigen::Infinity>();
        if (grad < config.min_gradient) {
            history.stop = StopReason::gradient_small;
            break;
        }
        if (history.epochs.size() >= config.max_epochs) {
            history.stop = StopReason::max_epochs;
            break;
        }
        if (lambda > config.damping_max) {
            history.stop = StopReason::damping_ceiling;
            break;
        }

        EpochRecord rec;
        rec.sse_before = ne.sse;
        rec.lambda = lambda;
        rec.grad_norm = grad;
        rec.sse_after = std::numeric_limits<double>::infinity();

        auto step = lm_step(model, ne, lambda);
        if (step) {
            rec.sse_after = sse(step->candidate, train_data);
        }
        if (step && std::isfinite(rec.sse_after) && rec.sse_after < ne.sse) {
            rec.accepted = true;
            model = std::move(step->candidate);
            lambda *= config.damping_down;
            ne = normal_equations(model, train_data);
        } else {
            lambda *= config.damping_up;
        }
        history.epochs.push_back(rec);
    }
    return {std::move(model), std::move(history)};
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
    csv::write_header(out, {"epoch", "sse_before", "sse_after", "lambda", "accepted", "grad_norm"});
    for (std::size_t i = 0; i < history.epochs.size(); ++i) {
        const auto& r = history.epochs[i];
        (csv::Row() << i + 1 << r.sse_before << r.sse_after << r.lambda << r.accepted << r.grad_norm)
            .write(out);
    }
}

}  // namespace narrm
