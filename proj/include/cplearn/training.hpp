#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cplearn/cp_model.hpp"
#include "cplearn/data.hpp"
#include "cplearn/regularizer.hpp"

namespace cplearn {

enum class Loss { MSE, LogisticBCE };
enum class Metric { MSE, AUC, Accuracy };
enum class OptimizerKind { SGD, Adam };
enum class InitScheme { RandomGaussian, LinearModel };

std::string to_string(Loss loss);
Loss loss_from_string(const std::string& name);
std::string to_string(Metric metric);
Metric metric_from_string(const std::string& name);

double loss_value(Loss loss, double prediction, double target);
double loss_derivative(Loss loss, double prediction, double target);

struct TrainConfig {
  std::size_t rank = 1;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  Loss loss = Loss::MSE;
  RegularizerSpec regularizer;
  InitScheme init = InitScheme::RandomGaussian;
  double init_sigma = 0.2;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

/// Coefficients of a linear (or logistic) model over the transformed
/// feature set: bias plus one weight per feature and transform index
/// (power j for polynomial maps, category j for categorical maps).
struct LinearSolution {
  double bias = 0.0;
  std::vector<std::vector<double>> weights;
};

struct EpochStats {
  double train_loss = 0.0;       // mean mini-batch loss, penalty included
  double validation_loss = 0.0;  // pure data loss on the validation split
  double seconds = 0.0;
};

struct FitReport {
  std::vector<EpochStats> epochs;
};

/// Factors filled with i.i.d. N(0, sigma^2) entries; deterministic per seed.
CpModel init_random(const FeatureMapSpec& map_spec, std::size_t rank, double sigma,
                    std::uint64_t seed);

/// Factor construction that makes the CP predictor reproduce the linear
/// model exactly: column n of factor n carries bias/N in the constant row
/// and the feature's weights below, columns 1..N of other factors carry 1 in
/// the constant row, everything else is 0. Requires rank >= N. Weight lists
/// shorter than d_n - 1 are zero-padded (linear model trained on a subset of
/// the transformed features).
CpModel init_linear(const LinearSolution& lin, const FeatureMapSpec& map_spec,
                    std::size_t rank);

/// The linear model's own prediction: bias + sum of weights times
/// transformed features.
double linear_predict(const LinearSolution& lin, const FeatureMapSpec& map_spec,
                      std::span<const double> x);

/// Fit the linear model on the transformed feature set of `map_spec`:
/// normal equations with 1e-8 damping for MSE, gradient descent with
/// backtracking to gradient norm <= 1e-6 (or an iteration cap) for BCE.
LinearSolution fit_linear_baseline(const Dataset& data, const FeatureMapSpec& map_spec,
                                   Loss loss);

/// Initial model per config.init: random Gaussian or the linear-model
/// construction (baseline fitted on `train`).
CpModel make_initial_model(const FeatureMapSpec& map_spec, const TrainConfig& config,
                           const Dataset& train);

/// Mini-batch first-order training of the factor matrices in place. The
/// per-batch objective is mean data loss plus the regularization penalty;
/// penalty gradients are applied every step. Deterministic for a fixed
/// seed. Throws NumericError with the epoch/batch position if the loss
/// turns non-finite. `validation` may be empty (validation_loss reported
/// as NaN).
FitReport fit(CpModel& model, const Dataset& train, const Dataset& validation,
              const TrainConfig& config);

double evaluate(const CpModel& model, const Dataset& data, Metric metric);

/// Metric on precomputed scores; AUC is the Mann-Whitney statistic with
/// ties resolved by average rank and requires both classes present.
double evaluate_scores(const std::vector<double>& scores, const std::vector<double>& targets,
                       Metric metric);

}  // namespace cplearn
