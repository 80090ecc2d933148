#include "cplearn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "cplearn/errors.hpp"

namespace cplearn {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 round
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Transformed feature columns of the linear baseline, one block per feature:
// powers x^j for polynomial kinds, category indicators for the categorical
// kind. The block for feature n has local_dims[n] - 1 columns.
void fill_transformed(const FeatureMapSpec& map_spec, std::span<const double> x,
                      std::vector<double>& out) {
  out.clear();
  for (std::size_t n = 0; n < map_spec.feature_count(); ++n) {
    const std::size_t block = map_spec.local_dims[n] - 1;
    if (map_spec.kind == MapKind::Categorical) {
      const auto idx = static_cast<std::size_t>(x[n]);
      if (x[n] < 0.0 || std::nearbyint(x[n]) != x[n] || idx >= block) {
        throw InputError("categorical feature " + std::to_string(n) +
                         ": value " + std::to_string(x[n]) + " is not a category index");
      }
      for (std::size_t j = 0; j < block; ++j) out.push_back(j == idx ? 1.0 : 0.0);
    } else {
      double p = 1.0;
      for (std::size_t j = 0; j < block; ++j) {
        p *= x[n];
        out.push_back(p);
      }
    }
  }
}

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t t = 0;
};

double mean_data_loss(const CpModel& model, const Dataset& data, Loss loss) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += loss_value(loss, predict(model, data.rows[i]), data.targets[i]);
  }
  return total / static_cast<double>(data.size());
}

}  // namespace

std::string to_string(Loss loss) { return loss == Loss::MSE ? "mse" : "bce"; }

Loss loss_from_string(const std::string& name) {
  if (name == "mse") return Loss::MSE;
  if (name == "bce") return Loss::LogisticBCE;
  throw ConfigError("unknown loss '" + name + "'");
}

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::MSE:
      return "mse";
    case Metric::AUC:
      return "auc";
    case Metric::Accuracy:
      return "accuracy";
  }
  return "?";
}

Metric metric_from_string(const std::string& name) {
  if (name == "mse") return Metric::MSE;
  if (name == "auc") return Metric::AUC;
  if (name == "accuracy") return Metric::Accuracy;
  throw ConfigError("unknown metric '" + name + "'");
}

double loss_value(Loss loss, double prediction, double target) {
  if (loss == Loss::MSE) {
    const double d = prediction - target;
    return d * d;
  }
  return softplus(prediction) - target * prediction;
}

double loss_derivative(Loss loss, double prediction, double target) {
  if (loss == Loss::MSE) return 2.0 * (prediction - target);
  return sigmoid(prediction) - target;
}

void TrainConfig::validate() const {
  if (rank < 1) throw ConfigError("train config: rank must be at least 1");
  if (batch_size < 1) throw ConfigError("train config: batch size must be at least 1");
  if (learning_rate <= 0.0) throw ConfigError("train config: learning rate must be positive");
  if (init == InitScheme::RandomGaussian && init_sigma <= 0.0) {
    throw ConfigError("train config: sigma must be positive for random init");
  }
  regularizer.validate();
}

CpModel init_random(const FeatureMapSpec& map_spec, std::size_t rank, double sigma,
                    std::uint64_t seed) {
  map_spec.validate();
  if (rank < 1) throw ConfigError("init_random: rank must be at least 1");
  if (sigma <= 0.0) throw ConfigError("init_random: sigma must be positive");
  CpModel model;
  model.map_spec = map_spec;
  model.rank = rank;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (std::size_t d : map_spec.local_dims) {
    Matrix a(d, rank);
    for (double& v : a.data()) v = gauss(rng);
    model.factors.push_back(std::move(a));
  }
  return model;
}

CpModel init_linear(const LinearSolution& lin, const FeatureMapSpec& map_spec,
                    std::size_t rank) {
  map_spec.validate();
  if (map_spec.kind == MapKind::NormalizedPolynomial) {
    throw ConfigError(
        "linear init needs a map with a constant leading entry; the normalized "
        "polynomial map has none (use random init)");
  }
  const std::size_t n_feat = map_spec.feature_count();
  if (rank < n_feat) {
    throw ConfigError("linear init requires rank >= feature count (" +
                      std::to_string(rank) + " < " + std::to_string(n_feat) +
                      "): each feature's weights occupy their own column");
  }
  if (lin.weights.size() != n_feat) {
    throw ValidationError("linear solution covers " + std::to_string(lin.weights.size()) +
                          " features, map has " + std::to_string(n_feat));
  }

  CpModel model;
  model.map_spec = map_spec;
  model.rank = rank;
  for (std::size_t n = 0; n < n_feat; ++n) {
    const std::size_t dim = map_spec.local_dims[n];
    if (lin.weights[n].size() > dim - 1) {
      throw ValidationError("linear solution for feature " + std::to_string(n) + " has " +
                            std::to_string(lin.weights[n].size()) +
                            " weights, local dimension allows " + std::to_string(dim - 1));
    }
    Matrix a(dim, rank);
    for (std::size_t r = 0; r < n_feat; ++r) {
      a(0, r) = (r == n) ? lin.bias / static_cast<double>(n_feat) : 1.0;
    }
    for (std::size_t j = 0; j < lin.weights[n].size(); ++j) {
      a(j + 1, n) = lin.weights[n][j];
    }
    model.factors.push_back(std::move(a));
  }
  return model;
}

double linear_predict(const LinearSolution& lin, const FeatureMapSpec& map_spec,
                      std::span<const double> x) {
  if (x.size() != map_spec.feature_count()) {
    throw InputError("linear_predict: feature count mismatch");
  }
  std::vector<double> transformed;
  fill_transformed(map_spec, x, transformed);
  double y = lin.bias;
  std::size_t col = 0;
  for (std::size_t n = 0; n < lin.weights.size(); ++n) {
    const std::size_t block = map_spec.local_dims[n] - 1;
    for (std::size_t j = 0; j < block; ++j, ++col) {
      if (j < lin.weights[n].size()) y += lin.weights[n][j] * transformed[col];
    }
  }
  return y;
}

LinearSolution fit_linear_baseline(const Dataset& data, const FeatureMapSpec& map_spec,
                                   Loss loss) {
  if (data.size() == 0) throw DataError("fit_linear_baseline: empty dataset");
  map_spec.validate();
  if (map_spec.feature_count() != data.feature_count()) {
    throw DataError("fit_linear_baseline: map covers " +
                    std::to_string(map_spec.feature_count()) + " features, dataset has " +
                    std::to_string(data.feature_count()));
  }

  std::size_t p = 1;  // intercept
  for (std::size_t d : map_spec.local_dims) p += d - 1;

  const std::size_t n = data.size();
  std::vector<std::vector<double>> design(n);
  std::vector<double> transformed;
  for (std::size_t i = 0; i < n; ++i) {
    fill_transformed(map_spec, data.rows[i], transformed);
    design[i].reserve(p);
    design[i].push_back(1.0);
    design[i].insert(design[i].end(), transformed.begin(), transformed.end());
  }

  Vector w(p, 0.0);
  if (loss == Loss::MSE) {
    // Normal equations with tiny diagonal damping.
    Matrix gram_xx(p, p);
    Vector xty(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < p; ++a) {
        const double xa = design[i][a];
        if (xa == 0.0) continue;
        xty[a] += xa * data.targets[i];
        for (std::size_t b = 0; b < p; ++b) gram_xx(a, b) += xa * design[i][b];
      }
    }
    for (std::size_t a = 0; a < p; ++a) gram_xx(a, a) += 1e-8;
    w = solve_linear_system(std::move(gram_xx), std::move(xty));
  } else {
    // Gradient descent with Armijo backtracking until the gradient norm
    // drops to 1e-6 or the iteration cap is hit.
    const std::size_t max_iters = 10000;
    const double inv_n = 1.0 / static_cast<double>(n);
    auto objective = [&](const Vector& wv) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double z = 0.0;
        for (std::size_t a = 0; a < p; ++a) z += design[i][a] * wv[a];
        total += loss_value(Loss::LogisticBCE, z, data.targets[i]);
      }
      return total * inv_n;
    };
    double step = 1.0;
    double obj = objective(w);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
      Vector grad(p, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double z = 0.0;
        for (std::size_t a = 0; a < p; ++a) z += design[i][a] * w[a];
        const double g = loss_derivative(Loss::LogisticBCE, z, data.targets[i]) * inv_n;
        for (std::size_t a = 0; a < p; ++a) grad[a] += g * design[i][a];
      }
      const double gnorm = norm(grad);
      if (gnorm <= 1e-6) break;
      step = std::min(step * 2.0, 1e6);
      Vector trial(p);
      while (true) {
        for (std::size_t a = 0; a < p; ++a) trial[a] = w[a] - step * grad[a];
        const double trial_obj = objective(trial);
        if (trial_obj <= obj - 1e-4 * step * gnorm * gnorm) {
          w = trial;
          obj = trial_obj;
          break;
        }
        step *= 0.5;
        if (step < 1e-16) {
          w = trial;
          obj = trial_obj;
          break;
        }
      }
    }
  }

  LinearSolution lin;
  lin.bias = w[0];
  std::size_t col = 1;
  for (std::size_t f = 0; f < map_spec.feature_count(); ++f) {
    const std::size_t block = map_spec.local_dims[f] - 1;
    lin.weights.emplace_back(w.begin() + col, w.begin() + col + block);
    col += block;
  }
  return lin;
}

CpModel make_initial_model(const FeatureMapSpec& map_spec, const TrainConfig& config,
                           const Dataset& train) {
  config.validate();
  if (config.init == InitScheme::LinearModel) {
    const LinearSolution lin = fit_linear_baseline(train, map_spec, config.loss);
    return init_linear(lin, map_spec, config.rank);
  }
  return init_random(map_spec, config.rank, config.init_sigma, config.seed);
}

FitReport fit(CpModel& model, const Dataset& train, const Dataset& validation,
              const TrainConfig& config) {
  using clock = std::chrono::steady_clock;
  model.validate();
  config.validate();
  if (train.size() == 0) throw DataError("fit: empty training set");

  const std::size_t n = train.size();
  const std::size_t n_feat = model.factors.size();

  std::vector<Matrix> grad_accum;
  grad_accum.reserve(n_feat);
  for (const Matrix& a : model.factors) grad_accum.emplace_back(a.rows(), a.cols());

  AdamState adam;
  if (config.optimizer == OptimizerKind::Adam) {
    for (const Matrix& a : model.factors) {
      adam.m.emplace_back(a.rows(), a.cols());
      adam.v.emplace_back(a.rows(), a.cols());
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  FitReport report;
  report.epochs.reserve(config.epochs);
  PredictionGradient sample_grad;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = clock::now();
    if (config.shuffle) {
      std::mt19937_64 rng(mix_seed(config.seed, epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(begin + config.batch_size, n);
      const double inv_s = 1.0 / static_cast<double>(end - begin);

      for (Matrix& g : grad_accum) std::fill(g.data().begin(), g.data().end(), 0.0);
      double data_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = order[k];
        const double f = predict_with_gradient(model, train.rows[i], sample_grad);
        data_loss += loss_value(config.loss, f, train.targets[i]);
        const double scale = loss_derivative(config.loss, f, train.targets[i]) * inv_s;
        for (std::size_t m = 0; m < n_feat; ++m) {
          auto acc = grad_accum[m].data();
          const auto g = sample_grad[m].data();
          for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += scale * g[e];
        }
      }
      const double batch_loss = data_loss * inv_s + penalty(model, config.regularizer);
      if (!std::isfinite(batch_loss)) {
        throw NumericError("fit: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batches));
      }
      if (config.regularizer.kind != RegKind::None) {
        const PredictionGradient pg = penalty_gradient(model, config.regularizer);
        for (std::size_t m = 0; m < n_feat; ++m) {
          auto acc = grad_accum[m].data();
          const auto g = pg[m].data();
          for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += g[e];
        }
      }

      if (config.optimizer == OptimizerKind::SGD) {
        for (std::size_t m = 0; m < n_feat; ++m) {
          auto params = model.factors[m].data();
          const auto g = grad_accum[m].data();
          for (std::size_t e = 0; e < params.size(); ++e) {
            params[e] -= config.learning_rate * g[e];
          }
        }
      } else {
        ++adam.t;
        const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(adam.t));
        const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(adam.t));
        for (std::size_t m = 0; m < n_feat; ++m) {
          auto params = model.factors[m].data();
          const auto g = grad_accum[m].data();
          auto mom = adam.m[m].data();
          auto vel = adam.v[m].data();
          for (std::size_t e = 0; e < params.size(); ++e) {
            mom[e] = config.adam_beta1 * mom[e] + (1.0 - config.adam_beta1) * g[e];
            vel[e] = config.adam_beta2 * vel[e] + (1.0 - config.adam_beta2) * g[e] * g[e];
            const double m_hat = mom[e] / bc1;
            const double v_hat = vel[e] / bc2;
            params[e] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
          }
        }
      }

      loss_sum += batch_loss;
      ++batches;
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(batches);
    stats.validation_loss = validation.size() == 0
                                ? std::numeric_limits<double>::quiet_NaN()
                                : mean_data_loss(model, validation, config.loss);
    stats.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    report.epochs.push_back(stats);
  }
  return report;
}

double evaluate(const CpModel& model, const Dataset& data, Metric metric) {
  if (data.size() == 0) throw DataError("evaluate: empty dataset");
  std::vector<double> scores;
  scores.reserve(data.size());
  for (const auto& row : data.rows) scores.push_back(predict(model, row));
  return evaluate_scores(scores, data.targets, metric);
}

double evaluate_scores(const std::vector<double>& scores, const std::vector<double>& targets,
                       Metric metric) {
  if (scores.size() != targets.size() || scores.empty()) {
    throw InputError("evaluate: scores and targets must be non-empty and equal length");
  }
  const std::size_t n = scores.size();
  switch (metric) {
    case Metric::MSE: {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = scores[i] - targets[i];
        total += d * d;
      }
      return total / static_cast<double>(n);
    }
    case Metric::Accuracy: {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if ((scores[i] >= 0.5) == (targets[i] >= 0.5)) ++hits;
      }
      return static_cast<double>(hits) / static_cast<double>(n);
    }
    case Metric::AUC: {
      // Mann-Whitney statistic via average ranks.
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
      std::vector<double> rank(n, 0.0);
      std::size_t i = 0;
      while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
        i = j + 1;
      }
      double pos_rank_sum = 0.0;
      std::size_t n_pos = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (targets[k] >= 0.5) {
          pos_rank_sum += rank[k];
          ++n_pos;
        }
      }
      const std::size_t n_neg = n - n_pos;
      if (n_pos == 0 || n_neg == 0) {
        throw DataError("auc: both classes must be present");
      }
      const double u = pos_rank_sum - static_cast<double>(n_pos) *
                                          (static_cast<double>(n_pos) + 1.0) / 2.0;
      return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    }
  }
  throw InputError("evaluate: unknown metric");
}

}  // namespace cplearn
