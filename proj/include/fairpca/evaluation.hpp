#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fairpca/objectives.hpp"
#include "fairpca/types.hpp"

namespace fairpca {

// Quality and fairness summary of a solved subspace, with a plain-PCA
// baseline alongside.
struct FairnessReport {
  std::vector<double> per_group_losses;
  std::vector<double> per_group_disparity;
  double avg_disparity = 0.0;  // mean of the per-group disparity errors
  // Mean absolute pairwise disparity error over unordered group pairs --
  // the gap a fair subspace drives to zero.
  double avg_pairwise_disparity = 0.0;
  double total_loss = 0.0;
  double baseline_total_loss = 0.0;
  double baseline_avg_disparity = 0.0;
  double baseline_avg_pairwise_disparity = 0.0;
  Eigen::Index target_dim = 0;
};

// Mean |E_i - E_j| over unordered pairs (0 for a single group).
inline double mean_pairwise_gap(const std::vector<double>& disparities) {
  const size_t k = disparities.size();
  if (k < 2) return 0.0;
  double sum = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i + 1 < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      sum += std::abs(disparities[i] - disparities[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

inline FairnessReport fairness_report(const FairPcaProblem& problem,
                                      const Subspace& u_fair,
                                      const Subspace& u_baseline) {
  if (u_fair.dim() != problem.dim() ||
      u_fair.target_dim() != problem.target_dim() ||
      u_baseline.dim() != problem.dim() ||
      u_baseline.target_dim() != problem.target_dim()) {
    throw invalid_input_error("fairness_report: subspace shape mismatch");
  }
  FairnessReport report;
  report.target_dim = problem.target_dim();
  report.total_loss = reconstruction_loss(problem.global_gram(),
                                          problem.total_energy(),
                                          u_fair.basis());
  report.baseline_total_loss = reconstruction_loss(problem.global_gram(),
                                                   problem.total_energy(),
                                                   u_baseline.basis());
  double sum = 0.0, baseline_sum = 0.0;
  std::vector<double> baseline_disparity;
  for (Eigen::Index i = 0; i < problem.group_count(); ++i) {
    report.per_group_losses.push_back(group_loss(problem, i, u_fair.basis()));
    const double e = disparity_error(problem, i, u_fair.basis());
    report.per_group_disparity.push_back(e);
    sum += e;
    baseline_disparity.push_back(disparity_error(problem, i, u_baseline.basis()));
    baseline_sum += baseline_disparity.back();
  }
  report.avg_disparity = sum / static_cast<double>(problem.group_count());
  report.baseline_avg_disparity =
      baseline_sum / static_cast<double>(problem.group_count());
  report.avg_pairwise_disparity = mean_pairwise_gap(report.per_group_disparity);
  report.baseline_avg_pairwise_disparity = mean_pairwise_gap(baseline_disparity);
  return report;
}

// Flat key-value serialization, one metric per line.
inline void write_report_kv(std::ostream& os, const FairnessReport& report,
                            const std::vector<std::string>& group_names) {
  os << std::setprecision(17);
  os << "target_dim " << report.target_dim << "\n";
  os << "total_loss " << report.total_loss << "\n";
  os << "baseline_total_loss " << report.baseline_total_loss << "\n";
  os << "avg_disparity " << report.avg_disparity << "\n";
  os << "baseline_avg_disparity " << report.baseline_avg_disparity << "\n";
  os << "avg_pairwise_disparity " << report.avg_pairwise_disparity << "\n";
  os << "baseline_avg_pairwise_disparity "
     << report.baseline_avg_pairwise_disparity << "\n";
  for (std::size_t i = 0; i < report.per_group_losses.size(); ++i) {
    const std::string name =
        i < group_names.size() ? group_names[i] : "group" + std::to_string(i);
    os << "group_loss." << name << " " << report.per_group_losses[i] << "\n";
    os << "group_disparity." << name << " " << report.per_group_disparity[i]
       << "\n";
  }
}

struct ClassifierConfig {
  int epochs = 50;
  double regularization = 1e-4;
  std::uint64_t seed = 0;
};

// Linear decision function w'z + b on the projected features.
struct ClassifierModel {
  Vector weights;
  double bias = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;
  double regularization = 0.0;
};

inline double decision_value(const ClassifierModel& model, const Vector& z) {
  return model.weights.dot(z) + model.bias;
}

inline int predict(const ClassifierModel& model, const Vector& z) {
  return decision_value(model, z) >= 0.0 ? 1 : -1;
}

namespace detail {

inline double hinge_objective(const Matrix& z, const std::vector<int>& y,
                              const Vector& w, double b, double reg) {
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double margin =
        static_cast<double>(y[static_cast<std::size_t>(i)]) *
        (z.row(i).dot(w) + b);
    hinge += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * reg * (w.squaredNorm() + b * b) +
         hinge / static_cast<double>(z.rows());
}

}  // namespace detail

// L2-regularized hinge loss by deterministic per-sample subgradient
// descent with step 1/(reg * t); the bias rides along as a regularized
// constant feature, which keeps the 1/(reg t) step schedule sound.
// Features are z-scored internally and the scaler is folded back into the
// returned weights, so the model applies to raw projected features. Keeps
// the best iterate over epoch checkpoints (the zero model included), so
// the training objective never exceeds the zero model's.
inline ClassifierModel train_linear_classifier(const Matrix& z,
                                               const std::vector<int>& y,
                                               const ClassifierConfig& config = {}) {
  const Eigen::Index n = z.rows();
  const Eigen::Index r = z.cols();
  if (n < 2 || static_cast<std::size_t>(n) != y.size()) {
    throw invalid_input_error("train_linear_classifier: need n >= 2 labels");
  }
  bool pos = false, neg = false;
  for (int label : y) {
    if (label == 1) pos = true;
    else if (label == -1) neg = true;
    else throw invalid_input_error("train_linear_classifier: labels must be +-1");
  }
  if (!pos || !neg) {
    throw invalid_input_error("train_linear_classifier: single-class labels");
  }
  if (config.epochs < 1 || !(config.regularization > 0.0)) {
    throw invalid_input_error("train_linear_classifier: bad config");
  }

  Vector mean(r), stddev(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    mean[j] = z.col(j).mean();
    const double var = (z.col(j).array() - mean[j]).square().mean();
    stddev[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Matrix zs = (z.rowwise() - mean.transpose()).array().rowwise() /
              stddev.transpose().array();

  const double reg = config.regularization;
  Vector w = Vector::Zero(r);
  double b = 0.0;
  Vector best_w = w;
  double best_b = b;
  double best_obj = detail::hinge_objective(zs, y, w, b, reg);

  std::mt19937_64 rng(config.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    for (Eigen::Index idx : order) {
      ++t;
      const double eta = 1.0 / (reg * static_cast<double>(t));
      const double label = static_cast<double>(y[static_cast<std::size_t>(idx)]);
      const double margin = label * (zs.row(idx).dot(w) + b);
      w *= (1.0 - eta * reg);
      b *= (1.0 - eta * reg);
      if (margin < 1.0) {
        w += eta * label * zs.row(idx).transpose();
        b += eta * label;
      }
    }
    const double obj = detail::hinge_objective(zs, y, w, b, reg);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }
  }

  ClassifierModel model;
  model.weights = (best_w.array() / stddev.array()).matrix();
  model.bias = best_b - (best_w.array() * mean.array() / stddev.array()).sum();
  model.epochs = config.epochs;
  model.seed = config.seed;
  model.regularization = config.regularization;
  return model;
}

struct GroupMetrics {
  std::vector<double> accuracy;  // per group
  std::vector<double> tpr;       // per group
  std::vector<Eigen::Index> counts;
  std::vector<Eigen::Index> positives;
  double overall_accuracy = 0.0;
};

// Per-group accuracy and true-positive rate. Groups are 0..max_id and
// must all be non-empty. A group without positive samples reports TPR 0.
inline GroupMetrics group_metrics(const ClassifierModel& model,
                                  const Matrix& z, const std::vector<int>& y,
                                  const std::vector<int>& group_ids) {
  const Eigen::Index n = z.rows();
  if (static_cast<std::size_t>(n) != y.size() ||
      y.size() != group_ids.size() || n == 0) {
    throw invalid_input_error("group_metrics: length mismatch");
  }
  int k = 0;
  for (int g : group_ids) k = std::max(k, g + 1);
  GroupMetrics metrics;
  metrics.counts.assign(static_cast<std::size_t>(k), 0);
  metrics.positives.assign(static_cast<std::size_t>(k), 0);
  std::vector<Eigen::Index> correct(static_cast<std::size_t>(k), 0);
  std::vector<Eigen::Index> true_pos(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t g = static_cast<std::size_t>(group_ids[static_cast<std::size_t>(i)]);
    const int label = y[static_cast<std::size_t>(i)];
    const int pred = predict(model, z.row(i).transpose());
    ++metrics.counts[g];
    if (pred == label) ++correct[g];
    if (label == 1) {
      ++metrics.positives[g];
      if (pred == 1) ++true_pos[g];
    }
  }
  Eigen::Index total_correct = 0;
  for (std::size_t g = 0; g < static_cast<std::size_t>(k); ++g) {
    if (metrics.counts[g] == 0) {
      throw std::out_of_range("group_metrics: empty group " + std::to_string(g));
    }
    metrics.accuracy.push_back(static_cast<double>(correct[g]) /
                               static_cast<double>(metrics.counts[g]));
    metrics.tpr.push_back(metrics.positives[g] > 0
                              ? static_cast<double>(true_pos[g]) /
                                    static_cast<double>(metrics.positives[g])
                              : 0.0);
    total_correct += correct[g];
  }
  metrics.overall_accuracy =
      static_cast<double>(total_correct) / static_cast<double>(n);
  return metrics;
}

// Difference of equality of opportunity |TP_1 - TP_2| for a binary
// sensitive feature.
inline double deo(const ClassifierModel& model, const Matrix& z,
                  const std::vector<int>& y,
                  const std::vector<int>& group_ids) {
  const Eigen::Index n = z.rows();
  if (static_cast<std::size_t>(n) != y.size() ||
      y.size() != group_ids.size() || n == 0) {
    throw invalid_input_error("deo: length mismatch");
  }
  std::set<int> groups(group_ids.begin(), group_ids.end());
  if (groups.size() != 2) {
    throw invalid_input_error("deo: defined for exactly 2 groups, got " +
                              std::to_string(groups.size()));
  }
  std::map<int, Eigen::Index> positives, true_pos;
  for (int g : groups) positives[g] = true_pos[g] = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[static_cast<std::size_t>(i)] != 1) continue;
    const int g = group_ids[static_cast<std::size_t>(i)];
    ++positives[g];
    if (predict(model, z.row(i).transpose()) == 1) ++true_pos[g];
  }
  std::vector<double> rates;
  for (int g : groups) {
    if (positives[g] == 0) {
      throw invalid_input_error("deo: group " + std::to_string(g) +
                                " has no positive samples (rate undefined)");
    }
    rates.push_back(static_cast<double>(true_pos[g]) /
                    static_cast<double>(positives[g]));
  }
  return std::abs(rates[0] - rates[1]);
}

}  // namespace fairpca
