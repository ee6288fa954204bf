#include "fedgraph/eval/metrics.hpp"

#include <string>

#include "fedgraph/errors.hpp"

namespace fedgraph::eval {

namespace {

void check_pair(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw ShapeError("metrics: " + std::to_string(pred.size()) +
                     " predictions for " + std::to_string(truth.size()) +
                     " labels");
  if (pred.empty()) throw ParamError("metrics: empty label vectors");
}

}  // namespace

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  check_pair(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

Eigen::MatrixXi confusion(const std::vector<int>& pred,
                          const std::vector<int>& truth, int classes) {
  check_pair(pred, truth);
  if (classes < 1) throw ParamError("confusion: need >= 1 class");
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(classes, classes);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= classes || pred[i] < 0 ||
        pred[i] >= classes)
      throw IndexError("confusion: label pair (" + std::to_string(truth[i]) +
                       ", " + std::to_string(pred[i]) + ") outside [0, " +
                       std::to_string(classes) + ")");
    counts(truth[i], pred[i]) += 1;
  }
  return counts;
}

namespace {

double class_f1(const Eigen::MatrixXi& counts, int c) {
  double tp = counts(c, c);
  double fp = counts.col(c).sum() - tp;
  double fn = counts.row(c).sum() - tp;
  double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                int classes) {
  Eigen::MatrixXi counts = confusion(pred, truth, classes);
  double total = 0.0;
  for (int c = 0; c < classes; ++c) total += class_f1(counts, c);
  return total / classes;
}

double weighted_f1(const std::vector<int>& pred,
                   const std::vector<int>& truth, int classes) {
  Eigen::MatrixXi counts = confusion(pred, truth, classes);
  double total = 0.0;
  for (int c = 0; c < classes; ++c)
    total += static_cast<double>(counts.row(c).sum()) * class_f1(counts, c);
  return total / static_cast<double>(counts.sum());
}

double micro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                int classes) {
  Eigen::MatrixXi counts = confusion(pred, truth, classes);
  return static_cast<double>(counts.trace()) /
         static_cast<double>(counts.sum());
}

F1Average parse_f1_average(const std::string& name) {
  if (name == "macro") return F1Average::Macro;
  if (name == "micro") return F1Average::Micro;
  if (name == "weighted") return F1Average::Weighted;
  throw ParamError("unknown F1 average '" + name +
                   "', expected macro, micro or weighted");
}

const char* f1_average_name(F1Average average) {
  switch (average) {
    case F1Average::Macro: return "macro";
    case F1Average::Micro: return "micro";
    case F1Average::Weighted: return "weighted";
  }
  throw ParamError("invalid F1 average value");
}

double f1_score(const std::vector<int>& pred, const std::vector<int>& truth,
                int classes, F1Average average) {
  switch (average) {
    case F1Average::Macro: return macro_f1(pred, truth, classes);
    case F1Average::Micro: return micro_f1(pred, truth, classes);
    case F1Average::Weighted: return weighted_f1(pred, truth, classes);
  }
  throw ParamError("invalid F1 average value");
}

double utility_loss(double acc_dp, double acc_nodp) {
  if (!(acc_nodp > 0.0))
    throw MetricError(
        "utility_loss: undefined for non-positive reference accuracy " +
        std::to_string(acc_nodp));
  return 1.0 - acc_dp / acc_nodp;
}

}  // namespace fedgraph::eval
