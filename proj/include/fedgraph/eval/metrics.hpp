#pragma once

#include <string>
#include <vector>

#include "fedgraph/types.hpp"

namespace fedgraph::eval {

// Fraction of positions where prediction equals truth.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

// counts(t, p) = number of samples with true class t predicted as p.
Eigen::MatrixXi confusion(const std::vector<int>& pred,
                          const std::vector<int>& truth, int classes);

// Unweighted mean of per-class F1 over all `classes` labels; a class with
// zero precision+recall (including one absent from both vectors)
// contributes 0.
double macro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                int classes);

// Mean of per-class F1 weighted by each class's share of the truth
// labels, so classes absent from truth carry no weight.
double weighted_f1(const std::vector<int>& pred,
                   const std::vector<int>& truth, int classes);

// F1 of the globally pooled counts. With one label per sample the pooled
// precision and recall both equal accuracy, so this equals accuracy.
double micro_f1(const std::vector<int>& pred, const std::vector<int>& truth,
                int classes);

enum class F1Average { Macro, Micro, Weighted };

// "macro", "micro" or "weighted"; anything else raises a ParamError.
F1Average parse_f1_average(const std::string& name);
const char* f1_average_name(F1Average average);

double f1_score(const std::vector<int>& pred, const std::vector<int>& truth,
                int classes, F1Average average);

// 1 - acc_dp / acc_nodp. Undefined when the reference accuracy is zero.
double utility_loss(double acc_dp, double acc_nodp);

}  // namespace fedgraph::eval
