#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "arvote/corpus.hpp"
#include "arvote/prediction.hpp"

namespace arvote {

/// counts[gold][predicted], indexed by label-space position.
struct ConfusionMatrix {
  LabelSpace labelspace = LabelSpace::for_task(Task::kTask1a);
  std::array<std::array<std::size_t, 2>, 2> counts{};
  std::size_t n = 0;

  std::size_t trace() const { return counts[0][0] + counts[1][1]; }
};

/// Joins gold labels and predictions by id. Throws DataError when either
/// side has ids the other lacks, when gold is unlabeled, or when a predicted
/// label is outside the label space.
ConfusionMatrix confusion(const Dataset& gold, const PredictionSet& pred);

struct ClassScores {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct MetricReport {
  std::string model_name;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<ClassScores> per_class;
  std::size_t n = 0;
};

/// 2*sum(TP) / (2*sum(TP) + sum(FP) + sum(FN)); equals accuracy for
/// single-label data. Throws DataError when n == 0.
double micro_f1(const ConfusionMatrix& cm);
/// Unweighted mean of per-class F1; a class with precision + recall == 0
/// scores 0.
double macro_f1(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);
std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm);

MetricReport metric_report(const ConfusionMatrix& cm, std::string model_name);

/// One report per prediction set, in the given order.
std::vector<MetricReport> score_report(const Dataset& gold, std::span<const PredictionSet> preds);

// Rendering

struct TableRow {
  std::string model;
  double score = 0.0;
};

/// Score rounded to 3 decimals, e.g. "0.742".
std::string format_score(double score);

/// Aligned plain-text table with a header row.
std::string render_text_table(const std::vector<TableRow>& rows, const std::string& score_header = "Micro F1");
std::string render_csv_table(const std::vector<TableRow>& rows, const std::string& score_header = "Micro F1");

/// Full metric breakdown, one line per report.
std::string render_metric_reports(const std::vector<MetricReport>& reports);

}  // namespace arvote
