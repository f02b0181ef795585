#ifndef URBANFUSE_EVALUATION_HPP
#define URBANFUSE_EVALUATION_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace urbanfuse {

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t num_classes)
      : k_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const { return k_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * k_ + predicted); }
  void add(std::size_t truth, std::size_t predicted) { ++counts_.at(truth * k_ + predicted); }

  std::uint64_t total() const;
  std::uint64_t row_total(std::size_t truth) const;
  std::uint64_t trace() const;

  /// Row percentages (cell / row total * 100); empty rows yield nullopt cells.
  std::vector<std::optional<double>> row_normalized() const;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> counts_;
};

struct EvaluationReport {
  double oa = 0.0;  // percent
  double aa = 0.0;  // percent, over classes with at least one sample
  std::vector<std::optional<double>> producer_accuracy;  // nullopt: class absent from the ground truth
  ConfusionMatrix confusion;
  std::size_t n_eval = 0;
};

EvaluationReport evaluate(std::span<const std::size_t> predictions,
                          std::span<const std::size_t> ground_truth, std::size_t num_classes);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation; 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct ReportSummary {
  std::size_t splits = 0;
  std::size_t num_classes = 0;
  MeanStd oa;
  MeanStd aa;
  std::vector<std::optional<MeanStd>> producer_accuracy;
  /// Mean of the per-split row-normalized confusion matrices, row-major.
  /// A row is averaged over the splits where it is nonempty.
  std::vector<std::optional<double>> confusion_percent;
};

ReportSummary average_reports(std::span<const EvaluationReport> reports);

/// Line-oriented "key = value" text.
void write_report_text(const EvaluationReport& report, std::span<const std::string> class_names,
                       const std::filesystem::path& path);
void write_summary_text(const ReportSummary& summary, std::span<const std::string> class_names,
                        const std::filesystem::path& path);

/// One header row and one data row: n_eval, oa, aa, per-class accuracies,
/// then the row-normalized confusion flattened row-major. Absent values are "nan".
void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path);
void write_summary_csv(const ReportSummary& summary, const std::filesystem::path& path);

/// K x K table of row percentages with a class-name header row.
void write_confusion_csv(std::span<const std::optional<double>> percent,
                         std::span<const std::string> class_names, const std::filesystem::path& path);

/// Shortest round-trip decimal form used by every text output.
std::string format_number(double value);

}  // namespace urbanfuse

#endif
