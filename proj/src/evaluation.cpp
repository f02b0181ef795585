#include "urbanfuse/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "urbanfuse/error.hpp"

namespace urbanfuse {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::uint64_t t = 0;
  for (std::size_t p = 0; p < k_; ++p) t += at(truth, p);
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < k_; ++c) t += at(c, c);
  return t;
}

std::vector<std::optional<double>> ConfusionMatrix::row_normalized() const {
  std::vector<std::optional<double>> out(k_ * k_);
  for (std::size_t t = 0; t < k_; ++t) {
    const auto row = row_total(t);
    if (row == 0) continue;
    for (std::size_t p = 0; p < k_; ++p) {
      out[t * k_ + p] = 100.0 * static_cast<double>(at(t, p)) / static_cast<double>(row);
    }
  }
  return out;
}

EvaluationReport evaluate(std::span<const std::size_t> predictions,
                          std::span<const std::size_t> ground_truth, std::size_t num_classes) {
  if (predictions.size() != ground_truth.size()) {
    throw Error(ErrorKind::dimension, "predictions and ground truth differ in length");
  }
  if (predictions.empty()) throw Error(ErrorKind::data, "nothing to evaluate");
  if (num_classes < 1) throw Error(ErrorKind::invalid_argument, "need at least one class");

  EvaluationReport r;
  r.confusion = ConfusionMatrix(num_classes);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] >= num_classes || ground_truth[i] >= num_classes) {
      throw Error(ErrorKind::invalid_argument, "label out of range at position " + std::to_string(i));
    }
    r.confusion.add(ground_truth[i], predictions[i]);
  }
  r.n_eval = predictions.size();
  r.oa = 100.0 * static_cast<double>(r.confusion.trace()) / static_cast<double>(r.n_eval);

  r.producer_accuracy.resize(num_classes);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto row = r.confusion.row_total(c);
    if (row == 0) continue;
    const double acc = 100.0 * static_cast<double>(r.confusion.at(c, c)) / static_cast<double>(row);
    r.producer_accuracy[c] = acc;
    sum += acc;
    ++present;
  }
  r.aa = sum / static_cast<double>(present);
  return r;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::data, "mean of an empty list");
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

ReportSummary average_reports(std::span<const EvaluationReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::data, "no reports to average");
  const std::size_t k = reports.front().confusion.num_classes();
  for (const auto& r : reports) {
    if (r.confusion.num_classes() != k) {
      throw Error(ErrorKind::dimension, "reports disagree on the number of classes");
    }
  }
  ReportSummary s;
  s.splits = reports.size();
  s.num_classes = k;

  std::vector<double> oa, aa;
  for (const auto& r : reports) {
    oa.push_back(r.oa);
    aa.push_back(r.aa);
  }
  s.oa = mean_std(oa);
  s.aa = mean_std(aa);

  s.producer_accuracy.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> vals;
    for (const auto& r : reports) {
      if (r.producer_accuracy[c]) vals.push_back(*r.producer_accuracy[c]);
    }
    if (!vals.empty()) s.producer_accuracy[c] = mean_std(vals);
  }

  s.confusion_percent.assign(k * k, std::nullopt);
  std::vector<double> sums(k * k, 0.0);
  std::vector<std::size_t> rows_seen(k, 0);
  for (const auto& r : reports) {
    const auto norm = r.confusion.row_normalized();
    for (std::size_t t = 0; t < k; ++t) {
      if (!norm[t * k]) continue;
      ++rows_seen[t];
      for (std::size_t p = 0; p < k; ++p) sums[t * k + p] += *norm[t * k + p];
    }
  }
  for (std::size_t t = 0; t < k; ++t) {
    if (rows_seen[t] == 0) continue;
    for (std::size_t p = 0; p < k; ++p) {
      s.confusion_percent[t * k + p] = sums[t * k + p] / static_cast<double>(rows_seen[t]);
    }
  }
  return s;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : "nan"; }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::string class_label(std::span<const std::string> names, std::size_t c) {
  return c < names.size() ? names[c] : "class" + std::to_string(c);
}

}  // namespace

void write_report_text(const EvaluationReport& report, std::span<const std::string> class_names,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "n_eval = " << report.n_eval << '\n';
  out << "oa = " << format_number(report.oa) << '\n';
  out << "aa = " << format_number(report.aa) << '\n';
  for (std::size_t c = 0; c < report.producer_accuracy.size(); ++c) {
    out << "producer_accuracy." << class_label(class_names, c) << " = "
        << (report.producer_accuracy[c] ? format_number(*report.producer_accuracy[c]) : "absent")
        << '\n';
  }
  finish(out, path);
}

void write_summary_text(const ReportSummary& summary, std::span<const std::string> class_names,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "splits = " << summary.splits << '\n';
  out << "oa_mean = " << format_number(summary.oa.mean) << '\n';
  out << "oa_std = " << format_number(summary.oa.std) << '\n';
  out << "aa_mean = " << format_number(summary.aa.mean) << '\n';
  out << "aa_std = " << format_number(summary.aa.std) << '\n';
  for (std::size_t c = 0; c < summary.producer_accuracy.size(); ++c) {
    const auto& pa = summary.producer_accuracy[c];
    out << "producer_accuracy." << class_label(class_names, c) << " = "
        << (pa ? format_number(pa->mean) + " +- " + format_number(pa->std) : std::string("absent"))
        << '\n';
  }
  finish(out, path);
}

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path) {
  const std::size_t k = report.confusion.num_classes();
  auto out = open_out(path);
  out << "n_eval,oa,aa";
  for (std::size_t c = 0; c < k; ++c) out << ",pa_" << c;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t p = 0; p < k; ++p) out << ",cm_" << t << '_' << p;
  }
  out << '\n' << report.n_eval << ',' << format_number(report.oa) << ',' << format_number(report.aa);
  for (const auto& pa : report.producer_accuracy) out << ',' << opt(pa);
  for (const auto& cell : report.confusion.row_normalized()) out << ',' << opt(cell);
  out << '\n';
  finish(out, path);
}

void write_summary_csv(const ReportSummary& summary, const std::filesystem::path& path) {
  const std::size_t k = summary.num_classes;
  auto out = open_out(path);
  out << "splits,oa_mean,oa_std,aa_mean,aa_std";
  for (std::size_t c = 0; c < k; ++c) out << ",pa_" << c << "_mean,pa_" << c << "_std";
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t p = 0; p < k; ++p) out << ",cm_" << t << '_' << p;
  }
  out << '\n'
      << summary.splits << ',' << format_number(summary.oa.mean) << ','
      << format_number(summary.oa.std) << ',' << format_number(summary.aa.mean) << ','
      << format_number(summary.aa.std);
  for (const auto& pa : summary.producer_accuracy) {
    if (pa) {
      out << ',' << format_number(pa->mean) << ',' << format_number(pa->std);
    } else {
      out << ",nan,nan";
    }
  }
  for (const auto& cell : summary.confusion_percent) out << ',' << opt(cell);
  out << '\n';
  finish(out, path);
}

void write_confusion_csv(std::span<const std::optional<double>> percent,
                         std::span<const std::string> class_names, const std::filesystem::path& path) {
  const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(percent.size()))));
  if (k * k != percent.size()) throw Error(ErrorKind::dimension, "confusion matrix is not square");
  auto out = open_out(path);
  out << "truth\\predicted";
  for (std::size_t c = 0; c < k; ++c) out << ',' << class_label(class_names, c);
  out << '\n';
  for (std::size_t t = 0; t < k; ++t) {
    out << class_label(class_names, t);
    for (std::size_t p = 0; p < k; ++p) out << ',' << opt(percent[t * k + p]);
    out << '\n';
  }
  finish(out, path);
}

}  // namespace urbanfuse
