#include "urbanfuse/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "array_codec.hpp"
#include "urbanfuse/binary_io.hpp"
#include "urbanfuse/error.hpp"

namespace urbanfuse {

std::size_t kept_dimension(std::size_t total, double fraction) {
  if (total == 0) throw Error(ErrorKind::dimension, "cannot keep dimensions of an empty space");
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorKind::invalid_argument, "kept fraction must lie in (0, 1]");
  }
  const auto rounded = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  return std::clamp<std::size_t>(rounded, 1, total);
}

Eigen::MatrixXd l2_normalize_rows(Eigen::MatrixXd rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (norm > 0.0) rows.row(i) /= norm;
  }
  return rows;
}

void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
  }
  if (v(arg) < 0.0) v = -v;
}

// -- PCA ----------------------------------------------------------------------

Eigen::MatrixXd PcaTransform::apply(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != input_dim()) {
    throw Error(ErrorKind::dimension, "PCA input has " + std::to_string(rows.cols()) +
                                          " columns, expected " + std::to_string(input_dim()));
  }
  return (rows.rowwise() - mean.transpose()) * components;
}

PcaTransform fit_pca(const Eigen::MatrixXd& rows, double fraction) {
  if (rows.rows() < 2) throw Error(ErrorKind::data, "PCA needs at least 2 rows");
  if (!rows.allFinite()) throw Error(ErrorKind::numeric, "PCA input contains non-finite values");
  const auto d_raw = static_cast<std::size_t>(rows.cols());
  const auto d_kept = kept_dimension(d_raw, fraction);

  PcaTransform pca;
  pca.kept_fraction = fraction;
  pca.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - pca.mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
  cov = (0.5 * (cov + cov.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::numeric, "PCA eigensolver failed");

  // Eigen returns ascending eigenvalues; walk from the top.
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const Eigen::MatrixXd& evecs = solver.eigenvectors();
  const auto n = evals.size();
  const double top = std::max(evals(n - 1), 0.0);
  const double rank_tol = top * static_cast<double>(d_raw) * 1e-12;

  pca.components.resize(static_cast<Eigen::Index>(d_raw), static_cast<Eigen::Index>(d_kept));
  pca.variances.resize(static_cast<Eigen::Index>(d_kept));
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (evals(i) > rank_tol && top > 0.0) ++rank;
  }
  for (std::size_t k = 0; k < d_kept; ++k) {
    const Eigen::Index src = n - 1 - static_cast<Eigen::Index>(k);
    Eigen::VectorXd col = evecs.col(src);
    canonicalize_sign(col);
    pca.components.col(static_cast<Eigen::Index>(k)) = col;
    pca.variances(static_cast<Eigen::Index>(k)) = std::max(evals(src), 0.0);
  }
  pca.padded = d_kept > rank;
  return pca;
}

// -- Multi-view CCA -----------------------------------------------------------

CcaSolution solve_multiview_cca(std::span<const Eigen::MatrixXd> views, double eta) {
  if (views.empty()) throw Error(ErrorKind::invalid_argument, "CCA needs at least one view");
  if (eta < 0.0) throw Error(ErrorKind::invalid_argument, "regularization must be non-negative");
  const Eigen::Index n = views.front().rows();
  CcaSolution sol;
  Eigen::Index total = 0;
  for (const auto& v : views) {
    if (v.rows() != n) throw Error(ErrorKind::dimension, "CCA views disagree on the number of rows");
    if (v.cols() == 0) throw Error(ErrorKind::dimension, "CCA view has no columns");
    if (!v.allFinite()) throw Error(ErrorKind::numeric, "CCA view contains non-finite values");
    sol.view_dims.push_back(static_cast<std::size_t>(v.cols()));
    total += v.cols();
  }

  Eigen::MatrixXd stacked(n, total);
  Eigen::Index offset = 0;
  for (const auto& v : views) {
    stacked.middleCols(offset, v.cols()) = v;
    offset += v.cols();
  }

  Eigen::MatrixXd lhs = stacked.transpose() * stacked;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(total, total);
  offset = 0;
  for (const auto& v : views) {
    rhs.block(offset, offset, v.cols(), v.cols()) = lhs.block(offset, offset, v.cols(), v.cols());
    offset += v.cols();
  }
  lhs.diagonal().array() += eta;
  rhs.diagonal().array() += eta;

  const double scale = lhs.norm();
  const double asym = (lhs - lhs.transpose()).norm();
  if (scale > 0.0 && asym > 1e-8 * scale) {
    throw Error(ErrorKind::numeric, "CCA block matrix is not symmetric (relative asymmetry " +
                                        std::to_string(asym / scale) + ")");
  }
  sol.lhs = 0.5 * (lhs + lhs.transpose());
  sol.rhs = 0.5 * (rhs + rhs.transpose());

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      sol.lhs, sol.rhs, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::numeric,
                "generalized eigensolver failed (is the regularized covariance positive definite?)");
  }
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const Eigen::MatrixXd& evecs = solver.eigenvectors();
  if (!evals.allFinite() || !evecs.allFinite()) {
    throw Error(ErrorKind::numeric, "generalized eigensolver produced non-finite values");
  }
  sol.eigenvalues.resize(total);
  sol.eigenvectors.resize(total, total);
  for (Eigen::Index k = 0; k < total; ++k) {
    const Eigen::Index src = total - 1 - k;
    sol.eigenvalues(k) = evals(src);
    Eigen::VectorXd col = evecs.col(src);
    canonicalize_sign(col);
    sol.eigenvectors.col(k) = col;
  }
  return sol;
}

// -- Embedding ----------------------------------------------------------------

const char* to_string(View view) {
  switch (view) {
    case View::ground: return "ground";
    case View::overhead: return "overhead";
    case View::label: return "label";
  }
  return "?";
}

View parse_view(std::string_view text) {
  if (text == "ground" || text == "gsv") return View::ground;
  if (text == "overhead") return View::overhead;
  if (text == "label") return View::label;
  throw Error(ErrorKind::invalid_argument, "unknown view '" + std::string(text) + "'");
}

const Eigen::MatrixXd& EmbeddingModel::projection(View view) const {
  switch (view) {
    case View::ground: return w_ground;
    case View::overhead: return w_overhead;
    case View::label: return w_label;
  }
  return w_label;
}

Eigen::MatrixXd one_hot(std::span<const std::size_t> labels, std::size_t num_classes) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                              static_cast<Eigen::Index>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw Error(ErrorKind::data, "label " + std::to_string(labels[i]) + " out of range");
    }
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
  }
  return out;
}

EmbeddingModel fit_embedding(const Eigen::MatrixXd& ground, const Eigen::MatrixXd& overhead,
                             std::span<const std::size_t> labels, std::size_t num_classes,
                             const CcaParams& params, CcaSolution* diagnostics) {
  if (ground.rows() != overhead.rows() || static_cast<std::size_t>(ground.rows()) != labels.size()) {
    throw Error(ErrorKind::dimension, "embedding views must pair the same objects");
  }
  if (ground.rows() < 2) throw Error(ErrorKind::data, "embedding needs at least 2 training objects");
  if (num_classes < 1) throw Error(ErrorKind::invalid_argument, "embedding needs label classes");
  if (!(params.power >= 0.0)) throw Error(ErrorKind::invalid_argument, "power must be >= 0");

  EmbeddingModel model;
  model.params = params;

  const Eigen::MatrixXd g = l2_normalize_rows(ground);
  const Eigen::MatrixXd o = l2_normalize_rows(overhead);
  model.pca_ground = fit_pca(g, params.pca_fraction);
  model.pca_overhead = fit_pca(o, params.pca_fraction);

  const Eigen::MatrixXd labels_onehot = one_hot(labels, num_classes);
  model.label_mean = labels_onehot.colwise().mean().transpose();

  const Eigen::MatrixXd views[3] = {
      model.pca_ground.apply(g),
      model.pca_overhead.apply(o),
      labels_onehot.rowwise() - model.label_mean.transpose(),
  };
  CcaSolution sol = solve_multiview_cca(views, params.eta);

  const Eigen::Index d1 = views[0].cols(), d2 = views[1].cols(), d3 = views[2].cols();
  const auto d_emb = static_cast<Eigen::Index>(
      kept_dimension(static_cast<std::size_t>(d1 + d2 + d3), params.embedding_fraction));
  model.eigenvalues = sol.eigenvalues.head(d_emb);
  model.w_ground = sol.eigenvectors.block(0, 0, d1, d_emb);
  model.w_overhead = sol.eigenvectors.block(d1, 0, d2, d_emb);
  model.w_label = sol.eigenvectors.block(d1 + d2, 0, d3, d_emb);

  if (diagnostics) *diagnostics = std::move(sol);
  return model;
}

Eigen::MatrixXd preprocess(const EmbeddingModel& model, View view, const Eigen::MatrixXd& rows) {
  if (!model.fitted()) throw Error(ErrorKind::state, "embedding model is not fitted");
  if (!rows.allFinite()) throw Error(ErrorKind::numeric, "projection input contains non-finite values");
  switch (view) {
    case View::ground: return model.pca_ground.apply(l2_normalize_rows(rows));
    case View::overhead: return model.pca_overhead.apply(l2_normalize_rows(rows));
    case View::label:
      if (rows.cols() != model.label_mean.size()) {
        throw Error(ErrorKind::dimension, "label rows must have one column per class");
      }
      return rows.rowwise() - model.label_mean.transpose();
  }
  throw Error(ErrorKind::invalid_argument, "unknown view");
}

Eigen::MatrixXd project(const EmbeddingModel& model, View view, const Eigen::MatrixXd& rows) {
  return preprocess(model, view, rows) * model.projection(view);
}

// -- Persistence --------------------------------------------------------------

namespace {

void append_pca(std::vector<NamedArray>& arrays, const std::string& prefix, const PcaTransform& p) {
  arrays.push_back(detail::encode_vector(prefix + ".mean", p.mean));
  arrays.push_back(detail::encode_matrix(prefix + ".components", p.components));
  arrays.push_back(detail::encode_vector(prefix + ".variances", p.variances));
  arrays.push_back({prefix + ".meta", {2}, {p.kept_fraction, p.padded ? 1.0 : 0.0}});
}

PcaTransform read_pca(std::span<const NamedArray> arrays, const std::string& prefix,
                      const std::string& src) {
  PcaTransform p;
  p.mean = detail::decode_vector(require_array(arrays, prefix + ".mean", src), src);
  p.components = detail::decode_matrix(require_array(arrays, prefix + ".components", src), src);
  p.variances = detail::decode_vector(require_array(arrays, prefix + ".variances", src), src);
  const auto& meta = require_array(arrays, prefix + ".meta", src);
  if (meta.data.size() != 2) throw Error(ErrorKind::format, src + ": malformed " + prefix + ".meta");
  p.kept_fraction = meta.data[0];
  p.padded = meta.data[1] != 0.0;
  if (p.components.rows() != p.mean.size() || p.variances.size() != p.components.cols()) {
    throw Error(ErrorKind::dimension, src + ": inconsistent " + prefix + " arrays");
  }
  return p;
}

}  // namespace

void save_embedding(const EmbeddingModel& model, const std::filesystem::path& path) {
  if (!model.fitted()) throw Error(ErrorKind::state, "cannot save an unfitted embedding");
  std::vector<NamedArray> arrays;
  append_pca(arrays, "pca_gsv", model.pca_ground);
  append_pca(arrays, "pca_oh", model.pca_overhead);
  arrays.push_back(detail::encode_vector("label_mean", model.label_mean));
  arrays.push_back(detail::encode_matrix("W1", model.w_ground));
  arrays.push_back(detail::encode_matrix("W2", model.w_overhead));
  arrays.push_back(detail::encode_matrix("W3", model.w_label));
  arrays.push_back(detail::encode_vector("eigenvalues", model.eigenvalues));
  arrays.push_back({"hyperparams", {4},
                    {model.params.pca_fraction, model.params.embedding_fraction,
                     model.params.power, model.params.eta}});
  write_container(path, arrays);
}

EmbeddingModel load_embedding(const std::filesystem::path& path) {
  const auto arrays = read_container(path);
  const std::string src = path.string();
  EmbeddingModel m;
  m.pca_ground = read_pca(arrays, "pca_gsv", src);
  m.pca_overhead = read_pca(arrays, "pca_oh", src);
  m.label_mean = detail::decode_vector(require_array(arrays, "label_mean", src), src);
  m.w_ground = detail::decode_matrix(require_array(arrays, "W1", src), src);
  m.w_overhead = detail::decode_matrix(require_array(arrays, "W2", src), src);
  m.w_label = detail::decode_matrix(require_array(arrays, "W3", src), src);
  m.eigenvalues = detail::decode_vector(require_array(arrays, "eigenvalues", src), src);
  const auto& hp = require_array(arrays, "hyperparams", src);
  if (hp.data.size() != 4) throw Error(ErrorKind::format, src + ": malformed hyperparams");
  m.params = {hp.data[0], hp.data[1], hp.data[2], hp.data[3]};

  const auto d_emb = m.eigenvalues.size();
  if (m.w_ground.rows() != m.pca_ground.components.cols() ||
      m.w_overhead.rows() != m.pca_overhead.components.cols() ||
      m.w_label.rows() != m.label_mean.size() || m.w_ground.cols() != d_emb ||
      m.w_overhead.cols() != d_emb || m.w_label.cols() != d_emb) {
    throw Error(ErrorKind::dimension, src + ": projection matrices disagree with the stored dims");
  }
  return m;
}

}  // namespace urbanfuse
