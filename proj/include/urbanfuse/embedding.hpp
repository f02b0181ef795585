#ifndef URBANFUSE_EMBEDDING_HPP
#define URBANFUSE_EMBEDDING_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace urbanfuse {

/// max(1, round(fraction * total)), clamped to total.
std::size_t kept_dimension(std::size_t total, double fraction);

/// Divides each row by its L2 norm; all-zero rows are left as they are.
Eigen::MatrixXd l2_normalize_rows(Eigen::MatrixXd rows);

/// Flips `v` so its largest-magnitude entry (first one on ties) is positive.
void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v);

struct PcaTransform {
  Eigen::VectorXd mean;        // d_raw
  Eigen::MatrixXd components;  // d_raw x d_kept, orthonormal columns
  Eigen::VectorXd variances;   // d_kept, descending
  double kept_fraction = 0.0;
  /// True when d_kept exceeded the numerical rank of the data, so trailing
  /// components span an arbitrary orthonormal complement.
  bool padded = false;

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(components.cols()); }

  /// (rows - mean) * components
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
};

/// Principal axes of the sample covariance, keeping kept_dimension(d, fraction)
/// of them. Requires at least two rows.
PcaTransform fit_pca(const Eigen::MatrixXd& rows, double fraction);

struct CcaParams {
  double pca_fraction = 0.1;
  double embedding_fraction = 0.2;
  double power = 6.0;  // eigenvalue exponent used by retrieval
  double eta = 1e-4;
};

/// Full generalized spectrum of the multi-view CCA problem.
struct CcaSolution {
  std::vector<std::size_t> view_dims;
  Eigen::MatrixXd lhs;           // [C_ij] with C_ii + eta I on the diagonal blocks
  Eigen::MatrixXd rhs;           // blockdiag(C_ii + eta I)
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns aligned with eigenvalues; v^T rhs v = 1
};

/// Solves lhs w = lambda rhs w for already centered views, C_ij = X_i^T X_j.
///
/// Both block matrices are symmetrized before the solve. A relative asymmetry
/// above 1e-8 beforehand, a non-positive-definite rhs or a non-finite
/// spectrum throws ErrorKind::numeric.
CcaSolution solve_multiview_cca(std::span<const Eigen::MatrixXd> views, double eta);

enum class View { ground, overhead, label };

const char* to_string(View view);
View parse_view(std::string_view text);

/// Three-view embedding: ground features, overhead features, one-hot labels.
struct EmbeddingModel {
  PcaTransform pca_ground;
  PcaTransform pca_overhead;
  Eigen::VectorXd label_mean;  // num_classes
  Eigen::MatrixXd w_ground;    // d_1 x d_emb
  Eigen::MatrixXd w_overhead;  // d_2 x d_emb
  Eigen::MatrixXd w_label;     // num_classes x d_emb
  Eigen::VectorXd eigenvalues; // d_emb, descending
  CcaParams params;

  bool fitted() const { return eigenvalues.size() > 0; }
  std::size_t dim() const { return static_cast<std::size_t>(eigenvalues.size()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(label_mean.size()); }
  const Eigen::MatrixXd& projection(View view) const;
};

/// Fits the embedding on paired training rows.
///
/// Views 1 and 2 are L2-normalized per row, centered and PCA-reduced; the
/// label view is one-hot and centered. The top kept_dimension(d_1+d_2+K,
/// embedding_fraction) generalized eigenvectors give W_1, W_2, W_3. When
/// `diagnostics` is non-null it receives the full solved problem.
EmbeddingModel fit_embedding(const Eigen::MatrixXd& ground, const Eigen::MatrixXd& overhead,
                             std::span<const std::size_t> labels, std::size_t num_classes,
                             const CcaParams& params, CcaSolution* diagnostics = nullptr);

/// Train-statistics preprocessing for one view (normalize, center, PCA).
/// For View::label the rows are K-wide label encodings and are only centered.
Eigen::MatrixXd preprocess(const EmbeddingModel& model, View view, const Eigen::MatrixXd& rows);

/// preprocess(rows) * W_view, M x d_emb.
Eigen::MatrixXd project(const EmbeddingModel& model, View view, const Eigen::MatrixXd& rows);

Eigen::MatrixXd one_hot(std::span<const std::size_t> labels, std::size_t num_classes);

void save_embedding(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_embedding(const std::filesystem::path& path);

}  // namespace urbanfuse

#endif
