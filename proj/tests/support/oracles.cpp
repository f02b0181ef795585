#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace oracle {

Mat from_eigen(const Eigen::MatrixXd& m) {
  Mat out(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

Vec from_eigen(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

Mat transpose(const Mat& a) {
  if (a.empty()) return {};
  Mat t(a[0].size(), Vec(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  }
  return t;
}

Mat multiply(const Mat& a, const Mat& b) {
  const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), inner = b.size();
  Mat out(n, Vec(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < inner; ++p) s += a[i][p] * b[p][j];
      out[i][j] = s;
    }
  }
  return out;
}

Vec multiply(const Mat& a, const Vec& x) {
  Vec out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) out[i] += a[i][j] * x[j];
  }
  return out;
}

double frobenius(const Mat& a) {
  double s = 0.0;
  for (const auto& row : a) {
    for (double v : row) s += v * v;
  }
  return std::sqrt(s);
}

Vec aggregate_two_loop(const std::vector<std::vector<float>>& views, bool use_max) {
  const std::size_t d = views.at(0).size();
  Vec out(d);
  for (std::size_t j = 0; j < d; ++j) {
    double acc = use_max ? -INFINITY : 0.0;
    for (std::size_t v = 0; v < views.size(); ++v) {
      const double x = views[v][j];
      acc = use_max ? std::max(acc, x) : acc + x;
    }
    out[j] = use_max ? acc : acc / static_cast<double>(views.size());
  }
  return out;
}

double naive_cross_entropy(const Vec& scores, std::size_t label) {
  double z = 0.0;
  for (double s : scores) z += std::exp(s);
  return -std::log(std::exp(scores[label]) / z);
}

Vec affine(const Mat& w, const Vec& x, const Vec& b) {
  Vec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < x.size(); ++j) s += w[i][j] * x[j];
    out[i] = s;
  }
  return out;
}

EigenPairs jacobi(Mat a, double tol, int max_sweeps) {
  const std::size_t n = a.size();
  Mat v(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    }
    if (off <= tol * tol * std::max(total, 1e-300)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPairs out{Vec(n), Mat(n, Vec(n))};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[order[j]][order[j]];
    for (std::size_t i = 0; i < n; ++i) out.vectors[i][j] = v[i][order[j]];
  }
  return out;
}

Mat cholesky(const Mat& a) {
  const std::size_t n = a.size();
  Mat l(n, Vec(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (!(d > 0.0)) throw std::runtime_error("cholesky: matrix not positive definite");
    l[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  return l;
}

namespace {

// Solves L X = B column by column (forward substitution).
Mat lower_solve(const Mat& l, const Mat& b) {
  const std::size_t n = l.size(), m = b[0].size();
  Mat x(n, Vec(m, 0.0));
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = b[i][c];
      for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * x[k][c];
      x[i][c] = s / l[i][i];
    }
  }
  return x;
}

// Solves L^T X = B (back substitution).
Mat upper_solve_transposed(const Mat& l, const Mat& b) {
  const std::size_t n = l.size(), m = b[0].size();
  Mat x(n, Vec(m, 0.0));
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b[ii][c];
      for (std::size_t k = ii + 1; k < n; ++k) s -= l[k][ii] * x[k][c];
      x[ii][c] = s / l[ii][ii];
    }
  }
  return x;
}

}  // namespace

EigenPairs generalized(const Mat& a, const Mat& b) {
  const Mat l = cholesky(b);
  // C = L^{-1} A L^{-T} = L^{-1} (L^{-1} A)^T since A is symmetric.
  const Mat y = lower_solve(l, a);
  Mat c = lower_solve(l, transpose(y));
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) c[i][j] = c[j][i] = 0.5 * (c[i][j] + c[j][i]);
  }
  EigenPairs e = jacobi(c);
  e.vectors = upper_solve_transposed(l, e.vectors);
  return e;
}

Vec symmetric3_eigenvalues(const Mat& a) {
  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  if (p1 == 0.0) {
    Vec d{a[0][0], a[1][1], a[2][2]};
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
  }
  const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                    (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Mat bm(3, Vec(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) bm[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
  }
  const double det = bm[0][0] * (bm[1][1] * bm[2][2] - bm[1][2] * bm[2][1]) -
                     bm[0][1] * (bm[1][0] * bm[2][2] - bm[1][2] * bm[2][0]) +
                     bm[0][2] * (bm[1][0] * bm[2][1] - bm[1][1] * bm[2][0]);
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double e2 = 3.0 * q - e1 - e3;
  return {e1, e2, e3};
}

std::vector<Ranked> knn_double_loop(const Mat& rows, const Vec& query, std::size_t k) {
  double qn = 0.0;
  for (double v : query) qn += v * v;
  qn = std::sqrt(qn);
  std::vector<Ranked> all;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double dot = 0.0, rn = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      dot += rows[r][j] * query[j];
      rn += rows[r][j] * rows[r][j];
    }
    rn = std::sqrt(rn);
    all.push_back({r, (qn == 0.0 || rn == 0.0) ? 0.0 : dot / (qn * rn)});
  }
  // selection sort keeps the tie rule explicit
  std::vector<Ranked> out;
  std::vector<bool> used(all.size(), false);
  for (std::size_t n = 0; n < std::min(k, all.size()); ++n) {
    std::size_t best = all.size();
    for (std::size_t r = 0; r < all.size(); ++r) {
      if (used[r]) continue;
      if (best == all.size() || all[r].similarity > all[best].similarity) best = r;
    }
    used[best] = true;
    out.push_back(all[best]);
  }
  return out;
}

std::vector<std::size_t> centroid_classifier(const Mat& train, const std::vector<std::size_t>& labels,
                                             std::size_t num_classes, const Mat& test) {
  const std::size_t d = train.at(0).size();
  Mat centroid(num_classes, Vec(d, 0.0));
  std::vector<double> count(num_classes, 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) centroid[labels[i]][j] += train[i][j];
    count[labels[i]] += 1.0;
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t j = 0; j < d; ++j) centroid[c][j] /= std::max(count[c], 1.0);
  }
  std::vector<std::size_t> out;
  for (const auto& x : test) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (count[c] == 0.0) continue;
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) dist += (x[j] - centroid[c][j]) * (x[j] - centroid[c][j]);
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace oracle
