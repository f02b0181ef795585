#ifndef URBANFUSE_SRC_ARRAY_CODEC_HPP
#define URBANFUSE_SRC_ARRAY_CODEC_HPP

#include <string>

#include <Eigen/Dense>

#include "urbanfuse/binary_io.hpp"
#include "urbanfuse/error.hpp"

namespace urbanfuse::detail {

inline NamedArray encode_matrix(std::string name, const Eigen::MatrixXd& m) {
  NamedArray a{std::move(name),
               {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())},
               {}};
  a.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.data.push_back(m(r, c));
  }
  return a;
}

inline NamedArray encode_vector(std::string name, const Eigen::VectorXd& v) {
  return {std::move(name), {static_cast<std::uint32_t>(v.size())},
          std::vector<double>(v.data(), v.data() + v.size())};
}

inline Eigen::MatrixXd decode_matrix(const NamedArray& a, const std::string& source) {
  if (a.dims.size() != 2) throw Error(ErrorKind::format, source + ": '" + a.name + "' is not a matrix");
  Eigen::MatrixXd m(a.dims[0], a.dims[1]);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = a.data[static_cast<std::size_t>(r * m.cols() + c)];
    }
  }
  return m;
}

inline Eigen::VectorXd decode_vector(const NamedArray& a, const std::string& source) {
  if (a.dims.size() != 1) throw Error(ErrorKind::format, source + ": '" + a.name + "' is not a vector");
  return Eigen::Map<const Eigen::VectorXd>(a.data.data(), static_cast<Eigen::Index>(a.data.size()));
}

}  // namespace urbanfuse::detail

#endif
