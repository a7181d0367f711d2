// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "maple/eval/embeddings.hpp"

#include <Eigen/Dense>
#include <map>
#include <sstream>

#include "maple/error.hpp"

namespace maple::eval {

using diff::Tensor;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

Eigen::Map<const Matrix> view(const Tensor<double>& x) {
  return {x.data().data(), Eigen::Index(x.rows()), Eigen::Index(x.cols())};
}

}  // namespace

Tensor<double> pca_2d(const Tensor<double>& x) {
  if (x.rank() != 2 || x.rows() < 2 || x.cols() < 2) {
    throw ContractError("PCA needs at least 2 rows and 2 columns, got " + diff::shape_string(x.shape()));
  }
  const Matrix centered = view(x).rowwise() - view(x).colwise().mean();
  const Matrix cov = centered.transpose() * centered / double(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw OracleError("covariance eigendecomposition failed");
  // Eigenvalues come in increasing order.
  const Eigen::Index d = cov.rows();
  Matrix axes(d, 2);
  for (Eigen::Index k = 0; k < 2; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - k);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    axes.col(k) = v;
  }
  Tensor<double> out({x.rows(), 2});
  Eigen::Map<Matrix>(out.data().data(), Eigen::Index(x.rows()), 2) = centered * axes;
  return out;
}

double separability(const Tensor<double>& x, const std::vector<std::uint32_t>& labels) {
  if (x.rank() != 2 || labels.size() != x.rows()) throw DimensionError("one label per embedding row required");
  const auto m = view(x);
  const Eigen::RowVectorXd mean = m.colwise().mean();
  std::map<std::uint32_t, std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(Eigen::Index(i));
  if (groups.size() < 2) throw ContractError("separability needs at least 2 classes");
  double between = 0, within = 0;
  for (const auto& [label, rows] : groups) {
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(m.cols());
    for (auto r : rows) centroid += m.row(r);
    centroid /= double(rows.size());
    between += double(rows.size()) * (centroid - mean).squaredNorm();
    for (auto r : rows) within += (m.row(r) - centroid).squaredNorm();
  }
  if (within == 0) throw UndefinedMetricError("within-class scatter is zero");
  return between / within;
}

EmbeddingTable export_embeddings(const PromptedPredictor& predictor, const data::Dataset& dataset,
                                 const std::vector<std::size_t>& indices, bool with_pca) {
  const auto e = predictor.image_embeddings(dataset, indices);
  EmbeddingTable t;
  t.values = Tensor<double>(e.shape());
  for (std::size_t i = 0; i < e.size(); ++i) t.values[i] = e[i];
  for (auto i : indices) {
    t.sample_ids.push_back(dataset.samples[i].id);
    t.class_ids.push_back(dataset.samples[i].label);
  }
  if (with_pca) t.pca = pca_2d(t.values);
  return t;
}

std::string embeddings_csv(const EmbeddingTable& t) {
  const std::size_t n = t.sample_ids.size(), d = t.values.cols();
  const bool pca = !t.pca.empty();
  std::ostringstream out;
  out.precision(17);
  out << "sample_id,class_id";
  for (std::size_t j = 0; j < d; ++j) out << ",e" << j;
  if (pca) out << ",pc1,pc2";
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << t.sample_ids[i] << ',' << t.class_ids[i];
    for (std::size_t j = 0; j < d; ++j) out << ',' << t.values[i * d + j];
    if (pca) out << ',' << t.pca[i * 2] << ',' << t.pca[i * 2 + 1];
    out << '\n';
  }
  return out.str();
}

}  // namespace maple::eval
