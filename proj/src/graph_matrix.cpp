#include "thetalab/graph_matrix.hpp"

#include "thetalab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace thetalab {

CheckedShape validate_shape(const Shape& shape) {
  std::map<std::string, int> index;
  for (const auto& v : shape.vertices) {
    if (!index.emplace(v, -1).second) throw std::invalid_argument("duplicate vertex '" + v + "'");
  }
  CheckedShape out;
  out.shape = shape;
  out.left_size = static_cast<int>(shape.left.size());
  out.right_size = static_cast<int>(shape.right.size());
  int next = 0;
  for (const auto* side : {&shape.left, &shape.right}) {
    for (const auto& v : *side) {
      auto it = index.find(v);
      if (it == index.end()) throw std::invalid_argument("side vertex '" + v + "' is not a vertex");
      if (it->second >= 0) {
        throw std::invalid_argument("vertex '" + v + "' is on both sides or repeated");
      }
      it->second = next++;
    }
  }
  for (const auto& [v, k] : index) {
    if (k < 0) throw std::invalid_argument("vertex '" + v + "' is in neither U nor V");
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : shape.edges) {
    const auto ia = index.find(a);
    const auto ib = index.find(b);
    if (ia == index.end() || ib == index.end()) {
      throw std::invalid_argument("edge (" + a + "," + b + ") has an endpoint outside the shape");
    }
    if (ia->second == ib->second) throw std::invalid_argument("self-loop at '" + a + "'");
    const auto e = std::minmax(ia->second, ib->second);
    if (!seen.insert(e).second) throw std::invalid_argument("repeated edge (" + a + "," + b + ")");
  }
  out.edges.assign(seen.begin(), seen.end());
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> labels(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty vertex label");
    out.push_back(item);
  }
  return out;
}

std::string section(const std::string& part, const std::string& key) {
  const std::string t = trim(part);
  if (t.rfind(key + ":", 0) != 0) throw std::invalid_argument("expected '" + key + ":' section");
  return trim(t.substr(key.size() + 1));
}

}  // namespace

CheckedShape shape_from_text(const std::string& text) {
  std::string body = trim(text);
  if (body.rfind("shape", 0) != 0) throw std::invalid_argument("shape text must start with 'shape'");
  body = body.substr(5);
  std::vector<std::string> parts;
  std::stringstream ss(body);
  std::string part;
  while (std::getline(ss, part, '|')) parts.push_back(part);
  if (parts.size() != 3) throw std::invalid_argument("shape text needs U, V and E sections");

  Shape shape;
  shape.left = labels(section(parts[0], "U"));
  shape.right = labels(section(parts[1], "V"));
  const std::string edges = section(parts[2], "E");
  static const std::regex edge_re(R"(\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\))");
  std::string rest = edges;
  std::smatch m;
  while (std::regex_search(rest, m, edge_re)) {
    const std::string gap = trim(m.prefix().str());
    if (!(gap.empty() || gap == ",")) throw std::invalid_argument("malformed edge list");
    shape.edges.emplace_back(m[1].str(), m[2].str());
    rest = m.suffix().str();
  }
  if (!trim(rest).empty()) throw std::invalid_argument("malformed edge list");

  shape.vertices = shape.left;
  shape.vertices.insert(shape.vertices.end(), shape.right.begin(), shape.right.end());
  // Endpoints outside U and V are kept so that validation reports them.
  for (const auto& [a, b] : shape.edges) {
    for (const auto& v : {a, b}) {
      if (std::find(shape.vertices.begin(), shape.vertices.end(), v) == shape.vertices.end()) {
        shape.vertices.push_back(v);
      }
    }
  }
  return validate_shape(shape);
}

std::string to_text(const CheckedShape& shape) {
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
  };
  std::vector<std::string> names = shape.shape.left;
  names.insert(names.end(), shape.shape.right.begin(), shape.shape.right.end());
  std::string out = "shape U: " + join(shape.shape.left) + " | V: " + join(shape.shape.right) + " | E: ";
  for (std::size_t i = 0; i < shape.edges.size(); ++i) {
    out += (i ? "," : "") + ("(" + names[shape.edges[i].first] + "," +
                             names[shape.edges[i].second] + ")");
  }
  return out;
}

std::uint64_t shape_hash(const CheckedShape& shape) {
  // Structure only: labels do not matter.
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(shape.left_size) << 32 |
                               static_cast<std::uint64_t>(shape.right_size));
  for (const auto& [a, b] : shape.edges) {
    h = splitmix64(h ^ (static_cast<std::uint64_t>(a) << 32 | static_cast<std::uint64_t>(b)));
  }
  return h;
}

double RademacherField::operator()(int i, int j) const {
  if (i == j) throw std::invalid_argument("Rademacher field is undefined on the diagonal");
  const auto [a, b] = std::minmax(i, j);
  const std::uint64_t key = static_cast<std::uint64_t>(a) << 32 | static_cast<std::uint64_t>(b);
  return (splitmix64(seed_ ^ splitmix64(key)) >> 63) ? 1.0 : -1.0;
}

GraphMatrix realize(const CheckedShape& shape, int n, std::uint64_t seed) {
  const int u = shape.left_size;
  const int v = shape.right_size;
  const int k = shape.vertex_count();
  if (n < k) throw std::invalid_argument("realize needs n >= |V(alpha)|");
  const double rows_d = std::pow(static_cast<double>(n), u);
  const double cols_d = std::pow(static_cast<double>(n), v);
  if (rows_d * cols_d > kRealizeEntryCap) {
    throw std::length_error("realization exceeds 1e8 entries");
  }
  const auto rows = static_cast<Eigen::Index>(rows_d);
  const auto cols = static_cast<Eigen::Index>(cols_d);
  const RademacherField eps(n, seed);

  GraphMatrix out;
  out.shape = shape;
  out.n = n;
  out.matrix = Eigen::MatrixXd::Zero(rows, cols);
  std::vector<int> phi(k);
  auto decode = [&](Eigen::Index index, int offset, int len) {
    for (int t = len - 1; t >= 0; --t) {
      phi[offset + t] = static_cast<int>(index % n);
      index /= n;
    }
  };
  auto distinct = [&](int upto) {
    for (int a = 0; a < upto; ++a) {
      for (int b = a + 1; b < upto; ++b) {
        if (phi[a] == phi[b]) return false;
      }
    }
    return true;
  };
  for (Eigen::Index r = 0; r < rows; ++r) {
    decode(r, 0, u);
    if (!distinct(u)) continue;
    for (Eigen::Index c = 0; c < cols; ++c) {
      decode(c, u, v);
      if (!distinct(k)) continue;
      double prod = 1.0;
      for (const auto& [a, b] : shape.edges) prod *= eps(phi[a], phi[b]);
      out.matrix(r, c) = prod;
    }
  }
  return out;
}

NormEstimate norm_estimate(const Eigen::MatrixXd& m, double tol, std::uint64_t seed) {
  NormEstimate out;
  if (m.size() == 0) {
    out.converged = true;
    return out;
  }
  const bool left = m.rows() <= m.cols();
  const Eigen::Index dim = left ? m.rows() : m.cols();
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    if (left) return m * (m.transpose() * x);
    return m.transpose() * (m * x);
  };
  const int kmax = static_cast<int>(std::min<Eigen::Index>(dim, 400));

  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd basis(dim, kmax + 1);
  Eigen::VectorXd start(dim);
  for (Eigen::Index i = 0; i < dim; ++i) start(i) = normal(rng);
  basis.col(0) = start.normalized();
  std::vector<double> alpha;
  std::vector<double> beta;
  double theta = 0.0;
  for (int k = 0; k < kmax; ++k) {
    Eigen::VectorXd w = apply(basis.col(k));
    alpha.push_back(basis.col(k).dot(w));
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
    }
    const double b = w.norm();
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), k + 1);
    Eigen::VectorXd sub = Eigen::Map<Eigen::VectorXd>(beta.data(), k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    theta = std::max(0.0, es.eigenvalues()(k));
    const double residual = b * std::abs(es.eigenvectors()(k, k));
    out.iterations = k + 1;
    if (residual <= tol * theta || b <= 1e-14 * std::max(theta, 1e-300) || k + 1 == dim) {
      out.converged = true;
      break;
    }
    beta.push_back(b);
    basis.col(k + 1) = w / b;
  }
  out.value = std::sqrt(theta);
  return out;
}

ExponentFit exponent_sweep(const CheckedShape& shape, const std::vector<int>& n_values,
                           int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("exponent sweep needs trials >= 1");
  if (std::set<int>(n_values.begin(), n_values.end()).size() < 4) {
    throw std::invalid_argument("exponent sweep needs at least 4 distinct sizes");
  }
  ExponentFit out;
  out.shape_hash = shape_hash(shape);
  out.n_values = n_values;
  out.trials = trials;
  out.seed = seed;
  const std::size_t count = n_values.size();
  out.norms.assign(count, std::vector<double>(trials, 0.0));
  parallel_for(count * trials, [&](std::size_t job) {
    const std::size_t i = job / trials;
    const int t = static_cast<int>(job % trials);
    const int n = n_values[i];
    const GraphMatrix g = realize(shape, n, derive_seed(seed, "gmatrix", n, t));
    out.norms[i][t] = norm_estimate(g.matrix, 1e-10, derive_seed(seed, "gmatrix-start", n, t)).value;
  });

  Eigen::MatrixXd design(count, 2);
  Eigen::VectorXd target(count);
  for (std::size_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (double v : out.norms[i]) sum += v;
    out.mean_norms.push_back(sum / trials);
    design(i, 0) = 1.0;
    design(i, 1) = std::log(static_cast<double>(n_values[i]));
    target(i) = std::log(out.mean_norms.back());
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  out.intercept = coef(0);
  out.f_hat = coef(1);
  const Eigen::VectorXd residual = target - design * coef;
  out.fit_residuals.assign(residual.data(), residual.data() + count);
  Eigen::MatrixXd loglog(count, 2);
  for (std::size_t i = 0; i < count; ++i) {
    loglog(i, 0) = 1.0;
    loglog(i, 1) = std::log(std::log(static_cast<double>(n_values[i])));
  }
  out.residual_loglog_slope = loglog.colPivHouseholderQr().solve(residual)(1);
  return out;
}

}  // namespace thetalab
