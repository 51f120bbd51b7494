#include "thetalab/graph.hpp"

#include "thetalab/rng.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <stdexcept>

namespace thetalab {

namespace {

void check_vertex(int n, int v) {
  if (v < 0 || v >= n) {
    throw std::out_of_range("vertex " + std::to_string(v) + " outside 0.." +
                            std::to_string(n - 1));
  }
}

long long pow_mod(long long base, long long exp, long long mod) {
  long long result = 1;
  base %= mod;
  while (exp > 0) {
    if (exp & 1) result = result * base % mod;
    base = base * base % mod;
    exp >>= 1;
  }
  return result;
}

int primitive_root(int p) {
  std::vector<int> factors;
  int m = p - 1;
  for (int f = 2; static_cast<long long>(f) * f <= m; ++f) {
    if (m % f == 0) {
      factors.push_back(f);
      while (m % f == 0) m /= f;
    }
  }
  if (m > 1) factors.push_back(m);
  for (int g = 2; g < p; ++g) {
    bool ok = true;
    for (int f : factors) {
      if (pow_mod(g, (p - 1) / f, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw std::logic_error("no primitive root found");
}

void check_paley_prime(int p) {
  if (!is_prime(p) || p % 4 != 1) {
    throw std::invalid_argument("Paley construction needs a prime p = 1 (mod 4), got " +
                                std::to_string(p));
  }
}

std::vector<bool> residue_table(int p) {
  std::vector<bool> is_residue(p, false);
  for (long long x = 1; x < p; ++x) is_residue[x * x % p] = true;
  return is_residue;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s) {
  s = trim(s);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected integer, got '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

// ---------------------------------------------------------------- Graph

Graph::Graph(int n) : n_(n), words_((n + 63) / 64) {
  if (n < 0) throw std::invalid_argument("negative vertex count");
  bits_.assign(static_cast<std::size_t>(n_) * words_, 0);
}

Graph::Graph(int n, std::span<const Edge> edges) : Graph(n) {
  for (const auto& [i, j] : edges) set_edge(i, j);
}

void Graph::set_edge(int i, int j) {
  check_vertex(n_, i);
  check_vertex(n_, j);
  if (i == j) throw std::invalid_argument("self-loop at vertex " + std::to_string(i));
  bits_[static_cast<std::size_t>(i) * words_ + (j >> 6)] |= std::uint64_t{1} << (j & 63);
  bits_[static_cast<std::size_t>(j) * words_ + (i >> 6)] |= std::uint64_t{1} << (i & 63);
}

int Graph::degree(int v) const {
  int d = 0;
  for (auto w : row(v)) d += std::popcount(w);
  return d;
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (auto w : bits_) total += std::popcount(w);
  return total / 2;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if (adjacent(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<int> Graph::neighbors(int v) const {
  std::vector<int> out;
  for (int j = 0; j < n_; ++j) {
    if (adjacent(v, j)) out.push_back(j);
  }
  return out;
}

Eigen::MatrixXd Graph::adjacency_matrix() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (adjacent(i, j)) a(i, j) = 1.0;
    }
  }
  return a;
}

bool Graph::well_formed() const {
  const int tail = n_ & 63;
  for (int i = 0; i < n_; ++i) {
    if (adjacent(i, i)) return false;
    if (tail != 0 && (row(i)[words_ - 1] >> tail) != 0) return false;
    for (int j = i + 1; j < n_; ++j) {
      if (adjacent(i, j) != adjacent(j, i)) return false;
    }
  }
  return true;
}

Graph Graph::with_edge(int i, int j) const {
  Graph copy = *this;
  copy.set_edge(i, j);
  return copy;
}

GraphBuilder& GraphBuilder::add_edge(int i, int j) {
  graph_.set_edge(i, j);
  return *this;
}

// ---------------------------------------------------------- Circulants

CirculantSpec::CirculantSpec(int n, std::vector<int> conn) : n_(n), conn_(std::move(conn)) {
  if (n < 1) throw std::invalid_argument("circulant needs n >= 1");
  for (int s : conn_) {
    if (s < 1 || s > n / 2) {
      throw std::invalid_argument("circulant shift " + std::to_string(s) +
                                  " outside 1.." + std::to_string(n / 2));
    }
  }
  std::sort(conn_.begin(), conn_.end());
  conn_.erase(std::unique(conn_.begin(), conn_.end()), conn_.end());
}

bool CirculantSpec::contains(int k) const {
  k = ((k % n_) + n_) % n_;
  const int folded = std::min(k, n_ - k);
  return std::binary_search(conn_.begin(), conn_.end(), folded);
}

bool is_prime(long long p) {
  if (p < 2) return false;
  for (long long f = 2; f * f <= p; ++f) {
    if (p % f == 0) return false;
  }
  return true;
}

Graph build_circulant(const CirculantSpec& spec) {
  const int n = spec.n();
  GraphBuilder b(n);
  for (int i = 0; i < n; ++i) {
    for (int s : spec.conn()) {
      const int j = (i + s) % n;
      if (j != i) b.add_edge(i, j);
    }
  }
  return std::move(b).build();
}

CirculantSpec complement(const CirculantSpec& spec) {
  std::vector<int> conn;
  for (int s = 1; s <= spec.n() / 2; ++s) {
    if (!spec.contains(s)) conn.push_back(s);
  }
  return {spec.n(), std::move(conn)};
}

Graph sample_er(int n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability outside [0,1]");
  Rng rng(seed);
  GraphBuilder b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < p) b.add_edge(i, j);
    }
  }
  return std::move(b).build();
}

CirculantSpec sample_random_circulant(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random circulant needs n >= 2");
  Rng rng(seed);
  const int bits = n / 2;  // = ceil((n-1)/2)
  std::vector<int> conn;
  for (int k = 1; k <= bits; ++k) {
    if (rng() >> 63) conn.push_back(k);
  }
  return {n, std::move(conn)};
}

CirculantSpec build_paley(int p) {
  check_paley_prime(p);
  const auto is_residue = residue_table(p);
  std::vector<int> conn;
  for (int s = 1; s <= p / 2; ++s) {
    if (is_residue[s]) conn.push_back(s);
  }
  return {p, std::move(conn)};
}

Graph complement(const Graph& g) {
  const int n = g.size();
  GraphBuilder b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!g.adjacent(i, j)) b.add_edge(i, j);
    }
  }
  return std::move(b).build();
}

Localization localize(const Graph& g, std::span<const int> pins) {
  std::set<int> seen;
  for (int v : pins) {
    check_vertex(g.size(), v);
    if (!seen.insert(v).second) throw std::invalid_argument("repeated pin vertex");
  }
  Localization out;
  for (int v = 0; v < g.size(); ++v) {
    if (seen.count(v)) continue;
    const bool common = std::all_of(pins.begin(), pins.end(),
                                     [&](int pin) { return g.adjacent(pin, v); });
    if (common) out.labels.push_back(v);
  }
  const int m = static_cast<int>(out.labels.size());
  GraphBuilder b(m);
  for (int a = 0; a < m; ++a) {
    for (int c = a + 1; c < m; ++c) {
      if (g.adjacent(out.labels[a], out.labels[c])) b.add_edge(a, c);
    }
  }
  out.graph = std::move(b).build();
  return out;
}

PaleyLocalization paley_localization(int p) {
  check_paley_prime(p);
  const auto is_residue = residue_table(p);
  const int m = (p - 1) / 2;
  const long long g = primitive_root(p);
  const long long h = g * g % p;
  std::vector<int> residue_of(m);
  long long x = 1;
  for (int k = 0; k < m; ++k) {
    residue_of[k] = static_cast<int>(x);
    x = x * h % p;
  }
  std::vector<int> conn;
  for (int k = 1; k <= m / 2; ++k) {
    if (is_residue[(residue_of[k] - 1 + p) % p]) conn.push_back(k);
  }
  return {CirculantSpec(m, std::move(conn)), std::move(residue_of)};
}

Graph strong_product(const Graph& g, const Graph& h, int cap) {
  const long long total = static_cast<long long>(g.size()) * h.size();
  if (total > cap) {
    throw std::length_error("strong product has " + std::to_string(total) +
                            " vertices, cap is " + std::to_string(cap));
  }
  const int nh = h.size();
  GraphBuilder b(static_cast<int>(total));
  auto close = [](const Graph& x, int a, int c) { return a == c || x.adjacent(a, c); };
  for (int u1 = 0; u1 < g.size(); ++u1) {
    for (int v1 = 0; v1 < nh; ++v1) {
      const int a = u1 * nh + v1;
      for (int u2 = u1; u2 < g.size(); ++u2) {
        if (!close(g, u1, u2)) continue;
        for (int v2 = 0; v2 < nh; ++v2) {
          const int c = u2 * nh + v2;
          if (c <= a || !close(h, v1, v2)) continue;
          b.add_edge(a, c);
        }
      }
    }
  }
  return std::move(b).build();
}

Graph strong_power(const Graph& g, int k, int cap) {
  if (k < 1) throw std::invalid_argument("strong power needs k >= 1");
  Graph out = g;
  for (int i = 1; i < k; ++i) out = strong_product(out, g, cap);
  return out;
}

bool is_isomorphism(const Graph& g, const Graph& h, std::span<const int> perm) {
  const int n = g.size();
  if (h.size() != n || static_cast<int>(perm.size()) != n) return false;
  std::vector<bool> hit(n, false);
  for (int v : perm) {
    if (v < 0 || v >= n || hit[v]) return false;
    hit[v] = true;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (g.adjacent(i, j) != h.adjacent(perm[i], perm[j])) return false;
    }
  }
  return true;
}

// --------------------------------------------------------- Text formats

std::string to_text(const Graph& g) {
  std::ostringstream os;
  os << "n " << g.size() << '\n';
  for (const auto& [i, j] : g.edges()) os << i << ' ' << j << '\n';
  return os.str();
}

Graph graph_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int n = -1;
  std::set<Edge> seen;
  std::vector<Edge> edges;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    std::istringstream fields{std::string(body)};
    if (n < 0) {
      std::string tag;
      if (!(fields >> tag >> n) || tag != "n" || n < 0) {
        throw std::invalid_argument("line 1: expected 'n <count>'");
      }
      continue;
    }
    int i = 0;
    int j = 0;
    std::string extra;
    if (!(fields >> i >> j) || (fields >> extra)) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'i j'");
    }
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": pair out of range");
    }
    const Edge key{std::min(i, j), std::max(i, j)};
    if (!seen.insert(key).second) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": duplicate pair");
    }
    edges.push_back(key);
  }
  if (n < 0) throw std::invalid_argument("empty graph text");
  return Graph(n, edges);
}

std::string to_text(const CirculantSpec& spec) {
  std::string out = "circulant " + std::to_string(spec.n()) + " : ";
  for (std::size_t k = 0; k < spec.conn().size(); ++k) {
    if (k) out += ',';
    out += std::to_string(spec.conn()[k]);
  }
  return out;
}

CirculantSpec circulant_from_text(std::string_view text) {
  text = trim(text);
  constexpr std::string_view tag = "circulant";
  if (!text.starts_with(tag)) throw std::invalid_argument("expected 'circulant <n> : ...'");
  text.remove_prefix(tag.size());
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("missing ':'");
  const int n = parse_int(text.substr(0, colon));
  std::vector<int> conn;
  auto rest = trim(text.substr(colon + 1));
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    conn.push_back(parse_int(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return {n, std::move(conn)};
}

}  // namespace thetalab
