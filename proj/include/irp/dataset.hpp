#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "irp/error.hpp"

namespace irp {

struct Observation {
  std::vector<double> covariates;
  double response = 0.0;
  double weight = 1.0;
};

// Observations with pairwise distinct covariate vectors. Rows of the
// source data that shared a point were pooled: the merged response is
// their weighted mean and the merged weight their total weight.
struct WeightedDataset {
  std::size_t dim = 0;
  std::vector<Observation> observations;
  // provenance[i] lists the source rows pooled into observation i.
  std::vector<std::vector<std::size_t>> provenance;
  // Responses of the source rows, indexed by source row.
  std::vector<double> source_responses;

  [[nodiscard]] std::size_t size() const noexcept { return observations.size(); }
  [[nodiscard]] bool empty() const noexcept { return observations.empty(); }
  [[nodiscard]] std::size_t source_size() const noexcept { return source_responses.size(); }

  [[nodiscard]] std::vector<double> responses() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = observations[i].response;
    return out;
  }
  [[nodiscard]] std::vector<double> weights() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = observations[i].weight;
    return out;
  }
  [[nodiscard]] const std::vector<double>& point(std::size_t i) const {
    return observations[i].covariates;
  }
};

// a ⪯ b coordinate-wise.
inline bool dominated_by(std::span<const double> a, std::span<const double> b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// CSV input

// Column roles. A header is detected when the first line does not parse as
// numbers. With a header, the columns named `response_name` and
// `weight_name` take those roles; without one, the trailing column is the
// response and there is no weight column.
struct CsvSchema {
  std::string response_name = "y";
  std::string weight_name = "w";
};

struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::string_view view(line);
    if (view.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto fields = detail::split_fields(view);
    std::vector<double> values(fields.size());
    bool numeric = true;
    std::size_t bad = 0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (!detail::parse_double(fields[k], values[k])) {
        numeric = false;
        bad = k;
        break;
      }
    }
    if (first) {
      first = false;
      width = fields.size();
      if (!numeric) {
        for (auto f : fields) table.header.emplace_back(f);
        continue;
      }
    }
    if (!numeric) {
      throw ParseError("cannot parse field " + std::to_string(bad + 1) + " ('" +
                           std::string(fields[bad]) + "') as a number",
                       line_no);
    }
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw ValidationError("line " + std::to_string(line_no) + ": non-finite value");
    }
    table.rows.push_back(std::move(values));
    table.line_numbers.push_back(line_no);
  }
  return table;
}

inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse_csv(in);
}

// Splits a parsed table into observations according to `schema`.
inline std::vector<Observation> observations_from_table(const CsvTable& table,
                                                        const CsvSchema& schema = {}) {
  std::size_t width = table.header.size();
  if (width == 0 && !table.rows.empty()) width = table.rows.front().size();
  if (width == 0) return {};

  std::ptrdiff_t response_col = -1;
  std::ptrdiff_t weight_col = -1;
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    if (table.header[k] == schema.response_name) response_col = static_cast<std::ptrdiff_t>(k);
    if (table.header[k] == schema.weight_name) weight_col = static_cast<std::ptrdiff_t>(k);
  }
  if (response_col < 0) {
    response_col = static_cast<std::ptrdiff_t>(width) - 1;
    if (response_col == weight_col) --response_col;
  }
  if (response_col < 0) throw ValidationError("no response column");

  std::vector<Observation> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Observation obs;
    obs.covariates.reserve(width - 1);
    for (std::size_t k = 0; k < width; ++k) {
      const auto col = static_cast<std::ptrdiff_t>(k);
      if (col == response_col) {
        obs.response = row[k];
      } else if (col == weight_col) {
        obs.weight = row[k];
      } else {
        // -0.0 and 0.0 are the same point of the order
        obs.covariates.push_back(row[k] == 0.0 ? 0.0 : row[k]);
      }
    }
    if (!(obs.weight > 0.0)) {
      throw ValidationError("line " + std::to_string(table.line_numbers[r]) +
                            ": weight must be positive");
    }
    out.push_back(std::move(obs));
  }
  return out;
}

inline std::vector<Observation> load_csv(const std::string& path, const CsvSchema& schema = {}) {
  return observations_from_table(read_csv_table(path), schema);
}

// ---------------------------------------------------------------------------
// Duplicate merging

inline WeightedDataset merge_duplicates(const std::vector<Observation>& raw) {
  if (raw.empty()) throw ValidationError("cannot merge an empty observation list");
  const std::size_t dim = raw.front().covariates.size();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& obs = raw[i];
    if (obs.covariates.size() != dim) {
      throw ValidationError("row " + std::to_string(i) + " has dimension " +
                            std::to_string(obs.covariates.size()) + ", expected " +
                            std::to_string(dim));
    }
    if (!(obs.weight > 0.0) || !std::isfinite(obs.weight)) {
      throw ValidationError("row " + std::to_string(i) + ": weight must be positive and finite");
    }
    if (!std::isfinite(obs.response)) {
      throw ValidationError("row " + std::to_string(i) + ": response must be finite");
    }
    for (double v : obs.covariates) {
      if (!std::isfinite(v)) throw ValidationError("row " + std::to_string(i) + ": non-finite covariate");
    }
  }

  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw[a].covariates < raw[b].covariates;
  });

  // Representative (first source row) of every run of identical points.
  std::vector<std::size_t> group_of(raw.size());
  std::vector<std::size_t> first_row;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (pos == 0 || raw[order[pos]].covariates != raw[order[pos - 1]].covariates) {
      first_row.push_back(order[pos]);
    }
    group_of[order[pos]] = first_row.size() - 1;
  }
  // Output in order of first appearance.
  std::vector<std::size_t> by_appearance(first_row.size());
  std::iota(by_appearance.begin(), by_appearance.end(), 0);
  std::sort(by_appearance.begin(), by_appearance.end(),
            [&](std::size_t a, std::size_t b) { return first_row[a] < first_row[b]; });
  std::vector<std::size_t> slot(first_row.size());
  for (std::size_t k = 0; k < by_appearance.size(); ++k) slot[by_appearance[k]] = k;

  WeightedDataset out;
  out.dim = dim;
  out.observations.resize(first_row.size());
  out.provenance.resize(first_row.size());
  out.source_responses.resize(raw.size());
  std::vector<double> weighted_sum(first_row.size(), 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t g = slot[group_of[i]];
    auto& obs = out.observations[g];
    if (out.provenance[g].empty()) obs.covariates = raw[i].covariates;
    out.provenance[g].push_back(i);
    obs.weight = out.provenance[g].size() == 1 ? raw[i].weight : obs.weight + raw[i].weight;
    weighted_sum[g] += raw[i].weight * raw[i].response;
    out.source_responses[i] = raw[i].response;
  }
  for (std::size_t g = 0; g < out.observations.size(); ++g) {
    auto& obs = out.observations[g];
    obs.response = out.provenance[g].size() == 1 ? raw[out.provenance[g].front()].response
                                                 : weighted_sum[g] / obs.weight;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dominance order

struct Edge {
  std::uint32_t from;
  std::uint32_t to;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// The constraint set {(i, j) : x_i ⪯ x_j, i != j} as a DAG, optionally
// transitively reduced. Edges are stored sorted by (from, to) so the
// successors of a node form a contiguous range.
class DominanceDag {
 public:
  DominanceDag() = default;

  DominanceDag(std::size_t node_count, std::vector<Edge> edges, bool reduced)
      : n_(node_count), edges_(std::move(edges)), reduced_(reduced) {
    for (const auto& e : edges_) {
      if (e.from >= n_ || e.to >= n_ || e.from == e.to) {
        throw ValidationError("edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                              ") invalid for " + std::to_string(n_) + " nodes");
      }
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.from != b.from ? a.from < b.from : a.to < b.to; });
    offsets_.assign(n_ + 1, 0);
    for (const auto& e : edges_) ++offsets_[e.from + 1];
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  }

  [[nodiscard]] std::size_t node_count() const noexcept { return n_; }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
  [[nodiscard]] bool reduced() const noexcept { return reduced_; }
  [[nodiscard]] std::span<const Edge> edges() const noexcept { return edges_; }

  [[nodiscard]] std::span<const Edge> out_edges(std::size_t i) const {
    return std::span<const Edge>(edges_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  bool reduced_ = false;
};

// Reduction is the default for low dimension and for ternary data, where it
// removes most of the O(n^2) comparable pairs.
inline bool default_reduce(const WeightedDataset& data) {
  if (data.dim <= 3) return true;
  for (const auto& obs : data.observations) {
    for (double v : obs.covariates) {
      if (v != 0.0 && v != 1.0 && v != 2.0) return false;
    }
  }
  return true;
}

inline DominanceDag build_order(const std::vector<std::vector<double>>& points, bool reduce) {
  const std::size_t n = points.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("too many points");
  std::vector<Edge> edges;
  if (!reduce) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && dominated_by(points[i], points[j]) && points[i] != points[j]) {
          edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
        }
      }
    }
    return DominanceDag(n, std::move(edges), false);
  }

  // up[i] holds every j with x_i ⪯ x_j, j != i. Successors of i are visited
  // in lexicographic order, which is a topological order of ⪯; a successor
  // is kept unless some earlier kept successor already reaches it.
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> up(n * words, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && dominated_by(points[i], points[j]) && points[i] != points[j]) {
        up[i * words + j / 64] |= std::uint64_t{1} << (j % 64);
      }
    }
  }
  std::vector<std::size_t> lex(n);
  std::iota(lex.begin(), lex.end(), 0);
  std::sort(lex.begin(), lex.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[lex[r]] = r;

  std::vector<std::uint64_t> covered(words);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(covered.begin(), covered.end(), 0);
    const std::uint64_t* row = &up[i * words];
    for (std::size_t r = rank[i] + 1; r < n; ++r) {
      const std::size_t j = lex[r];
      const std::uint64_t bit = std::uint64_t{1} << (j % 64);
      if (!(row[j / 64] & bit) || (covered[j / 64] & bit)) continue;
      edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      const std::uint64_t* reach = &up[j * words];
      for (std::size_t w = 0; w < words; ++w) covered[w] |= reach[w];
    }
  }
  return DominanceDag(n, std::move(edges), true);
}

inline DominanceDag build_order(const WeightedDataset& data, bool reduce) {
  std::vector<std::vector<double>> points;
  points.reserve(data.size());
  for (const auto& obs : data.observations) points.push_back(obs.covariates);
  return build_order(points, reduce);
}

inline DominanceDag build_order(const WeightedDataset& data) {
  return build_order(data, default_reduce(data));
}

// Debug export: one "i j" line per edge, 0-based.
inline void write_edge_list(std::ostream& os, const DominanceDag& dag) {
  for (const auto& e : dag.edges()) os << e.from << ' ' << e.to << '\n';
}

}  // namespace irp
