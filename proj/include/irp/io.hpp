#pragma once

// Path files: a JSON document holding the training points, the partition
// tree and the per-iteration cut records, enough to rebuild every M_k.

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "irp/dataset.hpp"
#include "irp/error.hpp"
#include "irp/losses.hpp"
#include "irp/path.hpp"

namespace irp {

inline constexpr int kPathFormatVersion = 1;

struct SavedPath {
  WeightedDataset data;
  IrpPath path;
  LossKind loss = LossKind::l2;
  double tol = 1e-9;
};

namespace detail {

inline nlohmann::json group_index(std::size_t g) {
  return g == kNoGroup ? nlohmann::json(nullptr) : nlohmann::json(g);
}

inline std::size_t read_index(const nlohmann::json& j) {
  return j.is_null() ? kNoGroup : j.get<std::size_t>();
}

// Final fit of a stored value on the loss scale reported to users.
inline double reported(LossKind loss, double fit) {
  return loss == LossKind::maxwell_muckstadt ? mm_recover(fit) : fit;
}

}  // namespace detail

inline nlohmann::json path_to_json(const SavedPath& saved, bool with_models = false) {
  using nlohmann::json;
  const auto& path = saved.path;
  json j;
  j["format"] = kPathFormatVersion;
  j["n"] = saved.data.size();
  j["d"] = saved.data.dim;
  j["loss"] = std::string(to_string(saved.loss));
  j["tol"] = saved.tol;
  j["truncated"] = path.truncated();

  json points = json::array();
  for (const auto& obs : saved.data.observations) points.push_back(obs.covariates);
  j["points"] = std::move(points);
  j["responses"] = std::vector<double>(path.responses().begin(), path.responses().end());
  j["weights"] = std::vector<double>(path.weights().begin(), path.weights().end());

  json groups = json::array();
  for (const auto& g : path.groups()) {
    groups.push_back({{"parent", detail::group_index(g.parent)},
                      {"created", g.created},
                      {"split", detail::group_index(g.split)},
                      {"size", g.size},
                      {"weight", g.weight},
                      {"fit", g.fit},
                      {"sum_squares", g.sum_squares}});
  }
  j["groups"] = std::move(groups);
  j["leaf_of"] = std::vector<std::size_t>(path.leaf_of().begin(), path.leaf_of().end());

  json iterations = json::array();
  for (const auto& c : path.cuts()) {
    iterations.push_back({{"k", c.k},
                          {"cut_value", c.value},
                          {"parent", c.parent},
                          {"lower_group", c.lower_group},
                          {"upper_group", c.upper_group},
                          {"sizes", {c.lower_size, c.upper_size}},
                          {"objective", c.objective}});
  }
  j["iterations"] = std::move(iterations);

  if (with_models) {
    json models = json::array();
    for (std::size_t k = 0; k <= path.iterations(); ++k) models.push_back(path.group_ids_at(k));
    j["models"] = std::move(models);
  }

  const auto model = model_at(path, path.iterations());
  json fits = json::array();
  for (double f : model.fits) fits.push_back(detail::reported(saved.loss, f));
  j["final"] = {{"k", path.iterations()}, {"blocks", model.groups}, {"fits", std::move(fits)}};
  return j;
}

inline SavedPath path_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<int>() != kPathFormatVersion) {
      throw ParseError("unsupported path format " + j.at("format").dump());
    }
    SavedPath saved;
    saved.loss = parse_loss(j.at("loss").get<std::string>());
    saved.tol = j.at("tol").get<double>();
    saved.data.dim = j.at("d").get<std::size_t>();
    const auto points = j.at("points").get<std::vector<std::vector<double>>>();
    auto y = j.at("responses").get<std::vector<double>>();
    auto w = j.at("weights").get<std::vector<double>>();
    if (points.size() != y.size() || w.size() != y.size() || j.at("n").get<std::size_t>() != y.size()) {
      throw ParseError("path file: point, response and weight counts differ");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != saved.data.dim) throw ParseError("path file: point " + std::to_string(i) + " has wrong dimension");
      saved.data.observations.push_back({points[i], y[i], w[i]});
      saved.data.provenance.push_back({i});
      saved.data.source_responses.push_back(y[i]);
    }

    std::vector<GroupRecord> groups;
    for (const auto& g : j.at("groups")) {
      groups.push_back({detail::read_index(g.at("parent")), g.at("created").get<std::size_t>(),
                        detail::read_index(g.at("split")), g.at("size").get<std::size_t>(),
                        g.at("weight").get<double>(), g.at("fit").get<double>(),
                        g.at("sum_squares").get<double>()});
    }
    std::vector<CutRecord> cuts;
    for (const auto& c : j.at("iterations")) {
      const auto sizes = c.at("sizes").get<std::vector<std::size_t>>();
      if (sizes.size() != 2) throw ParseError("path file: cut sizes must be a pair");
      cuts.push_back({c.at("k").get<std::size_t>(), c.at("cut_value").get<double>(),
                      c.at("parent").get<std::size_t>(), c.at("lower_group").get<std::size_t>(),
                      c.at("upper_group").get<std::size_t>(), sizes[0], sizes[1],
                      c.at("objective").get<double>()});
    }
    auto leaf_of = j.at("leaf_of").get<std::vector<std::size_t>>();
    saved.path = IrpPath(std::move(y), std::move(w), std::move(groups), std::move(cuts), std::move(leaf_of),
                         j.at("truncated").get<bool>());
    return saved;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("path file: ") + e.what());
  }
}

inline void write_path(const std::string& file, const SavedPath& saved, bool with_models = false) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot open '" + file + "' for writing");
  out << path_to_json(saved, with_models).dump(1) << '\n';
}

inline SavedPath read_path(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open '" + file + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + file + "': " + e.what());
  }
  return path_from_json(j);
}

// CSV value formatting shared by every writer: 17 significant digits.
inline std::ostream& csv_number(std::ostream& os, double v) {
  return os << std::setprecision(17) << v;
}

}  // namespace irp
