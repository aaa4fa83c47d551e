#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mlspread/csv.hpp"
#include "mlspread/rng.hpp"

namespace mlspread {

using ActorId = std::uint32_t;
using LayerId = std::uint32_t;

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public NetworkError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : NetworkError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Actors, layers and intra-layer undirected edges. Immutable once built, so a
/// single instance can be shared by any number of concurrent simulations.
class MultilayerNetwork {
 public:
  struct Layer {
    std::string name;
    std::vector<char> present;          // indexed by actor
    std::size_t num_present = 0;
    std::vector<std::uint32_t> offsets;  // CSR row offsets, size num_actors + 1
    std::vector<ActorId> targets;        // sorted ascending within each row
    std::vector<std::pair<ActorId, ActorId>> edges;  // first < second, sorted
  };

  std::size_t num_actors() const noexcept { return actor_labels_.size(); }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  LayerId contact_layer() const noexcept { return contact_; }

  const std::string& actor_label(ActorId a) const { return actor_labels_.at(a); }
  const std::string& layer_name(LayerId l) const { return layers_.at(l).name; }
  const Layer& layer(LayerId l) const { return layers_.at(l); }

  std::optional<LayerId> find_layer(std::string_view name) const {
    for (LayerId l = 0; l < layers_.size(); ++l)
      if (layers_[l].name == name) return l;
    return std::nullopt;
  }

  std::optional<ActorId> find_actor(std::string_view label) const {
    auto it = actor_index_.find(std::string(label));
    if (it == actor_index_.end()) return std::nullopt;
    return it->second;
  }

  bool is_present(ActorId a, LayerId l) const { return layers_.at(l).present.at(a) != 0; }

  std::size_t num_edges() const noexcept {
    std::size_t total = 0;
    for (const auto& layer : layers_) total += layer.edges.size();
    return total;
  }

  /// Adjacent actors of `a` on layer `l`, ascending. Empty when `a` is absent from `l`.
  std::span<const ActorId> neighbors(ActorId a, LayerId l) const {
    const Layer& layer = layers_.at(l);
    return {layer.targets.data() + layer.offsets[a], layer.targets.data() + layer.offsets[a + 1]};
  }

  std::size_t degree(ActorId a, LayerId l) const { return neighbors(a, l).size(); }

 private:
  friend class NetworkBuilder;

  std::vector<std::string> actor_labels_;
  std::unordered_map<std::string, ActorId> actor_index_;
  std::vector<Layer> layers_;
  LayerId contact_ = 0;
};

/// Accumulates actors, layers and edges; ids are handed out in first-appearance order.
class NetworkBuilder {
 public:
  ActorId add_actor(std::string_view label) {
    auto [it, inserted] = actor_index_.try_emplace(std::string(label), static_cast<ActorId>(actor_labels_.size()));
    if (inserted) actor_labels_.emplace_back(label);
    return it->second;
  }

  LayerId add_layer(std::string_view name) {
    for (LayerId l = 0; l < layer_names_.size(); ++l)
      if (layer_names_[l] == name) return l;
    layer_names_.emplace_back(name);
    layer_edges_.emplace_back();
    layer_members_.emplace_back();
    return static_cast<LayerId>(layer_names_.size() - 1);
  }

  void add_presence(ActorId a, LayerId l) { layer_members_.at(l).push_back(a); }

  /// Records an undirected edge; duplicates and reversed duplicates collapse.
  void add_edge(ActorId a, ActorId b, LayerId l) {
    if (a == b) throw NetworkError("self-loop on actor '" + actor_labels_.at(a) + "'");
    if (a > b) std::swap(a, b);
    layer_edges_.at(l).emplace_back(a, b);
    layer_members_[l].push_back(a);
    layer_members_[l].push_back(b);
  }

  std::size_t num_actors() const noexcept { return actor_labels_.size(); }

  MultilayerNetwork build(std::string_view contact_layer_name) && {
    MultilayerNetwork net;
    if (actor_labels_.empty()) throw NetworkError("network has no actors");
    if (layer_names_.empty()) throw NetworkError("network has no layers");

    const std::size_t n = actor_labels_.size();
    bool contact_found = false;
    for (LayerId l = 0; l < layer_names_.size(); ++l) {
      if (layer_names_[l] == contact_layer_name) {
        net.contact_ = l;
        contact_found = true;
      }
    }
    if (!contact_found) throw NetworkError("unknown contact layer '" + std::string(contact_layer_name) + "'");

    net.layers_.resize(layer_names_.size());
    for (LayerId l = 0; l < layer_names_.size(); ++l) {
      auto& layer = net.layers_[l];
      layer.name = layer_names_[l];
      layer.present.assign(n, 0);
      for (ActorId a : layer_members_[l]) layer.present[a] = 1;
      layer.num_present = static_cast<std::size_t>(std::count(layer.present.begin(), layer.present.end(), 1));

      auto& edges = layer_edges_[l];
      std::sort(edges.begin(), edges.end());
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

      std::vector<std::uint32_t> degree(n, 0);
      for (auto [a, b] : edges) {
        ++degree[a];
        ++degree[b];
      }
      layer.offsets.assign(n + 1, 0);
      for (std::size_t a = 0; a < n; ++a) layer.offsets[a + 1] = layer.offsets[a] + degree[a];
      layer.targets.resize(layer.offsets[n]);
      std::vector<std::uint32_t> cursor(layer.offsets.begin(), layer.offsets.end() - 1);
      for (auto [a, b] : edges) {
        layer.targets[cursor[a]++] = b;
        layer.targets[cursor[b]++] = a;
      }
      for (std::size_t a = 0; a < n; ++a)
        std::sort(layer.targets.begin() + layer.offsets[a], layer.targets.begin() + layer.offsets[a + 1]);
      layer.edges = std::move(edges);
    }
    net.actor_labels_ = std::move(actor_labels_);
    net.actor_index_ = std::move(actor_index_);
    return net;
  }

 private:
  std::vector<std::string> actor_labels_;
  std::unordered_map<std::string, ActorId> actor_index_;
  std::vector<std::string> layer_names_;
  std::vector<std::vector<std::pair<ActorId, ActorId>>> layer_edges_;
  std::vector<std::vector<ActorId>> layer_members_;
};

/// Reads `actor actor layer` triples, one per line. `#` starts a comment and
/// blank lines are skipped; tokens after the third (e.g. weights) are ignored.
inline MultilayerNetwork parse_multilayer_edgelist(std::istream& in, std::string_view contact_layer_name) {
  NetworkBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string a, b, layer;
    if (!(tokens >> a)) continue;
    if (!(tokens >> b >> layer)) throw ParseError(line_no, "expected 'actor actor layer', got '" + line + "'");
    if (a == b) throw ParseError(line_no, "self-loop on actor '" + a + "'");
    const ActorId ia = builder.add_actor(a);
    const ActorId ib = builder.add_actor(b);
    builder.add_edge(ia, ib, builder.add_layer(layer));
  }
  return std::move(builder).build(contact_layer_name);
}

inline MultilayerNetwork parse_multilayer_edgelist(std::string_view text, std::string_view contact_layer_name) {
  std::istringstream in{std::string(text)};
  return parse_multilayer_edgelist(in, contact_layer_name);
}

/// Writes the network back in the edge-list format; actors without any edge are not representable.
inline void write_edgelist(std::ostream& out, const MultilayerNetwork& net) {
  for (LayerId l = 0; l < net.num_layers(); ++l)
    for (auto [a, b] : net.layer(l).edges)
      out << net.actor_label(a) << ' ' << net.actor_label(b) << ' ' << net.layer_name(l) << '\n';
}

struct LayerSpec {
  std::string name;
  double edge_probability = 0.0;
};

/// Independent Erdős–Rényi layers over a shared actor set. Every actor is
/// present on every layer. Edge draws are keyed by (seed, pair, layer).
inline MultilayerNetwork generate_synthetic(std::size_t num_actors, std::span<const LayerSpec> layers,
                                            std::string_view contact_layer_name, std::uint64_t seed) {
  if (num_actors < 2) throw NetworkError("synthetic network needs at least 2 actors");
  if (layers.empty()) throw NetworkError("synthetic network needs at least one layer");
  NetworkBuilder builder;
  for (std::size_t a = 0; a < num_actors; ++a) builder.add_actor(std::to_string(a));
  for (const auto& spec : layers) {
    if (!(spec.edge_probability >= 0.0 && spec.edge_probability <= 1.0))
      throw NetworkError("edge probability for layer '" + spec.name + "' outside [0,1]");
    const LayerId l = builder.add_layer(spec.name);
    for (ActorId a = 0; a < num_actors; ++a) {
      builder.add_presence(a, l);
      for (ActorId b = a + 1; b < num_actors; ++b) {
        const EventKey key{seed, 0, Channel::Topology, a, b, l};
        if (event_bernoulli(key, spec.edge_probability)) builder.add_edge(a, b, l);
      }
    }
  }
  return std::move(builder).build(contact_layer_name);
}

struct NetworkSummary {
  std::size_t num_layers = 0;
  std::size_t num_actors = 0;
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  double avg_degree = 0.0;
  std::map<std::string, double> per_layer_avg_degree;
};

inline NetworkSummary summarize_network(const MultilayerNetwork& net) {
  NetworkSummary s;
  s.num_layers = net.num_layers();
  s.num_actors = net.num_actors();
  for (LayerId l = 0; l < net.num_layers(); ++l) {
    const auto& layer = net.layer(l);
    s.num_nodes += layer.num_present;
    s.num_edges += layer.edges.size();
    s.per_layer_avg_degree[layer.name] =
        layer.num_present == 0 ? 0.0 : 2.0 * static_cast<double>(layer.edges.size()) / static_cast<double>(layer.num_present);
  }
  s.avg_degree = s.num_actors == 0 ? 0.0 : 2.0 * static_cast<double>(s.num_edges) / static_cast<double>(s.num_actors);
  return s;
}

/// Network row followed by one row per layer (in layer-id order).
inline void write_summary_csv(std::ostream& out, std::string_view network_name, const MultilayerNetwork& net) {
  const NetworkSummary s = summarize_network(net);
  out << "network,layers,actors,nodes,edges,avg_degree\n";
  out << network_name << ',' << s.num_layers << ',' << s.num_actors << ',' << s.num_nodes << ',' << s.num_edges
      << ',' << csv::fixed(s.avg_degree, 4) << '\n';
  out << "layer,contact,nodes,edges,avg_degree\n";
  for (LayerId l = 0; l < net.num_layers(); ++l) {
    const auto& layer = net.layer(l);
    out << layer.name << ',' << (l == net.contact_layer() ? 1 : 0) << ',' << layer.num_present << ','
        << layer.edges.size() << ',' << csv::fixed(s.per_layer_avg_degree.at(layer.name), 4) << '\n';
  }
}

}  // namespace mlspread
