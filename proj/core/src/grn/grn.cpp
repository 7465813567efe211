#include "mappfn/grn/grn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mappfn::grn {
namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

/// Index of an arbitrary draw from unnormalized non-negative weights.
int draw_weighted(const std::vector<double>& weights, Rng& rng) {
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  return pick(rng);
}

/// Edge indices of one cycle, or empty if the graph is acyclic. Deterministic:
/// DFS from the lowest-numbered unvisited gene, out-edges in storage order.
std::vector<std::size_t> find_cycle(const Grn& grn) {
  std::vector<std::vector<std::size_t>> out(idx(grn.genes));
  for (std::size_t e = 0; e < grn.edges.size(); ++e) out[idx(grn.edges[e].regulator)].push_back(e);

  enum class Mark { kNew, kActive, kDone };
  std::vector<Mark> mark(idx(grn.genes), Mark::kNew);
  std::vector<std::size_t> path_edges;  // edge taken to reach each stacked gene

  struct Frame {
    int gene;
    std::size_t next = 0;
  };
  for (int root = 0; root < grn.genes; ++root) {
    if (mark[idx(root)] != Mark::kNew) continue;
    std::vector<Frame> stack{{root}};
    mark[idx(root)] = Mark::kActive;
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next == out[idx(top.gene)].size()) {
        mark[idx(top.gene)] = Mark::kDone;
        stack.pop_back();
        if (!path_edges.empty() && !stack.empty()) path_edges.pop_back();
        continue;
      }
      const std::size_t e = out[idx(top.gene)][top.next++];
      const int child = grn.edges[e].target;
      if (mark[idx(child)] == Mark::kActive) {
        // Walk back along the path until the edge leaving `child`.
        std::vector<std::size_t> cycle{e};
        for (auto it = path_edges.rbegin(); it != path_edges.rend(); ++it) {
          if (grn.edges[*it].target == child) break;
          cycle.push_back(*it);
          if (grn.edges[*it].regulator == child) break;
        }
        return cycle;
      }
      if (mark[idx(child)] == Mark::kNew) {
        mark[idx(child)] = Mark::kActive;
        path_edges.push_back(e);
        stack.push_back({child});
      }
    }
  }
  return {};
}

}  // namespace

GrnConfig GrnConfig::sample(int genes, Rng& rng) {
  GrnConfig cfg;
  cfg.genes = genes;
  cfg.k_groups = std::uniform_int_distribution<int>(1, 3)(rng);
  cfg.p_sparsity = std::uniform_real_distribution<double>(1.5, 3.0)(rng);
  cfg.delta_in = std::uniform_real_distribution<double>(10.0, 300.0)(rng);
  cfg.delta_out = std::uniform_real_distribution<double>(1.0, 30.0)(rng);
  cfg.w_modularity = std::uniform_real_distribution<double>(1.0, 900.0)(rng);
  return cfg;
}

void GrnConfig::validate() const {
  if (genes < 2) throw InvalidArgument("GrnConfig: need at least 2 genes");
  if (k_groups < 1) throw InvalidArgument("GrnConfig: k_groups must be >= 1");
  if (p_sparsity < 0.0 || delta_in <= 0.0 || delta_out <= 0.0 || w_modularity <= 0.0) {
    throw InvalidArgument("GrnConfig: sparsity must be >= 0 and uniformity/modularity terms > 0");
  }
}

std::vector<int> Grn::in_degree() const {
  std::vector<int> deg(idx(genes), 0);
  for (const auto& e : edges) ++deg[idx(e.target)];
  return deg;
}

std::vector<int> Grn::out_degree() const {
  std::vector<int> deg(idx(genes), 0);
  for (const auto& e : edges) ++deg[idx(e.regulator)];
  return deg;
}

std::vector<int> Grn::master_regulators() const {
  const auto in = in_degree();
  const auto out = out_degree();
  std::vector<int> mrs;
  for (int g = 0; g < genes; ++g) {
    if (in[idx(g)] == 0 && out[idx(g)] >= 1) mrs.push_back(g);
  }
  return mrs;
}

bool Grn::is_acyclic() const { return find_cycle(*this).empty(); }

std::vector<int> Grn::topological_order() const {
  std::vector<int> in = in_degree();
  std::vector<std::vector<int>> children(idx(genes));
  for (const auto& e : edges) children[idx(e.regulator)].push_back(e.target);
  std::vector<int> ready;
  for (int g = genes - 1; g >= 0; --g) {
    if (in[idx(g)] == 0) ready.push_back(g);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    const int g = ready.back();
    ready.pop_back();
    order.push_back(g);
    for (const int c : children[idx(g)]) {
      if (--in[idx(c)] == 0) ready.push_back(c);
    }
  }
  if (static_cast<int>(order.size()) != genes) throw NumericalFailure("GRN has a cycle");
  return order;
}

Grn sample_grn(const GrnConfig& config, Rng& rng) {
  config.validate();
  Grn grn;
  grn.genes = config.genes;
  grn.group.resize(idx(config.genes));
  std::uniform_int_distribution<int> pick_group(0, config.k_groups - 1);
  for (auto& g : grn.group) g = pick_group(rng);
  grn.decay.resize(idx(config.genes));
  std::uniform_real_distribution<double> decay(0.5, 1.0);
  for (auto& l : grn.decay) l = decay(rng);
  grn.basal_rate.assign(idx(config.genes), 0.0);

  std::poisson_distribution<int> edge_count(config.p_sparsity * config.genes);
  const int edges = edge_count(rng);
  std::uniform_real_distribution<double> magnitude(1.0, 5.0);
  std::bernoulli_distribution repress(0.5);

  std::vector<int> in(idx(config.genes), 0);
  std::vector<int> out(idx(config.genes), 0);
  std::vector<std::vector<bool>> linked(idx(config.genes), std::vector<bool>(idx(config.genes), false));
  std::vector<double> weights(idx(config.genes));
  for (int e = 0; e < edges; ++e) {
    for (int g = 0; g < config.genes; ++g) {
      // A target that is already regulated by every other gene cannot take a new edge.
      weights[idx(g)] = in[idx(g)] < config.genes - 1 ? in[idx(g)] + config.delta_in : 0.0;
    }
    const int target = draw_weighted(weights, rng);
    for (int g = 0; g < config.genes; ++g) {
      const bool available = g != target && !linked[idx(g)][idx(target)];
      const double modularity = grn.group[idx(g)] == grn.group[idx(target)] ? config.w_modularity : 1.0;
      weights[idx(g)] = available ? (out[idx(g)] + config.delta_out) * modularity : 0.0;
    }
    const int regulator = draw_weighted(weights, rng);
    linked[idx(regulator)][idx(target)] = true;
    ++in[idx(target)];
    ++out[idx(regulator)];
    const double k = magnitude(rng);
    grn.edges.push_back({regulator, target, repress(rng) ? -k : k, 1.0});
  }
  return grn;
}

Grn break_cycles(Grn grn) {
  for (auto cycle = find_cycle(grn); !cycle.empty(); cycle = find_cycle(grn)) {
    const auto weakest = *std::min_element(cycle.begin(), cycle.end(), [&](std::size_t a, std::size_t b) {
      const double wa = std::abs(grn.edges[a].strength);
      const double wb = std::abs(grn.edges[b].strength);
      return wa < wb || (wa == wb && a < b);
    });
    grn.edges.erase(grn.edges.begin() + static_cast<std::ptrdiff_t>(weakest));
  }
  return grn;
}

Grn ensure_master_regulators(Grn grn) {
  while (grn.master_regulators().empty()) {
    const auto in = grn.in_degree();
    const auto out = grn.out_degree();
    std::vector<int> candidates;
    for (int g = 0; g < grn.genes; ++g) {
      if (out[idx(g)] >= 1) candidates.push_back(g);
    }
    if (candidates.empty()) throw InvalidArgument("ensure_master_regulators: no gene has an outgoing edge");
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) { return in[idx(a)] < in[idx(b)]; });
    const auto promote = std::min(candidates.size(), static_cast<std::size_t>(std::ceil(0.05 * grn.genes)));
    std::vector<bool> promoted(idx(grn.genes), false);
    for (std::size_t i = 0; i < promote; ++i) promoted[idx(candidates[i])] = true;
    std::erase_if(grn.edges, [&](const Edge& e) { return promoted[idx(e.target)]; });
  }
  return grn;
}

void assign_production_rates(Grn& grn, Rng& rng) {
  const auto in = grn.in_degree();
  grn.basal_rate.assign(idx(grn.genes), 0.0);
  // Unif over [0.5, 2] U [3, 5]: pick the piece proportionally to its length.
  std::bernoulli_distribution upper(2.0 / 3.5);
  std::uniform_real_distribution<double> low(0.5, 2.0);
  std::uniform_real_distribution<double> high(3.0, 5.0);
  for (int g = 0; g < grn.genes; ++g) {
    const double b = upper(rng) ? high(rng) : low(rng);
    if (in[idx(g)] == 0) grn.basal_rate[idx(g)] = b;
  }
}

double hill(double x, double half_response, double gamma) {
  if (x <= 0.0) return 0.0;
  const double xg = std::pow(x, gamma);
  return xg / (std::pow(half_response, gamma) + xg);
}

std::vector<double> deterministic_steady_state(const Grn& grn, double hill_gamma) {
  std::vector<std::vector<const Edge*>> incoming(idx(grn.genes));
  for (const auto& e : grn.edges) incoming[idx(e.target)].push_back(&e);
  std::vector<double> x(idx(grn.genes), 0.0);
  for (const int g : grn.topological_order()) {
    double production = grn.basal_rate[idx(g)];
    for (const Edge* e : incoming[idx(g)]) {
      const double h = hill(x[idx(e->regulator)], e->half_response, hill_gamma);
      production += e->strength > 0.0 ? e->strength * h : -e->strength * (1.0 - h);
    }
    x[idx(g)] = production / grn.decay[idx(g)];
  }
  return x;
}

void calibrate_half_responses(Grn& grn) {
  // With every half-response equal to its regulator's steady-state level, each
  // Hill term sits at 1/2, so the levels follow from a single topological pass.
  std::vector<std::vector<Edge*>> incoming(idx(grn.genes));
  for (auto& e : grn.edges) incoming[idx(e.target)].push_back(&e);
  std::vector<double> level(idx(grn.genes), 0.0);
  for (const int g : grn.topological_order()) {
    double production = grn.basal_rate[idx(g)];
    for (const Edge* e : incoming[idx(g)]) production += 0.5 * std::abs(e->strength);
    level[idx(g)] = production / grn.decay[idx(g)];
  }
  for (auto& e : grn.edges) e.half_response = std::max(level[idx(e.regulator)], 1e-3);
}

Grn build_network(const GrnConfig& config, Rng& rng) {
  Grn grn = ensure_master_regulators(break_cycles(sample_grn(config, rng)));
  assign_production_rates(grn, rng);
  calibrate_half_responses(grn);
  return grn;
}

Grn knockout(const Grn& grn, int gene) {
  if (gene < 0 || gene >= grn.genes) {
    throw InvalidArgument("knockout: gene " + std::to_string(gene) + " out of range");
  }
  Grn out = grn;
  std::erase_if(out.edges, [&](const Edge& e) { return e.regulator == gene || e.target == gene; });
  out.basal_rate[idx(gene)] = 0.0;
  return out;
}

}  // namespace mappfn::grn
