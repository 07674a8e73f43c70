#include "vinestress/dvine.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "vinestress/errors.hpp"
#include "vinestress/rng.hpp"

namespace vinestress {

DVineModel::DVineModel(std::vector<std::string> order, std::vector<std::vector<BivariateCopula>> trees)
    : order_(std::move(order)), trees_(std::move(trees)) {
  if (order_.empty()) throw InputError("D-vine order must contain at least the response");
  std::set<std::string> seen;
  for (const auto& label : order_)
    if (!seen.insert(label).second) throw InputError("duplicate label '" + label + "' in D-vine order");
  const std::size_t d = order_.size() - 1;
  if (trees_.size() != d)
    throw InputError("D-vine over " + std::to_string(d + 1) + " variables needs " + std::to_string(d) +
                     " trees, got " + std::to_string(trees_.size()));
  for (std::size_t t = 1; t <= d; ++t) {
    if (trees_[t - 1].size() != d + 1 - t)
      throw InputError("tree " + std::to_string(t) + " needs " + std::to_string(d + 1 - t) + " pair-copulas, got " +
                       std::to_string(trees_[t - 1].size()));
  }
}

DVineModel DVineModel::independent(std::vector<std::string> order) {
  const std::size_t d = order.empty() ? 0 : order.size() - 1;
  std::vector<std::vector<BivariateCopula>> trees;
  for (std::size_t t = 1; t <= d; ++t) trees.emplace_back(d + 1 - t);
  return DVineModel(std::move(order), std::move(trees));
}

const BivariateCopula& DVineModel::pair(std::size_t tree, std::size_t edge) const {
  if (tree < 1 || tree > trees_.size() || edge >= trees_[tree - 1].size())
    throw InputError("no pair-copula at tree " + std::to_string(tree) + ", edge " + std::to_string(edge));
  return trees_[tree - 1][edge];
}

std::size_t DVineModel::num_pairs() const {
  std::size_t k = 0;
  for (const auto& tree : trees_) k += tree.size();
  return k;
}

int DVineModel::num_parameters() const {
  int k = 0;
  for (const auto& tree : trees_)
    for (const auto& c : tree) k += c.num_parameters();
  return k;
}

std::vector<BivariateCopula> DVineModel::response_path() const {
  std::vector<BivariateCopula> path;
  for (const auto& tree : trees_) path.push_back(tree.front());
  return path;
}

// ---------------------------------------------------------------------------

namespace {

void check_columns(const DVineModel& model, const Columns& columns) {
  if (columns.size() != model.dimension())
    throw InputError("data has " + std::to_string(columns.size()) + " columns, model has " +
                     std::to_string(model.dimension()) + " variables");
  for (const auto& col : columns)
    if (col.size() != columns.front().size()) throw InputError("data columns differ in length");
}

// Sum of log pair-densities over all pairs (joint) or the response path only.
double vine_loglik(const DVineModel& model, const Columns& columns, bool response_path_only) {
  check_columns(model, columns);
  const std::size_t d = model.num_covariates();
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  // fwd[e] = F(x_e | x_{e+1..e+t-1}), bwd[e] = F(x_{e+t-1} | x_e..x_{e+t-2}) for the current tree.
  Columns fwd = columns, bwd = columns;
  double ll = 0.0;
  for (std::size_t t = 1; t <= d; ++t) {
    Columns next_fwd(d + 1 - t, Column(n)), next_bwd(d + 1 - t, Column(n));
    for (std::size_t e = 0; e + t <= d; ++e) {
      const BivariateCopula& c = model.pair(t, e);
      const Column& a = fwd[e];
      const Column& b = bwd[e + 1];
      if (!response_path_only || e == 0) ll += c.loglik(a, b);
      for (std::size_t i = 0; i < n; ++i) {
        next_fwd[e][i] = c.hfunc(Conditioning::OnSecond, a[i], b[i]);
        next_bwd[e][i] = c.hfunc(Conditioning::OnFirst, a[i], b[i]);
      }
    }
    fwd = std::move(next_fwd);
    bwd = std::move(next_bwd);
  }
  return ll;
}

// Covariate-only recursion: returns F(x_{t+1} | x_1..x_t) for t = 0..d-1,
// the second arguments of the response-path copulas.
std::vector<Prob> response_path_conditioners(const DVineModel& model, std::span<const double> u) {
  const std::size_t d = model.num_covariates();
  if (u.size() != d)
    throw InputError("expected " + std::to_string(d) + " covariate values, got " + std::to_string(u.size()));
  for (double x : u)
    if (!(x > 0.0 && x < 1.0)) throw InputError("covariate values must lie in (0,1)");
  std::vector<Prob> out(d);
  if (d == 0) return out;
  // Covariates occupy positions 1..d; arrays indexed by position - 1.
  std::vector<Prob> fwd(d);
  for (std::size_t k = 0; k < d; ++k) fwd[k] = prob(clamp_unit(u[k]));
  std::vector<Prob> bwd = fwd;
  out[0] = fwd[0];
  for (std::size_t t = 1; t + 1 <= d; ++t) {
    std::vector<Prob> nf(d - t), nb(d - t);
    for (std::size_t k = 0; k + t < d; ++k) {
      const BivariateCopula& c = model.pair(t, k + 1);
      nf[k] = c.hfunc(Conditioning::OnSecond, fwd[k], bwd[k + 1]);
      nb[k] = c.hfunc(Conditioning::OnFirst, fwd[k], bwd[k + 1]);
    }
    fwd = std::move(nf);
    bwd = std::move(nb);
    out[t] = bwd[0];
  }
  return out;
}

double chained_inverse(const DVineModel& model, double alpha, const std::vector<Prob>& conditioners) {
  Prob w = prob(clamp_unit(alpha));
  for (std::size_t t = model.num_covariates(); t >= 1; --t)
    w = model.pair(t, 0).hinv(Conditioning::OnSecond, w, conditioners[t - 1]);
  return clamp_unit(w.value);
}

}  // namespace

double dvine_loglik(const DVineModel& model, const Columns& columns) { return vine_loglik(model, columns, false); }

double conditional_loglik(const DVineModel& model, const Columns& columns) {
  return vine_loglik(model, columns, true);
}

double conditional_cdf(const DVineModel& model, double v, std::span<const double> u) {
  if (!(v > 0.0 && v < 1.0)) throw InputError("response value must lie in (0,1)");
  const auto cond = response_path_conditioners(model, u);
  Prob w = prob(clamp_unit(v));
  for (std::size_t t = 1; t <= model.num_covariates(); ++t)
    w = model.pair(t, 0).hfunc(Conditioning::OnSecond, w, cond[t - 1]);
  return w.value;
}

double conditional_quantile(const DVineModel& model, double alpha, std::span<const double> u) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("quantile level must lie in (0,1)");
  return chained_inverse(model, alpha, response_path_conditioners(model, u));
}

std::vector<double> conditional_quantiles(const DVineModel& model, std::span<const double> alphas,
                                          std::span<const double> u) {
  const auto cond = response_path_conditioners(model, u);
  std::vector<double> q;
  q.reserve(alphas.size());
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw InputError("quantile level must lie in (0,1)");
    q.push_back(chained_inverse(model, a, cond));
  }
  return q;
}

// ---------------------------------------------------------------------------
// Fitting. A pair-copula of a D-vine is determined by the contiguous segment
// of the order it spans, so fits are memoized by segment and shared between
// all orders tried during selection.

namespace {

using Segment = std::vector<int>;

class SegmentCache {
 public:
  SegmentCache(const Columns& data, const VineFitConfig& config) : data_(data), config_(config) {}

  struct Entry {
    BivariateCopula copula;
    Column fwd;  // F(first | rest)
    Column bwd;  // F(last | all but last)
  };

  const Entry& get(const Segment& seg) {
    if (auto it = cache_.find(seg); it != cache_.end()) return it->second;
    const Segment left(seg.begin(), seg.end() - 1);
    const Segment right(seg.begin() + 1, seg.end());
    const Column& a = fwd(left);
    const Column& b = bwd(right);
    Entry entry;
    entry.copula = select_family(a, b, config_.families, config_.independence_level);
    entry.fwd.resize(a.size());
    entry.bwd.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      entry.fwd[i] = entry.copula.hfunc(Conditioning::OnSecond, a[i], b[i]);
      entry.bwd[i] = entry.copula.hfunc(Conditioning::OnFirst, a[i], b[i]);
    }
    return cache_.emplace(seg, std::move(entry)).first->second;
  }

  const Column& fwd(const Segment& seg) {
    return seg.size() == 1 ? data_[static_cast<std::size_t>(seg.front())] : get(seg).fwd;
  }
  const Column& bwd(const Segment& seg) {
    return seg.size() == 1 ? data_[static_cast<std::size_t>(seg.front())] : get(seg).bwd;
  }

  struct Score {
    double cll = 0.0;
    int num_parameters = 0;
  };

  Score score(const Segment& order) {
    Score s;
    const std::size_t m = order.size();
    for (std::size_t t = 1; t < m; ++t) {
      for (std::size_t e = 0; e + t < m; ++e) {
        const auto& entry = get(Segment(order.begin() + static_cast<std::ptrdiff_t>(e),
                                        order.begin() + static_cast<std::ptrdiff_t>(e + t + 1)));
        s.num_parameters += entry.copula.num_parameters();
        if (e == 0) s.cll += entry.copula.fitted_loglik();
      }
    }
    return s;
  }

  std::vector<std::vector<BivariateCopula>> trees(const Segment& order) {
    std::vector<std::vector<BivariateCopula>> out;
    const std::size_t m = order.size();
    for (std::size_t t = 1; t < m; ++t) {
      std::vector<BivariateCopula> tree;
      for (std::size_t e = 0; e + t < m; ++e)
        tree.push_back(get(Segment(order.begin() + static_cast<std::ptrdiff_t>(e),
                                   order.begin() + static_cast<std::ptrdiff_t>(e + t + 1)))
                           .copula);
      out.push_back(std::move(tree));
    }
    return out;
  }

 private:
  const Columns& data_;
  const VineFitConfig& config_;
  std::map<Segment, Entry> cache_;
};

void check_fit_data(const Columns& columns) {
  if (columns.empty()) throw InputError("no data columns");
  const std::size_t n = columns.front().size();
  if (n < 10) throw InputError("D-vine fitting needs at least 10 rows, got " + std::to_string(n));
  for (const auto& col : columns) {
    if (col.size() != n) throw InputError("data columns differ in length");
    for (double x : col)
      if (!(x > 0.0 && x < 1.0)) throw InputError("copula data must lie strictly inside (0,1)");
  }
}

}  // namespace

DVineModel fit_dvine(std::vector<std::string> order, const Columns& columns, const VineFitConfig& config) {
  if (order.size() != columns.size()) throw InputError("order and data column counts differ");
  check_fit_data(columns);
  SegmentCache cache(columns, config);
  Segment seg(columns.size());
  for (std::size_t i = 0; i < seg.size(); ++i) seg[i] = static_cast<int>(i);
  DVineModel model(std::move(order), cache.trees(seg));
  model.conditional_loglik = cache.score(seg).cll;
  model.n = columns.front().size();
  return model;
}

DVineModel forward_select(const std::string& response_label, std::span<const double> response,
                          const std::vector<std::string>& candidate_labels, const Columns& candidates,
                          const VineFitConfig& config) {
  if (candidate_labels.size() != candidates.size()) throw InputError("candidate labels and columns differ in count");
  if (candidates.empty()) throw InputError("forward selection needs at least one candidate");
  Columns data;
  data.emplace_back(response.begin(), response.end());
  for (const auto& c : candidates) data.push_back(c);
  check_fit_data(data);

  SegmentCache cache(data, config);
  Segment order{0};
  std::vector<bool> used(data.size(), false);
  double current_cll = 0.0;
  double current_penalized = 0.0;
  std::vector<SelectionStep> trace;

  for (std::size_t step = 0; step < candidates.size(); ++step) {
    bool found = false;
    Segment best_order;
    SelectionStep best_step;
    double best_penalized = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 1; c < data.size(); ++c) {
      if (used[c]) continue;
      for (std::size_t pos = 1; pos <= order.size(); ++pos) {
        Segment trial = order;
        trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(pos), static_cast<int>(c));
        const auto s = cache.score(trial);
        if (!config.force_all && s.cll < current_cll) continue;
        const double penalized = s.cll - s.num_parameters;
        if (penalized > best_penalized) {
          found = true;
          best_penalized = penalized;
          best_order = trial;
          best_step = {candidate_labels[c - 1], pos, s.cll, aic(s.cll, s.num_parameters)};
        }
      }
    }
    if (!found) break;
    if (!config.force_all && !(best_penalized > current_penalized)) break;
    order = std::move(best_order);
    for (int idx : order) used[static_cast<std::size_t>(idx)] = true;
    current_cll = best_step.cll;
    current_penalized = best_penalized;
    trace.push_back(best_step);
  }

  std::vector<std::string> labels;
  labels.push_back(response_label);
  for (std::size_t k = 1; k < order.size(); ++k) labels.push_back(candidate_labels[static_cast<std::size_t>(order[k]) - 1]);
  DVineModel model(std::move(labels), cache.trees(order));
  model.trace = std::move(trace);
  model.conditional_loglik = current_cll;
  model.n = response.size();
  model.no_covariate_selected = order.size() == 1;
  return model;
}

Columns simulate(const DVineModel& model, std::size_t n, std::uint64_t seed) {
  const std::size_t dim = model.dimension();
  Columns out(dim, Column(n));
  Rng rng(seed);
  // fwd[t][e] = F(x_e | x_{e+1..e+t}), bwd[t][e] = F(x_{e+t} | x_e..x_{e+t-1}).
  std::vector<std::vector<double>> fwd(dim, std::vector<double>(dim)), bwd(dim, std::vector<double>(dim));
  std::vector<double> w(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : w) x = rng.uniform();
    fwd[0][0] = bwd[0][0] = w[0];
    out[0][i] = w[0];
    for (std::size_t k = 1; k < dim; ++k) {
      // Invert F(x_k | x_0..x_{k-1}) = w_k down the diagonal of trees.
      bwd[k][0] = w[k];
      for (std::size_t t = k; t >= 1; --t) {
        const std::size_t e = k - t;
        bwd[t - 1][e + 1] = model.pair(t, e).hinv(Conditioning::OnFirst, bwd[t][e], fwd[t - 1][e]);
      }
      fwd[0][k] = bwd[0][k];
      out[k][i] = bwd[0][k];
      for (std::size_t t = 1; t <= k; ++t) {
        const std::size_t e = k - t;
        fwd[t][e] = model.pair(t, e).hfunc(Conditioning::OnSecond, fwd[t - 1][e], bwd[t - 1][e + 1]);
      }
    }
  }
  return out;
}

}  // namespace vinestress
