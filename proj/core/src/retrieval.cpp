#include "finrot/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace finrot {

double average_precision(const std::vector<unsigned char>& relevant) {
  int hits = 0;
  double sum = 0;
  for (size_t k = 0; k < relevant.size(); ++k) {
    if (!relevant[k]) continue;
    ++hits;
    sum += double(hits) / double(k + 1);
  }
  return hits ? sum / hits : 0.0;
}

namespace {

Tensor unit_rows(const Tensor& desc) {
  Tensor u = desc;
  const int n = u.dim(0), d = u.dim(1);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < d; ++j) s += u.data[size_t(i) * d + j] * u.data[size_t(i) * d + j];
    s = std::sqrt(s);
    if (s < 1e-9) continue;
    for (int j = 0; j < d; ++j) u.data[size_t(i) * d + j] /= s;
  }
  return u;
}

std::vector<int> rank_query(const Tensor& u, int q, const std::vector<int>* predicted,
                            bool rerank) {
  const int n = u.dim(0), d = u.dim(1);
  std::vector<double> sim(static_cast<size_t>(n));
  for (int g = 0; g < n; ++g) {
    double s = 0;
    for (int j = 0; j < d; ++j) s += u.data[size_t(q) * d + j] * u.data[size_t(g) * d + j];
    sim[size_t(g)] = s;
  }
  std::vector<int> order;
  order.reserve(static_cast<size_t>(n) - 1);
  for (int g = 0; g < n; ++g)
    if (g != q) order.push_back(g);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (sim[size_t(a)] != sim[size_t(b)]) return sim[size_t(a)] > sim[size_t(b)];
    return a < b;
  });
  if (rerank && predicted) {
    const int want = (*predicted)[q];
    std::stable_partition(order.begin(), order.end(),
                          [&](int g) { return (*predicted)[g] == want; });
  }
  return order;
}

} // namespace

std::vector<int> ranked_gallery(const Tensor& desc, int query,
                                const std::vector<int>* predicted, bool rerank) {
  if (desc.shape.size() != 2) throw std::invalid_argument("ranked_gallery: desc must be [N,D]");
  if (query < 0 || query >= desc.dim(0)) throw std::invalid_argument("ranked_gallery: query");
  if (predicted && (int)predicted->size() != desc.dim(0))
    throw std::invalid_argument("ranked_gallery: predicted size");
  return rank_query(unit_rows(desc), query, predicted, rerank);
}

RetrievalMetrics evaluate_retrieval(const Tensor& desc, const std::vector<int>& labels,
                                    const std::vector<int>* predicted, bool rerank) {
  if (desc.shape.size() != 2) throw std::invalid_argument("evaluate_retrieval: desc must be [N,D]");
  const int n = desc.dim(0), d = desc.dim(1);
  if ((int)labels.size() != n) throw std::invalid_argument("evaluate_retrieval: labels size");
  if (predicted && (int)predicted->size() != n)
    throw std::invalid_argument("evaluate_retrieval: predicted size");
  (void)d;

  const Tensor u = unit_rows(desc);
  RetrievalMetrics out;
  std::map<int, std::pair<double, int>> per_class; // label -> (AP sum, count)

  for (int q = 0; q < n; ++q) {
    const int want = predicted ? (*predicted)[q] : labels[q];
    int n_rel = 0;
    for (int g = 0; g < n; ++g)
      if (g != q && labels[g] == labels[q]) ++n_rel;
    if (n_rel == 0) continue;

    const std::vector<int> order = rank_query(u, q, predicted, rerank);

    std::vector<unsigned char> rel(order.size());
    for (size_t k = 0; k < order.size(); ++k) rel[k] = labels[order[k]] == labels[q];
    const double ap = average_precision(rel);
    out.map_micro += ap;
    auto& pc = per_class[labels[q]];
    pc.first += ap;
    pc.second += 1;

    // N = gallery items carrying the query's predicted class
    int n_pred = 0;
    for (int g = 0; g < n; ++g)
      if (g != q && (predicted ? (*predicted)[g] : labels[g]) == want) ++n_pred;
    double p = 0, r = 0, f1 = 0;
    if (n_pred > 0) {
      int hits = 0;
      for (int k = 0; k < n_pred; ++k) hits += rel[size_t(k)];
      p = double(hits) / n_pred;
      r = double(hits) / n_rel;
      if (p + r > 0) f1 = 2 * p * r / (p + r);
    }
    out.mean_p_at_n += p;
    out.mean_r_at_n += r;
    out.mean_f1_at_n += f1;
    ++out.queries;
  }

  if (out.queries) {
    out.map_micro /= out.queries;
    out.mean_p_at_n /= out.queries;
    out.mean_r_at_n /= out.queries;
    out.mean_f1_at_n /= out.queries;
  }
  for (const auto& [label, sum_count] : per_class)
    out.map_macro += sum_count.first / sum_count.second;
  if (!per_class.empty()) out.map_macro /= double(per_class.size());
  return out;
}

} // namespace finrot
