#pragma once

#include "finrot/tensor.hpp"

#include <vector>

namespace finrot {

// Leave-one-out retrieval quality over a set of descriptors.
struct RetrievalMetrics {
  double map_micro = 0;    // mean AP over queries
  double map_macro = 0;    // mean over classes of the class's mean AP
  double mean_p_at_n = 0;  // precision at N, N chosen per query (see below)
  double mean_r_at_n = 0;
  double mean_f1_at_n = 0;
  int queries = 0;         // queries with at least one relevant gallery item
};

// AP of a ranked relevance list: mean of precision@k over the relevant ranks.
// Zero when nothing is relevant.
double average_precision(const std::vector<unsigned char>& relevant);

// Each row of desc is one item; rows are unit-normalized internally (rows
// with norm < 1e-9 stay zero and tie at similarity 0). Every item queries the
// remaining items ranked by cosine similarity, ties broken by gallery index.
// Relevance is label equality. Queries whose label appears nowhere else are
// skipped.
//
// N for the P/R/F1@N columns is the number of gallery items sharing the
// query's predicted class (true label when predicted is null); N = 0 scores 0.
// With rerank set, the ranking is stably partitioned so gallery items whose
// predicted class matches the query's come first.
RetrievalMetrics evaluate_retrieval(const Tensor& desc, const std::vector<int>& labels,
                                    const std::vector<int>* predicted = nullptr,
                                    bool rerank = false);

// The gallery ranking evaluate_retrieval scores for one query: all indices
// except the query, by cosine similarity descending (ties by index), stably
// partitioned by predicted-class match when rerank is set.
std::vector<int> ranked_gallery(const Tensor& desc, int query,
                                const std::vector<int>* predicted = nullptr,
                                bool rerank = false);

} // namespace finrot
