#include "srcfuse/dictionary.hpp"

#include <numeric>

#include "srcfuse/errors.hpp"

namespace srcfuse {

Dictionary build_dictionary(const Dataset& train) {
  validate_dataset(train);
  const int n = train.dim;
  const int count = static_cast<int>(train.samples.size());

  // Stable order: ascending class, original order within a class.
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return train.samples[static_cast<std::size_t>(a)].label <
           train.samples[static_cast<std::size_t>(b)].label;
  });

  Dictionary dict;
  dict.matrix.resize(n, count);
  dict.column_norms.resize(count);
  dict.class_of_column.resize(static_cast<std::size_t>(count));
  dict.class_count = train.class_count;
  for (int c = 0; c < count; ++c) {
    const auto& s = train.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
    const double norm = s.features.norm();
    if (norm == 0.0) {
      throw DataError("training sample " +
                      std::to_string(order[static_cast<std::size_t>(c)]) +
                      " has zero norm");
    }
    dict.matrix.col(c) = s.features / norm;
    dict.column_norms(c) = norm;
    dict.class_of_column[static_cast<std::size_t>(c)] = s.label;
  }
  return dict;
}

}  // namespace srcfuse
