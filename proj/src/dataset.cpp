#include "balpoe/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "balpoe/kernels.hpp"
#include "balpoe/rng.hpp"

namespace balpoe {

void Dataset::recount(int num_classes) {
  counts.assign(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("Dataset: label out of range");
    ++counts[y];
  }
}

namespace {
int sample_label(const LabelDistribution& prior, double u) {
  // Inverse CDF walk; u in [0,1).
  double acc = 0.0;
  const int C = prior.num_classes();
  for (int y = 0; y < C; ++y) {
    acc += prior[y];
    if (u < acc) return y;
  }
  return C - 1;
}
}  // namespace

Dataset sample_dataset(const GaussianMixture& mix, int N, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("sample_dataset: N must be >= 1");
  mix.validate();
  Dataset ds;
  ds.features = Matrix(N, mix.dim);
  ds.labels.assign(N, 0);
  kernels::parallel_for(N, [&](int i) {
    SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(i)));
    const int y = sample_label(mix.prior, rng.next_double());
    ds.labels[i] = y;
    double* row = ds.features.row(i);
    const Vector& mu = mix.means[y];
    for (int d = 0; d < mix.dim; ++d) row[d] = mu[d] + mix.sigma * rng.next_normal();
  });
  ds.recount(mix.num_classes);
  return ds;
}

Dataset resample_shifted(const Dataset& test, const LabelDistribution& target,
                         std::uint64_t seed) {
  const int C = test.num_classes();
  if (target.num_classes() != C) {
    throw std::invalid_argument("resample_shifted: class count mismatch");
  }
  for (int y = 0; y < C; ++y) {
    if (target[y] > 0.0 && test.counts[y] == 0) {
      throw std::invalid_argument("resample_shifted: target mass on class " +
                                  std::to_string(y) + " with no test samples");
    }
  }

  // Largest total T such that round(target[y] * T) fits inside each class.
  auto feasible = [&](long long T) {
    for (int y = 0; y < C; ++y) {
      if (std::llround(target[y] * static_cast<double>(T)) > test.counts[y]) return false;
    }
    return true;
  };
  long long lo = 0, hi = test.size();
  while (lo < hi) {  // max feasible T in [0, N]; feasibility is monotone in T
    long long mid = lo + (hi - lo + 1) / 2;
    if (feasible(mid)) lo = mid; else hi = mid - 1;
  }
  const long long T = lo;

  std::vector<long long> want(C);
  for (int y = 0; y < C; ++y) want[y] = std::llround(target[y] * static_cast<double>(T));

  // Per-class index pools in original order.
  std::vector<std::vector<int>> pools(C);
  for (int i = 0; i < test.size(); ++i) pools[test.labels[i]].push_back(i);

  std::vector<int> selected;
  for (int y = 0; y < C; ++y) {
    auto& pool = pools[y];
    SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(y)));
    rng.shuffle(pool.data(), pool.size());
    for (long long k = 0; k < want[y]; ++k) selected.push_back(pool[k]);
  }
  std::sort(selected.begin(), selected.end());

  Dataset out;
  out.features = Matrix(static_cast<int>(selected.size()), test.dim());
  out.labels.resize(selected.size());
  for (std::size_t r = 0; r < selected.size(); ++r) {
    const int src = selected[r];
    std::copy(test.features.row(src), test.features.row(src) + test.dim(),
              out.features.row(static_cast<int>(r)));
    out.labels[r] = test.labels[src];
  }
  out.recount(C);
  return out;
}

GroupPartition group_partition(const std::vector<long long>& counts) {
  GroupPartition g;
  for (int y = 0; y < static_cast<int>(counts.size()); ++y) {
    if (counts[y] < 0) throw std::invalid_argument("group_partition: negative count");
    if (counts[y] > 100) {
      g.many.push_back(y);
    } else if (counts[y] >= 20) {
      g.medium.push_back(y);
    } else {
      g.few.push_back(y);
    }
  }
  return g;
}

void write_dataset_csv(const Dataset& ds, const std::string& path,
                       const std::string& comment_header) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw io_error("write_dataset_csv: cannot open " + path);
  if (!comment_header.empty()) {
    std::istringstream lines(comment_header);
    std::string line;
    while (std::getline(lines, line)) std::fprintf(f, "# %s\n", line.c_str());
  }
  for (int i = 0; i < ds.size(); ++i) {
    const double* row = ds.features.row(i);
    for (int d = 0; d < ds.dim(); ++d) std::fprintf(f, "%.17g,", row[d]);
    std::fprintf(f, "%d\n", ds.labels[i]);
  }
  if (std::fclose(f) != 0) throw io_error("write_dataset_csv: write failed for " + path);
}

Dataset load_dataset_csv(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw io_error("load_dataset_csv: cannot open " + path);
  std::vector<double> values;
  std::vector<int> labels;
  int dim = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        fields.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw io_error("load_dataset_csv: bad number at " + path + ":" +
                       std::to_string(lineno));
      }
    }
    if (fields.size() < 2) {
      throw io_error("load_dataset_csv: need at least one feature and a label at " + path +
                     ":" + std::to_string(lineno));
    }
    const int d = static_cast<int>(fields.size()) - 1;
    if (dim == -1) dim = d;
    if (d != dim) {
      throw io_error("load_dataset_csv: inconsistent column count at " + path + ":" +
                     std::to_string(lineno));
    }
    labels.push_back(static_cast<int>(std::llround(fields.back())));
    values.insert(values.end(), fields.begin(), fields.end() - 1);
  }
  if (labels.empty()) throw io_error("load_dataset_csv: no data rows in " + path);
  Dataset ds;
  ds.features = Matrix(static_cast<int>(labels.size()), dim);
  ds.features.data = std::move(values);
  ds.labels = std::move(labels);
  ds.recount(num_classes);
  return ds;
}

}  // namespace balpoe
