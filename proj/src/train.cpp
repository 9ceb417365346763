#include "balpoe/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "balpoe/kernels.hpp"
#include "balpoe/loss.hpp"
#include "balpoe/rng.hpp"

namespace balpoe {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be positive");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be positive");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("TrainConfig: momentum must be in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
  if (warmup_epochs < 0) throw std::invalid_argument("TrainConfig: warmup_epochs must be >= 0");
  if (mixup.enabled && !(mixup.alpha > 0.0)) {
    throw std::invalid_argument("TrainConfig: mixup alpha must be > 0 when enabled");
  }
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  if (cfg.warmup_epochs > 0 && epoch < cfg.warmup_epochs) {
    return cfg.learning_rate * (epoch + 1) / cfg.warmup_epochs;
  }
  if (cfg.schedule.kind == LrSchedule::Kind::kCosine) {
    return cfg.learning_rate * 0.5 *
           (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs));
  }
  double lr = cfg.learning_rate;
  for (int m : cfg.schedule.milestones) {
    if (epoch >= m) lr *= cfg.schedule.gamma;
  }
  return lr;
}

TrainState init_train_state(const ModelConfig& model_cfg, const TrainConfig& cfg) {
  cfg.validate();
  TrainState st;
  st.model = init_model(model_cfg, cfg.seed);
  st.momentum = make_grads(st.model);
  st.rng_state = SplitMix64::derive(cfg.seed, 0x747261696eULL);  // training stream
  st.epochs_done = 0;
  return st;
}

namespace {
void sgd_step(Model& model, ModelGrads& grads, ModelGrads& momentum, double lr,
              const TrainConfig& cfg) {
  auto params = model.param_ptrs();
  auto gs = grads.param_ptrs();
  auto vs = momentum.param_ptrs();
  const std::size_t n = params.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double g = *gs[k] + cfg.weight_decay * *params[k];
    *vs[k] = cfg.momentum * *vs[k] + g;
    *params[k] -= lr * *vs[k];
  }
}

Matrix gather_rows(const Matrix& X, const std::vector<int>& idx, int from, int to) {
  Matrix out(to - from, X.cols);
  for (int r = from; r < to; ++r) {
    std::copy(X.row(idx[r]), X.row(idx[r]) + X.cols, out.row(r - from));
  }
  return out;
}
}  // namespace

EpochStats clean_metrics(const Model& model, const Dataset& data,
                         const EnsembleSpec& ensemble, const Vector& log_prior) {
  ForwardCache cache;
  forward(model, data.features, cache);
  const int N = data.size();
  const int C = model.num_classes;
  const int E = model.num_experts();

  double loss_sum = 0.0;
  long long correct = 0;
  Vector combined(C), adjusted_row(C);
  for (int i = 0; i < N; ++i) {
    std::fill(combined.begin(), combined.end(), 0.0);
    for (int e = 0; e < E; ++e) {
      const double* z = cache.logits[e].row(i);
      const Vector tau = ensemble.experts[e].tau();
      for (int y = 0; y < C; ++y) adjusted_row[y] = z[y] + tau[y] * log_prior[y];
      loss_sum -= adjusted_row[data.labels[i]] -
                  kernels::log_sum_exp(adjusted_row.data(), C);
      for (int y = 0; y < C; ++y) combined[y] += z[y];
    }
    if (argmax_lowest(combined.data(), C) == data.labels[i]) ++correct;
  }
  EpochStats stats;
  stats.loss = loss_sum / (static_cast<double>(N) * E);
  stats.accuracy = static_cast<double>(correct) / N;
  return stats;
}

void train(TrainState& state, const Dataset& data, const EnsembleSpec& ensemble,
           const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() < 1) throw std::invalid_argument("train: empty dataset");
  if (state.model.num_experts() != ensemble.num_experts()) {
    throw std::invalid_argument("train: model heads do not match ensemble spec");
  }
  const int N = data.size();
  const int C = state.model.num_classes;
  const Vector log_prior = empirical_prior(data.counts).log();

  ModelGrads grads = make_grads(state.model);
  SplitMix64 rng(state.rng_state);

  for (int epoch = state.epochs_done; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg, epoch);
    const std::vector<int> perm = random_permutation(N, rng);
    int batch_index = 0;
    for (int start = 0; start < N; start += cfg.batch_size, ++batch_index) {
      const int end = std::min(N, start + cfg.batch_size);
      Matrix X = gather_rows(data.features, perm, start, end);
      std::vector<int> labels(end - start);
      for (int r = start; r < end; ++r) labels[r - start] = data.labels[perm[r]];

      MixedBatch batch = mix_batch(X, labels, C, cfg.mixup, rng);
      grads.zero();
      const double loss = training_loss_and_grads(state.model, batch.features,
                                                  batch.soft_labels, ensemble, log_prior,
                                                  grads);
      if (!std::isfinite(loss)) {
        throw training_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index));
      }
      sgd_step(state.model, grads, state.momentum, lr, cfg);
    }
    EpochStats stats = clean_metrics(state.model, data, ensemble, log_prior);
    stats.epoch = epoch;
    state.trace.push_back(stats);
    state.epochs_done = epoch + 1;
    state.rng_state = rng.state();
  }
}

namespace {
json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != static_cast<std::size_t>(m.rows) * m.cols) {
    throw io_error("checkpoint: matrix shape mismatch");
  }
  return m;
}

std::string u64_to_hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t u64_from_hex(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}
}  // namespace

void save_checkpoint(const std::string& path, const TrainState& state,
                     const EnsembleSpec& ensemble, const std::string& config_hash,
                     std::uint64_t seed) {
  json j;
  j["schema_version"] = 1;
  j["kind"] = "balpoe-checkpoint";
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["rng"] = SplitMix64::kAlgorithmId;
  j["epochs_done"] = state.epochs_done;
  j["train_rng_state"] = u64_to_hex(state.rng_state);

  const Model& m = state.model;
  json jm;
  jm["input_dim"] = m.input_dim;
  jm["hidden_dim"] = m.hidden_dim;
  jm["num_classes"] = m.num_classes;
  jm["depth"] = m.depth;
  jm["activation"] = to_string(m.activation);
  jm["trunk_W"] = matrix_to_json(m.trunk_W);
  jm["trunk_b"] = m.trunk_b;
  json heads = json::array();
  for (const auto& h : m.heads) {
    heads.push_back({{"kind", to_string(h.kind)},
                     {"kappa", h.kappa},
                     {"W", matrix_to_json(h.W)},
                     {"b", h.b}});
  }
  jm["heads"] = heads;
  j["model"] = jm;

  json jv;
  jv["trunk_W"] = matrix_to_json(state.momentum.trunk_W);
  jv["trunk_b"] = state.momentum.trunk_b;
  json vw = json::array(), vb = json::array();
  for (const auto& w : state.momentum.head_W) vw.push_back(matrix_to_json(w));
  for (const auto& b : state.momentum.head_b) vb.push_back(b);
  jv["head_W"] = vw;
  jv["head_b"] = vb;
  j["momentum"] = jv;

  json lambdas = json::array();
  for (const auto& l : ensemble.experts) lambdas.push_back(l.lambda);
  j["ensemble"] = {{"lambdas", lambdas}};

  json trace = json::array();
  for (const auto& t : state.trace) {
    trace.push_back({{"epoch", t.epoch}, {"loss", t.loss}, {"accuracy", t.accuracy}});
  }
  j["trace"] = trace;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("save_checkpoint: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw io_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("load_checkpoint: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error("load_checkpoint: bad JSON in " + path + ": " + e.what());
  }
  if (j.value("kind", "") != "balpoe-checkpoint" || j.value("schema_version", 0) != 1) {
    throw io_error("load_checkpoint: not a v1 checkpoint: " + path);
  }
  Checkpoint cp;
  cp.config_hash = j.at("config_hash").get<std::string>();
  cp.seed = j.at("seed").get<std::uint64_t>();
  cp.state.epochs_done = j.at("epochs_done").get<int>();
  cp.state.rng_state = u64_from_hex(j.at("train_rng_state").get<std::string>());

  const json& jm = j.at("model");
  Model& m = cp.state.model;
  m.input_dim = jm.at("input_dim").get<int>();
  m.hidden_dim = jm.at("hidden_dim").get<int>();
  m.num_classes = jm.at("num_classes").get<int>();
  m.depth = jm.at("depth").get<int>();
  m.activation = activation_from_string(jm.at("activation").get<std::string>());
  m.trunk_W = matrix_from_json(jm.at("trunk_W"));
  m.trunk_b = jm.at("trunk_b").get<Vector>();
  for (const auto& jh : jm.at("heads")) {
    Head h;
    h.kind = head_kind_from_string(jh.at("kind").get<std::string>());
    h.kappa = jh.at("kappa").get<double>();
    h.W = matrix_from_json(jh.at("W"));
    h.b = jh.at("b").get<Vector>();
    m.heads.push_back(std::move(h));
  }

  const json& jv = j.at("momentum");
  cp.state.momentum.trunk_W = matrix_from_json(jv.at("trunk_W"));
  cp.state.momentum.trunk_b = jv.at("trunk_b").get<Vector>();
  for (const auto& w : jv.at("head_W")) cp.state.momentum.head_W.push_back(matrix_from_json(w));
  for (const auto& b : jv.at("head_b")) cp.state.momentum.head_b.push_back(b.get<Vector>());
  for (const auto& h : m.heads) cp.state.momentum.head_kinds.push_back(h.kind);

  std::vector<LambdaVector> lambdas;
  for (const auto& l : j.at("ensemble").at("lambdas")) {
    lambdas.emplace_back(l.get<Vector>());
  }
  cp.ensemble = make_ensemble_spec(lambdas);

  for (const auto& t : j.at("trace")) {
    cp.state.trace.push_back({t.at("epoch").get<int>(), t.at("loss").get<double>(),
                              t.at("accuracy").get<double>()});
  }
  return cp;
}

void write_trace_csv(const std::string& path, const std::vector<EpochStats>& trace,
                     const std::string& comment_header) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw io_error("write_trace_csv: cannot open " + path);
  std::istringstream lines(comment_header);
  std::string line;
  while (std::getline(lines, line)) std::fprintf(f, "# %s\n", line.c_str());
  std::fprintf(f, "epoch,split,loss,accuracy\n");
  for (const auto& t : trace) {
    std::fprintf(f, "%d,train,%.17g,%.17g\n", t.epoch, t.loss, t.accuracy);
  }
  if (std::fclose(f) != 0) throw io_error("write_trace_csv: write failed for " + path);
}

}  // namespace balpoe
