#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "balpoe/dataset.hpp"
#include "balpoe/mixup.hpp"
#include "balpoe/model.hpp"
#include "balpoe/priors.hpp"

namespace balpoe {

struct LrSchedule {
  enum class Kind { kMultistep, kCosine };
  Kind kind = Kind::kMultistep;
  std::vector<int> milestones;  // multistep only
  double gamma = 0.1;           // multistep decay factor
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 128;
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  LrSchedule schedule;
  int warmup_epochs = 0;  // linear LR ramp over the first epochs
  std::uint64_t seed = 0;
  MixupConfig mixup;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;       // 0-based, stats taken after the epoch's updates
  double loss = 0.0;   // clean (un-mixed) total loss over the train set
  double accuracy = 0.0;
};

/// Everything needed to stop and resume training at an epoch boundary with
/// a bit-identical trajectory.
struct TrainState {
  Model model;
  ModelGrads momentum;
  std::uint64_t rng_state = 0;
  int epochs_done = 0;
  std::vector<EpochStats> trace;
};

double lr_at_epoch(const TrainConfig& cfg, int epoch);

TrainState init_train_state(const ModelConfig& model_cfg, const TrainConfig& cfg);

/// Runs mini-batch SGD with momentum and weight decay from
/// state.epochs_done up to cfg.epochs. The training prior is estimated from
/// the dataset counts (smoothed). All randomness comes from one serial
/// stream stored in the state. Throws training_error with epoch/batch
/// context if the loss turns non-finite.
void train(TrainState& state, const Dataset& data, const EnsembleSpec& ensemble,
           const TrainConfig& cfg);

/// Clean forward metrics on a dataset: total gLA loss and combined-argmax
/// accuracy.
EpochStats clean_metrics(const Model& model, const Dataset& data,
                         const EnsembleSpec& ensemble, const Vector& log_prior);

/// Versioned JSON checkpoint with parameters, momentum, RNG state,
/// ensemble spec, and the loss trace. Doubles round-trip exactly.
void save_checkpoint(const std::string& path, const TrainState& state,
                     const EnsembleSpec& ensemble, const std::string& config_hash,
                     std::uint64_t seed);
struct Checkpoint {
  TrainState state;
  EnsembleSpec ensemble;
  std::string config_hash;
  std::uint64_t seed = 0;
};
Checkpoint load_checkpoint(const std::string& path);

void write_trace_csv(const std::string& path, const std::vector<EpochStats>& trace,
                     const std::string& comment_header);

}  // namespace balpoe
