#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "balpoe/mixture.hpp"
#include "balpoe/model.hpp"
#include "balpoe/priors.hpp"
#include "balpoe/train.hpp"

namespace balpoe {

struct PriorProfile {
  enum class Kind { kExponential, kPareto, kExplicit };
  Kind kind = Kind::kExponential;
  double rho = 100.0;    // exponential
  double alpha = 6.0;    // pareto
  Vector probs;          // explicit

  LabelDistribution build(int num_classes) const;
};

struct DataConfig {
  std::string kind = "synthetic";  // "synthetic" | "csv"
  std::string dir = "data";
  int classes = 3;
  int dim = 2;
  int train_size = 6000;
  int test_size = 10000;
  double separation = 3.0;
  double sigma = 1.0;
  PriorProfile prior;
  std::string train_csv;  // csv kind only
  std::string test_csv;
};

struct EvalConfig {
  std::vector<double> shifted_imbalance_ratios{2, 5, 10, 25, 50};
  bool known_prior = true;
  int bins = 15;
  bool oracle = false;
};

struct VerifyConfig {
  int n_points = 1000;
  double tolerance = 1e-9;
  int extra_random_sets = 10;
  int max_set_size = 7;
};

/// One experiment, fully determined by (config, seed). Unknown JSON keys
/// are rejected so typos fail fast.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  int threads = 0;  // 0: runtime default
  std::string output_dir = "out";
  DataConfig data;
  std::vector<LambdaVector> lambdas;  // scalar entries expand to C classes
  ModelConfig model;                  // input_dim/num_classes filled from data
  TrainConfig train;
  EvalConfig eval;
  VerifyConfig verify;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig preset_config(const std::string& name);

/// Canonical JSON with every field present; hashing input and audit record.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// FNV-1a 64 over the canonical compact dump.
std::string config_hash(const ExperimentConfig& cfg);

/// The generating mixture for synthetic experiments (training prior).
GaussianMixture mixture_from_config(const ExperimentConfig& cfg);

EnsembleSpec ensemble_from_config(const ExperimentConfig& cfg);

}  // namespace balpoe
