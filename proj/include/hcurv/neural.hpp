#pragma once

// Fixed-topology regressor: 9 inputs, four hidden layers, one linear output.
// Backpropagation and Adam are implemented here; Eigen only stores matrices.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hcurv/preprocess.hpp"

namespace hcurv {

struct MlpArchitecture {
  std::array<int, 4> hidden{64, 64, 64, 64};
  /// Apply ReLU to the first hidden layer too. Off by default: the first
  /// hidden layer is linear and ReLU starts at the second.
  bool relu_first_hidden = false;

  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

/// 9 N1 + N1 + sum (Ni Ni+1 + Ni+1) + N4 + 1.
std::size_t param_count(const MlpArchitecture& arch);

struct MlpModel {
  MlpArchitecture arch;
  /// w[l] is fan_in x fan_out; layer l maps rows as z = a w[l] + b[l]^T.
  std::array<Eigen::MatrixXd, 5> w;
  std::array<Eigen::VectorXd, 5> b;
  PreprocessorKind preprocessor = PreprocessorKind::pca;
  double h = 0.0;
  double kappa_flat = 5.0;

  /// All-zero parameters with dimensions from `arch`. Throws on sizes < 1.
  static MlpModel zeros(const MlpArchitecture& arch);
  /// Throws std::invalid_argument on broken dimension chains or non-finite values.
  void validate() const;
};

/// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
MlpModel glorot_init(const MlpArchitecture& arch, std::uint64_t seed);

double forward(const MlpModel& model, const Feature9& phi_prime);
/// One prediction per row of x (n x 9).
Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& x);

struct Gradients {
  std::array<Eigen::MatrixXd, 5> w;
  std::array<Eigen::VectorXd, 5> b;
  double loss = 0.0;  // batch MSE
};

/// d(MSE)/d(parameters) over the batch; ReLU'(z) = 0 for z <= 0.
Gradients backward(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpModel& shape, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(MlpModel& model, const Gradients& g, double lr);

 private:
  double beta1_, beta2_, eps_;
  long long t_ = 0;
  std::array<Eigen::MatrixXd, 5> mw_, vw_;
  std::array<Eigen::VectorXd, 5> mb_, vb_;
};

struct TrainConfig {
  double lr0 = 1.5e-4;
  int batch = 64;
  int plateau_patience = 15;
  int stop_patience = 60;
  int max_epochs = 700;
  double min_delta = 1e-6;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mae = 0.0;
  double lr = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_mae = 0.0;
  double test_mse = 0.0;  // of the returned snapshot; NaN without test data
  double test_mae = 0.0;
};

/// Raw (unpreprocessed) stencils and h*kappa targets.
struct LabeledSet {
  std::vector<Feature9> x;
  std::vector<double> y;
};

/// Applies `pre` to all inputs, runs Adam with plateau halving and early
/// stopping on validation MAE, and returns the best-validation snapshot.
/// Throws TrainingDiverged on a non-finite batch loss.
std::pair<MlpModel, TrainHistory> train(const LabeledSet& train_set, const LabeledSet& test_set,
                                        const LabeledSet& validation_set, const MlpArchitecture& arch,
                                        const PcaParams& pre, const TrainConfig& config,
                                        const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Stacks transformed rows into an n x 9 matrix.
Eigen::MatrixXd preprocess_rows(const PcaParams& pre, const std::vector<Feature9>& rows);

void write_history_csv(std::ostream& out, const TrainHistory& history);

void write_model(std::ostream& out, const MlpModel& model);
MlpModel read_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace hcurv
