#include "hcurv/neural.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "hcurv/errors.hpp"
#include "hcurv/random.hpp"
#include "hcurv/text_io.hpp"

namespace hcurv {

namespace {

std::array<int, 6> layer_sizes(const MlpArchitecture& a) {
  return {9, a.hidden[0], a.hidden[1], a.hidden[2], a.hidden[3], 1};
}

// Layer 0 feeds the first hidden layer, layer 4 is the output.
bool uses_relu(const MlpArchitecture& a, int layer) {
  return (layer >= 1 && layer <= 3) || (layer == 0 && a.relu_first_hidden);
}

// Pre-activations z[l] and activations act[l + 1]; act[0] is the input.
struct Trace {
  std::array<Eigen::MatrixXd, 5> z;
  std::array<Eigen::MatrixXd, 6> act;
};

void run_forward(const MlpModel& m, const Eigen::MatrixXd& x, Trace& t) {
  t.act[0] = x;
  for (int l = 0; l < 5; ++l) {
    t.z[l].noalias() = t.act[l] * m.w[l];
    t.z[l].rowwise() += m.b[l].transpose();
    if (uses_relu(m.arch, l))
      t.act[l + 1] = t.z[l].cwiseMax(0.0);
    else
      t.act[l + 1] = t.z[l];
  }
}

}  // namespace

std::size_t param_count(const MlpArchitecture& arch) {
  const auto s = layer_sizes(arch);
  std::size_t n = 0;
  for (int l = 0; l < 5; ++l)
    n += static_cast<std::size_t>(s[l]) * static_cast<std::size_t>(s[l + 1]) + static_cast<std::size_t>(s[l + 1]);
  return n;
}

MlpModel MlpModel::zeros(const MlpArchitecture& arch) {
  for (int n : arch.hidden)
    if (n < 1) throw std::invalid_argument("MlpModel: hidden layer sizes must be positive");
  MlpModel m;
  m.arch = arch;
  const auto s = layer_sizes(arch);
  for (int l = 0; l < 5; ++l) {
    m.w[l] = Eigen::MatrixXd::Zero(s[l], s[l + 1]);
    m.b[l] = Eigen::VectorXd::Zero(s[l + 1]);
  }
  return m;
}

void MlpModel::validate() const {
  const auto s = layer_sizes(arch);
  for (int l = 0; l < 5; ++l) {
    if (w[l].rows() != s[l] || w[l].cols() != s[l + 1] || b[l].size() != s[l + 1])
      throw std::invalid_argument("MlpModel: layer " + std::to_string(l + 1) + " has inconsistent dimensions");
    if (!w[l].allFinite() || !b[l].allFinite())
      throw std::invalid_argument("MlpModel: layer " + std::to_string(l + 1) + " has non-finite parameters");
  }
}

MlpModel glorot_init(const MlpArchitecture& arch, std::uint64_t seed) {
  MlpModel m = MlpModel::zeros(arch);
  auto rng = make_stream(seed, 0);
  for (int l = 0; l < 5; ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.w[l].rows() + m.w[l].cols()));
    for (Eigen::Index r = 0; r < m.w[l].rows(); ++r)
      for (Eigen::Index c = 0; c < m.w[l].cols(); ++c) m.w[l](r, c) = uniform(rng, -limit, limit);
  }
  return m;
}

Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != 9) throw std::invalid_argument("forward: expected 9 input features");
  Trace t;
  run_forward(model, x, t);
  return t.act[5].col(0);
}

double forward(const MlpModel& model, const Feature9& phi) {
  Eigen::MatrixXd x(1, 9);
  for (int k = 0; k < 9; ++k) x(0, k) = phi[static_cast<std::size_t>(k)];
  return forward_batch(model, x)(0);
}

Gradients backward(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() == 0 || x.rows() != y.size()) throw std::invalid_argument("backward: empty or mismatched batch");
  Trace t;
  run_forward(model, x, t);
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd resid = t.act[5].col(0) - y;

  Gradients g;
  g.loss = resid.squaredNorm() / n;
  Eigen::MatrixXd delta = (2.0 / n) * resid;
  for (int l = 4; l >= 0; --l) {
    if (uses_relu(model.arch, l)) delta = delta.cwiseProduct((t.z[l].array() > 0.0).cast<double>().matrix());
    g.w[l].noalias() = t.act[l].transpose() * delta;
    g.b[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd up = delta * model.w[l].transpose();
      delta.swap(up);
    }
  }
  return g;
}

AdamOptimizer::AdamOptimizer(const MlpModel& shape, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (int l = 0; l < 5; ++l) {
    mw_[l] = Eigen::MatrixXd::Zero(shape.w[l].rows(), shape.w[l].cols());
    vw_[l] = mw_[l];
    mb_[l] = Eigen::VectorXd::Zero(shape.b[l].size());
    vb_[l] = mb_[l];
  }
}

void AdamOptimizer::step(MlpModel& model, const Gradients& g, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
    m = beta1_ * m + (1.0 - beta1_) * grad;
    v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (int l = 0; l < 5; ++l) {
    update(model.w[l], mw_[l], vw_[l], g.w[l]);
    update(model.b[l], mb_[l], vb_[l], g.b[l]);
  }
}

Eigen::MatrixXd preprocess_rows(const PcaParams& pre, const std::vector<Feature9>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), 9);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Feature9 t = transform(pre, rows[i]);
    for (int k = 0; k < 9; ++k) out(static_cast<Eigen::Index>(i), k) = t[static_cast<std::size_t>(k)];
  }
  return out;
}

std::pair<MlpModel, TrainHistory> train(const LabeledSet& train_set, const LabeledSet& test_set,
                                        const LabeledSet& validation_set, const MlpArchitecture& arch,
                                        const PcaParams& pre, const TrainConfig& cfg,
                                        const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train_set.x.empty() || validation_set.x.empty()) throw std::invalid_argument("train: empty training or validation set");
  if (train_set.x.size() != train_set.y.size() || validation_set.x.size() != validation_set.y.size() ||
      test_set.x.size() != test_set.y.size())
    throw std::invalid_argument("train: inputs and targets differ in length");
  if (!(cfg.lr0 > 0.0) || cfg.batch < 1 || cfg.plateau_patience < 1 || cfg.stop_patience < 1 || cfg.max_epochs < 1)
    throw std::invalid_argument("train: invalid configuration");

  const Eigen::MatrixXd xtr = preprocess_rows(pre, train_set.x);
  const Eigen::VectorXd ytr = Eigen::Map<const Eigen::VectorXd>(train_set.y.data(), static_cast<Eigen::Index>(train_set.y.size()));
  const Eigen::MatrixXd xva = preprocess_rows(pre, validation_set.x);
  const Eigen::VectorXd yva =
      Eigen::Map<const Eigen::VectorXd>(validation_set.y.data(), static_cast<Eigen::Index>(validation_set.y.size()));

  MlpModel model = glorot_init(arch, cfg.seed);
  model.preprocessor = pre.kind;
  model.h = pre.h;
  AdamOptimizer adam(model);
  auto rng = make_stream(cfg.seed, 1);

  const std::size_t n = train_set.x.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  TrainHistory hist;
  MlpModel best = model;
  double best_mae = std::numeric_limits<double>::infinity();
  double lr = cfg.lr0;
  int plateau_wait = 0;
  int stop_wait = 0;
  const auto bs = static_cast<std::size_t>(cfg.batch);
  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(order, rng);
    double sse = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += bs, ++batch_index) {
      const std::size_t m = std::min(bs, n - start);
      xb.resize(static_cast<Eigen::Index>(m), 9);
      yb.resize(static_cast<Eigen::Index>(m));
      for (std::size_t r = 0; r < m; ++r) {
        xb.row(static_cast<Eigen::Index>(r)) = xtr.row(static_cast<Eigen::Index>(order[start + r]));
        yb(static_cast<Eigen::Index>(r)) = ytr(static_cast<Eigen::Index>(order[start + r]));
      }
      const Gradients g = backward(model, xb, yb);
      if (!std::isfinite(g.loss))
        throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index),
                               epoch, batch_index);
      sse += g.loss * static_cast<double>(m);
      adam.step(model, g, lr);
    }

    const double val_mae = (forward_batch(model, xva) - yva).cwiseAbs().mean();
    if (!std::isfinite(val_mae))
      throw TrainingDiverged("validation error is not finite at epoch " + std::to_string(epoch), epoch, batch_index);
    const EpochRecord rec{epoch, sse / static_cast<double>(n), val_mae, lr};
    hist.epochs.push_back(rec);
    hist.epochs_run = epoch;
    if (on_epoch) on_epoch(rec);

    if (val_mae < best_mae - cfg.min_delta) {
      best_mae = val_mae;
      best = model;
      hist.best_epoch = epoch;
      plateau_wait = 0;
      stop_wait = 0;
    } else {
      ++plateau_wait;
      ++stop_wait;
      if (stop_wait >= cfg.stop_patience) break;
      if (plateau_wait >= cfg.plateau_patience) {
        lr *= 0.5;
        plateau_wait = 0;
      }
    }
  }

  hist.best_val_mae = best_mae;
  if (test_set.x.empty()) {
    hist.test_mse = hist.test_mae = std::numeric_limits<double>::quiet_NaN();
  } else {
    const Eigen::MatrixXd xte = preprocess_rows(pre, test_set.x);
    const Eigen::VectorXd yte =
        Eigen::Map<const Eigen::VectorXd>(test_set.y.data(), static_cast<Eigen::Index>(test_set.y.size()));
    const Eigen::VectorXd d = forward_batch(best, xte) - yte;
    hist.test_mse = d.squaredNorm() / static_cast<double>(d.size());
    hist.test_mae = d.cwiseAbs().mean();
  }
  return {best, hist};
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,train_mse,val_mae,lr\n";
  for (const auto& r : history.epochs)
    out << r.epoch << ',' << textio::format_double(r.train_mse) << ',' << textio::format_double(r.val_mae) << ','
        << textio::format_double(r.lr) << '\n';
}

}  // namespace hcurv
