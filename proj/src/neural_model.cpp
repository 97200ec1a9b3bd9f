#include "dfs/neural_model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>

#include "dfs/error.hpp"
#include "dfs/rng.hpp"

namespace dfs {

namespace {

// Activations and gradient pieces for one pass.
struct Pass {
  Eigen::MatrixXd hidden;  // N x h, sigmoid outputs
  Eigen::VectorXd output;  // N
};

Pass run(const Network& net, const Eigen::MatrixXd& z) {
  Pass p;
  p.hidden = (z * net.w1.transpose()).rowwise() + net.b1.transpose();
  p.hidden = p.hidden.unaryExpr([](double t) { return sigmoid(t); });
  p.output = (p.hidden * net.w2).array() + net.b2;
  return p;
}

double mse_normalized(const Network& net, const Eigen::MatrixXd& z, const Eigen::VectorXd& y) {
  const Pass p = run(net, z);
  return (p.output - y).squaredNorm() / static_cast<double>(y.size());
}

LossGradient loss_and_gradient_normalized(const Network& net, const Eigen::MatrixXd& z,
                                          const Eigen::VectorXd& y, double l2) {
  const double n = static_cast<double>(y.size());
  const Pass p = run(net, z);
  const Eigen::VectorXd err = p.output - y;

  LossGradient out;
  out.loss = err.squaredNorm() / n + l2 * (net.w1.squaredNorm() + net.w2.squaredNorm());

  const Eigen::VectorXd d_out = (2.0 / n) * err;
  Network& g = out.gradient;
  g.w2 = p.hidden.transpose() * d_out + 2.0 * l2 * net.w2;
  g.b2 = d_out.sum();
  const Eigen::MatrixXd d_hidden =
      ((d_out * net.w2.transpose()).array() * p.hidden.array() * (1.0 - p.hidden.array()))
          .matrix();
  g.w1 = d_hidden.transpose() * z + 2.0 * l2 * net.w1;
  g.b1 = d_hidden.colwise().sum().transpose();
  return out;
}

void check_batch(const Network& net, const NormStats& norm, const Batch& batch) {
  if (batch.size() == 0) throw InputError("empty batch");
  if (static_cast<std::size_t>(batch.x.cols()) != net.inputs() ||
      static_cast<std::size_t>(norm.mean.size()) != net.inputs()) {
    throw InputError("batch width does not match network inputs");
  }
  if (!batch.x.allFinite() || !batch.y.allFinite()) throw InputError("non-finite batch entry");
}

void write_array(std::ostream& out, const char* name, const Eigen::MatrixXd& m) {
  out << name;
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), " %a", m(r, c));
      out << buf;
    }
  }
  out << '\n';
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void expect(const std::string& word) {
    std::string got;
    if (!(in_ >> got) || got != word) {
      throw InputError("model file: expected '" + word + "', got '" + got + "'");
    }
  }

  double real() {
    std::string tok;
    if (!(in_ >> tok)) throw InputError("model file: truncated");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw InputError("model file: bad number '" + tok + "'");
    return v;
  }

  template <typename T>
  T integer() {
    T v{};
    if (!(in_ >> v)) throw InputError("model file: expected integer");
    return v;
  }

  void fill(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = real();
  }

  void fill(Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = real();
  }

 private:
  std::istream& in_;
};

}  // namespace

Network Network::zeros(std::size_t inputs, std::size_t hidden) {
  Network net;
  net.w1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hidden),
                                 static_cast<Eigen::Index>(inputs));
  net.b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
  net.w2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
  net.b2 = 0.0;
  return net;
}

Network Network::glorot(std::size_t inputs, std::size_t hidden, std::uint64_t seed) {
  Network net = zeros(inputs, hidden);
  Rng rng(seed);
  const double r1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (Eigen::Index r = 0; r < net.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w1.cols(); ++c) net.w1(r, c) = rng.uniform(-r1, r1);
  for (Eigen::Index i = 0; i < net.b1.size(); ++i) net.b1(i) = rng.uniform(-r1, r1);
  for (Eigen::Index i = 0; i < net.w2.size(); ++i) net.w2(i) = rng.uniform(-r2, r2);
  net.b2 = rng.uniform(-r2, r2);
  return net;
}

bool Network::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && std::isfinite(b2);
}

bool Network::operator==(const Network& other) const {
  return w1 == other.w1 && b1 == other.b1 && w2 == other.w2 && b2 == other.b2;
}

NormStats NormStats::identity(std::size_t inputs) {
  const auto n = static_cast<Eigen::Index>(inputs);
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

NormStats NormStats::fit(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw InputError("cannot fit normalization on zero rows");
  NormStats s;
  s.mean = x.colwise().mean().transpose();
  s.std.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean(c)).square().mean();
    s.std(c) = std::max(std::sqrt(var), kStdFloor);
  }
  return s;
}

Eigen::MatrixXd NormStats::apply(const Eigen::MatrixXd& x) const {
  return ((x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array())
      .matrix();
}

Eigen::MatrixXd feature_matrix(const WindowDataset& dataset) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dataset.rows.size()),
                    static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          dataset.rows[i].features.values[c];
    }
  }
  return x;
}

Batch make_batch(const WindowDataset& dataset, std::span<const std::size_t> rows) {
  if (!dataset.has_targets) throw InputError("dataset has no targets");
  Batch b;
  b.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFeatureCount));
  b.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& fv = dataset.rows.at(rows[i]).features;
    if (!fv.target) throw InputError("row without target in training dataset");
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      b.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = fv.values[c];
    }
    b.y(static_cast<Eigen::Index>(i)) = *fv.target;
  }
  return b;
}

Batch make_batch(const WindowDataset& dataset) {
  std::vector<std::size_t> all(dataset.rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return make_batch(dataset, all);
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double forward(const Network& net, const NormStats& norm, std::span<const double> x) {
  if (x.size() != net.inputs() || static_cast<std::size_t>(norm.mean.size()) != net.inputs()) {
    throw InputError("feature length " + std::to_string(x.size()) + " does not match network inputs " +
                     std::to_string(net.inputs()));
  }
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw InputError("non-finite feature at index " + std::to_string(i));
    const auto k = static_cast<Eigen::Index>(i);
    z(k) = (x[i] - norm.mean(k)) / norm.std(k);
  }
  const Eigen::VectorXd hidden = (net.w1 * z + net.b1).unaryExpr([](double t) { return sigmoid(t); });
  return net.b2 + net.w2.dot(hidden);
}

Eigen::VectorXd forward_batch(const Network& net, const NormStats& norm,
                              const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != net.inputs()) {
    throw InputError("feature width does not match network inputs");
  }
  if (!x.allFinite()) throw InputError("non-finite feature entry");
  return run(net, norm.apply(x)).output;
}

double mean_squared_error(const Network& net, const NormStats& norm, const Batch& batch) {
  check_batch(net, norm, batch);
  return mse_normalized(net, norm.apply(batch.x), batch.y);
}

LossGradient loss_and_gradient(const Network& net, const NormStats& norm, const Batch& batch,
                               double l2) {
  check_batch(net, norm, batch);
  return loss_and_gradient_normalized(net, norm.apply(batch.x), batch.y, l2);
}

DataSplit split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (n < 2) throw InputError("need at least 2 rows to split, have " + std::to_string(n));
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  DataSplit s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

DataSplit split_data(const WindowDataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!dataset.has_targets) throw InputError("cannot split a dataset without targets");
  return split_indices(dataset.rows.size(), train_fraction, seed);
}

bool TrainedModel::operator==(const TrainedModel& other) const {
  return network == other.network && norm == other.norm && seed == other.seed &&
         train_mse == other.train_mse && val_mse == other.val_mse &&
         initial_val_mse == other.initial_val_mse && epochs_run == other.epochs_run &&
         best_epoch == other.best_epoch;
}

TrainedModel train(const WindowDataset& dataset, const TrainingConfig& config,
                   std::uint64_t seed) {
  if (!dataset.has_targets) throw InputError("training requires a dataset with targets");
  return train(make_batch(dataset), config, seed);
}

TrainedModel train(const Batch& data, const TrainingConfig& config, std::uint64_t seed) {
  const DataSplit split = split_indices(data.size(), config.train_fraction, derive_seed(seed, 0));
  const auto take = [&](const std::vector<std::size_t>& idx) {
    Batch b;
    b.x.resize(static_cast<Eigen::Index>(idx.size()), data.x.cols());
    b.y.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      b.x.row(static_cast<Eigen::Index>(i)) = data.x.row(static_cast<Eigen::Index>(idx[i]));
      b.y(static_cast<Eigen::Index>(i)) = data.y(static_cast<Eigen::Index>(idx[i]));
    }
    return b;
  };
  const Batch train_set = take(split.train);
  const Batch val_set = take(split.validation);
  if (!train_set.x.allFinite() || !train_set.y.allFinite() || !val_set.x.allFinite() ||
      !val_set.y.allFinite()) {
    throw InputError("non-finite entry in training data");
  }

  TrainedModel model;
  model.seed = seed;
  model.norm = NormStats::fit(train_set.x);
  const Eigen::MatrixXd z_train = model.norm.apply(train_set.x);
  const Eigen::MatrixXd z_val = model.norm.apply(val_set.x);

  Network params = Network::glorot(static_cast<std::size_t>(data.x.cols()), config.hidden,
                                   derive_seed(seed, 1));
  Network best = params;
  double best_val = mse_normalized(params, z_val, val_set.y);
  if (!std::isfinite(best_val)) throw NumericError("training diverged at epoch 0");
  model.initial_val_mse = best_val;

  Network velocity = Network::zeros(params.inputs(), params.hidden());
  double lr = config.learning_rate;
  double prev_loss = std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  int epoch = 0;
  while (since_improvement < config.patience && epoch < config.max_epochs) {
    const LossGradient lg = loss_and_gradient_normalized(params, z_train, train_set.y, config.l2);
    if (!std::isfinite(lg.loss) || !lg.gradient.all_finite()) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch + 1));
    }
    if (lg.loss > prev_loss) {
      lr *= 0.5;
      velocity = Network::zeros(params.inputs(), params.hidden());
    }
    prev_loss = lg.loss;

    velocity.w1 = config.momentum * velocity.w1 - lr * lg.gradient.w1;
    velocity.b1 = config.momentum * velocity.b1 - lr * lg.gradient.b1;
    velocity.w2 = config.momentum * velocity.w2 - lr * lg.gradient.w2;
    velocity.b2 = config.momentum * velocity.b2 - lr * lg.gradient.b2;
    params.w1 += velocity.w1;
    params.b1 += velocity.b1;
    params.w2 += velocity.w2;
    params.b2 += velocity.b2;
    ++epoch;

    const double val = mse_normalized(params, z_val, val_set.y);
    if (!std::isfinite(val)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    if (val < best_val) {
      best_val = val;
      best = params;
      model.best_epoch = epoch;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
  }

  model.network = std::move(best);
  model.val_mse = best_val;
  model.train_mse = mse_normalized(model.network, z_train, train_set.y);
  model.epochs_run = epoch;
  return model;
}

void write_model(std::ostream& out, const TrainedModel& m) {
  const Network& net = m.network;
  out << "dfs-model 1\n";
  out << "inputs " << net.inputs() << " hidden " << net.hidden() << '\n';
  out << "seed " << m.seed << '\n';
  out << "epochs_run " << m.epochs_run << " best_epoch " << m.best_epoch << '\n';
  out << "train_mse " << hex(m.train_mse) << " val_mse " << hex(m.val_mse)
      << " initial_val_mse " << hex(m.initial_val_mse) << '\n';
  write_array(out, "mean", m.norm.mean.transpose());
  write_array(out, "std", m.norm.std.transpose());
  write_array(out, "w1", net.w1);
  write_array(out, "b1", net.b1.transpose());
  write_array(out, "w2", net.w2.transpose());
  out << "b2 " << hex(net.b2) << '\n';
  out << "end\n";
}

TrainedModel read_model(std::istream& in) {
  Reader r(in);
  r.expect("dfs-model");
  if (r.integer<int>() != 1) throw InputError("model file: unsupported version");
  r.expect("inputs");
  const auto inputs = r.integer<std::size_t>();
  r.expect("hidden");
  const auto hidden = r.integer<std::size_t>();
  if (inputs == 0 || hidden == 0 || inputs > 100000 || hidden > 100000) {
    throw InputError("model file: bad dimensions");
  }
  TrainedModel m;
  m.network = Network::zeros(inputs, hidden);
  m.norm = NormStats::identity(inputs);
  r.expect("seed");
  m.seed = r.integer<std::uint64_t>();
  r.expect("epochs_run");
  m.epochs_run = r.integer<int>();
  r.expect("best_epoch");
  m.best_epoch = r.integer<int>();
  r.expect("train_mse");
  m.train_mse = r.real();
  r.expect("val_mse");
  m.val_mse = r.real();
  r.expect("initial_val_mse");
  m.initial_val_mse = r.real();
  r.expect("mean");
  r.fill(m.norm.mean);
  r.expect("std");
  r.fill(m.norm.std);
  r.expect("w1");
  r.fill(m.network.w1);
  r.expect("b1");
  r.fill(m.network.b1);
  r.expect("w2");
  r.fill(m.network.w2);
  r.expect("b2");
  m.network.b2 = r.real();
  r.expect("end");
  if (!m.network.all_finite() || !m.norm.mean.allFinite() || !m.norm.std.allFinite()) {
    throw InputError("model file: non-finite parameter");
  }
  return m;
}

}  // namespace dfs
