// SPDX-License-Identifier: Apache-2.0
//
// bfmlab - channel state recomposition from beamforming feedback
// Copyright (C) 2026 the bfmlab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BFMLAB_TRAINER_HPP
#define BFMLAB_TRAINER_HPP

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "bfmlab/dataset.hpp"
#include "bfmlab/errors.hpp"
#include "bfmlab/nn/loss.hpp"
#include "bfmlab/nn/network.hpp"

namespace bfmlab
{

struct TrainConfig
{
    int batch_size = 64;
    double learning_rate = 0.001;
    int max_epochs = 200;
    int patience = 10;
    uint64_t seed = 1;
    std::string optimizer = "adaptive-moment"; // or "plain-sgd"

    void validate() const;
};

struct TrainRecord
{
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> seconds;
    std::string stop_reason; // "max_epochs" or "early_stop"
    int best_epoch = 0;      // 1-based
    double best_val_loss = std::numeric_limits<double>::infinity();

    int epochs() const { return static_cast<int>(train_loss.size()); }
};

/// Non-finite loss during training; carries the record up to the aborted
/// epoch (CLI exit code 4).
class train_diverged : public numeric_error
{
  public:
    train_diverged(const std::string &msg, TrainRecord rec)
        : numeric_error(msg), record(std::move(rec))
    {
    }
    TrainRecord record;
};

void write_train_record_csv(const std::filesystem::path &path, const TrainRecord &record);

/// Absolute improvement threshold on the validation loss.
inline constexpr double improvement_tolerance = 1e-7;

/// Patience bookkeeping over the validation loss. `observe` returns true
/// when the epoch improves on the best loss by more than the tolerance;
/// `should_stop` turns true once `patience` consecutive epochs failed to.
struct EarlyStopping
{
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0; // 1-based
    int bad_epochs = 0;

    bool observe(int epoch, double val)
    {
        if (val < best - improvement_tolerance)
        {
            best = val;
            best_epoch = epoch;
            bad_epochs = 0;
            return true;
        }
        ++bad_epochs;
        return false;
    }

    bool should_stop(int patience) const { return bad_epochs >= patience; }
};

// ---------------------------------------------------------------------------
// Optimizer: adaptive-moment (decay 0.9/0.999, eps 1e-8, bias-corrected) or
// plain SGD. Moment tensors are keyed to the parameter paths seen on the
// first step; a later key mismatch is an error.
// ---------------------------------------------------------------------------
template <typename T>
class Optimizer
{
  public:
    Optimizer(std::string kind, double lr) : kind_(std::move(kind)), lr_(lr)
    {
        if (kind_ != "adaptive-moment" && kind_ != "plain-sgd")
            throw config_error("optimizer: unknown kind '" + kind_ + "'");
        if (!(lr_ > 0.0))
            throw config_error("optimizer: learning rate must be positive");
    }

    void step(std::vector<ParamRef<T>> &params)
    {
        if (keys_.empty())
        {
            for (const auto &p : params)
            {
                keys_.push_back(p.path);
                m_.emplace_back(p.value->shape());
                v_.emplace_back(p.value->shape());
            }
        }
        if (keys_.size() != params.size())
            throw config_error("optimizer: parameter key set changed between steps");
        for (size_t i = 0; i < params.size(); ++i)
            if (params[i].path != keys_[i])
                throw config_error("optimizer: parameter key mismatch at '" + params[i].path +
                                   "'");

        if (kind_ == "plain-sgd")
        {
            const T lr = static_cast<T>(lr_);
            for (auto &p : params)
                for (int64_t j = 0; j < p.value->size(); ++j)
                    (*p.value)[j] -= lr * (*p.grad)[j];
            return;
        }

        ++t_;
        const T beta1 = T(0.9), beta2 = T(0.999), eps = T(1e-8);
        const T corr1 = static_cast<T>(1.0 - std::pow(0.9, static_cast<double>(t_)));
        const T corr2 = static_cast<T>(1.0 - std::pow(0.999, static_cast<double>(t_)));
        const T lr = static_cast<T>(lr_);
        for (size_t i = 0; i < params.size(); ++i)
        {
            Tensor<T> &m = m_[i];
            Tensor<T> &v = v_[i];
            Tensor<T> &w = *params[i].value;
            const Tensor<T> &g = *params[i].grad;
            for (int64_t j = 0; j < w.size(); ++j)
            {
                m[j] = beta1 * m[j] + (T(1) - beta1) * g[j];
                v[j] = beta2 * v[j] + (T(1) - beta2) * g[j] * g[j];
                const T mhat = m[j] / corr1;
                const T vhat = v[j] / corr2;
                w[j] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

  private:
    std::string kind_;
    double lr_ = 0.0;
    int64_t t_ = 0;
    std::vector<std::string> keys_;
    std::vector<Tensor<T>> m_, v_;
};

namespace detail
{

/// Copy one dataset sample range into typed batch tensors.
template <typename T>
void fill_batch(const Dataset &data, const std::vector<int64_t> &order, size_t first, int count,
                Tensor<T> &x, Tensor<T> &y)
{
    const int f = data.manifest.f_pad;
    const int a = data.manifest.n_rx * data.manifest.n_tx;
    if (x.rank() != 4 || x.dim(0) != count)
    {
        x = Tensor<T>({count, f, a, 2});
        y = Tensor<T>({count, f, a, 1});
    }
    const int64_t in_stride = static_cast<int64_t>(f) * a * 2;
    const int64_t lb_stride = static_cast<int64_t>(f) * a;
    for (int b = 0; b < count; ++b)
    {
        const int64_t s = order[first + static_cast<size_t>(b)];
        const float *ip = data.inputs.data() + s * in_stride;
        const float *lp = data.labels.data() + s * lb_stride;
        for (int64_t i = 0; i < in_stride; ++i)
            x[b * in_stride + i] = static_cast<T>(ip[i]);
        for (int64_t i = 0; i < lb_stride; ++i)
            y[b * lb_stride + i] = static_cast<T>(lp[i]);
    }
}

template <typename T>
double split_loss(Network<T> &net, const Dataset &data, const IndexRange &range, int batch_size,
                  const std::vector<uint8_t> &mask)
{
    std::vector<int64_t> order;
    for (int64_t s = range.begin; s < range.end; ++s)
        order.push_back(s);
    Tensor<T> x, y;
    long double acc = 0.0L;
    int64_t total = 0;
    for (size_t first = 0; first < order.size(); first += static_cast<size_t>(batch_size))
    {
        const int count =
            static_cast<int>(std::min<size_t>(static_cast<size_t>(batch_size),
                                              order.size() - first));
        fill_batch(data, order, first, count, x, y);
        const Tensor<T> &pred = net.forward(x, Mode::infer);
        const LossResult<T> lr = masked_mse(pred, y, mask);
        const int64_t n = static_cast<int64_t>(count) * data.manifest.group_size *
                          data.manifest.n_rx * data.manifest.n_tx;
        acc += static_cast<long double>(lr.value) * static_cast<long double>(n);
        total += n;
    }
    return static_cast<double>(acc / static_cast<long double>(total));
}

} // namespace detail

/// Full training loop: seeded shuffles, per-epoch validation in infer mode,
/// early stopping after `patience` epochs without improvement (absolute
/// tolerance 1e-7), and restoration of the best-validation weights. The
/// network is (re)initialized from config.seed.
template <typename T>
TrainRecord train(Network<T> &net, const Dataset &data, const TrainConfig &config)
{
    config.validate();
    if (data.sample_range(Split::train).count() <= 0)
        throw config_error("train: dataset has an empty train split");
    if (data.sample_range(Split::val).count() <= 0)
        throw config_error("train: dataset has an empty validation split");

    net.init_params(config.seed);
    Optimizer<T> opt(config.optimizer, config.learning_rate);
    const std::vector<uint8_t> mask = data.mask();
    const IndexRange train_range = data.sample_range(Split::train);
    const IndexRange val_range = data.sample_range(Split::val);

    std::vector<int64_t> order;
    for (int64_t s = train_range.begin; s < train_range.end; ++s)
        order.push_back(s);

    TrainRecord record;
    auto params = net.params();
    auto states = net.states();
    std::vector<std::vector<T>> best_params, best_states;
    EarlyStopping stopper;
    uint64_t global_step = 0;
    Tensor<T> x, y;

    auto snapshot = [&]() {
        best_params.clear();
        best_states.clear();
        for (const auto &p : params)
            best_params.push_back(p.value->vec());
        for (const auto &s : states)
            best_states.push_back(s.value->vec());
    };

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch)
    {
        const auto t0 = std::chrono::steady_clock::now();

        RandomStream shuffle(config.seed,
                             stream_id(StreamPurpose::shuffle, static_cast<uint64_t>(epoch)));
        for (size_t i = order.size(); i > 1; --i)
        {
            const size_t j = static_cast<size_t>(shuffle.next_u64() % i);
            std::swap(order[i - 1], order[j]);
        }

        long double acc = 0.0L;
        int64_t total = 0;
        try
        {
            for (size_t first = 0; first < order.size();
                 first += static_cast<size_t>(config.batch_size))
            {
                const int count = static_cast<int>(
                    std::min<size_t>(static_cast<size_t>(config.batch_size),
                                     order.size() - first));
                detail::fill_batch(data, order, first, count, x, y);

                RandomStream drop(config.seed, stream_id(StreamPurpose::dropout, global_step));
                ++global_step;
                const Tensor<T> &pred = net.forward(x, Mode::train, &drop);
                const LossResult<T> lr = masked_mse(pred, y, mask);
                if (!std::isfinite(static_cast<double>(lr.value)))
                    throw numeric_error("train: non-finite batch loss");
                const int64_t n = static_cast<int64_t>(count) * data.manifest.group_size *
                                  data.manifest.n_rx * data.manifest.n_tx;
                acc += static_cast<long double>(lr.value) * static_cast<long double>(n);
                total += n;

                net.backward(lr.grad);
                opt.step(params);
            }

            record.train_loss.push_back(static_cast<double>(acc / static_cast<long double>(total)));
            record.val_loss.push_back(
                detail::split_loss(net, data, val_range, config.batch_size, mask));
        }
        catch (const numeric_error &e)
        {
            record.stop_reason = "diverged";
            throw train_diverged(std::string("divergence in epoch ") + std::to_string(epoch) +
                                     ": " + e.what(),
                                 record);
        }

        const double val = record.val_loss.back();
        record.seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

        if (stopper.observe(epoch, val))
        {
            record.best_val_loss = stopper.best;
            record.best_epoch = stopper.best_epoch;
            snapshot();
        }

        if (stopper.should_stop(config.patience))
        {
            record.stop_reason = "early_stop";
            break;
        }
        if (epoch == config.max_epochs)
            record.stop_reason = "max_epochs";
    }

    for (size_t i = 0; i < params.size(); ++i)
        params[i].value->vec() = best_params[i];
    for (size_t i = 0; i < states.size(); ++i)
        states[i].value->vec() = best_states[i];
    return record;
}

} // namespace bfmlab

#endif
