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
//
// Encoder-decoder estimator over (batch, frequency, antenna, channel)
// tensors. Encoder block b: two convolutions (ReLU) and a (2, 1) max-pool,
// with dropout + batch norm appended from block 3 on. The intermediate
// block is either two convolutions or a ConvLSTM stack with a 1x1
// restoring convolution. Decoder block d concatenates the block-(n+1-d)
// encoder output onto its input, applies two convolutions, then a
// transposed convolution doubling the frequency axis. A final 1x1 linear
// convolution produces the single-channel output.

#ifndef BFMLAB_NN_NETWORK_HPP
#define BFMLAB_NN_NETWORK_HPP

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bfmlab/container.hpp"
#include "bfmlab/model_spec.hpp"
#include "bfmlab/nn/convlstm.hpp"
#include "bfmlab/nn/layers.hpp"

namespace bfmlab
{

namespace detail
{
inline uint64_t fnv1a64_str(const std::string &s)
{
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}
} // namespace detail

template <typename T>
class Network
{
  public:
    explicit Network(const ModelSpec &spec) : spec_(spec)
    {
        spec_.validate();
        const int a = spec_.n_antenna;
        const int n = spec_.n_blocks;
        const int kf = spec_.kernel_freq;
        const int ka = spec_.kernel_ant;

        int f = spec_.f_pad;
        int c = spec_.in_channels;
        for (int b = 1; b <= n; ++b)
        {
            const int cb = spec_.block_channels(b);
            const std::string p = "enc" + std::to_string(b);
            EncBlock blk;
            blk.conv1 = Conv2d<T>(p + "/conv1", f, a, c, cb, kf, ka, true);
            blk.conv2 = Conv2d<T>(p + "/conv2", f, a, cb, cb, kf, ka, true);
            blk.pool = MaxPool2x1<T>(p + "/pool");
            blk.regularized = b >= 3;
            if (blk.regularized)
            {
                blk.drop = Dropout<T>(p + "/dropout", spec_.dropout_rate);
                blk.bn = BatchNorm<T>(p + "/bn", cb);
            }
            enc_.push_back(std::move(blk));
            f /= 2;
            c = cb;
        }

        const int cmid = spec_.bottleneck_channels();
        if (spec_.variant == "cnn")
        {
            midc1_ = Conv2d<T>("mid/conv1", f, a, c, cmid, kf, ka, true);
            midc2_ = Conv2d<T>("mid/conv2", f, a, cmid, cmid, kf, ka, true);
        }
        else
        {
            int lc = c;
            for (int l = 1; l <= spec_.convlstm_layers; ++l)
            {
                lstm_.emplace_back("mid/lstm" + std::to_string(l), f, a, lc,
                                   spec_.convlstm_hidden, ka);
                lc = spec_.convlstm_hidden;
            }
            proj_ = Conv2d<T>("mid/proj", f, a, lc, cmid, 1, 1, true);
        }
        c = cmid;

        for (int d = 1; d <= n; ++d)
        {
            const int e = n + 1 - d;
            const int ce = spec_.block_channels(e);
            const std::string p = "dec" + std::to_string(d);
            DecBlock blk;
            blk.skip_channels = ce;
            blk.conv1 = Conv2d<T>(p + "/conv1", f, a, c + ce, ce, kf, ka, true);
            blk.conv2 = Conv2d<T>(p + "/conv2", f, a, ce, ce, kf, ka, true);
            blk.tconv = ConvTranspose2d<T>(p + "/tconv", f, a, ce, ce / 2, kf, ka, true);
            dec_.push_back(std::move(blk));
            f *= 2;
            c = ce / 2;
        }

        head_ = Conv2d<T>("head", f, a, c, 1, 1, 1, false);
        enc_outs_.resize(static_cast<size_t>(n), nullptr);
        dskip_.resize(static_cast<size_t>(n));
    }

    const ModelSpec &spec() const { return spec_; }

    std::vector<ParamRef<T>> params()
    {
        std::vector<ParamRef<T>> out;
        for (auto &blk : enc_)
        {
            blk.conv1.params(out);
            blk.conv2.params(out);
            if (blk.regularized)
                blk.bn.params(out);
        }
        if (spec_.variant == "cnn")
        {
            midc1_.params(out);
            midc2_.params(out);
        }
        else
        {
            for (auto &l : lstm_)
                l.params(out);
            proj_.params(out);
        }
        for (auto &blk : dec_)
        {
            blk.conv1.params(out);
            blk.conv2.params(out);
            blk.tconv.params(out);
        }
        head_.params(out);
        return out;
    }

    std::vector<ParamRef<T>> states()
    {
        std::vector<ParamRef<T>> out;
        for (auto &blk : enc_)
            if (blk.regularized)
                blk.bn.states(out);
        return out;
    }

    int64_t param_count()
    {
        int64_t n = 0;
        for (const auto &p : params())
            n += p.value->size();
        return n;
    }

    /// Deterministic initialization; every parameter draws from its own
    /// stream keyed by the hash of its path, so values do not depend on
    /// the surrounding architecture.
    void init_params(uint64_t seed)
    {
        for (auto &p : params())
        {
            switch (p.kind)
            {
            case InitKind::zeros:
                p.value->fill(T(0));
                break;
            case InitKind::ones:
                p.value->fill(T(1));
                break;
            case InitKind::lstm_bias:
            {
                p.value->fill(T(0));
                for (int i = p.aux; i < 2 * p.aux; ++i)
                    (*p.value)[i] = T(1);
                break;
            }
            case InitKind::fan_in_uniform:
            {
                RandomStream stream(seed,
                                    stream_id(StreamPurpose::weight_init,
                                              detail::fnv1a64_str(p.path)));
                const double bound = std::sqrt(6.0 / static_cast<double>(p.fan_in));
                for (int64_t i = 0; i < p.value->size(); ++i)
                    (*p.value)[i] =
                        static_cast<T>((2.0 * stream.next_unit() - 1.0) * bound);
                break;
            }
            }
            p.grad->fill(T(0));
        }
        for (auto &s : states())
            s.value->fill(s.kind == InitKind::ones ? T(1) : T(0));
    }

    /// `dropout_stream` is only consulted in train mode with a positive
    /// dropout rate. Activations are checked for finiteness per stage and
    /// reported with the failing layer path.
    const Tensor<T> &forward(const Tensor<T> &x, Mode mode, RandomStream *dropout_stream = nullptr)
    {
        if (x.rank() != 4 || x.dim(1) != spec_.f_pad || x.dim(2) != spec_.n_antenna ||
            x.dim(3) != spec_.in_channels)
            throw config_error("network: unexpected input shape");

        const Tensor<T> *cur = &x;
        for (size_t b = 0; b < enc_.size(); ++b)
        {
            cur = &enc_[b].forward(*cur, mode, dropout_stream);
            enc_outs_[b] = cur;
            check_finite(*cur, enc_[b].conv1.path());
        }

        if (spec_.variant == "cnn")
        {
            cur = &midc2_.forward(midc1_.forward(*cur));
            check_finite(*cur, midc2_.path());
        }
        else
        {
            for (auto &l : lstm_)
            {
                cur = &l.forward(*cur);
                check_finite(*cur, l.path());
            }
            cur = &proj_.forward(*cur);
            check_finite(*cur, proj_.path());
        }

        for (size_t d = 0; d < dec_.size(); ++d)
        {
            const size_t e = dec_.size() - 1 - d;
            cur = &dec_[d].forward(*cur, *enc_outs_[e]);
            check_finite(*cur, dec_[d].tconv.path());
        }

        const Tensor<T> &y = head_.forward(*cur);
        check_finite(y, head_.path());
        return y;
    }

    /// Expects a preceding train-mode forward on the same batch. Gradients
    /// land in each parameter's grad tensor; the return value is the
    /// gradient with respect to the network input.
    const Tensor<T> &backward(const Tensor<T> &dy)
    {
        const Tensor<T> *g = &head_.backward(dy);

        for (size_t d = dec_.size(); d-- > 0;)
        {
            const size_t e = dec_.size() - 1 - d;
            g = &dec_[d].backward(*g, dskip_[e]);
        }

        if (spec_.variant == "cnn")
        {
            g = &midc1_.backward(midc2_.backward(*g));
        }
        else
        {
            g = &proj_.backward(*g);
            for (size_t l = lstm_.size(); l-- > 0;)
                g = &lstm_[l].backward(*g);
        }

        for (size_t b = enc_.size(); b-- > 0;)
        {
            sum_ = *g;
            for (int64_t i = 0; i < sum_.size(); ++i)
                sum_[i] += dskip_[b][i];
            g = &enc_[b].backward(sum_);
        }

        for (const auto &p : params())
            check_finite(*p.grad, p.path + " (gradient)");
        return *g;
    }

  private:
    struct EncBlock
    {
        Conv2d<T> conv1, conv2;
        MaxPool2x1<T> pool;
        bool regularized = false;
        Dropout<T> drop;
        BatchNorm<T> bn;

        const Tensor<T> &forward(const Tensor<T> &x, Mode mode, RandomStream *stream)
        {
            const Tensor<T> *t = &conv1.forward(x);
            t = &conv2.forward(*t);
            t = &pool.forward(*t);
            if (regularized)
            {
                t = &drop.forward(*t, mode, stream);
                t = &bn.forward(*t, mode);
            }
            return *t;
        }

        const Tensor<T> &backward(const Tensor<T> &dy)
        {
            const Tensor<T> *g = &dy;
            if (regularized)
            {
                g = &bn.backward(*g);
                g = &drop.backward(*g);
            }
            g = &pool.backward(*g);
            g = &conv2.backward(*g);
            return conv1.backward(*g);
        }
    };

    struct DecBlock
    {
        Conv2d<T> conv1, conv2;
        ConvTranspose2d<T> tconv;
        int skip_channels = 0;
        Tensor<T> cat_, dprev_;

        const Tensor<T> &forward(const Tensor<T> &prev, const Tensor<T> &skip)
        {
            if (!std::equal(prev.shape().begin(), prev.shape().end() - 1, skip.shape().begin()))
                throw config_error(conv1.path() + ": skip spatial shape mismatch");
            const int batch = prev.dim(0), f = prev.dim(1), a = prev.dim(2);
            const int cp = prev.dim(3), cs = skip.dim(3);
            cat_ = Tensor<T>({batch, f, a, cp + cs});
            const int64_t positions = static_cast<int64_t>(batch) * f * a;
            for (int64_t pos = 0; pos < positions; ++pos)
            {
                T *dst = cat_.data() + pos * (cp + cs);
                const T *sp = prev.data() + pos * cp;
                const T *ss = skip.data() + pos * cs;
                for (int i = 0; i < cp; ++i)
                    dst[i] = sp[i];
                for (int i = 0; i < cs; ++i)
                    dst[cp + i] = ss[i];
            }
            return tconv.forward(conv2.forward(conv1.forward(cat_)));
        }

        /// Returns the gradient for the previous stage; the skip part is
        /// written to dskip.
        const Tensor<T> &backward(const Tensor<T> &dy, Tensor<T> &dskip)
        {
            const Tensor<T> &dcat = conv1.backward(conv2.backward(tconv.backward(dy)));
            const int batch = cat_.dim(0), f = cat_.dim(1), a = cat_.dim(2);
            const int ctot = cat_.dim(3), cs = skip_channels, cp = ctot - cs;
            dprev_ = Tensor<T>({batch, f, a, cp});
            dskip = Tensor<T>({batch, f, a, cs});
            const int64_t positions = static_cast<int64_t>(batch) * f * a;
            for (int64_t pos = 0; pos < positions; ++pos)
            {
                const T *src = dcat.data() + pos * ctot;
                T *dp = dprev_.data() + pos * cp;
                T *ds = dskip.data() + pos * cs;
                for (int i = 0; i < cp; ++i)
                    dp[i] = src[i];
                for (int i = 0; i < cs; ++i)
                    ds[i] = src[cp + i];
            }
            return dprev_;
        }
    };

    ModelSpec spec_;
    std::vector<EncBlock> enc_;
    Conv2d<T> midc1_, midc2_;
    std::vector<ConvLstmLayer<T>> lstm_;
    Conv2d<T> proj_;
    std::vector<DecBlock> dec_;
    Conv2d<T> head_;
    std::vector<const Tensor<T> *> enc_outs_;
    std::vector<Tensor<T>> dskip_;
    Tensor<T> sum_;
};

// ---------------------------------------------------------------------------
// Checkpoint persistence (magic BFMW): manifest carries the model spec and
// the ordered parameter/state key lists; one tensor block per key follows,
// parameters first.
// ---------------------------------------------------------------------------

template <typename T>
constexpr const char *dtype_name()
{
    return sizeof(T) == 4 ? "f32" : "f64";
}

template <typename T>
void save_checkpoint(const std::filesystem::path &path, Network<T> &net,
                     const nlohmann::json &extra = nlohmann::json::object())
{
    Container c;
    c.magic = std::string(checkpoint_magic);

    std::vector<std::string> param_keys, state_keys;
    auto add_block = [&c](const ParamRef<T> &p) {
        std::vector<uint32_t> dims;
        for (int d : p.value->shape())
            dims.push_back(static_cast<uint32_t>(d));
        if constexpr (sizeof(T) == 4)
            c.tensors.push_back(TensorBlock::from_f32(dims, p.value->vec()));
        else
            c.tensors.push_back(TensorBlock::from_f64(dims, p.value->vec()));
    };
    for (const auto &p : net.params())
    {
        param_keys.push_back(p.path);
        add_block(p);
    }
    for (const auto &s : net.states())
    {
        state_keys.push_back(s.path);
        add_block(s);
    }

    c.manifest = nlohmann::json{
        {"schema_version", 1},
        {"dtype", dtype_name<T>()},
        {"model_spec", net.spec().to_json()},
        {"params", param_keys},
        {"states", state_keys},
        {"extra", extra},
    };
    save_container(path, c);
}

/// Model spec and metadata of a checkpoint, readable without committing to
/// a scalar type.
struct CheckpointInfo
{
    ModelSpec spec;
    std::string dtype;
    nlohmann::json manifest;
};

inline CheckpointInfo read_checkpoint_info(const std::filesystem::path &path)
{
    const Container c = load_container(path, checkpoint_magic);
    CheckpointInfo info;
    try
    {
        info.dtype = c.manifest.at("dtype").get<std::string>();
        info.spec = ModelSpec::from_json(c.manifest.at("model_spec"));
    }
    catch (const nlohmann::json::exception &e)
    {
        throw io_error(std::string("checkpoint: missing or malformed field: ") + e.what());
    }
    info.manifest = c.manifest;
    return info;
}

template <typename T>
void load_checkpoint(const std::filesystem::path &path, Network<T> &net)
{
    const Container c = load_container(path, checkpoint_magic);
    std::vector<std::string> param_keys, state_keys;
    try
    {
        const std::string dtype = c.manifest.at("dtype").get<std::string>();
        if (dtype != dtype_name<T>())
            throw io_error("checkpoint: dtype " + dtype + " does not match the requested " +
                           dtype_name<T>());
        const ModelSpec spec = ModelSpec::from_json(c.manifest.at("model_spec"));
        if (!(spec == net.spec()))
            throw io_error("checkpoint: model spec does not match the target network");
        param_keys = c.manifest.at("params").get<std::vector<std::string>>();
        state_keys = c.manifest.at("states").get<std::vector<std::string>>();
    }
    catch (const nlohmann::json::exception &e)
    {
        throw io_error(std::string("checkpoint: missing or malformed field: ") + e.what());
    }

    auto params = net.params();
    auto states = net.states();
    if (param_keys.size() != params.size() || state_keys.size() != states.size() ||
        c.tensors.size() != params.size() + states.size())
        throw io_error("checkpoint: tensor block count does not match the target network");

    auto fill = [](const TensorBlock &b, ParamRef<T> &p, const std::string &key) {
        if (p.path != key)
            throw io_error("checkpoint: key order mismatch at '" + key + "'");
        const std::vector<T> &src = [&]() -> const std::vector<T> & {
            if constexpr (sizeof(T) == 4)
                return b.f32;
            else
                return b.f64;
        }();
        if (static_cast<int64_t>(src.size()) != p.value->size())
            throw io_error("checkpoint: tensor size mismatch at '" + key + "'");
        p.value->vec() = src;
    };
    for (size_t i = 0; i < params.size(); ++i)
        fill(c.tensors[i], params[i], param_keys[i]);
    for (size_t i = 0; i < states.size(); ++i)
        fill(c.tensors[params.size() + i], states[i], state_keys[i]);
}

} // namespace bfmlab

#endif
