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

#include "bfmlab/trainer.hpp"

#include <fstream>

#include "bfmlab/format.hpp"

namespace bfmlab
{

void TrainConfig::validate() const
{
    if (batch_size < 1)
        throw config_error("train config: batch_size must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw config_error("train config: learning_rate must be positive and finite");
    if (max_epochs < 1)
        throw config_error("train config: max_epochs must be at least 1");
    if (patience < 1)
        throw config_error("train config: patience must be at least 1");
    if (optimizer != "adaptive-moment" && optimizer != "plain-sgd")
        throw config_error("train config: unknown optimizer '" + optimizer + "'");
}

void write_train_record_csv(const std::filesystem::path &path, const TrainRecord &record)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("train record: cannot open '" + path.string() + "' for writing");
    out << "epoch,train_loss,val_loss,seconds\n";
    for (int e = 0; e < record.epochs(); ++e)
    {
        out << (e + 1) << ',' << format_double(record.train_loss[e]) << ','
            << format_double(record.val_loss[e]) << ',' << format_double(record.seconds[e])
            << '\n';
    }
    if (!out)
        throw io_error("train record: write to '" + path.string() + "' failed");
}

} // namespace bfmlab
