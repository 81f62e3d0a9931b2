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

#ifndef BFMLAB_ERRORS_HPP
#define BFMLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bfmlab
{

// Invalid configuration or precondition violation (CLI exit code 2).
class config_error : public std::runtime_error
{
public:
    explicit config_error(const std::string &msg) : std::runtime_error(msg) {}
};

// File I/O failure, bad format, or missing artifact (CLI exit code 3).
class io_error : public std::runtime_error
{
public:
    explicit io_error(const std::string &msg) : std::runtime_error(msg) {}
};

// Numeric failure such as divergence or non-finite values (CLI exit code 4).
class numeric_error : public std::runtime_error
{
public:
    explicit numeric_error(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace bfmlab

#endif
