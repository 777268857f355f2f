// Copyright 2026 The hshrtf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HSHRTF_HSHRTF_HPP_
#define HSHRTF_HSHRTF_HPP_

#include "hshrtf/basis.hpp"
#include "hshrtf/coords.hpp"
#include "hshrtf/error.hpp"
#include "hshrtf/fitting.hpp"
#include "hshrtf/ingest.hpp"
#include "hshrtf/metrics.hpp"
#include "hshrtf/model.hpp"

namespace hshrtf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hshrtf

#endif  // HSHRTF_HSHRTF_HPP_
