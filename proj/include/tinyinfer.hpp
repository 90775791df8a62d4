// Copyright 2026 The TinyInfer Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef TINYINFER_HPP_
#define TINYINFER_HPP_

#include "tinyinfer/bench.hpp"
#include "tinyinfer/error.hpp"
#include "tinyinfer/fire.hpp"
#include "tinyinfer/fixtures.hpp"
#include "tinyinfer/graph.hpp"
#include "tinyinfer/model_io.hpp"
#include "tinyinfer/nn_ops.hpp"
#include "tinyinfer/quant.hpp"
#include "tinyinfer/squeezenet.hpp"
#include "tinyinfer/tensor.hpp"
#include "tinyinfer/thread_pool.hpp"
#include "tinyinfer/timing.hpp"

#endif  // TINYINFER_HPP_
