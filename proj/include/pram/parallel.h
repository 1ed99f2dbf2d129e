//
// Copyright 2026 The PRAM Toolkit Authors
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
//

#ifndef PRAM_PARALLEL_H_
#define PRAM_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace pram {

// Process-wide worker count. Defaults to the number of logical cores.
void SetThreadCount(int threads);
int ThreadCount();

// Runs body(i) for every i in [0, count). Calls made from inside a running
// ParallelFor execute serially on the calling worker. The first exception
// thrown by any body is rethrown after all workers finish.
void ParallelFor(std::size_t count,
                 const std::function<void(std::size_t)>& body);

}  // namespace pram

#endif  // PRAM_PARALLEL_H_
