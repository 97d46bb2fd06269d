// Copyright 2026 The emflow Authors
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

#include "doctest.h"
#include "emflow/log.hpp"
#include "emflow/types.hpp"

TEST_CASE("log level names") {
  CHECK_NOTHROW(emflow::set_log_level("debug"));
  CHECK_NOTHROW(emflow::set_log_level("off"));
  CHECK_THROWS_AS(emflow::set_log_level("loud"), emflow::InvalidArgument);
  emflow::set_log_level("warn");
}
