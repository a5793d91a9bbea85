// Copyright 2026 The MSIC Authors
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

#include "msic/log.h"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <set>

namespace msic {
namespace {

std::atomic<bool> g_enabled{true};
std::mutex g_mu;
std::set<std::string>& seen() {
  static std::set<std::string> s;
  return s;
}

}  // namespace

void warn_once(const std::string& message) {
  if (!g_enabled.load()) return;
  std::lock_guard<std::mutex> lock(g_mu);
  if (!seen().insert(message).second) return;
  std::fprintf(stderr, "warning: %s\n", message.c_str());
}

void set_warnings_enabled(bool enabled) { g_enabled.store(enabled); }

}  // namespace msic
