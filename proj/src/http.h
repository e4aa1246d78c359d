// Copyright 2026 The Granola Authors.
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

// Minimal blocking HTTP(S) helpers shared by the LLM and KG clients.

#ifndef GRANOLA_SRC_HTTP_H_
#define GRANOLA_SRC_HTTP_H_

#include <string>
#include <utility>
#include <vector>

namespace granola::internal {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;
using QueryParams = std::vector<std::pair<std::string, std::string>>;

// Throw TransportError when no response could be obtained.
HttpResponse HttpPostJson(const std::string& url, const HttpHeaders& headers,
                          const std::string& body, double timeout_seconds);
HttpResponse HttpGet(const std::string& url, const QueryParams& params,
                     double timeout_seconds);

}  // namespace granola::internal

#endif  // GRANOLA_SRC_HTTP_H_
