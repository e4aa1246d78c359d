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

#include "http.h"

#include <httplib.h>

#include "granola/errors.h"

namespace granola::internal {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl Split(const std::string& url) {
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("URL '" + url + "' has no scheme");
  }
  const size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Client MakeClient(const std::string& origin, double timeout_seconds) {
  httplib::Client client(origin);
  if (!client.is_valid()) {
    throw ConfigError("unsupported URL origin '" + origin + "'");
  }
  const auto seconds = static_cast<time_t>(timeout_seconds);
  const auto usec =
      static_cast<time_t>((timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, usec);
  client.set_read_timeout(seconds, usec);
  client.set_write_timeout(seconds, usec);
  client.set_follow_location(true);
  return client;
}

HttpResponse Convert(const httplib::Result& result, const std::string& url) {
  if (!result) {
    throw TransportError("request to " + url +
                         " failed: " + httplib::to_string(result.error()));
  }
  return {result->status, result->body};
}

}  // namespace

HttpResponse HttpPostJson(const std::string& url, const HttpHeaders& headers,
                          const std::string& body, double timeout_seconds) {
  const SplitUrl split = Split(url);
  httplib::Client client = MakeClient(split.origin, timeout_seconds);
  httplib::Headers h;
  for (const auto& [key, value] : headers) h.emplace(key, value);
  return Convert(client.Post(split.path, h, body, "application/json"), url);
}

HttpResponse HttpGet(const std::string& url, const QueryParams& params,
                     double timeout_seconds) {
  const SplitUrl split = Split(url);
  httplib::Client client = MakeClient(split.origin, timeout_seconds);
  httplib::Params p;
  for (const auto& [key, value] : params) p.emplace(key, value);
  return Convert(client.Get(split.path, p, httplib::Headers{}), url);
}

}  // namespace granola::internal
