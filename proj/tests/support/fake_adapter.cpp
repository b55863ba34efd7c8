// Copyright 2026 The emsrt Authors
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

// Stand-in inference engine for adapter tests. Reads one JSON request per
// line on stdin and answers on stdout.
//
//   fake_adapter asr|protocol|vision [--delay-ms N] [--response FILE] [--exit-after N]
//
// Without --response: asr answers "heard window N", protocol answers an empty
// ranking, vision answers the first label with score 0.5. With --response the
// file's JSON object is sent with the request's id key merged in.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <json.hpp>

int main(int argc, char** argv) {
  if (argc < 2) return 64;
  const std::string mode = argv[1];
  int delay_ms = 0;
  long exit_after = -1;
  nlohmann::json fixed;
  for (int i = 2; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--delay-ms") delay_ms = std::stoi(argv[i + 1]);
    else if (flag == "--exit-after") exit_after = std::stol(argv[i + 1]);
    else if (flag == "--response") fixed = nlohmann::json::parse(std::ifstream(argv[i + 1]));
    else return 64;
  }
  const std::string key = mode == "vision" ? "frame_id" : "window_id";
  std::string line;
  long served = 0;
  while (std::getline(std::cin, line)) {
    if (exit_after >= 0 && served >= exit_after) return 3;
    const auto req = nlohmann::json::parse(line);
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    nlohmann::json resp = fixed.is_object() ? fixed : nlohmann::json::object();
    resp[key] = req.at(key);
    if (!fixed.is_object()) {
      if (mode == "asr") resp["text"] = "heard window " + std::to_string(req.at(key).get<long>());
      else if (mode == "protocol") resp["ranking"] = nlohmann::json::array();
      else resp.update({{"label", req.at("labels").at(0)}, {"score", 0.5}});
    }
    std::cout << resp.dump() << "\n" << std::flush;
    ++served;
  }
  return 0;
}
