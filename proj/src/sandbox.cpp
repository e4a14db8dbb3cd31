// Copyright 2026 The pairjudge Authors
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

#include "pairjudge/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "pairjudge/error.hpp"
#include "pairjudge/text.hpp"

extern char** environ;

namespace pj::sandbox {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kOk: return "ok";
    case Status::kTimeout: return "timeout";
    case Status::kCrash: return "crash";
    case Status::kProtocolError: return "protocol_error";
    case Status::kLimitExceeded: return "limit_exceeded";
  }
  return "crash";
}

std::optional<Status> parse_status(std::string_view s) {
  for (Status st : {Status::kOk, Status::kTimeout, Status::kCrash, Status::kProtocolError,
                    Status::kLimitExceeded}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::string encode_request(const ExecRequest& request) {
  Json j{{"source", request.source},
         {"entry_name", request.entry_name},
         {"response_text", request.response_text},
         {"limits",
          {{"wall_ms", request.limits.wall_ms},
           {"memory_mb", request.limits.memory_mb},
           {"output_kb", request.limits.output_kb}}}};
  return j.dump() + "\n";
}

ExecRequest decode_request(std::string_view line) {
  try {
    Json j = Json::parse(line);
    ExecRequest r;
    r.source = j.at("source").get<std::string>();
    r.entry_name = j.at("entry_name").get<std::string>();
    r.response_text = j.at("response_text").get<std::string>();
    const Json& l = j.at("limits");
    r.limits.wall_ms = l.at("wall_ms").get<std::int64_t>();
    r.limits.memory_mb = l.at("memory_mb").get<std::int64_t>();
    r.limits.output_kb = l.at("output_kb").get<std::int64_t>();
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kSandbox, std::string("malformed exec request: ") + e.what());
  }
}

Json to_json(const ExecResult& result) {
  Json j{{"status", std::string(to_string(result.status))},
         {"stderr_excerpt", result.stderr_excerpt},
         {"wall_ms", result.wall_ms}};
  if (result.value) j["value"] = *result.value;
  return j;
}

std::string encode_result(const ExecResult& result) { return to_json(result).dump() + "\n"; }

ExecResult decode_result(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception&) {
    throw Error(ErrorKind::kSandbox, "runner reply is not JSON");
  }
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) {
    throw Error(ErrorKind::kSandbox, "runner reply lacks a status");
  }
  auto status = parse_status(j["status"].get<std::string>());
  if (!status) throw Error(ErrorKind::kSandbox, "runner reply has unknown status");
  ExecResult r;
  r.status = *status;
  if (j.contains("value")) {
    if (!j["value"].is_object()) throw Error(ErrorKind::kSandbox, "runner value must be an object");
    r.value = j["value"];
  }
  if ((r.status == Status::kOk) != r.value.has_value()) {
    throw Error(ErrorKind::kSandbox, "runner reply: value must be present exactly when status is ok");
  }
  if (j.contains("stderr_excerpt") && j["stderr_excerpt"].is_string()) {
    r.stderr_excerpt = j["stderr_excerpt"].get<std::string>();
  }
  if (j.contains("wall_ms") && j["wall_ms"].is_number_integer()) r.wall_ms = j["wall_ms"].get<std::int64_t>();
  return r;
}

std::string render_feedback(const ExecResult& result) {
  if (result.ok()) return result.value->dump();
  std::string first_line(text::trim(text::split_lines(text::trim(result.stderr_excerpt)).front()));
  std::string out(to_string(result.status));
  if (!first_line.empty()) out += ": " + first_line;
  return out;
}

ExecResult StubSandbox::execute(const ExecRequest&) {
  ExecResult r;
  r.status = Status::kCrash;
  r.stderr_excerpt = "sandbox stub: script execution unavailable";
  return r;
}

SubprocessSandbox::SubprocessSandbox(std::vector<std::string> argv, std::string dialect, std::int64_t slack_ms)
    : argv_(std::move(argv)), dialect_(std::move(dialect)), slack_ms_(slack_ms) {
  if (argv_.empty()) throw Error(ErrorKind::kConfig, "sandbox runner command is empty");
}

std::string SubprocessSandbox::identity() const {
  std::string out = "subprocess:";
  for (std::size_t i = 0; i < argv_.size(); ++i) {
    if (i) out += ' ';
    out += argv_[i];
  }
  return out;
}

namespace {

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

}  // namespace

ExecResult SubprocessSandbox::execute(const ExecRequest& request) {
  using Clock = std::chrono::steady_clock;
  int in_pair[2];
  int out_pipe[2];
  int err_pipe[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0) {
    throw Error(ErrorKind::kSandbox, std::string("socketpair: ") + std::strerror(errno));
  }
  Fd in_host(in_pair[0]), in_child(in_pair[1]);
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw Error(ErrorKind::kSandbox, "pipe failed");
  Fd out_host(out_pipe[0]), out_child(out_pipe[1]);
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) throw Error(ErrorKind::kSandbox, "pipe failed");
  Fd err_host(err_pipe[0]), err_child(err_pipe[1]);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_child.fd, 0);
  posix_spawn_file_actions_adddup2(&actions, out_child.fd, 1);
  posix_spawn_file_actions_adddup2(&actions, err_child.fd, 2);

  std::vector<char*> argv;
  for (auto& a : argv_) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  const auto started = Clock::now();
  pid_t pid = -1;
  int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw Error(ErrorKind::kSandbox, "cannot start runner '" + argv_[0] + "': " + std::strerror(rc));
  }
  in_child.reset();
  out_child.reset();
  err_child.reset();
  set_nonblocking(in_host.fd);
  set_nonblocking(out_host.fd);
  set_nonblocking(err_host.fd);

  const std::string payload = encode_request(request);
  std::size_t written = 0;
  std::string out;
  std::string err;
  const std::size_t output_cap = static_cast<std::size_t>(request.limits.output_kb) * 1024;
  const auto deadline = started + std::chrono::milliseconds(request.limits.wall_ms + slack_ms_);
  bool killed = false;

  while (out_host.fd >= 0 || err_host.fd >= 0) {
    std::vector<pollfd> fds;
    if (in_host.fd >= 0) fds.push_back({in_host.fd, POLLOUT, 0});
    if (out_host.fd >= 0) fds.push_back({out_host.fd, POLLIN, 0});
    if (err_host.fd >= 0) fds.push_back({err_host.fd, POLLIN, 0});
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) {
      ::kill(pid, SIGKILL);
      killed = true;
      break;
    }
    int n = ::poll(fds.data(), fds.size(), static_cast<int>(remaining));
    if (n < 0 && errno != EINTR) break;
    for (const auto& p : fds) {
      if (!p.revents) continue;
      if (p.fd == in_host.fd) {
        ssize_t w = ::send(in_host.fd, payload.data() + written, payload.size() - written, MSG_NOSIGNAL);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN) written = payload.size();
        if (written == payload.size()) {
          ::shutdown(in_host.fd, SHUT_WR);
          in_host.reset();
        }
        continue;
      }
      char buf[4096];
      ssize_t r = ::read(p.fd, buf, sizeof(buf));
      if (r > 0) {
        std::string& sink = p.fd == out_host.fd ? out : err;
        if (sink.size() < output_cap + 4096) sink.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        if (p.fd == out_host.fd) {
          out_host.reset();
        } else {
          err_host.reset();
        }
      }
    }
  }

  int wstatus = 0;
  ::waitpid(pid, &wstatus, 0);
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();

  if (killed) {
    ExecResult r;
    r.status = Status::kTimeout;
    r.wall_ms = elapsed;
    r.stderr_excerpt = "runner killed by host watchdog";
    return r;
  }
  if (!WIFEXITED(wstatus) || WEXITSTATUS(wstatus) != 0) {
    std::string code = WIFEXITED(wstatus) ? "exit " + std::to_string(WEXITSTATUS(wstatus))
                                          : "signal " + std::to_string(WTERMSIG(wstatus));
    throw Error(ErrorKind::kSandbox, "runner protocol failure (" + code + "): " + err.substr(0, 300));
  }
  if (out.size() > output_cap) {
    ExecResult r;
    r.status = Status::kLimitExceeded;
    r.wall_ms = elapsed;
    r.stderr_excerpt = "runner output exceeded " + std::to_string(request.limits.output_kb) + " KiB";
    return r;
  }
  ExecResult r = decode_result(text::trim(out));
  if (r.stderr_excerpt.size() > output_cap) r.stderr_excerpt.resize(output_cap);
  return r;
}

}  // namespace pj::sandbox
