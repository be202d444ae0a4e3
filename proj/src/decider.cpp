#include "aquah/decider.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "httplib.h"

#include "aquah/error.hpp"

namespace aquah {

DeciderSpec DeciderSpec::parse(const std::string& raw) {
  const std::string text = text::trim(raw);
  if (text.empty() || text::lower(text) == "none") return {};
  DeciderSpec spec;
  if (text.rfind("exec:", 0) == 0) {
    spec.kind = Kind::Exec;
    spec.target = text.substr(5);
  } else if (text.rfind("http:", 0) == 0 || text.rfind("https:", 0) == 0) {
    spec.kind = Kind::Http;
    const std::string rest = text.substr(text.find(':') + 1);
    // Accept both "http:http://host/path" and "http://host/path".
    spec.target = rest.rfind("//", 0) == 0 ? text : rest;
  } else {
    throw RequestParseError("unknown decider '" + text + "'; expected none, exec:PATH or http:URL");
  }
  if (spec.target.empty()) throw RequestParseError("decider '" + text + "' has an empty target");
  return spec;
}

std::string DeciderSpec::str() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Exec: return "exec:" + target;
    case Kind::Http: return "http:" + target;
  }
  return "none";
}

namespace {

using Clock = std::chrono::steady_clock;

std::optional<std::string> exchange_exec(const std::string& path, const std::string& request,
                                         std::chrono::milliseconds timeout, std::string& error) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0) {
    error = std::string("pipe: ") + std::strerror(errno);
    return std::nullopt;
  }
  if (pipe(out_pipe) != 0) {
    error = std::string("pipe: ") + std::strerror(errno);
    close(in_pipe[0]);
    close(in_pipe[1]);
    return std::nullopt;
  }
  const pid_t pid = fork();
  if (pid < 0) {
    error = std::string("fork: ") + std::strerror(errno);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    return std::nullopt;
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl(path.c_str(), path.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);

  // A decider that exits without reading must not kill us with SIGPIPE.
  sigset_t block, old;
  sigemptyset(&block);
  sigaddset(&block, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &block, &old);

  const auto deadline = Clock::now() + timeout;
  std::string answer;
  std::size_t written = 0;
  int wfd = in_pipe[1], rfd = out_pipe[0];
  bool timed_out = false;
  while (rfd >= 0) {
    if (wfd >= 0 && written == request.size()) {
      close(wfd);
      wfd = -1;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {rfd, POLLIN, 0};
    if (wfd >= 0) fds[n++] = {wfd, POLLOUT, 0};
    const int ready = poll(fds, n, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) break;
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = write(wfd, request.data() + written, request.size() - written);
      if (w > 0) {
        written += static_cast<std::size_t>(w);
      } else if (w < 0 && errno != EAGAIN) {
        close(wfd);
        wfd = -1;
        written = request.size();
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[4096];
      const ssize_t r = read(rfd, buf, sizeof buf);
      if (r > 0) {
        answer.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EINTR) {
        close(rfd);
        rfd = -1;
      }
    }
  }
  if (wfd >= 0) close(wfd);
  if (rfd >= 0) close(rfd);

  int status = 0;
  if (timed_out) {
    kill(pid, SIGKILL);
    waitpid(pid, &status, 0);
  } else {
    // Output is closed; give the child the remaining budget to exit.
    while (waitpid(pid, &status, WNOHANG) == 0) {
      if (Clock::now() >= deadline) {
        kill(pid, SIGKILL);
        waitpid(pid, &status, 0);
        timed_out = true;
        break;
      }
      usleep(1000);
    }
  }
  timespec zero{0, 0};
  while (sigtimedwait(&block, nullptr, &zero) > 0) {
  }
  pthread_sigmask(SIG_SETMASK, &old, nullptr);

  if (timed_out) {
    error = "decider timed out after " + std::to_string(timeout.count()) + " ms";
    return std::nullopt;
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    error = "decider '" + path + "' exited with status " +
            std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
    return std::nullopt;
  }
  return answer;
}

std::optional<std::string> exchange_http(const std::string& url, const std::string& request,
                                         std::chrono::milliseconds timeout, std::string& error) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    error = "malformed decider URL '" + url + "'";
    return std::nullopt;
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(path, request, "text/plain");
  if (!res) {
    error = "decider request to " + url + " failed: " + httplib::to_string(res.error());
    return std::nullopt;
  }
  if (res->status != 200) {
    error = "decider at " + url + " answered HTTP " + std::to_string(res->status);
    return std::nullopt;
  }
  return res->body;
}

}  // namespace

std::optional<std::string> exchange(const DeciderSpec& spec, const std::string& request,
                                    std::chrono::milliseconds timeout, std::string& error) {
  switch (spec.kind) {
    case DeciderSpec::Kind::Exec: return exchange_exec(spec.target, request, timeout, error);
    case DeciderSpec::Kind::Http: return exchange_http(spec.target, request, timeout, error);
    case DeciderSpec::Kind::None: break;
  }
  error = "no decider configured";
  return std::nullopt;
}

ParamInitResult initialize_params(const BasinDescriptors& desc, const DeciderSpec& spec,
                                  NotificationLog& log, std::chrono::milliseconds timeout) {
  ParamProposal base = heuristic_init(desc);
  if (spec.kind == DeciderSpec::Kind::None) return {base, {}, false};

  std::string error;
  const auto answer = exchange(spec, decider_request(desc), timeout, error);
  if (answer) {
    try {
      DeciderResult r = parse_decider_json(*answer, base);
      for (const auto& w : r.warnings) log.push_back({"params", "decider: " + w});
      for (const auto& v : r.violations) log.push_back({"params", v.describe()});
      return {std::move(r.proposal), std::move(r.violations), true};
    } catch (const DeciderFormatError& e) {
      error = e.what();
    }
  }
  log.push_back({"params", "external decider " + spec.str() + " unavailable (" + error +
                               "); using heuristic initial parameters"});
  return {base, {}, false};
}

}  // namespace aquah
