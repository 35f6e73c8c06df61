#include "abae/io.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>

#include "abae/error.hpp"

namespace abae {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_flag(std::string_view s, bool& out) {
  s = trim(s);
  if (s == "1") {
    out = true;
    return true;
  }
  if (s == "0") {
    out = false;
    return true;
  }
  return false;
}

void append_double(std::string& buf, double v) {
  char tmp[64];
  const auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, ptr);
}

}  // namespace

IngestResult parse_csv(std::istream& in, const std::string& name, bool require_predicate) {
  std::string line;
  std::size_t line_no = 0;
  bool has_predicate = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError("empty input, expected a header row", line_no);
  {
    std::vector<std::string_view> cols = split_commas(trim(line));
    for (auto& c : cols) c = trim(c);
    const bool base = cols.size() >= 3 && cols[0] == "id" && cols[1] == "proxy" && cols[2] == "value";
    if (!base || cols.size() > 4 || (cols.size() == 4 && cols[3] != "predicate")) {
      throw ParseError("header must be id,proxy,value[,predicate]", line_no);
    }
    has_predicate = cols.size() == 4;
  }
  if (require_predicate && !has_predicate) {
    throw ParseError("predicate column required for the inline oracle", line_no);
  }

  std::vector<std::string> warnings;
  std::vector<Record> records;
  std::unordered_map<RecordId, std::size_t> first_line;
  std::size_t clamped = 0;
  const std::size_t expected = has_predicate ? 4 : 3;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const std::vector<std::string_view> cols = split_commas(row);
    if (cols.size() != expected) {
      throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                           std::to_string(cols.size()),
                       line_no);
    }
    Record r;
    if (!parse_number(cols[0], r.id)) throw ParseError("bad id '" + std::string(cols[0]) + "'", line_no);
    if (!parse_number(cols[1], r.proxy) || !std::isfinite(r.proxy)) {
      throw ParseError("bad proxy '" + std::string(cols[1]) + "'", line_no);
    }
    if (!parse_number(cols[2], r.value) || !std::isfinite(r.value)) {
      throw ParseError("bad value '" + std::string(cols[2]) + "'", line_no);
    }
    if (has_predicate && !parse_flag(cols[3], r.predicate)) {
      throw ParseError("predicate must be 0 or 1, got '" + std::string(cols[3]) + "'", line_no);
    }
    if (r.proxy < 0.0 || r.proxy > 1.0) {
      r.proxy = std::clamp(r.proxy, 0.0, 1.0);
      ++clamped;
    }
    const auto [it, fresh] = first_line.emplace(r.id, line_no);
    if (!fresh) {
      throw DuplicateId("duplicate id " + std::to_string(r.id) + " (first seen on line " +
                            std::to_string(it->second) + ")",
                        line_no);
    }
    records.push_back(r);
  }
  if (records.empty()) throw ParseError("no data rows", line_no);
  if (clamped > 0) {
    warnings.push_back("ProxyClamped: " + std::to_string(clamped) +
                              " proxy scores outside [0, 1] were clamped");
  }
  return IngestResult{Dataset(name, std::move(records), has_predicate), std::move(warnings)};
}

IngestResult ingest_csv(const std::string& path, bool require_predicate) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return parse_csv(in, path, require_predicate);
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  std::string buf = dataset.has_predicate() ? "id,proxy,value,predicate\n" : "id,proxy,value\n";
  for (const Record& r : dataset.records()) {
    buf += std::to_string(r.id);
    buf += ',';
    append_double(buf, r.proxy);
    buf += ',';
    append_double(buf, r.value);
    if (dataset.has_predicate()) buf += r.predicate ? ",1" : ",0";
    buf += '\n';
  }
  out << buf;
}

SubprocessOracle::SubprocessOracle(std::string command) : command_(std::move(command)) {
  if (command_.empty()) throw InvalidArgument("oracle command is empty");
  // A child that exits early must surface as a protocol error, not SIGPIPE.
  std::signal(SIGPIPE, SIG_IGN);
}

namespace {

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe(fd) != 0) throw OracleProtocolError(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    for (int f : fd) {
      if (f >= 0) ::close(f);
    }
  }
  void close_end(int i) {
    if (fd[i] >= 0) ::close(fd[i]);
    fd[i] = -1;
  }
};

std::string describe_ids(const std::vector<RecordId>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i == 20) {
      s += ", ... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    if (i > 0) s += ", ";
    s += std::to_string(ids[i]);
  }
  return s;
}

}  // namespace

std::vector<Reveal> SubprocessOracle::evaluate(const Dataset& dataset,
                                               std::span<const std::size_t> indices) {
  if (indices.empty()) return {};

  std::string request;
  std::unordered_map<RecordId, std::size_t> slot_of;  // id -> position in indices
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const RecordId id = dataset[indices[i]].id;
    slot_of.emplace(id, i);
    request += std::to_string(id);
    request += '\n';
  }

  Pipe to_child;
  Pipe from_child;
  const pid_t pid = ::fork();
  if (pid < 0) throw OracleProtocolError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(to_child.fd[0], STDIN_FILENO);
    ::dup2(from_child.fd[1], STDOUT_FILENO);
    ::close(to_child.fd[0]);
    ::close(to_child.fd[1]);
    ::close(from_child.fd[0]);
    ::close(from_child.fd[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  to_child.close_end(0);
  from_child.close_end(1);
  ::fcntl(to_child.fd[1], F_SETFL, O_NONBLOCK);

  std::string response;
  std::size_t written = 0;
  char buf[65536];
  bool reading = true;
  while (reading) {
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {from_child.fd[0], POLLIN, 0};
    if (to_child.fd[1] >= 0) fds[n++] = {to_child.fd[1], POLLOUT, 0};
    if (::poll(fds, n, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = ::write(to_child.fd[1], request.data() + written, request.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN && errno != EINTR) written = request.size();  // child gone
      if (written == request.size()) to_child.close_end(1);
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t r = ::read(from_child.fd[0], buf, sizeof buf);
      if (r > 0) {
        response.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (errno != EINTR && errno != EAGAIN)) {
        reading = false;
      }
    }
  }
  to_child.close_end(1);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }

  std::vector<Reveal> out(indices.size());
  std::vector<char> answered(indices.size(), 0);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < response.size()) {
    std::size_t end = response.find('\n', pos);
    if (end == std::string::npos) end = response.size();
    const std::string_view line = trim(std::string_view(response).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string_view> cols = split_commas(line);
    RecordId id = 0;
    Reveal rv;
    if (cols.size() != 3 || !parse_number(cols[0], id) || !parse_flag(cols[1], rv.predicate) ||
        !parse_number(cols[2], rv.value) || !std::isfinite(rv.value)) {
      throw OracleProtocolError("malformed oracle response line " + std::to_string(line_no) +
                                ": '" + std::string(line) + "'");
    }
    const auto it = slot_of.find(id);
    if (it == slot_of.end()) {
      throw OracleProtocolError("oracle answered id " + std::to_string(id) +
                                " which was not requested");
    }
    out[it->second] = rv;
    answered[it->second] = 1;
  }

  std::vector<RecordId> missing;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (!answered[i]) missing.push_back(dataset[indices[i]].id);
  }
  if (!missing.empty()) {
    std::string how = "exited";
    if (WIFEXITED(status)) how += " with status " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) how = "was killed by signal " + std::to_string(WTERMSIG(status));
    throw OracleProtocolError("oracle " + how + " without answering ids: " + describe_ids(missing));
  }
  return out;
}

}  // namespace abae
