#include "inlinerec/external.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

extern char** environ;

namespace inlinerec {

FdChannel::FdChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

FdChannel::~FdChannel() {
    close_fds();
}

void FdChannel::adopt(int read_fd, int write_fd) {
    close_fds();
    read_fd_ = read_fd;
    write_fd_ = write_fd;
}

void FdChannel::close_fds() {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0 && read_fd_ != write_fd_) ::close(read_fd_);
    read_fd_ = write_fd_ = -1;
}

void FdChannel::send_line(std::string_view line) {
    if (write_fd_ < 0) throw ProtocolError("channel is closed");
    std::string buf(line);
    buf += '\n';
    std::size_t done = 0;
    while (done < buf.size()) {
        const auto n = ::write(write_fd_, buf.data() + done, buf.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("write to model failed: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> FdChannel::recv_line(std::chrono::milliseconds timeout) {
    if (read_fd_ < 0) throw ProtocolError("channel is closed");
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        pollfd pfd{read_fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
        }
        if (rc == 0) return std::nullopt;
        char chunk[4096];
        const auto n = ::read(read_fd_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw ProtocolError(std::string("read from model failed: ") + std::strerror(errno));
        }
        if (n == 0) throw ProtocolError("model closed the stream");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

SubprocessChannel::SubprocessChannel(const std::vector<std::string>& argv) {
    if (argv.empty()) throw UsageError("external model command is empty");
    std::signal(SIGPIPE, SIG_IGN);

    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw DataError("pipe failed");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw DataError("pipe failed");
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    const int rc = posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(to_child[0]);
    ::close(from_child[1]);
    if (rc != 0) {
        ::close(to_child[1]);
        ::close(from_child[0]);
        throw DataError("cannot start model '" + argv[0] + "': " + std::strerror(rc));
    }
    adopt(from_child[0], to_child[1]);
}

SubprocessChannel::~SubprocessChannel() {
    close_fds();
    if (pid_ <= 0) return;
    for (int i = 0; i < 100; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) != 0) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
}

std::string handshake_line() {
    return nlohmann::json{{"protocol", kProtocolName}, {"version", kProtocolVersion}}.dump();
}

namespace {

std::string recv_or_throw(LineChannel& ch, std::chrono::milliseconds timeout, const char* what) {
    auto line = ch.recv_line(timeout);
    if (!line) throw ChannelTimeout(std::string("timed out waiting for ") + what);
    return *line;
}

void do_handshake(LineChannel& ch, std::chrono::milliseconds timeout) {
    ch.send_line(handshake_line());
    const auto reply = recv_or_throw(ch, timeout, "handshake");
    try {
        const auto j = nlohmann::json::parse(reply);
        if (j.at("protocol").get<std::string>() != kProtocolName)
            throw ProtocolError("model speaks protocol '" + j.at("protocol").get<std::string>() + "'");
        if (j.at("version").get<int>() != kProtocolVersion)
            throw ProtocolError("model speaks protocol version " + std::to_string(j.at("version").get<int>()));
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("bad handshake: ") + e.what());
    }
}

} // namespace

ExternalPrediction predict_external(LineChannel& channel, const std::vector<WindowInstance>& windows,
                                    const BpeVocab& vocab, const std::vector<std::string>& known,
                                    const ExternalOptions& options) {
    ExternalPrediction out;
    out.labels.resize(windows.size());
    if (windows.empty()) return out;
    const std::size_t batch = std::max<std::size_t>(1, options.batch_size);

    std::string broken;
    try {
        do_handshake(channel, options.timeout);
    } catch (const DataError& e) {
        broken = e.what();
    }

    std::uint64_t next_id = 0;
    for (std::size_t first = 0; first < windows.size(); first += batch) {
        const std::size_t count = std::min(batch, windows.size() - first);
        const std::uint64_t base_id = next_id;
        next_id += count;
        if (!broken.empty()) {
            out.errors.push_back({first, count, "channel unusable: " + broken});
            continue;
        }
        std::vector<std::string> labels;
        try {
            for (std::size_t i = 0; i < count; ++i) {
                nlohmann::json req{{"id", base_id + i}, {"tokens", vocab.encode(windows[first + i].text())}};
                channel.send_line(req.dump());
            }
            for (std::size_t i = 0; i < count; ++i) {
                const auto line = recv_or_throw(channel, options.timeout, "a label");
                nlohmann::json resp;
                try {
                    resp = nlohmann::json::parse(line);
                    const auto id = resp.at("id").get<std::uint64_t>();
                    if (id != base_id + i)
                        throw ProtocolError("response id " + std::to_string(id) + " where " +
                                            std::to_string(base_id + i) + " was expected");
                    labels.push_back(resp.at("label").get<std::string>());
                } catch (const nlohmann::json::exception& e) {
                    throw ProtocolError("malformed response '" + line + "': " + e.what());
                }
            }
        } catch (const DataError& e) {
            broken = e.what();
            out.errors.push_back({first, count, e.what()});
            continue;
        }
        for (std::size_t i = 0; i < count; ++i) {
            auto& l = labels[i];
            if (!l.empty() && std::find(known.begin(), known.end(), l) == known.end()) {
                ++out.unknown_labels;
                if (options.warn)
                    options.warn("window " + std::to_string(first + i) + ": unknown label '" + l + "' mapped to EMPTY");
                l.clear();
            }
            out.labels[first + i] = std::move(l);
        }
    }
    return out;
}

} // namespace inlinerec
