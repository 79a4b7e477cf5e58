#pragma once

#include "inlinerec/classifier.hpp"
#include "inlinerec/error.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

namespace inlinerec {

// External-model protocol: newline-delimited JSON over a byte stream.
//   client -> server  {"protocol":"inlinerec-window-labels","version":1}
//   server -> client  the same handshake line
//   client -> server  {"id":n,"tokens":[...]}   ids strictly increasing
//   server -> client  {"id":n,"label":"name"}   "" means EMPTY, same order
inline constexpr std::string_view kProtocolName = "inlinerec-window-labels";
inline constexpr int kProtocolVersion = 1;

class ProtocolError : public DataError {
public:
    using DataError::DataError;
};

class ChannelTimeout : public DataError {
public:
    using DataError::DataError;
};

/// An ordered, line-oriented duplex stream.
class LineChannel {
public:
    virtual ~LineChannel() = default;
    virtual void send_line(std::string_view line) = 0;
    /// nullopt on timeout; throws ProtocolError once the peer closed the stream.
    virtual std::optional<std::string> recv_line(std::chrono::milliseconds timeout) = 0;
};

/// Channel over a pair of file descriptors, closed on destruction.
class FdChannel : public LineChannel {
public:
    FdChannel(int read_fd, int write_fd);
    ~FdChannel() override;
    FdChannel(const FdChannel&) = delete;
    FdChannel& operator=(const FdChannel&) = delete;

    void send_line(std::string_view line) override;
    std::optional<std::string> recv_line(std::chrono::milliseconds timeout) override;

protected:
    FdChannel() : read_fd_(-1), write_fd_(-1) {}
    void adopt(int read_fd, int write_fd);
    void close_fds();

private:
    int read_fd_;
    int write_fd_;
    std::string buffer_;
};

/// Spawns `argv` and talks to it over its stdin/stdout.
class SubprocessChannel : public FdChannel {
public:
    explicit SubprocessChannel(const std::vector<std::string>& argv);
    ~SubprocessChannel() override;

private:
    pid_t pid_ = -1;
};

std::string handshake_line();

struct ExternalOptions {
    std::size_t batch_size = 32;
    std::chrono::milliseconds timeout{30000};
    std::function<void(std::string_view)> warn; // unknown labels etc.
};

struct ExternalBatchError {
    std::size_t first_window = 0;
    std::size_t count = 0;
    std::string message;
};

struct ExternalPrediction {
    std::vector<std::optional<std::string>> labels; // nullopt for windows in failed batches
    std::vector<ExternalBatchError> errors;
    std::size_t unknown_labels = 0;
};

/// Labels outside `known` are mapped to EMPTY and reported through warn.
/// A failed batch discards its partial results; the stream is then out of
/// sync, so every later batch is reported failed as well.
ExternalPrediction predict_external(LineChannel& channel, const std::vector<WindowInstance>& windows,
                                    const BpeVocab& vocab, const std::vector<std::string>& known,
                                    const ExternalOptions& options = {});

} // namespace inlinerec
