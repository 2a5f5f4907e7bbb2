#pragma once

// Plain TCP binding for the engine, using the same newline-delimited JSON
// framing as the simulated transport. One thread per connection; all
// messages funnel through a single lock so the engine sees one totally
// ordered stream.

#include "triad/engine.hpp"
#include "triad/error.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace triad {

namespace detail {

inline bool write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

/// Buffered line reader over a socket.
class LineReader {
public:
    explicit LineReader(int fd) : fd_(fd) {}

    std::optional<std::string> next() {
        for (;;) {
            if (auto pos = buf_.find('\n'); pos != std::string::npos) {
                std::string line = buf_.substr(0, pos);
                buf_.erase(0, pos + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            char chunk[4096];
            const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) return std::nullopt;
            buf_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    int fd_;
    std::string buf_;
};

} // namespace detail

class TcpServer {
public:
    TcpServer(Engine& engine, const std::string& host, std::uint16_t port) : engine_(engine) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw error(errc::io_error, std::string("socket: ") + std::strerror(errno));
        const int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(listen_fd_);
            throw error(errc::invalid_argument, "bad listen address '" + host + "'");
        }
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
            const std::string why = std::strerror(errno);
            ::close(listen_fd_);
            throw error(errc::io_error, "bind/listen " + host + ":" + std::to_string(port) + ": " + why);
        }
        socklen_t len = sizeof addr;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
    }

    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    ~TcpServer() { stop(); }

    std::uint16_t port() const noexcept { return port_; }

    /// Accepts connections on a background thread.
    void start() {
        accept_thread_ = std::thread([this] { accept_loop(); });
    }

    void stop() {
        if (stopping_.exchange(true)) return;
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        if (accept_thread_.joinable()) accept_thread_.join();
        {
            std::lock_guard lock(mutex_);
            for (auto& [_, fd] : connections_) ::shutdown(fd, SHUT_RDWR);
        }
        for (auto& t : workers_) {
            if (t.joinable()) t.join();
        }
    }

private:
    void accept_loop() {
        while (!stopping_) {
            const int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) {
                if (errno == EINTR) continue;
                return;
            }
            std::lock_guard lock(mutex_);
            const std::string conn = "conn-" + std::to_string(++next_id_);
            connections_[conn] = fd;
            workers_.emplace_back([this, conn, fd] { serve(conn, fd); });
        }
    }

    void serve(const std::string& conn, int fd) {
        detail::LineReader reader(fd);
        while (auto line = reader.next()) {
            if (line->empty()) continue;
            std::lock_guard lock(mutex_);
            for (const auto& out : engine_.receive(conn, *line)) {
                auto it = connections_.find(out.to);
                if (it == connections_.end()) continue;
                if (!detail::write_all(it->second, out.message.dump() + "\n")) ::shutdown(it->second, SHUT_RDWR);
            }
        }
        std::lock_guard lock(mutex_);
        engine_.disconnect(conn);
        connections_.erase(conn);
        ::close(fd);
    }

    Engine& engine_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::mutex mutex_;
    std::map<std::string, int> connections_;
    std::vector<std::thread> workers_;
    std::thread accept_thread_;
    std::uint64_t next_id_ = 0;
};

/// Minimal blocking client for the line protocol.
class TcpClient {
public:
    TcpClient(const std::string& host, std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw error(errc::io_error, "socket");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, host.c_str(), &addr.sin_addr);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
            ::close(fd_);
            throw error(errc::io_error, std::string("connect: ") + std::strerror(errno));
        }
        reader_.emplace(fd_);
    }

    TcpClient(const TcpClient&) = delete;
    TcpClient& operator=(const TcpClient&) = delete;
    ~TcpClient() { ::close(fd_); }

    void send(const json& msg) {
        if (!detail::write_all(fd_, msg.dump() + "\n")) throw error(errc::io_error, "send failed");
    }

    json receive() {
        auto line = reader_->next();
        if (!line) throw error(errc::io_error, "connection closed");
        return json::parse(*line);
    }

private:
    int fd_ = -1;
    std::optional<detail::LineReader> reader_;
};

} // namespace triad
