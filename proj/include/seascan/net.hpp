#ifndef SEASCAN_NET_HPP
#define SEASCAN_NET_HPP

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <stdexcept>
#include <string>

#include "seascan/xtf.hpp"

namespace seascan {

// Blocking reads from a file descriptor (socket or pipe). Owns the fd.
class FdSource final : public ByteSource {
public:
    explicit FdSource(int fd) : fd_(fd) {}
    ~FdSource() override {
        if (fd_ >= 0) ::close(fd_);
    }
    FdSource(const FdSource&) = delete;
    FdSource& operator=(const FdSource&) = delete;

    size_t read(uint8_t* dst, size_t n) override {
        for (;;) {
            ssize_t got = ::read(fd_, dst, n);
            if (got >= 0) return static_cast<size_t>(got);
            if (errno == EINTR) continue;
            throw XtfError(std::string("read failed: ") + std::strerror(errno));
        }
    }

private:
    int fd_;
};

// Connects to host:port and returns the socket fd.
inline int tcp_connect(const std::string& host, const std::string& port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res);
    if (rc != 0) throw XtfError("cannot resolve " + host + ":" + port + ": " + gai_strerror(rc));
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw XtfError("cannot connect to " + host + ":" + port);
    return fd;
}

}  // namespace seascan

#endif  // SEASCAN_NET_HPP
