#include "telelink/udp_shim.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <system_error>

namespace telelink {

namespace {

sockaddr_in loopback(std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

[[noreturn]] void throw_errno(const char* what) {
    throw std::system_error(errno, std::generic_category(), what);
}

}  // namespace

UdpShim::UdpShim() : UdpShim(PortPair{}) {}

UdpShim::UdpShim(PortPair local) {
    const std::uint16_t requested[2] = {local.band5, local.band24};
    std::uint16_t bound[2] = {0, 0};
    for (int i = 0; i < 2; ++i) {
        fd_[i] = ::socket(AF_INET, SOCK_DGRAM, 0);
        if (fd_[i] < 0) throw_errno("socket");
        sockaddr_in addr = loopback(requested[i]);
        if (::bind(fd_[i], reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
            throw_errno("bind");
        socklen_t len = sizeof(addr);
        if (::getsockname(fd_[i], reinterpret_cast<sockaddr*>(&addr), &len) != 0)
            throw_errno("getsockname");
        bound[i] = ntohs(addr.sin_port);
        const int flags = ::fcntl(fd_[i], F_GETFL, 0);
        if (flags < 0 || ::fcntl(fd_[i], F_SETFL, flags | O_NONBLOCK) < 0)
            throw_errno("fcntl");
    }
    local_ = {bound[0], bound[1]};
}

UdpShim::~UdpShim() {
    for (int fd : fd_) {
        if (fd >= 0) ::close(fd);
    }
}

void UdpShim::send_to(const PortPair& remote, const Emission& emission) const {
    const std::size_t idx = link_index(emission.link);
    const std::uint16_t port = emission.link == LinkId::band5 ? remote.band5 : remote.band24;
    sockaddr_in addr = loopback(port);
    const ssize_t sent =
        ::sendto(fd_[idx], emission.datagram.data(), emission.datagram.size(), 0,
                 reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
    if (sent < 0) throw_errno("sendto");
}

std::vector<UdpShim::Received> UdpShim::poll() {
    std::vector<Received> out;
    std::uint8_t buf[65536];
    for (LinkId link : all_links) {
        const std::size_t idx = link_index(link);
        while (true) {
            const ssize_t n = ::recv(fd_[idx], buf, sizeof(buf), 0);
            if (n < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK) break;
                throw_errno("recv");
            }
            out.push_back({link, std::vector<std::uint8_t>(buf, buf + n)});
        }
    }
    return out;
}

}  // namespace telelink
