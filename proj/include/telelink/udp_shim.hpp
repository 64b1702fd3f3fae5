#pragma once

#include <cstdint>
#include <vector>

#include "telelink/core.hpp"
#include "telelink/transport.hpp"

namespace telelink {

// Real-socket shim for loopback demos: one UDP socket per link, framing
// identical to the simulated path. The two ports stand in for the two WiFi
// interfaces.
class UdpShim {
public:
    struct PortPair {
        std::uint16_t band5 = 0;  // 0 binds an ephemeral port
        std::uint16_t band24 = 0;
    };

    struct Received {
        LinkId link;
        std::vector<std::uint8_t> datagram;
    };

    // Binds both sockets on 127.0.0.1 (ephemeral ports by default); throws
    // std::system_error on failure.
    UdpShim();
    explicit UdpShim(PortPair local);
    ~UdpShim();

    UdpShim(const UdpShim&) = delete;
    UdpShim& operator=(const UdpShim&) = delete;

    void send_to(const PortPair& remote, const Emission& emission) const;

    // Non-blocking drain of both sockets, band5 first.
    std::vector<Received> poll();

    PortPair local_ports() const { return local_; }

private:
    int fd_[2] = {-1, -1};
    PortPair local_;
};

}  // namespace telelink
