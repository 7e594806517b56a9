#pragma once

#include <stdexcept>
#include <string>

namespace streamcap {

struct FrameParams {
    double frame_duration_s = 0.01;
    double packet_size_bits = 5000.0;

    void validate() const {
        if (frame_duration_s <= 0 || packet_size_bits <= 0)
            throw std::invalid_argument("frame params must be strictly positive");
    }
    // packets/frame carried by a bit rate, and back
    double packets_per_frame(double bits_per_s) const {
        return bits_per_s * frame_duration_s / packet_size_bits;
    }
    double rate_bps(double packets_per_frame) const {
        return packets_per_frame * packet_size_bits / frame_duration_s;
    }
};

struct QoeConstraints {
    double epsilon = 0.01;  // max outage probability
    double delta0 = 0.03;   // max packet drop rate

    void validate() const {
        if (epsilon < 0 || epsilon >= 1 || delta0 < 0 || delta0 >= 1)
            throw std::invalid_argument("constraints must lie in [0,1)");
    }
};

}  // namespace streamcap
