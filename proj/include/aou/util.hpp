#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace aou {

// Neumaier-compensated accumulator; keeps long exact-enumeration sums
// accurate enough for the 1e-12 decomposition identity.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (std::isspace(static_cast<unsigned char>(s[b])) != 0)) ++b;
    while (e > b && (std::isspace(static_cast<unsigned char>(s[e - 1])) != 0)) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// FNV-1a over bytes, two lanes; collision-safe at cache/run-key scale.
inline std::string hash128_hex(const std::string& bytes) {
    auto lane = [&bytes](std::uint64_t basis, std::uint64_t prime) {
        std::uint64_t h = basis;
        for (unsigned char c : bytes) {
            h ^= c;
            h *= prime;
        }
        return h;
    };
    std::uint64_t a = lane(0xcbf29ce484222325ULL, 0x100000001b3ULL);
    std::uint64_t b = lane(0x84222325cbf29ce4ULL, 0x00000100000001b3ULL);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b));
    return std::string(buf);
}

}  // namespace aou
