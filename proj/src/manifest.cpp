#include "kroncov/manifest.hpp"

#include <array>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "kroncov/errors.hpp"

namespace kroncov {

namespace {

// Compact SHA-256 (FIPS 180-4).
class Sha256 {
public:
    Sha256() { reset(); }

    void update(const unsigned char* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            buffer_[buflen_++] = data[i];
            if (buflen_ == 64) {
                process_block();
                total_ += 512;
                buflen_ = 0;
            }
        }
    }

    std::string hex_digest() {
        total_ += buflen_ * 8ULL;
        buffer_[buflen_++] = 0x80;
        if (buflen_ > 56) {
            while (buflen_ < 64) buffer_[buflen_++] = 0;
            process_block();
            buflen_ = 0;
        }
        while (buflen_ < 56) buffer_[buflen_++] = 0;
        for (int i = 7; i >= 0; --i) buffer_[buflen_++] = static_cast<unsigned char>(total_ >> (i * 8));
        process_block();

        static const char* kHex = "0123456789abcdef";
        std::string out(64, '0');
        for (int i = 0; i < 8; ++i) {
            for (int b = 0; b < 4; ++b) {
                unsigned char byte = static_cast<unsigned char>(state_[i] >> ((3 - b) * 8));
                out[i * 8 + b * 2] = kHex[byte >> 4];
                out[i * 8 + b * 2 + 1] = kHex[byte & 0xf];
            }
        }
        return out;
    }

private:
    void reset() {
        state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                  0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
        buflen_ = 0;
        total_ = 0;
    }

    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void process_block() {
        static const std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(buffer_[i * 4]) << 24) | (std::uint32_t(buffer_[i * 4 + 1]) << 16) |
                   (std::uint32_t(buffer_[i * 4 + 2]) << 8) | std::uint32_t(buffer_[i * 4 + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = h + s1 + ch + k[i] + w[i];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + maj;
            h = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        state_[0] += a;
        state_[1] += b;
        state_[2] += c;
        state_[3] += d;
        state_[4] += e;
        state_[5] += f;
        state_[6] += g;
        state_[7] += h;
    }

    std::array<std::uint32_t, 8> state_;
    unsigned char buffer_[64];
    std::size_t buflen_ = 0;
    std::uint64_t total_ = 0;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Sha256 h;
    h.update(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
    return h.hex_digest();
}

std::string sha256_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadInput("cannot open file: " + path);
    Sha256 h;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) h.update(reinterpret_cast<const unsigned char*>(buf), static_cast<std::size_t>(got));
    }
    return h.hex_digest();
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json inputs_json = nlohmann::json::array();
    for (const auto& [path, digest] : inputs) {
        inputs_json.push_back({{"path", path}, {"sha256", digest}});
    }
    return nlohmann::json{{"command", command},
                          {"config", config},
                          {"seed", seed},
                          {"seed_from_entropy", seed_from_entropy},
                          {"artifact_version", kArtifactVersion},
                          {"inputs", inputs_json},
                          {"created_at", created_at}};
}

RunManifest make_manifest(const std::string& command, nlohmann::json config, std::uint64_t seed,
                          bool seed_from_entropy, const std::vector<std::string>& input_paths) {
    RunManifest m;
    m.command = command;
    m.config = std::move(config);
    m.seed = seed;
    m.seed_from_entropy = seed_from_entropy;
    for (const std::string& p : input_paths) m.inputs.emplace_back(p, sha256_file_hex(p));
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    m.created_at = buf;
    return m;
}

}  // namespace kroncov
