#include "binsonar/digest.hpp"

#include <openssl/evp.h>

#include <memory>

#include "binsonar/error.hpp"

namespace binsonar {
namespace {

std::string digest_hex(const EVP_MD* md, std::span<const std::uint8_t> bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), out, &len) != 1) {
        throw Error("digest computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex(2 * len, '0');
    for (unsigned int i = 0; i < len; ++i) {
        hex[2 * i] = kHex[out[i] >> 4];
        hex[2 * i + 1] = kHex[out[i] & 0xF];
    }
    return hex;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) { return digest_hex(EVP_sha256(), bytes); }

std::string sha1_hex(std::span<const std::uint8_t> bytes) { return digest_hex(EVP_sha1(), bytes); }

}  // namespace binsonar
