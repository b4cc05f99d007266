#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace attn {

std::string sha1_hex(std::string_view data);

/// Same digest `git hash-object` reports: sha1("blob <size>\0" + content).
std::string git_blob_sha1(std::string_view content);
std::string git_blob_sha1_file(const std::filesystem::path& path);

/// Digest over (name, blob digest) pairs, order-sensitive.
std::string combined_sha1(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace attn
