#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include "narrex/corpus.hpp"
#include "narrex/text.hpp"

namespace testing {

inline constexpr std::int64_t kJan1st2025 = 1735689600;

inline narrex::Message message(std::string id, std::string text, std::int64_t created_utc = kJan1st2025,
                               narrex::Platform platform = narrex::Platform::telegram, std::string source = "chA") {
  narrex::Message m;
  m.id = std::move(id);
  m.platform = platform;
  m.source = std::move(source);
  m.kind = platform == narrex::Platform::telegram ? narrex::MessageKind::message : narrex::MessageKind::post;
  m.created_utc = created_utc;
  m.text = std::move(text);
  m.raw_length = narrex::text::char_count(m.text);
  return m;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("narrex_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

  std::filesystem::path write(const std::string& rel, const std::string& content) const {
    const auto p = path_ / rel;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
