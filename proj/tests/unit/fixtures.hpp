#pragma once

#include "argmerge/io.hpp"
#include "argmerge/similarity.hpp"

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace fixtures {

inline std::filesystem::path data(const std::string& name) {
    return std::filesystem::path(ARGMERGE_TEST_DATA_DIR) / name;
}

inline std::vector<argmerge::TreeQbaf> senate() {
    return {argmerge::load_qbaf(data("senate_q1.json")), argmerge::load_qbaf(data("senate_q2.json"))};
}

inline std::shared_ptr<argmerge::TableScorer> senate_psi() {
    return std::make_shared<argmerge::TableScorer>(argmerge::TableScorer::load(data("senate.psi.json")));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline TempDir::TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("argmerge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
}

inline TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

} // namespace fixtures
