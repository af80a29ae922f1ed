#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <json.hpp>

#include "mwtp/cli.hpp"
#include "mwtp/config.hpp"
#include "mwtp/storage.hpp"

namespace testing {

inline std::filesystem::path fixture_dir()
{
    return MWTP_FIXTURE_DIR;
}

inline std::filesystem::path config_dir()
{
    return MWTP_CONFIG_DIR;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& body)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << body;
}

inline const nlohmann::json& manifest()
{
    static const nlohmann::json m = nlohmann::json::parse(read_file(fixture_dir() / "manifest.json"));
    return m;
}

inline mwtp::Config fixture_config()
{
    return mwtp::Config::load(fixture_dir() / "fixture.conf");
}

inline mwtp::Config default_config()
{
    return mwtp::Config::load(config_dir() / "mwtp.conf");
}

/// In-memory store initialised from `cfg`, plus the catalog with store ids.
struct Loaded {
    mwtp::Store store{":memory:"};
    mwtp::Catalog catalog;

    explicit Loaded(const mwtp::Config& cfg)
    {
        mwtp::init_store(store, cfg);
        catalog = mwtp::load_catalog(store, cfg);
    }
};

/// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("mwtp-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testing
