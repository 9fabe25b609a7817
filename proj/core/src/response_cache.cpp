#include "vpersona/provider.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace vpersona {

ResponseCache::ResponseCache(std::filesystem::path directory) : directory_(std::move(directory)) {
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    require(!ec, ErrorCode::IoError, "cannot create cache directory '" + directory_.string() + "': " + ec.message());
}

std::filesystem::path ResponseCache::resolve_directory(const std::filesystem::path& configured) {
    if (const char* env = std::getenv("VPERSONA_CACHE_DIR"); env != nullptr && *env != '\0') {
        return std::filesystem::path(env);
    }
    return configured;
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return directory_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::vector<std::string>> ResponseCache::get(const std::string& key) {
    std::lock_guard lock(mutex_);
    if (const auto it = memory_.find(key); it != memory_.end()) {
        return it->second;
    }
    std::ifstream in(path_for(key));
    if (!in) {
        return std::nullopt;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto parsed = nlohmann::json::parse(buffer.str(), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array()) {
        // Treat corrupt entries as misses; the next put overwrites them.
        return std::nullopt;
    }
    auto responses = parsed.get<std::vector<std::string>>();
    memory_.emplace(key, responses);
    return responses;
}

void ResponseCache::put(const std::string& key, const std::vector<std::string>& responses) {
    std::lock_guard lock(mutex_);
    memory_[key] = responses;
    const auto target = path_for(key);
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
    require(!ec, ErrorCode::IoError, "cannot create cache shard: " + ec.message());
    auto temp = target;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorCode::IoError, "cannot write cache entry " + temp.string());
        out << nlohmann::json(responses).dump();
    }
    std::filesystem::rename(temp, target, ec);
    require(!ec, ErrorCode::IoError, "cannot publish cache entry: " + ec.message());
}

CachingProvider::CachingProvider(std::shared_ptr<Provider> inner, std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
    require(inner_ != nullptr && cache_ != nullptr, ErrorCode::InvalidArgument,
            "CachingProvider needs a provider and a cache");
}

std::vector<std::string> CachingProvider::complete(const CompletionRequest& request) {
    const auto key = request.cache_key(inner_->model_id());
    if (auto cached = cache_->get(key); cached && cached->size() == request.params().n_samples) {
        ++hits_;
        return *std::move(cached);
    }
    ++misses_;
    auto responses = inner_->complete(request);
    cache_->put(key, responses);
    return responses;
}

} // namespace vpersona
