#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "genclust/runner.hpp"

namespace httplib {
class Server;
}

namespace genclust {

/// Single-user, in-memory session behind the HTTP API. Grid runs execute one
/// at a time on a background worker; clients poll GET /runs/{id}.
class Service {
public:
    explicit Service(std::filesystem::path results_root);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Registers every endpoint on `server`.
    void bind(httplib::Server& server);

private:
    enum class RunStatus { Queued, Running, Done, Failed };

    struct RunRecord {
        std::string dataset_id;
        GridSpec spec;
        RunStatus status = RunStatus::Queued;
        std::string error;
        std::optional<GridResult> result;
    };

    void work(std::stop_token stop);
    static std::string status_name(RunStatus s);

    std::filesystem::path root_;
    std::mutex mutex_;
    std::condition_variable_any wake_;
    std::map<std::string, std::shared_ptr<const ExpressionMatrix>> datasets_;
    std::map<std::string, std::shared_ptr<RunRecord>> runs_;
    std::deque<std::string> queue_;
    std::size_t next_dataset_ = 1;
    std::size_t next_run_ = 1;
    std::string last_dataset_;
    std::optional<json> last_spec_;
    ReportTable report_;
    bool has_report_ = false;
    std::vector<IndexCurve> curves_;
    std::jthread worker_;
};

/// Blocks serving the API on host:port.
int serve(const std::string& host, int port, const std::filesystem::path& results_root);

} // namespace genclust
