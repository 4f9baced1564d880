#include "genclust/service.hpp"

#include <httplib.h>

#include "genclust/render.hpp"

namespace genclust {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, json{{"error", message}});
}

json field_errors(const std::vector<FieldError>& errors) {
    json out = json::array();
    for (const auto& e : errors) {
        out.push_back({{"field", e.field}, {"message", e.message}});
    }
    return json{{"errors", out}};
}

bool timings_requested(const httplib::Request& req) {
    if (!req.has_param("timings")) {
        return true;
    }
    const auto v = req.get_param_value("timings");
    return !(v == "0" || v == "false" || v == "no");
}

std::optional<std::size_t> size_field(const httplib::Request& req, const std::string& name) {
    std::string raw;
    if (req.has_file(name)) {
        raw = req.get_file_value(name).content;
    } else if (req.has_param(name)) {
        raw = req.get_param_value(name);
    }
    if (raw.empty() || raw == "all") {
        return std::nullopt;
    }
    std::size_t pos = 0;
    const long v = std::stol(raw, &pos);
    if (pos != raw.size() || v < 1) {
        throw Error(name + " must be a positive integer");
    }
    return static_cast<std::size_t>(v);
}

bool bool_field(const httplib::Request& req, const std::string& name) {
    std::string raw;
    if (req.has_file(name)) {
        raw = req.get_file_value(name).content;
    } else if (req.has_param(name)) {
        raw = req.get_param_value(name);
    }
    return raw == "1" || raw == "true" || raw == "on" || raw == "yes";
}

int int_param(const httplib::Request& req, const std::string& name, int fallback) {
    if (!req.has_param(name)) {
        return fallback;
    }
    return std::stoi(req.get_param_value(name));
}

json dataset_json(const std::string& id, const ExpressionMatrix& m) {
    return json{{"id", id},
                {"rows", m.rows()},
                {"cols", m.cols()},
                {"has_true_labels", m.has_true_labels()},
                {"condition_ids", m.condition_ids()}};
}

} // namespace

Service::Service(std::filesystem::path results_root)
    : root_(std::move(results_root)), worker_([this](std::stop_token st) { work(st); }) {}

Service::~Service() {
    worker_.request_stop();
    wake_.notify_all();
}

std::string Service::status_name(RunStatus s) {
    switch (s) {
    case RunStatus::Queued: return "queued";
    case RunStatus::Running: return "running";
    case RunStatus::Done: return "done";
    case RunStatus::Failed: return "failed";
    }
    return "unknown";
}

void Service::work(std::stop_token stop) {
    while (true) {
        std::shared_ptr<RunRecord> run;
        std::shared_ptr<const ExpressionMatrix> data;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, stop, [&] { return !queue_.empty(); });
            if (stop.stop_requested()) {
                return;
            }
            run = runs_.at(queue_.front());
            queue_.pop_front();
            data = datasets_.at(run->dataset_id);
            run->status = RunStatus::Running;
        }
        try {
            auto result = run_grid(*data, run->spec);
            std::lock_guard lock(mutex_);
            if (has_report_) {
                report_.merge(result.report);
            } else {
                report_ = result.report;
                has_report_ = true;
            }
            curves_.insert(curves_.end(), result.curves.begin(), result.curves.end());
            run->result = std::move(result);
            run->status = RunStatus::Done;
        } catch (const std::exception& e) {
            std::lock_guard lock(mutex_);
            run->error = e.what();
            run->status = RunStatus::Failed;
        }
    }
}

void Service::bind(httplib::Server& server) {
    server.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_file("file")) {
            send_json(res, 400, field_errors({{"file", "multipart field 'file' is required"}}));
            return;
        }
        PreprocessConfig cfg;
        try {
            cfg.class_column = size_field(req, "class_column");
            cfg.top_n = size_field(req, "top_n");
            cfg.normalize = bool_field(req, "normalize");
        } catch (const std::exception& e) {
            send_json(res, 400, field_errors({{"preprocess", e.what()}}));
            return;
        }
        try {
            auto loaded = parse_matrix(req.get_file_value("file").content, cfg.class_column);
            auto m = std::make_shared<const ExpressionMatrix>(preprocess(loaded, cfg));
            std::lock_guard lock(mutex_);
            const std::string id = "d" + std::to_string(next_dataset_++);
            datasets_[id] = m;
            last_dataset_ = id;
            send_json(res, 201, dataset_json(id, *m));
        } catch (const Error& e) {
            send_json(res, 400, field_errors({{"file", e.what()}}));
        }
    });

    server.Get(R"(/datasets/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        const auto it = datasets_.find(req.matches[1]);
        if (it == datasets_.end()) {
            send_error(res, 404, "unknown dataset");
            return;
        }
        send_json(res, 200, dataset_json(it->first, *it->second));
    });

    server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception& e) {
            send_json(res, 400, field_errors({{"", std::string("invalid JSON: ") + e.what()}}));
            return;
        }
        if (!body.is_object() || !body.contains("dataset_id") || !body["dataset_id"].is_string()) {
            send_json(res, 400, field_errors({{"dataset_id", "required"}}));
            return;
        }
        const std::string dataset_id = body["dataset_id"].get<std::string>();
        GridSpec spec;
        try {
            spec = GridSpec::from_json(body);
        } catch (const SpecError& e) {
            send_json(res, 400, field_errors(e.errors()));
            return;
        }
        std::lock_guard lock(mutex_);
        const auto ds = datasets_.find(dataset_id);
        if (ds == datasets_.end()) {
            send_error(res, 404, "unknown dataset '" + dataset_id + "'");
            return;
        }
        if (auto errors = validate_spec(spec, ds->second->rows()); !errors.empty()) {
            send_json(res, 400, field_errors(errors));
            return;
        }
        if (needs_truth(spec) && !ds->second->has_true_labels()) {
            send_json(res, 409, json{{"error", "external indices need a dataset with true labels"},
                                     {"field", "external_indices"}});
            return;
        }
        const std::string id = "r" + std::to_string(next_run_++);
        if (spec.output_dir.empty()) {
            spec.output_dir = root_ / id;
        }
        auto run = std::make_shared<RunRecord>();
        run->dataset_id = dataset_id;
        run->spec = spec;
        runs_[id] = run;
        queue_.push_back(id);
        json echoed = spec.to_json();
        echoed["dataset_id"] = dataset_id;
        last_spec_ = echoed;
        wake_.notify_all();
        send_json(res, 202, json{{"id", id}, {"status", "queued"}});
    });

    server.Get(R"(/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        const auto it = runs_.find(req.matches[1]);
        if (it == runs_.end()) {
            send_error(res, 404, "unknown run");
            return;
        }
        const auto& run = *it->second;
        json body{{"id", it->first}, {"status", status_name(run.status)}, {"dataset_id", run.dataset_id}};
        if (!run.error.empty()) {
            body["error"] = run.error;
        }
        if (run.result) {
            body["report"] = run.result->report.to_json(timings_requested(req));
            body["curves"] = curves_to_json(run.result->curves);
        }
        send_json(res, 200, body);
    });

    server.Get(R"(/runs/([^/]+)/spec)", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        const auto it = runs_.find(req.matches[1]);
        if (it == runs_.end()) {
            send_error(res, 404, "unknown run");
            return;
        }
        json spec = it->second->spec.to_json();
        spec["dataset_id"] = it->second->dataset_id;
        send_json(res, 200, spec);
    });

    server.Get(R"(/runs/([^/]+)/labels/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        const auto it = runs_.find(req.matches[1]);
        if (it == runs_.end()) {
            send_error(res, 404, "unknown run");
            return;
        }
        if (!it->second->result) {
            send_error(res, 409, "run has not finished");
            return;
        }
        const auto& best = it->second->result->best_labels;
        const auto lab = best.find(req.matches[2]);
        if (lab == best.end()) {
            send_error(res, 404, "no labels for algorithm '" + std::string(req.matches[2]) + "'");
            return;
        }
        send_json(res, 200, json{{"algorithm", lab->first}, {"k", lab->second.k}, {"labels", lab->second.labels}});
    });

    server.Get(R"(/runs/([^/]+)/render)", [this](const httplib::Request& req, httplib::Response& res) {
        std::shared_ptr<RunRecord> run;
        std::shared_ptr<const ExpressionMatrix> data;
        {
            std::lock_guard lock(mutex_);
            const auto it = runs_.find(req.matches[1]);
            if (it == runs_.end()) {
                send_error(res, 404, "unknown run");
                return;
            }
            run = it->second;
            if (!run->result) {
                send_error(res, 409, "run has not finished");
                return;
            }
            data = datasets_.at(run->dataset_id);
        }
        RenderOptions opt;
        try {
            opt.width = int_param(req, "width", opt.width);
            opt.height = int_param(req, "height", opt.height);
        } catch (const std::exception&) {
            send_error(res, 400, "width/height must be integers");
            return;
        }
        const std::string kind = req.get_param_value("kind");
        try {
            if (kind == "index_curve") {
                res.set_content(render_index_curves(run->result->curves, opt), "image/svg+xml");
                return;
            }
            if (kind != "heatmap" && kind != "profile") {
                send_error(res, 400, "kind must be heatmap, profile or index_curve");
                return;
            }
            const std::string alg = req.get_param_value("algorithm");
            const auto lab = run->result->best_labels.find(alg);
            if (lab == run->result->best_labels.end()) {
                send_error(res, 404, "no labels for algorithm '" + alg + "'");
                return;
            }
            opt.title = (kind == "heatmap" ? "Heatmap: " : "Profiles: ") + alg;
            res.set_content(kind == "heatmap" ? render_heatmap(*data, lab->second, opt)
                                              : render_profile(*data, lab->second, opt),
                            "image/svg+xml");
        } catch (const Error& e) {
            send_error(res, 400, e.what());
        }
    });

    server.Post("/session/refresh", [this](const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        curves_.clear();
        send_json(res, 200, json{{"curves", 0}});
    });

    server.Get("/session", [this](const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        json body{{"dataset_id", last_dataset_}, {"curves", curves_.size()}};
        body["last_spec"] = last_spec_ ? *last_spec_ : json(nullptr);
        send_json(res, 200, body);
    });

    server.Get("/session/curves", [this](const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        send_json(res, 200, curves_to_json(curves_));
    });

    server.Get("/session/render", [this](const httplib::Request& req, httplib::Response& res) {
        std::vector<IndexCurve> curves;
        {
            std::lock_guard lock(mutex_);
            curves = curves_;
        }
        if (curves.empty()) {
            send_error(res, 404, "no accumulated curves");
            return;
        }
        RenderOptions opt;
        opt.width = int_param(req, "width", opt.width);
        opt.height = int_param(req, "height", opt.height);
        res.set_content(render_index_curves(curves, opt), "image/svg+xml");
    });

    server.Get("/report", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex_);
        if (!has_report_) {
            send_json(res, 200, json{{"internal", json::array()}});
            return;
        }
        send_json(res, 200, report_.to_json(timings_requested(req)));
    });
}

int serve(const std::string& host, int port, const std::filesystem::path& results_root) {
    Service service(results_root);
    httplib::Server server;
    service.bind(server);
    if (!server.listen(host, port)) {
        return 1;
    }
    return 0;
}

} // namespace genclust
