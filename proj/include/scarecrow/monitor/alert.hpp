#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace scarecrow {

struct DeliveryResult {
  bool delivered = false;
  bool spooled = false;
  int attempts = 0;
  std::string message;  // last failure, empty on success
};

class AlertSink {
 public:
  virtual ~AlertSink() = default;
  virtual DeliveryResult deliver(const std::string& payload) = 0;
};

/// Appends one JSON line per alert to a stream (stdout by default).
class StreamSink : public AlertSink {
 public:
  explicit StreamSink(std::ostream& out) : out_(out) {}
  DeliveryResult deliver(const std::string& payload) override;

 private:
  std::ostream& out_;
  std::mutex mu_;
};

class FileSink : public AlertSink {
 public:
  explicit FileSink(const std::string& path);
  DeliveryResult deliver(const std::string& payload) override;

 private:
  std::ofstream out_;
  std::mutex mu_;
};

/// JSONL file of undelivered payloads. All access is serialized.
class Spool {
 public:
  explicit Spool(std::string path) : path_(std::move(path)) {}

  void append(const std::string& payload);
  /// Removes and returns every spooled payload.
  std::vector<std::string> take_all();
  std::vector<std::string> peek() const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mu_;
};

struct RetryPolicy {
  /// Waits between consecutive attempts; attempts = backoff.size() + 1.
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500),
                                                 std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(2000)};
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{5000};
};

/// HTTP POST of JSON payloads; 2xx counts as delivered. After the retry
/// budget is spent the payload goes to the spool.
class WebhookSink : public AlertSink {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  WebhookSink(const std::string& url, std::shared_ptr<Spool> spool, RetryPolicy policy = {},
              Sleeper sleeper = {});

  DeliveryResult deliver(const std::string& payload) override;
  /// One POST, no retry, no spooling.
  bool post_once(const std::string& payload, std::string* error = nullptr);

  const std::string& url() const { return url_; }

 private:
  std::string url_;
  std::string origin_;
  std::string path_;
  std::shared_ptr<Spool> spool_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

struct ReplayResult {
  std::size_t delivered = 0;
  std::size_t remaining = 0;
};

/// Sends each spooled payload once; failures return to the spool.
ReplayResult replay_spool(Spool& spool, const std::function<bool(const std::string&)>& send);

/// `-` or `stdout` -> StreamSink(std::cout); `http://...` -> WebhookSink;
/// anything else is a file path.
std::unique_ptr<AlertSink> make_sink(const std::string& spec, const std::string& spool_path);

/// Background delivery so slow endpoints never stall the event stage.
class AlertDispatcher {
 public:
  using WarningFn = std::function<void(const std::string&)>;

  AlertDispatcher(AlertSink& sink, WarningFn on_warning = {});
  ~AlertDispatcher();

  AlertDispatcher(const AlertDispatcher&) = delete;
  AlertDispatcher& operator=(const AlertDispatcher&) = delete;

  void submit(std::string payload);
  /// Blocks until every submitted payload has been handled.
  void drain();

  std::size_t delivered() const;
  std::size_t spooled() const;

 private:
  void run();

  AlertSink& sink_;
  WarningFn on_warning_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<std::string> queue_;
  bool busy_ = false;
  bool stop_ = false;
  std::size_t delivered_ = 0;
  std::size_t spooled_ = 0;
  std::thread worker_;
};

}  // namespace scarecrow
