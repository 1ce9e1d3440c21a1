#include "scarecrow/monitor/alert.hpp"

#include <iostream>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

namespace scarecrow {

DeliveryResult StreamSink::deliver(const std::string& payload) {
  std::lock_guard lock(mu_);
  out_ << payload << '\n';
  out_.flush();
  return {true, false, 1, {}};
}

FileSink::FileSink(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open alert file " + path);
}

DeliveryResult FileSink::deliver(const std::string& payload) {
  std::lock_guard lock(mu_);
  out_ << payload << '\n';
  out_.flush();
  if (!out_) return {false, false, 1, "write failed"};
  return {true, false, 1, {}};
}

void Spool::append(const std::string& payload) {
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open spool " + path_);
  out << payload << '\n';
}

std::vector<std::string> Spool::peek() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> lines;
  std::ifstream in(path_);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> Spool::take_all() {
  std::vector<std::string> lines = peek();
  std::lock_guard lock(mu_);
  std::ofstream truncate(path_, std::ios::trunc);
  return lines;
}

WebhookSink::WebhookSink(const std::string& url, std::shared_ptr<Spool> spool,
                         RetryPolicy policy, Sleeper sleeper)
    : url_(url), spool_(std::move(spool)), policy_(std::move(policy)), sleeper_(std::move(sleeper)) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw std::invalid_argument("webhook: only http:// URLs are supported: " + url);
  }
  const auto slash = url.find('/', scheme.size());
  origin_ = slash == std::string::npos ? url : url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (origin_.size() == scheme.size()) throw std::invalid_argument("webhook: URL has no host");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

bool WebhookSink::post_once(const std::string& payload, std::string* error) {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(policy_.connect_timeout);
  cli.set_read_timeout(policy_.read_timeout);
  const auto res = cli.Post(path_, payload, "application/json");
  if (!res) {
    if (error) *error = "request failed: " + httplib::to_string(res.error());
    return false;
  }
  if (res->status < 200 || res->status >= 300) {
    if (error) *error = "HTTP status " + std::to_string(res->status);
    return false;
  }
  return true;
}

DeliveryResult WebhookSink::deliver(const std::string& payload) {
  DeliveryResult r;
  for (std::size_t attempt = 0;; ++attempt) {
    ++r.attempts;
    if (post_once(payload, &r.message)) {
      r.delivered = true;
      r.message.clear();
      return r;
    }
    if (attempt >= policy_.backoff.size()) break;
    sleeper_(policy_.backoff[attempt]);
  }
  if (spool_) {
    spool_->append(payload);
    r.spooled = true;
  }
  return r;
}

ReplayResult replay_spool(Spool& spool, const std::function<bool(const std::string&)>& send) {
  ReplayResult r;
  for (const std::string& payload : spool.take_all()) {
    if (send(payload)) {
      ++r.delivered;
    } else {
      spool.append(payload);
      ++r.remaining;
    }
  }
  return r;
}

std::unique_ptr<AlertSink> make_sink(const std::string& spec, const std::string& spool_path) {
  if (spec.empty() || spec == "-" || spec == "stdout") return std::make_unique<StreamSink>(std::cout);
  if (spec.rfind("http://", 0) == 0) {
    return std::make_unique<WebhookSink>(spec, std::make_shared<Spool>(spool_path));
  }
  return std::make_unique<FileSink>(spec);
}

AlertDispatcher::AlertDispatcher(AlertSink& sink, WarningFn on_warning)
    : sink_(sink), on_warning_(std::move(on_warning)), worker_([this] { run(); }) {}

AlertDispatcher::~AlertDispatcher() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void AlertDispatcher::submit(std::string payload) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(payload));
  }
  cv_.notify_one();
}

void AlertDispatcher::drain() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

std::size_t AlertDispatcher::delivered() const {
  std::lock_guard lock(mu_);
  return delivered_;
}

std::size_t AlertDispatcher::spooled() const {
  std::lock_guard lock(mu_);
  return spooled_;
}

void AlertDispatcher::run() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
    if (queue_.empty()) return;  // stop requested and nothing pending
    std::string payload = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();

    DeliveryResult r;
    try {
      r = sink_.deliver(payload);
    } catch (const std::exception& e) {
      r.message = e.what();
    }
    if (!r.delivered && on_warning_) {
      on_warning_("alert not delivered after " + std::to_string(r.attempts) + " attempt(s): " +
                  r.message + (r.spooled ? " (spooled)" : ""));
    }

    lock.lock();
    busy_ = false;
    if (r.delivered) ++delivered_;
    if (r.spooled) ++spooled_;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

}  // namespace scarecrow
