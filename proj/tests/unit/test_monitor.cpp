#include <doctest.h>

#include <atomic>
#include <random>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "scarecrow/image.hpp"
#include "scarecrow/monitor/bounded_queue.hpp"
#include "scarecrow/monitor/event_log.hpp"
#include "scarecrow/monitor/frame_source.hpp"
#include "scarecrow/monitor/hysteresis.hpp"
#include "scarecrow/monitor/policy.hpp"
#include "scarecrow/monitor/scheduler.hpp"

using namespace scarecrow;

namespace {

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

PpmError::Code ppm_error(const std::vector<std::uint8_t>& b) {
  try {
    read_ppm(b);
  } catch (const PpmError& e) {
    return e.code();
  }
  FAIL("expected PpmError");
  return PpmError::Code::bad_magic;
}

MonitorEvent lion_event(std::uint64_t id, Action action = Action::deter_high) {
  MonitorEvent e;
  e.id = id;
  e.label = "lion";
  e.tier = Tier::predator;
  e.action = action;
  return e;
}

/// Runs a tracker over frames 0..n-1 where `present(f)` says whether lion shows.
std::vector<std::pair<std::uint64_t, MonitorEvent>> trace(HysteresisParams p, std::uint64_t n,
                                                          const std::function<bool(std::uint64_t)>& present) {
  HysteresisTracker t(p);
  std::vector<std::pair<std::uint64_t, MonitorEvent>> out;
  for (std::uint64_t f = 0; f < n; ++f) {
    std::vector<ClassHit> hits;
    if (present(f)) hits.push_back({"lion", 0.5 + 0.01 * static_cast<double>(f)});
    const auto u = t.update(f, hits);
    for (const auto& e : u.opened) out.emplace_back(f, e);
    for (const auto& e : u.closed) out.emplace_back(f, e);
  }
  return out;
}

}  // namespace

TEST_SUITE("monitor") {

TEST_CASE("decide_action examples") {
  const PolicyConfig p = PolicyConfig::defaults();
  CHECK(decide_action(p, "lion").tier == Tier::predator);
  CHECK(decide_action(p, "lion").action == Action::deter_high);
  CHECK(decide_action(p, "cat").tier == Tier::domestic);
  CHECK(decide_action(p, "cat").action == Action::ignore);
  CHECK(decide_action(p, "capybara").tier == Tier::unknown);
  CHECK(decide_action(p, "capybara").action == Action::log_only);
  CHECK(decide_action(p, "cheetah").action == Action::deter_high);
}

TEST_CASE("policy json") {
  const PolicyConfig p = PolicyConfig::from_json(
      R"({"taxonomy":{"zebra":"wild_herbivore"},"tier_actions":{"domestic":"log_only"},
          "score_threshold":0.6,"hysteresis":{"k":2,"m":4,"m_clear":3},"cooldown_s":5,
          "deterrent_modes":["A","B"]})");
  CHECK(p.tier_of("zebra") == Tier::wild_herbivore);
  CHECK(p.tier_of("lion") == Tier::unknown);
  CHECK(decide_action(p, "zebra").action == Action::deter_low);
  CHECK(p.action_for(Tier::domestic) == Action::log_only);
  CHECK(p.score_threshold == 0.6);
  CHECK(p.hysteresis.k == 2);
  CHECK(p.hysteresis.m_clear == 3);
  CHECK(p.cooldown_s == 5.0);
  CHECK(p.deterrent_modes == std::vector<std::string>{"A", "B"});

  const PolicyConfig d = PolicyConfig::from_json("{}");
  CHECK(d.deterrent_modes == PolicyConfig::defaults().deterrent_modes);
  CHECK(d.hysteresis.k == 3);
  CHECK(d.hysteresis.m == 5);
  CHECK(d.hysteresis.m_clear == 5);
  CHECK(d.cooldown_s == 60.0);

  try {
    PolicyConfig::from_json(R"({"hysteresis":{"k":6,"m":5},"deterrent_modes":[],"taxonomy":{"x":"alien"}})");
    FAIL("expected PolicyError");
  } catch (const PolicyError& e) {
    CHECK(e.problems().size() == 3);
    CHECK(std::string(e.what()).find("k <= m") != std::string::npos);
  }
  CHECK_THROWS(PolicyConfig::from_json("{"));
}

TEST_CASE("hysteresis examples") {
  const HysteresisParams p{3, 5, 4};
  HysteresisTracker t(p);
  CHECK(t.update(1, {{"lion", 0.6}}).opened.empty());
  CHECK(t.update(2, {{"lion", 0.8}}).opened.empty());
  const auto u = t.update(3, {{"lion", 0.7}});
  REQUIRE(u.opened.size() == 1);
  CHECK(u.opened[0].first_frame == 1);
  CHECK(u.opened[0].last_frame == 3);
  CHECK(u.opened[0].peak_score == 0.8);
  CHECK(u.opened[0].status == MonitorEvent::Status::open);

  CHECK(t.update(4, {}).closed.empty());
  CHECK(t.update(5, {}).closed.empty());
  CHECK(t.update(6, {}).closed.empty());
  const auto c = t.update(7, {});
  REQUIRE(c.closed.size() == 1);
  CHECK(c.closed[0].last_frame == 3);
  CHECK(c.closed[0].id == u.opened[0].id);
  CHECK(c.closed[0].status == MonitorEvent::Status::closed);
  CHECK(t.open_events().empty());

  CHECK(trace({3, 5, 5}, 50, [](std::uint64_t f) { return f == 10; }).empty());
  CHECK_THROWS(t.update(7, {}));
  CHECK_THROWS(HysteresisTracker({4, 3, 1}));
}

TEST_CASE("hysteresis opens only on K hits within M frames") {
  // hits at 0, 3, 6: never 3 within a window of 5
  CHECK(trace({3, 5, 5}, 20, [](std::uint64_t f) { return f % 3 == 0 && f <= 6; }).empty());
  // hits at 0, 2, 4 do fit
  const auto ev = trace({3, 5, 5}, 20, [](std::uint64_t f) { return f % 2 == 0 && f <= 4; });
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].first == 4);
  CHECK(ev[0].second.first_frame == 0);
  CHECK(ev[1].first == 9);
  CHECK(ev[1].second.last_frame == 4);
}

TEST_CASE("hysteresis properties on random streams") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + rng() % 6;
    const HysteresisParams p{1 + int(rng() % m), m, 1 + int(rng() % 5)};
    const double density = fixture::uniform(rng, 0.1, 0.9);
    std::vector<std::vector<ClassHit>> frames(80);
    for (auto& f : frames) {
      for (const char* label : {"lion", "cat"}) {
        if (fixture::uniform(rng, 0, 1) < density) f.push_back({label, fixture::uniform(rng, 0.5, 1)});
      }
    }
    auto run = [&] {
      HysteresisTracker t(p);
      std::vector<MonitorEvent> log;
      std::map<std::string, int> open;
      for (std::uint64_t i = 0; i < frames.size(); ++i) {
        const auto u = t.update(i, frames[i]);
        for (const auto& e : u.closed) {
          CHECK(open[e.label] == 1);
          --open[e.label];
          log.push_back(e);
        }
        for (const auto& e : u.opened) {
          CHECK(open[e.label] == 0);
          ++open[e.label];
          log.push_back(e);
        }
      }
      for (const auto& e : t.finish()) log.push_back(e);
      return log;
    };
    const auto a = run();
    CHECK(a == run());
    std::map<std::uint64_t, int> seen;
    for (const auto& e : a) {
      CHECK(e.first_frame <= e.last_frame);
      CHECK(e.peak_score <= 1.0);
      ++seen[e.id];
    }
    for (const auto& [id, n] : seen) CHECK(n == 2);
  }
}

TEST_CASE("scheduler") {
  DeterrenceScheduler s({"siren", "strobe", "ultrasonic"}, 60);
  const auto first = s.schedule(lion_event(1), 0);
  REQUIRE(first);
  CHECK(first->mode == "siren");
  CHECK(first->duration_s == 10.0);
  CHECK(first->target == "lion");
  CHECK(first->event_id == 1);
  CHECK_FALSE(s.schedule(lion_event(2), 5'000));
  CHECK(s.schedule(lion_event(3), 60'000)->mode == "strobe");

  DeterrenceScheduler ab({"A", "B"}, 60);
  std::vector<std::string> modes;
  for (int i = 0; i < 3; ++i) modes.push_back(ab.schedule(lion_event(i), i * 100'000)->mode);
  CHECK(modes == std::vector<std::string>{"A", "B", "A"});

  DeterrenceScheduler low({"A"}, 0);
  CHECK(low.schedule(lion_event(1, Action::deter_low), 0)->duration_s == 3.0);
  CHECK_FALSE(low.schedule(lion_event(2, Action::log_only), 0));
  CHECK_FALSE(low.schedule(lion_event(3, Action::ignore), 0));

  // cooldown is per class
  DeterrenceScheduler per({"A"}, 60);
  MonitorEvent cheetah = lion_event(9);
  cheetah.label = "cheetah";
  CHECK(per.schedule(lion_event(1), 0));
  CHECK(per.schedule(cheetah, 1000));

  CHECK_THROWS(DeterrenceScheduler({}, 1));
}

TEST_CASE("scheduler never issues two commands for a class inside the cooldown") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const double cooldown = static_cast<double>(rng() % 30);
    DeterrenceScheduler s({"A", "B", "C"}, cooldown);
    std::map<std::string, std::int64_t> last;
    std::int64_t now = 0;
    for (int i = 0; i < 50; ++i) {
      now += rng() % 8000;
      MonitorEvent e = lion_event(i);
      e.label = rng() % 2 ? "lion" : "cheetah";
      if (auto c = s.schedule(e, now)) {
        if (last.count(e.label)) CHECK(now - last[e.label] >= cooldown * 1000);
        last[e.label] = now;
      }
    }
  }
}

TEST_CASE("event record json") {
  MonitorEvent e = lion_event(4);
  e.first_frame = 10;
  e.last_frame = 12;
  e.peak_score = 0.9;
  const EventRecord opened = EventRecord::from_event(e, "opened", 1200);
  CHECK(opened.to_json() ==
        R"({"ts_ms":1200,"kind":"opened","event_id":4,"class":"lion","tier":"predator","action":"deter_high","peak_score":0.9,"first_frame":10,"last_frame":12})");
  CHECK(EventRecord::from_json(opened.to_json()) == opened);

  const EventRecord cmd = EventRecord::from_command(e, {"siren", "lion", 4, 1200, 10.0});
  CHECK(cmd.to_json() ==
        R"({"ts_ms":1200,"kind":"command","event_id":4,"class":"lion","tier":"predator","action":"deter_high","mode":"siren"})");

  std::ostringstream out;
  EventLog log(out);
  log.write(opened);
  log.write(cmd);
  CHECK(log.records_written() == 2);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);

  EventLog discard("");
  discard.write(opened);
  CHECK(discard.records_written() == 1);
}

TEST_CASE("read_ppm") {
  std::string p6 = "P6 2 1 255\n";
  p6 += std::string{'\xff', '\0', '\0', '\0', '\0', '\xff'};
  const Image img = read_ppm(bytes(p6));
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.at(0, 0, 0) == 1.0f);
  CHECK(img.at(0, 0, 2) == 0.0f);
  CHECK(img.at(1, 0, 0) == 0.0f);
  CHECK(img.at(1, 0, 2) == 1.0f);

  CHECK(ppm_error(bytes("P5 2 1 255\n" + std::string(6, '\0'))) == PpmError::Code::bad_magic);
  CHECK(ppm_error(bytes(p6.substr(0, p6.size() - 1))) == PpmError::Code::truncated);
  CHECK(ppm_error(bytes("P6 2 1 0\n" + std::string(6, '\0'))) == PpmError::Code::bad_maxval);
  CHECK(ppm_error(bytes("P6 2 1 65536\n" + std::string(12, '\0'))) == PpmError::Code::bad_maxval);
  CHECK(ppm_error(bytes("P6 2 x 255\n")) == PpmError::Code::bad_header);

  const Image c = read_ppm(bytes("P6\n# comment\n1 1\n# more\n15\n" + std::string{'\x0f', '\x05', '\0'}));
  CHECK(c.at(0, 0, 0) == 1.0f);
  CHECK(c.at(0, 0, 1) == doctest::Approx(1.0 / 3.0));

  std::string wide = "P6 1 1 1000\n";
  wide += std::string{'\x01', '\xf4', '\x03', '\xe8', '\0', '\0'};
  const Image w = read_ppm(bytes(wide));
  CHECK(w.at(0, 0, 0) == doctest::Approx(0.5));
  CHECK(w.at(0, 0, 1) == 1.0f);

  const Image pattern = fixture::pattern_image(7, 5);
  CHECK(read_ppm(write_ppm(pattern)) == pattern);
}

TEST_CASE("resize_bilinear") {
  const Image src = fixture::pattern_image(8, 6);
  CHECK(resize_bilinear(src, 8, 6) == src);
  const Image flat(4, 4, 0.25f);
  const Image up = resize_bilinear(flat, 9, 7);
  CHECK(up.width == 9);
  for (float v : up.rgb) CHECK(v == doctest::Approx(0.25f));
}

TEST_CASE("directory frame source") {
  fixture::TempDir dir("frames");
  fixture::write_frames(dir.path(), 2);
  fixture::fs::rename(dir.path() / "f000.ppm", dir.path() / "f002.ppm");
  fixture::write_text(dir.str("notes.txt"), "x");
  FileFrameSource src = FileFrameSource::open(dir.str(), 10);
  REQUIRE(src.paths().size() == 2);
  CHECK(src.paths()[0].find("f001.ppm") != std::string::npos);
  const auto f0 = src.next();
  const auto f1 = src.next();
  REQUIRE(f0);
  REQUIRE(f1);
  CHECK(f0->index == 0);
  CHECK(f1->index == 1);
  CHECK(f1->timestamp_ms == 100);
  CHECK(f0->image.width == 8);
  CHECK_FALSE(src.next());

  fixture::TempDir empty("empty");
  FileFrameSource none = FileFrameSource::open(empty.str(), 10);
  CHECK_FALSE(none.next());
  CHECK(frame_timestamp_ms(12, 10) == 1200);
  CHECK(frame_timestamp_ms(3, 30) == 100);
}

TEST_CASE("manifest order and unreadable files") {
  fixture::TempDir dir("manifest");
  fixture::write_frames(dir.path() / "frames", 3);
  fixture::write_text(dir.str("frames/bad.ppm"), "P6 garbage");
  fixture::write_text(dir.str("list.txt"),
                      "# reversed\nframes/f002.ppm\n\nframes/bad.ppm\n" + dir.str("frames/f000.ppm") +
                          "\nframes/missing.ppm\n");
  std::vector<std::string> warnings;
  FileFrameSource src = FileFrameSource::open(dir.str("list.txt"), 10,
                                              [&](const std::string& w) { warnings.push_back(w); });
  std::vector<std::uint64_t> indices;
  while (auto f = src.next()) indices.push_back(f->index);
  CHECK(indices == std::vector<std::uint64_t>{0, 2});
  CHECK(warnings.size() == 2);
  CHECK_THROWS(FileFrameSource::open(dir.str("nope"), 10));
}

TEST_CASE("synthetic frame source") {
  SyntheticFrameSource a(3, 16, 12, 25, 7), b(3, 16, 12, 25, 7);
  for (int i = 0; i < 3; ++i) {
    const auto fa = a.next();
    const auto fb = b.next();
    REQUIRE(fa);
    CHECK(fa->image == fb->image);
    CHECK(fa->image.width == 16);
    CHECK(fa->timestamp_ms == i * 40);
  }
  CHECK_FALSE(a.next());
}

TEST_CASE("bounded queue drop oldest") {
  BoundedQueue<int> q(3);
  for (int i = 0; i < 5; ++i) CHECK(q.push(i));
  CHECK(q.dropped() == 2);
  CHECK(q.size() == 3);
  q.close();
  CHECK_FALSE(q.push(9));
  std::vector<int> got;
  while (auto v = q.pop()) got.push_back(*v);
  CHECK(got == std::vector<int>{2, 3, 4});
  CHECK_THROWS(BoundedQueue<int>(0));
}

TEST_CASE("bounded queue blocking keeps everything in order") {
  BoundedQueue<int> q(2, BoundedQueue<int>::Overflow::block);
  std::thread producer([&] {
    for (int i = 0; i < 1000; ++i) q.push(i);
    q.close();
  });
  std::vector<int> got;
  while (auto v = q.pop()) got.push_back(*v);
  producer.join();
  REQUIRE(got.size() == 1000);
  for (int i = 0; i < 1000; ++i) CHECK(got[i] == i);
  CHECK(q.dropped() == 0);
}

TEST_CASE("bounded queue drop oldest under a slow consumer is a subsequence") {
  BoundedQueue<int> q(4);
  std::thread producer([&] {
    for (int i = 0; i < 2000; ++i) q.push(i);
    q.close();
  });
  std::vector<int> got;
  while (auto v = q.pop()) {
    got.push_back(*v);
    if (got.size() % 50 == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  producer.join();
  CHECK(got.size() + q.dropped() == 2000);
  for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1] < got[i]);
  CHECK(got.back() == 1999);
}

}  // TEST_SUITE
