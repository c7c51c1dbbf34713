#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "logoco/core/error.hpp"
#include "logoco/detector/sim_world.hpp"
#include "logoco/detector/simulated.hpp"
#include "logoco/engine/engine.hpp"

using namespace logoco;

namespace {

const std::vector<std::string> kNames{"Adidas", "Nike"};

// Scripted detector: fixed detections per image id, records every fine-tune batch.
class StubDetector final : public Detector {
 public:
  StubDetector(std::string name, std::map<std::string, std::vector<Detection>> script)
      : Detector(std::move(name), kNames), script_(std::move(script)) {}

  Backend backend() const noexcept override { return Backend::simulated; }
  bool initialized() const noexcept override { return true; }
  std::vector<Detection> detect(const WebImage& image) const override {
    if (fail_ids_.contains(image.id)) throw DetectorError("scripted failure");
    auto it = script_.find(image.id);
    return it == script_.end() ? std::vector<Detection>{} : it->second;
  }
  void fine_tune(std::span<const AnnotatedImage> training) override {
    if (throw_on_tune_) throw DetectorError("scripted fine-tune failure");
    batches_.emplace_back(training.begin(), training.end());
  }
  void bootstrap(std::span<const AnnotatedImage>) override {}
  std::unique_ptr<Detector> clone() const override { return std::make_unique<StubDetector>(*this); }

  std::map<std::string, std::vector<Detection>> script_;
  std::set<std::string> fail_ids_;
  std::vector<std::vector<AnnotatedImage>> batches_;
  bool throw_on_tune_ = false;
};

WebImage web(const std::string& id, ClassId cls) { return {id, 200, 200, id + ".jpg", cls, ImageSource::stream}; }

Detection det(ClassId cls, double score) { return {cls, score, {10, 10, 50, 50}}; }

// Small fixture around colearn_iteration.
struct Loop {
  ClassRegistry classes{kNames};
  std::vector<WebImage> pool{web("p", 1), web("q", 1), web("r", 2)};
  ImageIndex images = index_images(pool);
  std::vector<AnnotatedImage> eval{{web("e", 1), {{1, {10, 10, 50, 50}}}}};
  std::vector<ImageRef> backgrounds{{"bg", {300, 300}}};
  std::map<ClassId, std::vector<ImageRef>> icons{{1, {{"i1", {40, 40}}}}, {2, {{"i2", {40, 40}}}}};
  LoopContext ctx() const { return {&classes, &images, eval, backgrounds, &icons, 3}; }

  std::array<Slot, 2> slots(std::map<std::string, std::vector<Detection>> a,
                            std::map<std::string, std::vector<Detection>> b) const {
    std::array<Slot, 2> s;
    s[0].detector = std::make_unique<StubDetector>("frcnn-slot", std::move(a));
    s[1].detector = std::make_unique<StubDetector>("yolo-slot", std::move(b));
    for (auto& slot : s) slot.pool = make_pool(pool);
    return s;
  }
};

StubDetector& stub(Slot& s) { return dynamic_cast<StubDetector&>(*s.detector); }

IterationReport report_with_map(int t, double deploy_map) {
  IterationReport r;
  r.iteration = t;
  r.slots.resize(2);
  r.slots[1].map = deploy_map;
  r.slots[0].map = 0.5;
  return r;
}

SimulatedDetectorParams sim_params(double phi, std::uint64_t seed) {
  SimulatedDetectorParams p;
  p.competence.assign(2, 0.0);
  p.false_fire.assign(2, phi);
  p.seed = seed;
  return p;
}

RunInputs world_inputs(const World& w) { return {w.classes, w.pool, w.eval, w.backgrounds, w.icons}; }

std::array<std::unique_ptr<Detector>, 2> sim_slots(const World& w, const SimulatedDetectorParams& p0,
                                                   const SimulatedDetectorParams& p1) {
  std::vector<std::string> names;
  for (const auto& c : w.classes.classes()) names.push_back(c.name);
  auto a = p0, b = p1;
  a.competence.assign(names.size(), 0.0);
  a.false_fire.assign(names.size(), p0.false_fire.at(0));
  b.competence.assign(names.size(), 0.0);
  b.false_fire.assign(names.size(), p1.false_fire.at(0));
  return {std::make_unique<SimulatedDetector>("frcnn-slot", names, a, w.latent),
          std::make_unique<SimulatedDetector>("yolo-slot", names, b, w.latent)};
}

WorldSpec small_world(std::uint64_t seed) {
  WorldSpec spec;
  spec.classes = 3;
  spec.max_class_images = 200;
  spec.imbalance_ratio = 10;
  spec.eval_per_class = 10;
  spec.eval_negatives_per_class = 4;
  spec.backgrounds = 5;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("selection consults only the weak-label class") {
  StubDetector d("s", {{"a", {det(1, 0.91)}}, {"b", {det(1, 0.89)}}, {"c", {det(2, 0.99), det(1, 0.1)}}});
  CHECK(select(d, web("a", 1), 0.9));
  CHECK_FALSE(select(d, web("b", 1), 0.9));
  CHECK_FALSE(select(d, web("c", 1), 0.9));
  CHECK(select(d, web("c", 2), 0.9));
  CHECK_FALSE(select(d, web("none", 1), 0.9));
}

TEST_CASE("nothing above threshold leaves the pool untouched") {
  Loop l;
  StubDetector d("s", {{"p", {det(1, 0.5)}}, {"q", {det(2, 0.95)}}});
  const auto pool = make_pool(l.pool);
  const auto r = self_mine(d, pool, l.images, 0.9);
  CHECK(r.pool == pool);
  CHECK(r.mined.empty());
}

TEST_CASE("a detector that always fires empties the pool at a tiny threshold") {
  Loop l;
  StubDetector d("s", {{"p", {det(1, 0.2)}}, {"q", {det(1, 0.01)}}, {"r", {det(2, 0.3)}}});
  const auto r = self_mine(d, make_pool(l.pool), l.images, 1e-9);
  CHECK(r.pool.unexplored.empty());
  CHECK(r.pool.discovered.size() == 3);
  CHECK(r.mined.size() == 3);
}

TEST_CASE("mined images carry weak-class boxes above threshold") {
  Loop l;
  StubDetector d("s", {{"p", {det(1, 0.95), {1, 0.7, {0, 0, 5, 5}}, {2, 0.99, {0, 0, 9, 9}}, {1, 0.92, {3, 3, 8, 8}}}}});
  const auto r = self_mine(d, make_pool(l.pool), l.images, 0.9);
  REQUIRE(r.mined.size() == 1);
  CHECK(r.mined[0].image.id == "p");
  CHECK(r.mined[0].truths == std::vector<Truth>{{1, {10, 10, 50, 50}}, {1, {3, 3, 8, 8}}});
}

TEST_CASE("detector failures keep the image unexplored") {
  Loop l;
  StubDetector d("s", {{"p", {det(1, 0.95)}}, {"q", {det(1, 0.95)}}});
  d.fail_ids_ = {"q"};
  const auto r = self_mine(d, make_pool(l.pool), l.images, 0.9);
  CHECK(r.failures == 1);
  CHECK(r.pool.unexplored.contains("q"));
  CHECK(r.pool.discovered == std::set<std::string>{"p"});
}

TEST_CASE("self-mining bookkeeping matches a set oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(1, 300));
    std::vector<WebImage> pool;
    std::map<std::string, std::vector<Detection>> script;
    for (std::size_t i = 0; i < n; ++i) {
      pool.push_back(web("w" + std::to_string(i), static_cast<ClassId>(rng.between(1, 2))));
      const auto k = rng.below(4);
      for (std::uint64_t j = 0; j < k; ++j)
        script[pool.back().id].push_back(det(static_cast<ClassId>(rng.between(1, 2)), rng.uniform()));
    }
    const auto images = index_images(pool);
    StubDetector d("s", script);
    PoolState state = make_pool(pool);
    // Start from a random partially-discovered state.
    for (const auto& img : pool)
      if (rng.uniform() < 0.2) {
        state.unexplored.erase(img.id);
        state.discovered.insert(img.id);
      }
    const double theta = rng.uniform(0.01, 1.0);
    const auto r = self_mine(d, state, images, theta);

    std::set<std::string> want_t = state.discovered, want_d;
    for (const auto& id : state.unexplored) {
      double best = 0;
      for (const auto& x : script[id])
        if (x.cls == images.at(id).weak_label) best = std::max(best, x.score);
      (best >= theta ? want_t : want_d).insert(id);
    }
    CHECK(r.pool.discovered == want_t);
    CHECK(r.pool.unexplored == want_d);
    CHECK(r.pool.total() == state.total());
    CHECK_NOTHROW(validate_transition(state, r.pool));
    for (const auto& m : r.mined) {
      CHECK_FALSE(m.truths.empty());
      CHECK(max_score(d, m.image, m.image.weak_label) >= theta);
    }
  }
}

TEST_CASE("co-learning feeds each slot the partner's mined images") {
  Loop l;
  l.pool = {web("p", 1), web("q", 1), web("r", 2)};
  auto slots = l.slots({}, {{"q", {det(1, 0.95)}}});
  MiningConfig config;
  config.n_cls = 0;
  const auto report = colearn_iteration(slots, l.ctx(), config, 1);
  REQUIRE(stub(slots[0]).batches_.size() == 1);
  REQUIRE(stub(slots[0]).batches_[0].size() == 1);
  CHECK(stub(slots[0]).batches_[0][0].image.id == "q");
  CHECK(stub(slots[1]).batches_.empty());  // nothing mined by the partner, no synthesis
  CHECK(report.slots[1].mined.at(1) == 1);
  CHECK(report.slots[0].fed.at(1) == 1);
  CHECK(report.slots[1].fed.at(1) == 0);
  CHECK(slots[1].pool.discovered == std::set<std::string>{"q"});
  CHECK(slots[0].pool.discovered.empty());
}

TEST_CASE("self mode feeds each slot its own images") {
  Loop l;
  auto slots = l.slots({}, {{"q", {det(1, 0.95)}}});
  MiningConfig config;
  config.n_cls = 0;
  config.mode = LearningMode::self;
  colearn_iteration(slots, l.ctx(), config, 1);
  CHECK(stub(slots[0]).batches_.empty());
  REQUIRE(stub(slots[1]).batches_.size() == 1);
  CHECK(stub(slots[1]).batches_[0][0].image.id == "q");
}

TEST_CASE("context synthesis tops every class up to n_cls") {
  Loop l;
  auto slots = l.slots({{"p", {det(1, 0.95)}}, {"q", {det(1, 0.97)}}}, {});
  MiningConfig config;
  config.n_cls = 5;
  const auto report = colearn_iteration(slots, l.ctx(), config, 1);
  // Slot 1 receives the two class-1 images from slot 0 and 3 synthetic ones, plus 5 of class 2.
  CHECK(report.slots[1].synthetic.at(1) == 3);
  CHECK(report.slots[1].synthetic.at(2) == 5);
  CHECK(report.slots[0].synthetic.at(1) == 5);
  CHECK(report.slots[0].synthetic.at(2) == 5);
  const auto& batch = stub(slots[1]).batches_.at(0);
  CHECK(batch.size() == 10);
  std::size_t synthetic_c2 = 0;
  for (const auto& r : batch) {
    if (r.image.source != ImageSource::synthetic) continue;
    CHECK(r.image.id.starts_with("yolo-slot-t1-"));
    if (r.image.weak_label == 2) {
      ++synthetic_c2;
      // Class 2 is drawn over the mined class-1 images rather than the bootstrap pool.
      CHECK((r.image.width == 200 && r.image.height == 200));
    }
  }
  CHECK(synthetic_c2 == 5);
  for (ClassId c : {1, 2}) CHECK(report.slots[1].fed.at(c) + report.slots[1].synthetic.at(c) >= config.n_cls);
  CHECK(report.cumulative_training_images == 20);

  // Fine-tuning is cumulative: the second round's batch holds everything fed so far.
  const auto second = colearn_iteration(slots, l.ctx(), config, 2);
  CHECK(stub(slots[1]).batches_.at(1).size() == 20);
  CHECK(second.cumulative_training_images >= report.cumulative_training_images);
}

TEST_CASE("a failing fine-tune restores both slots") {
  Loop l;
  auto slots = l.slots({{"p", {det(1, 0.95)}}}, {{"q", {det(1, 0.95)}}});
  MiningConfig config;
  config.n_cls = 2;
  stub(slots[1]).throw_on_tune_ = true;
  const auto pools = std::array<PoolState, 2>{slots[0].pool, slots[1].pool};
  CHECK_THROWS_AS(colearn_iteration(slots, l.ctx(), config, 1), DetectorError);
  CHECK(slots[0].pool == pools[0]);
  CHECK(slots[1].pool == pools[1]);
  CHECK(slots[0].training.empty());
  CHECK(slots[1].training.empty());
  CHECK(slots[0].mined.empty());
  CHECK(stub(slots[0]).batches_.empty());  // slot 0 was tuned, then rolled back
}

TEST_CASE("stop rule replays the published gain sequence") {
  const std::vector<double> gains{10.2, 4.6, 5.9, 3.1, 2.2, 1.2, 1.3, 0.0};
  std::vector<IterationReport> history{report_with_map(0, 0.0)};
  double map = 0.0;
  const StopPolicy policy{0.0, 1000, 1};
  CHECK_FALSE(should_stop(history, policy));
  for (std::size_t i = 0; i < gains.size(); ++i) {
    map += gains[i];
    history.push_back(report_with_map(static_cast<int>(i + 1), map));
    CHECK(should_stop(history, policy) == (i + 1 == gains.size()));
  }
}

TEST_CASE("stop rule edge cases") {
  std::vector<IterationReport> one{report_with_map(0, 0.3)};
  CHECK_FALSE(should_stop(one, {0.0, 8, 1}));
  CHECK(should_stop(one, {0.0, 0, 1}));
  std::vector<IterationReport> two{report_with_map(0, 0.25), report_with_map(1, 0.5)};
  CHECK(should_stop(two, {0.25, 8, 1}));  // gain equals epsilon
  CHECK_FALSE(should_stop(two, {0.2, 8, 1}));
  CHECK(should_stop(two, {0.0, 1, 1}));
  // Only the deployment slot counts: slot 0 is flat.
  CHECK(should_stop(two, {0.0, 8, 0}));
  CHECK_THROWS_AS(should_stop(std::vector<IterationReport>{}, {}), InvalidArgument);
}

TEST_CASE("config validation lists every problem") {
  MiningConfig c;
  c.threshold = 0.0;
  c.deployment_slot = 2;
  try {
    validate(c);
    FAIL("expected error");
  } catch (const InvalidArgument& e) {
    const std::string m = e.what();
    CHECK(m.find("threshold") != std::string::npos);
    CHECK(m.find("deployment_slot") != std::string::npos);
  }
  c = {};
  c.threshold = 1.0;
  CHECK_NOTHROW(validate(c));
  CHECK(parse_learning_mode("self") == LearningMode::self);
  CHECK_FALSE(parse_learning_mode("both").has_value());
}

TEST_CASE("perfect detectors on a clean pool reach mAP 1 and stop") {
  const auto w = make_world(small_world(1));
  auto p = sim_params(0.0, 5);
  p.gain.synthetic_gain = 1.0;
  p.gain.synthetic_ceiling = 1.0;
  p.score_spread = 1e-6;
  MiningConfig config;
  config.bootstrap_per_class = 2;
  auto q = p;
  q.seed = 6;
  const auto r = run(config, world_inputs(w), sim_slots(w, p, q), 1);
  CHECK_FALSE(r.error.has_value());
  CHECK(r.reports.back().slots[1].map == 1.0);
  CHECK(r.reports.size() <= 3);
  CHECK(r.reports.back().stop);
}

TEST_CASE("runs are reproducible") {
  const auto w = make_world(small_world(2));
  MiningConfig config;
  config.bootstrap_per_class = 200;
  config.n_cls = 50;
  config.max_iterations = 4;
  auto once = [&] { return run(config, world_inputs(w), sim_slots(w, sim_params(0.05, 1), sim_params(0.05, 2)), 9); };
  const auto a = once();
  const auto b = once();
  CHECK(a.reports == b.reports);
  CHECK(a.discovered == b.discovered);
  CHECK(a.reports.size() >= 2);
  for (std::size_t i = 1; i < a.reports.size(); ++i) {
    CHECK(a.reports[i].cumulative_training_images >= a.reports[i - 1].cumulative_training_images);
    for (const auto& s : a.reports[i].slots) CHECK(s.discovered + s.unexplored == w.pool.size());
  }
  std::vector<int> iterations;
  run(config, world_inputs(w), sim_slots(w, sim_params(0.05, 1), sim_params(0.05, 2)), 9,
      [&](const IterationReport& r) { iterations.push_back(r.iteration); });
  CHECK(iterations.size() == a.reports.size());
  CHECK(iterations.front() == 0);
}

TEST_CASE("a pool without logos yields no discoveries and a flat stop") {
  auto w = make_world(small_world(3));
  // Drop every pool truth: the latent set keeps only the eval images.
  auto latent = std::make_shared<LatentTruth>();
  latent->add(w.eval);
  w.latent = latent;
  MiningConfig config;
  config.bootstrap_per_class = 300;
  config.n_cls = 0;
  const auto r = run(config, world_inputs(w), sim_slots(w, sim_params(0.0, 1), sim_params(0.0, 2)), 4);
  REQUIRE(r.reports.size() == 2);
  CHECK(r.reports.back().stop);
  CHECK(r.reports.back().slots[1].gain == 0.0);
  CHECK(r.discovered[0].empty());
  CHECK(r.discovered[1].empty());
}

TEST_CASE("run rejects bad inputs") {
  const auto w = make_world(small_world(4));
  MiningConfig config;
  auto inputs = world_inputs(w);
  inputs.icons.erase(2);
  CHECK_THROWS_AS(run(config, inputs, sim_slots(w, sim_params(0, 1), sim_params(0, 2)), 1), InvalidArgument);
  inputs = world_inputs(w);
  inputs.pool.clear();
  CHECK_THROWS_AS(run(config, inputs, sim_slots(w, sim_params(0, 1), sim_params(0, 2)), 1), InvalidArgument);
  auto same = sim_slots(w, sim_params(0, 1), sim_params(0, 2));
  same[1] = std::make_unique<SimulatedDetector>(
      "frcnn-slot", dynamic_cast<SimulatedDetector&>(*same[0]).class_names(),
      dynamic_cast<SimulatedDetector&>(*same[0]).params(), w.latent);
  CHECK_THROWS_AS(run(config, world_inputs(w), std::move(same), 1), InvalidArgument);
}

TEST_CASE("report JSON round trip") {
  ClassRegistry classes(kNames);
  IterationReport r;
  r.iteration = 3;
  r.deployment_slot = 1;
  r.cumulative_training_images = 42;
  r.stop = true;
  SlotReport s;
  s.name = "yolo-slot";
  s.mined = {{1, 4}, {2, 0}};
  s.fed = {{1, 2}, {2, 7}};
  s.synthetic = {{1, 498}, {2, 493}};
  s.discovered = 10;
  s.unexplored = 90;
  s.training_images = 21;
  s.failures = 1;
  s.ap = {{1, 0.125}, {2, 1.0 / 3.0}};
  s.map = (0.125 + 1.0 / 3.0) / 2;
  s.gain = -0.01;
  r.slots = {s, s};
  r.slots[0].name = "frcnn-slot";
  const auto j = to_json(r, classes);
  CHECK(j["slots"][1]["synthetic"]["Nike"] == 493);
  CHECK(report_from_json(j, classes) == r);
  CHECK(report_from_json(nlohmann::json::parse(j.dump()), classes) == r);
}

}  // TEST_SUITE
