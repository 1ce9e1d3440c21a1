#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "scarecrow/dataset.hpp"

namespace fs = std::filesystem;

namespace scarecrow {

Dataset Dataset::from_images(std::vector<AnnotatedImage> images) {
  Dataset d;
  d.images = std::move(images);
  std::set<std::string> labels;
  for (const auto& img : d.images) {
    for (const auto& o : img.objects) labels.insert(o.label);
  }
  d.labels.assign(labels.begin(), labels.end());
  return d;
}

int Dataset::class_id(std::string_view label) const {
  auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) return -1;
  return static_cast<int>(it - labels.begin());
}

std::vector<GroundTruth> Dataset::ground_truths(std::size_t i) const {
  const AnnotatedImage& img = images.at(i);
  std::vector<GroundTruth> gts;
  gts.reserve(img.objects.size());
  const double w = img.width;
  const double h = img.height;
  for (const auto& o : img.objects) {
    gts.push_back({class_id(o.label),
                   {o.box.xmin / w, o.box.ymin / h, o.box.xmax / w, o.box.ymax / h}});
  }
  return gts;
}

std::string Finding::to_line() const {
  return std::string(level == Level::error ? "ERROR" : "WARNING") + "\t" + code + "\t" + message;
}

LoadedDataset load_dataset(const std::string& root) {
  LoadedDataset out;
  out.root = root;
  const fs::path ann_dir = fs::path(root) / "annotations";
  const fs::path img_dir = fs::path(root) / "images";
  if (!fs::is_directory(ann_dir)) {
    throw std::runtime_error("dataset: " + ann_dir.string() + " is not a directory");
  }

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(ann_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, fs::path> images_by_stem;
  if (fs::is_directory(img_dir)) {
    std::vector<fs::path> imgs;
    for (const auto& e : fs::directory_iterator(img_dir)) {
      if (e.is_regular_file()) imgs.push_back(e.path());
    }
    std::sort(imgs.begin(), imgs.end());
    for (const auto& p : imgs) images_by_stem.emplace(p.stem().string(), p);
  }

  std::vector<AnnotatedImage> parsed;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      parsed.push_back(parse_voc_xml(ss.str()));
    } catch (const VocError& e) {
      out.findings.push_back({Finding::Level::error, "parse_error",
                              f.filename().string() + ": " + e.what()});
      continue;
    }
    auto it = images_by_stem.find(f.stem().string());
    if (it == images_by_stem.end()) {
      out.findings.push_back({Finding::Level::warning, "missing_image",
                              "no image in images/ matches " + f.filename().string()});
      out.image_paths.emplace_back();
    } else {
      out.image_paths.push_back(it->second.string());
    }
  }
  out.dataset = Dataset::from_images(std::move(parsed));
  return out;
}

std::vector<Finding> validate_dataset(const Dataset& d, std::size_t min_per_class) {
  using L = Finding::Level;
  std::vector<Finding> findings;
  if (d.images.empty()) {
    findings.push_back({L::error, "empty_dataset", "dataset contains no annotated images"});
    return findings;
  }

  std::map<std::string, std::size_t> name_counts;
  for (const auto& img : d.images) ++name_counts[img.filename];
  for (const auto& [name, n] : name_counts) {
    if (n > 1) {
      findings.push_back({L::error, "duplicate_filename",
                          "filename '" + name + "' appears " + std::to_string(n) + " times"});
    }
  }

  for (const auto& img : d.images) {
    for (const auto& o : img.objects) {
      if (!(o.box.xmax > o.box.xmin && o.box.ymax > o.box.ymin)) {
        findings.push_back({L::error, "degenerate_box",
                            img.filename + ": box " + to_string(o.box) + " of '" + o.label +
                                "' has no extent"});
      } else if (o.box.xmin < 0 || o.box.ymin < 0 || o.box.xmax > img.width ||
                 o.box.ymax > img.height) {
        findings.push_back({L::error, "box_out_of_bounds",
                            img.filename + ": box " + to_string(o.box) + " of '" + o.label +
                                "' exceeds " + std::to_string(img.width) + "x" +
                                std::to_string(img.height)});
      }
    }
  }

  // Images per class (an image with two lions counts once).
  std::map<std::string, std::size_t> per_class;
  for (const auto& img : d.images) {
    std::set<std::string> seen;
    for (const auto& o : img.objects) seen.insert(o.label);
    for (const auto& l : seen) ++per_class[l];
  }
  for (const auto& [label, n] : per_class) {
    if (n < min_per_class) {
      findings.push_back({L::warning, "class_below_minimum",
                          "class '" + label + "' has " + std::to_string(n) +
                              " images, below recommended " + std::to_string(min_per_class)});
    }
  }
  return findings;
}

namespace {

// Fisher-Yates with rejection sampling so results do not depend on the
// standard library's distribution implementations.
void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = 0;
    do {
      r = gen();
    } while (r >= limit);
    std::swap(v[i - 1], v[static_cast<std::size_t>(r % bound)]);
  }
}

Dataset subset(const Dataset& d, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.labels = d.labels;
  out.images.reserve(idx.size());
  for (std::size_t i : idx) out.images.push_back(d.images[i]);
  return out;
}

}  // namespace

SplitResult split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0)) {
    throw std::invalid_argument("split: train_fraction must lie in (0,1]");
  }
  const std::size_t n = d.images.size();
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * n));
  std::mt19937_64 gen(spec.seed);

  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& objs = d.images[i].objects;
    strata[objs.empty() ? std::string() : objs.front().label].push_back(i);
  }
  const bool stratify =
      strata.size() > 1 &&
      std::all_of(strata.begin(), strata.end(), [](const auto& s) { return s.second.size() >= 2; });

  std::vector<std::size_t> train, test;
  if (!stratify) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    seeded_shuffle(all, gen);
    train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());
    return {subset(d, train), subset(d, test)};
  }

  // Largest-remainder allocation so per-stratum quotas sum to n_train.
  std::vector<std::vector<std::size_t>*> groups;
  std::vector<std::size_t> quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (auto& [label, members] : strata) {
    const double exact = spec.train_fraction * static_cast<double>(members.size());
    const auto q = static_cast<std::size_t>(std::floor(exact));
    remainders.emplace_back(exact - static_cast<double>(q), groups.size());
    groups.push_back(&members);
    quota.push_back(q);
    assigned += q;
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n_train && r < remainders.size(); ++r) {
    const std::size_t g = remainders[r].second;
    if (quota[g] < groups[g]->size()) {
      ++quota[g];
      ++assigned;
    }
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<std::size_t> members = *groups[g];
    seeded_shuffle(members, gen);
    train.insert(train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota[g]));
    test.insert(test.end(), members.begin() + static_cast<std::ptrdiff_t>(quota[g]), members.end());
  }
  return {subset(d, train), subset(d, test)};
}

DatasetStats stats(const Dataset& d) {
  DatasetStats s;
  for (const auto& img : d.images) {
    const double image_area = static_cast<double>(img.width) * img.height;
    for (const auto& o : img.objects) {
      ++s.class_counts[o.label];
      const double rel = std::sqrt(std::max(o.box.area(), 0.0) / image_area);
      const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(std::floor(rel * 10.0)));
      ++s.size_histogram[bin];
    }
  }
  return s;
}

}  // namespace scarecrow
