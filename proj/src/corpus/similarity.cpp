#include "vulcan/corpus/similarity.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "vulcan/seeds.hpp"

namespace vulcan::corpus {

namespace {

const std::vector<std::string> kNames = {"a",   "b",   "c",   "d",   "e",   "g",   "h",    "k",    "m",   "p",
                                         "q",   "r",   "s",   "t",   "u",   "v",   "w",    "x",    "y",   "z",
                                         "acc", "amt", "bal", "cnt", "fee", "idx", "lim",  "off",  "sum", "tmp",
                                         "tot", "val", "cap", "pos", "key", "gain", "loss", "base", "step", "rate"};
const std::vector<std::string> kFuncs = {"transfer", "withdraw", "deposit", "settle", "update", "process", "claim"};
const std::vector<std::string> kOps = {"+", "-", "*"};

class TripletBuilder {
 public:
  explicit TripletBuilder(std::uint64_t seed) : rng_(seed) {}

  SimilarityTriplet build(const std::string& id) {
    names_ = kNames;
    std::shuffle(names_.begin(), names_.end(), rng_);
    z_ = take();
    y_ = take();
    w_ = take();
    const std::string k1 = std::to_string(uniform(1, 9));
    const std::string k2 = std::to_string(uniform(1, 9));
    const std::string k3 = std::to_string(uniform(2, 9));
    switch (uniform(0, 3)) {
      case 0: loi_ = "var " + w_ + " = " + z_ + " + " + y_; break;
      case 1: loi_ = "var " + w_ + " = " + z_ + " * " + y_ + " - " + k3; break;
      case 2: loi_ = "var " + w_ + " = max(" + z_ + ", " + y_ + ") + " + k3; break;
      default: loi_ = "var " + w_ + " = " + z_ + " - hash(" + y_ + ")"; break;
    }

    Variant base;
    base.func = pick(kFuncs);
    base.params = {take(), take(), take()};
    base.op_init = pick(kOps);
    base.op_y = pick(kOps);
    base.op_loop = pick(kOps);
    base.k1 = k1;
    base.k2 = k2;
    base.before = fillers(uniform(0, 2), base.params);
    base.between = fillers(uniform(1, 4), base.params);
    base.after = fillers(uniform(0, 2), base.params);

    Variant mod = base;
    std::vector<std::string> others;
    for (const auto& f : kFuncs) {
      if (f != base.func) others.push_back(f);
    }
    mod.func = pick(others);
    mod.params = {take(), take(), take()};
    mod.op_init = other_op(base.op_init);
    mod.op_y = other_op(base.op_y);
    mod.op_loop = other_op(base.op_loop);
    int between = uniform(1, 4);
    while (between == static_cast<int>(base.between.size())) between = uniform(1, 4);
    mod.before = fillers(uniform(0, 2), mod.params);
    mod.between = fillers(between, mod.params);
    mod.after = fillers(uniform(0, 2), mod.params);

    SimilarityTriplet t;
    t.base = render(id, base, true, t.base_line);
    t.mod_dep = render(id + ".mod", mod, true, t.mod_dep_line);
    t.no_mod_dep = render(id + ".nomod", base, false, t.no_mod_dep_line);
    return t;
  }

 private:
  struct Variant {
    std::string func;
    std::vector<std::string> params;
    std::string op_init, op_y, op_loop, k1, k2;
    std::vector<std::string> before, between, after;
  };

  std::mt19937_64 rng_;
  std::vector<std::string> names_;
  std::string z_, y_, w_, loi_;

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  const std::string& pick(const std::vector<std::string>& v) {
    return v.at(static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1)));
  }
  std::string take() {
    std::string n = names_.back();
    names_.pop_back();
    return n;
  }
  std::string other_op(const std::string& op) {
    std::vector<std::string> rest;
    for (const auto& o : kOps) {
      if (o != op) rest.push_back(o);
    }
    return pick(rest);
  }

  // Straight-line statements over the parameters only, off the dependence
  // chain of the line of interest.
  std::vector<std::string> fillers(int n, const std::vector<std::string>& params) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) {
      const std::string name = take();
      const std::string& p = pick(params);
      switch (uniform(0, 2)) {
        case 0: out.push_back("var " + name + " = " + p + " " + pick(kOps) + " " + std::to_string(uniform(1, 9))); break;
        case 1: out.push_back("var " + name + " = hash(" + p + ")"); break;
        default: out.push_back("var " + name + " = min(" + p + ", " + pick(params) + ")"); break;
      }
    }
    return out;
  }

  SourceProgram render(const std::string& id, const Variant& v, bool loop, int& loi_line) const {
    std::vector<std::string> lines;
    const auto put = [&](int indent, const std::string& s) { lines.push_back(std::string(4 * indent, ' ') + s); };
    put(0, "func " + v.func + "(" + v.params[0] + ", " + v.params[1] + ", " + v.params[2] + ") {");
    put(1, "var " + z_ + " = " + v.params[0] + " " + v.op_init + " " + v.k1);
    put(1, "var " + y_ + " = " + v.params[1] + " " + v.op_y + " " + v.k2);
    for (const auto& s : v.before) put(1, s);
    const std::string update = z_ + " = " + z_ + " " + v.op_loop + " " + v.params[1];
    if (loop) {
      put(1, "while " + y_ + " < " + v.params[2] + " {");
      put(2, update);
      put(1, "}");
    } else {
      put(1, update);
    }
    for (const auto& s : v.between) put(1, s);
    put(1, loi_);
    loi_line = static_cast<int>(lines.size());
    for (const auto& s : v.after) put(1, s);
    put(1, "return " + w_);
    put(0, "}");
    std::string text;
    for (std::size_t i = 0; i < lines.size(); ++i) text += (i > 0 ? "\n" : "") + lines[i];
    return SourceProgram::from_text(id, text);
  }
};

}  // namespace

std::vector<SimilarityTriplet> generate_similarity_triplets(int count, std::uint64_t seed) {
  std::vector<SimilarityTriplet> out;
  for (int i = 0; i < count; ++i) {
    const std::string id = "t" + std::to_string(i);
    out.push_back(TripletBuilder(sub_seed(seed, "triplet:" + std::to_string(i))).build(id));
  }
  return out;
}

}  // namespace vulcan::corpus
