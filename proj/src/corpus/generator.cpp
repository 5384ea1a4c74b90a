#include "vulcan/corpus/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "vulcan/frontend/ast.hpp"
#include "vulcan/seeds.hpp"

namespace vulcan::corpus {

namespace {

using frontend::NodeKind;

const std::vector<std::string> kVarPool = {
    "a",   "b",   "c",   "d",   "e",   "g",   "h",   "k",    "m",    "p",    "q",    "r",   "s",   "t",
    "u",   "v",   "w",   "x",   "y",   "z",   "acc", "amt",  "bal",  "cnt",  "fee",  "idx", "key", "lim",
    "off", "pos", "sum", "tmp", "tot", "val", "cap", "gain", "loss", "base", "step", "rate"};
const std::vector<std::string> kGlobals = {"now", "gas", "origin"};
const std::vector<std::string> kHelperNames = {"calc", "scale", "adjust", "fetch", "price", "bonus", "share", "quote"};
const std::vector<std::string> kMainNames = {"transfer", "withdraw", "deposit", "settle",
                                             "update",   "process",  "execute", "claim"};
const std::vector<std::string> kCompare = {"<", ">", "<=", ">=", "==", "!="};

struct GExpr {
  enum class Kind { Ident, Int, Call, Bin };
  Kind kind = Kind::Int;
  std::string text;  // name, literal, callee or operator
  std::vector<GExpr> kids;
};

GExpr ident(std::string name) { return {GExpr::Kind::Ident, std::move(name), {}}; }
GExpr lit(int v) { return {GExpr::Kind::Int, std::to_string(v), {}}; }
GExpr call(std::string f, std::vector<GExpr> args) { return {GExpr::Kind::Call, std::move(f), std::move(args)}; }
GExpr bin(std::string op, GExpr l, GExpr r) { return {GExpr::Kind::Bin, std::move(op), {std::move(l), std::move(r)}}; }

int precedence(const GExpr& e) {
  if (e.kind != GExpr::Kind::Bin) return 100;
  const std::string& op = e.text;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  return 6;
}

std::string print(const GExpr& e) {
  switch (e.kind) {
    case GExpr::Kind::Ident:
    case GExpr::Kind::Int:
      return e.text;
    case GExpr::Kind::Call: {
      std::string s = e.text + "(";
      for (std::size_t i = 0; i < e.kids.size(); ++i) s += (i > 0 ? ", " : "") + print(e.kids[i]);
      return s + ")";
    }
    case GExpr::Kind::Bin: {
      const int p = precedence(e);
      std::string l = print(e.kids[0]);
      std::string r = print(e.kids[1]);
      if (precedence(e.kids[0]) < p) l = "(" + l + ")";
      if (precedence(e.kids[1]) <= p) r = "(" + r + ")";
      return l + " " + e.text + " " + r;
    }
  }
  return {};
}

bool contains_call(const GExpr& e, std::string_view f) {
  if (e.kind == GExpr::Kind::Call && e.text == f) return true;
  return std::any_of(e.kids.begin(), e.kids.end(), [&](const GExpr& k) { return contains_call(k, f); });
}

struct VarInfo {
  bool guarded = false;  // latest definition passes through assert_nonzero
  bool tainted = false;  // latest definition sits directly in a loop body
};

enum class Ctl { Body, If, Loop };

struct Frame {
  Ctl ctl = Ctl::Body;
  bool after_ext_call = false;
};

struct Retry {};

enum class Action { PlantDiv, PlantOverflow, PlantDeadIf, PlantDeadLoop, DecoyDiv, DecoyTaint, DecoyExt, Guard };

int estimate(Action a) {
  switch (a) {
    case Action::PlantDiv: return 4;
    case Action::PlantOverflow: return 9;
    case Action::PlantDeadIf: return 6;
    case Action::PlantDeadLoop: return 7;
    case Action::DecoyDiv: return 4;
    case Action::DecoyTaint: return 9;
    case Action::DecoyExt: return 5;
    case Action::Guard: return 1;
  }
  return 1;
}

class Builder {
 public:
  explicit Builder(std::uint64_t seed) : rng_(seed) {}

  GeneratedProgram run(const SizeSpec& spec, const std::string& id) {
    std::vector<VulnClass> plants;
    if (spec.plants) {
      plants = *spec.plants;
    } else {
      const double r = uniform01();
      const int n = r < 0.55 ? 0 : r < 0.85 ? 1 : r < 0.97 ? 2 : 3;
      for (int i = 0; i < n; ++i) plants.push_back(static_cast<VulnClass>(uniform(0, 2)));
    }

    const int target_total = uniform(spec.min_lines, spec.max_lines);
    const int helper_count = target_total >= 24 ? uniform(0, 2) : 0;
    for (int i = 0; i < helper_count; ++i) helper();

    bool dead_in_body = false;
    std::vector<Action> actions;
    for (VulnClass v : plants) {
      switch (v) {
        case VulnClass::UncheckedDiv: actions.push_back(Action::PlantDiv); break;
        case VulnClass::LoopOverflow: actions.push_back(Action::PlantOverflow); break;
        case VulnClass::DeadAfterCall: {
          const int where = uniform(0, 2);
          if (where == 0 && !dead_in_body) {
            dead_in_body = true;
          } else {
            actions.push_back(where == 2 ? Action::PlantDeadLoop : Action::PlantDeadIf);
          }
          break;
        }
      }
    }
    const int decoys = uniform(1, 3);
    for (int i = 0; i < decoys; ++i) {
      actions.push_back(static_cast<Action>(uniform(static_cast<int>(Action::DecoyDiv), static_cast<int>(Action::Guard))));
    }
    std::shuffle(actions.begin(), actions.end(), rng_);

    const int header_line = next_line();
    begin_function(fresh_function_name(kMainNames), uniform(2, 4));
    // Lines still needed after the body: return, closing brace, optional tail plant.
    const int tail = 2 + (dead_in_body ? 3 : 0);
    const int body_target = std::max(1, target_total - (header_line - 1) - 1 - tail);
    int reserve = 0;
    for (Action a : actions) reserve += estimate(a);

    for (std::size_t i = 0; i < actions.size(); ++i) {
      const int slack = body_target - body_lines(header_line) - reserve;
      const int share = std::max(0, slack / static_cast<int>(actions.size() - i + 1));
      fill(header_line, body_lines(header_line) + uniform(0, share));
      run_action(actions[i]);
      reserve -= estimate(actions[i]);
    }
    fill(header_line, body_target);

    if (dead_in_body) {
      plant_dead_here();
    } else if (chance(0.15)) {
      exec(call("ext_call", {atom()}));
    }
    ret(ident(pick(defined())));
    end_function();

    GeneratedProgram out;
    std::string text;
    for (std::size_t i = 0; i < lines_.size(); ++i) text += (i > 0 ? "\n" : "") + lines_[i];
    out.program = SourceProgram::from_text(id, text);
    out.labels = std::move(labels_);
    out.statements = std::move(records_);
    out.planted = plants;
    return out;
  }

 private:
  std::mt19937_64 rng_;
  std::vector<std::string> lines_;
  std::vector<StatementRecord> records_;
  std::vector<LabeledLine> labels_;
  std::string func_;
  std::map<std::string, VarInfo> vars_;
  std::vector<Frame> frames_;
  std::vector<std::pair<std::string, int>> helpers_;
  std::set<std::string> functions_;
  std::set<std::string> protected_;

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  bool chance(double p) { return uniform01() < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v.at(static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1)));
  }

  int next_line() const { return static_cast<int>(lines_.size()) + 1; }
  int body_lines(int header_line) const { return next_line() - header_line - 1; }

  void put(const std::string& text) { lines_.push_back(std::string(4 * frames_.size(), ' ') + text); }

  bool in_loop() const {
    return std::any_of(frames_.begin(), frames_.end(), [](const Frame& f) { return f.ctl == Ctl::Loop; });
  }

  bool guarded(const std::string& name) const {
    const auto it = vars_.find(name);
    return it != vars_.end() && it->second.guarded;
  }
  bool tainted(const std::string& name) const {
    const auto it = vars_.find(name);
    return it != vars_.end() && it->second.tainted;
  }

  // ---- labels from bookkeeping -------------------------------------------

  bool unchecked_div(const GExpr& e) const {
    if (e.kind == GExpr::Kind::Bin && e.text == "/") {
      const GExpr& den = e.kids[1];
      if (den.kind == GExpr::Kind::Int) {
        if (den.text == "0") return true;
      } else if (den.kind != GExpr::Kind::Ident || !guarded(den.text)) {
        return true;
      }
    }
    return std::any_of(e.kids.begin(), e.kids.end(), [&](const GExpr& k) { return unchecked_div(k); });
  }

  bool overflow_add(const GExpr& e) const {
    if (e.kind == GExpr::Kind::Bin && e.text == "+") {
      for (const GExpr& k : e.kids) {
        if (k.kind == GExpr::Kind::Ident && tainted(k.text)) return true;
      }
    }
    return std::any_of(e.kids.begin(), e.kids.end(), [&](const GExpr& k) { return overflow_add(k); });
  }

  std::optional<VulnClass> classify(const GExpr& rhs) const {
    if (frames_.back().after_ext_call) return VulnClass::DeadAfterCall;
    if (unchecked_div(rhs)) return VulnClass::UncheckedDiv;
    if (overflow_add(rhs)) return VulnClass::LoopOverflow;
    return std::nullopt;
  }

  // ---- statements ----------------------------------------------------------

  std::optional<VulnClass> assign(const std::string& name, const GExpr& rhs, bool decl) {
    const int line = next_line();
    const auto vuln = classify(rhs);
    put((decl ? "var " : "") + name + " = " + print(rhs));
    records_.push_back({line, decl ? NodeKind::VarDecl : NodeKind::Assign, func_, {name}});
    labels_.push_back({line, vuln ? 1 : 0, vuln});
    const bool g = contains_call(rhs, "assert_nonzero") || (rhs.kind == GExpr::Kind::Ident && guarded(rhs.text));
    vars_[name] = {g, frames_.back().ctl == Ctl::Loop};
    if (contains_call(rhs, "ext_call")) frames_.back().after_ext_call = true;
    return vuln;
  }

  void exec(const GExpr& c) {
    records_.push_back({next_line(), NodeKind::ExprStmt, func_, {}});
    put(print(c));
    if (contains_call(c, "ext_call")) frames_.back().after_ext_call = true;
  }

  void ret(const GExpr& e) {
    records_.push_back({next_line(), NodeKind::Return, func_, {}});
    put("return " + print(e));
  }

  void open_if(const GExpr& cond) {
    records_.push_back({next_line(), NodeKind::If, func_, {}});
    put("if " + print(cond) + " {");
    frames_.push_back({Ctl::If});
  }

  void open_else() {
    frames_.pop_back();
    put("} else {");
    frames_.push_back({Ctl::If});
  }

  void open_loop(const GExpr& cond) {
    records_.push_back({next_line(), NodeKind::Loop, func_, {}});
    put("while " + print(cond) + " {");
    frames_.push_back({Ctl::Loop});
  }

  void close() {
    frames_.pop_back();
    put("}");
  }

  void begin_function(const std::string& name, int params) {
    func_ = name;
    functions_.insert(name);
    vars_.clear();
    std::vector<std::string> names;
    for (int i = 0; i < params; ++i) {
      names.push_back(*fresh_name());
      vars_[names.back()] = {};
    }
    records_.push_back({next_line(), NodeKind::FuncDecl, func_, names});
    std::string header = "func " + name + "(";
    for (std::size_t i = 0; i < names.size(); ++i) header += (i > 0 ? ", " : "") + names[i];
    put(header + ") {");
    frames_ = {Frame{Ctl::Body}};
  }

  void end_function() {
    frames_.clear();
    put("}");
  }

  // ---- names and expressions ---------------------------------------------

  std::string fresh_function_name(const std::vector<std::string>& pool) {
    std::vector<std::string> free;
    for (const auto& n : pool) {
      if (functions_.count(n) == 0) free.push_back(n);
    }
    return pick(free);
  }

  std::optional<std::string> fresh_name() {
    std::vector<std::string> free;
    for (const auto& n : kVarPool) {
      if (vars_.count(n) == 0) free.push_back(n);
    }
    if (free.empty()) return std::nullopt;
    return pick(free);
  }

  std::vector<std::string> defined() const {
    std::vector<std::string> out;
    for (const auto& [name, info] : vars_) out.push_back(name);
    return out;
  }

  std::vector<std::string> writable() const {
    std::vector<std::string> out;
    for (const auto& [name, info] : vars_) {
      if (protected_.count(name) == 0) out.push_back(name);
    }
    return out;
  }

  std::vector<std::string> matching(bool want_guarded, bool want_tainted) const {
    std::vector<std::string> out;
    for (const auto& [name, info] : vars_) {
      if (want_guarded && !info.guarded) continue;
      if (want_tainted && !info.tainted) continue;
      out.push_back(name);
    }
    return out;
  }

  GExpr atom() {
    const double r = uniform01();
    if (r < 0.10) return lit(uniform(1, 9));
    if (r < 0.13) return ident(pick(kGlobals));
    return ident(pick(defined()));
  }

  GExpr var_atom() { return ident(pick(defined())); }

  std::string arith_op() {
    const double r = uniform01();
    return r < 0.45 ? "+" : r < 0.75 ? "-" : "*";
  }

  // No '+' directly on a loop-updated variable and no division, so filler
  // never creates a positive by accident.
  GExpr sanitize(GExpr e) {
    for (auto& k : e.kids) k = sanitize(std::move(k));
    if (e.kind == GExpr::Kind::Bin && e.text == "+") {
      for (const auto& k : e.kids) {
        if (k.kind == GExpr::Kind::Ident && tainted(k.text)) {
          e.text = chance(0.5) ? "-" : "*";
          break;
        }
      }
    }
    return e;
  }

  GExpr filler_expr() {
    GExpr e;
    switch (uniform(0, 9)) {
      case 0:
      case 1:
      case 2:
      case 3:
        e = bin(arith_op(), atom(), atom());
        break;
      case 4:
      case 5:
        e = bin(arith_op(), bin(arith_op(), atom(), atom()), atom());
        break;
      case 6:
        e = call("hash", {atom()});
        break;
      case 7:
        e = call(chance(0.5) ? "min" : "max", {atom(), atom()});
        break;
      case 8:
        if (!helpers_.empty()) {
          const auto& [name, arity] = pick(helpers_);
          std::vector<GExpr> args;
          for (int i = 0; i < arity; ++i) args.push_back(atom());
          e = call(name, std::move(args));
        } else {
          e = bin(arith_op(), var_atom(), lit(uniform(1, 9)));
        }
        break;
      default:
        e = bin(arith_op(), atom(), call("hash", {atom()}));
        break;
    }
    return sanitize(std::move(e));
  }

  GExpr condition() { return bin(pick(kCompare), var_atom(), atom()); }

  std::string target(bool& decl) {
    const auto w = writable();
    if (!w.empty() && chance(0.4)) {
      decl = false;
      return pick(w);
    }
    if (auto n = fresh_name()) {
      decl = true;
      return *n;
    }
    decl = false;
    return pick(w);
  }

  void expect(const std::optional<VulnClass>& got, std::optional<VulnClass> want) {
    if (got != want) throw Retry{};
  }

  // ---- segments ------------------------------------------------------------

  void filler() {
    bool decl = false;
    const std::string name = target(decl);
    expect(assign(name, filler_expr(), decl), std::nullopt);
  }

  void fill(int header_line, int body_target) {
    while (body_lines(header_line) < body_target) {
      const int room = body_target - body_lines(header_line);
      const double r = uniform01();
      if (room >= 6 && r < 0.15) {
        seg_if();
      } else if (room >= 6 && r < 0.27) {
        seg_loop();
      } else if (room >= 2 && r < 0.32) {
        seg_guard();
      } else {
        filler();
      }
    }
  }

  void seg_if() {
    open_if(condition());
    const int n = uniform(1, 2);
    for (int i = 0; i < n; ++i) filler();
    if (chance(0.3)) {
      open_else();
      filler();
    }
    close();
  }

  // Resets a counter and loops updating one or two variables (under a branch
  // when nested_if); returns the updated variables.
  std::vector<std::string> seg_loop(bool nested_if = false) {
    bool decl = false;
    const std::string counter = target(decl);
    expect(assign(counter, lit(0), decl), std::nullopt);
    std::vector<std::string> bounds;
    for (const auto& n : defined()) {
      if (n != counter) bounds.push_back(n);
    }
    protected_.insert(counter);
    open_loop(bin("<", ident(counter), ident(pick(bounds))));
    std::vector<std::string> updated;
    const int n = uniform(1, 2);
    for (int i = 0; i < n; ++i) {
      const auto w = writable();
      const std::string v = pick(w);
      if (nested_if) open_if(condition());
      expect(assign(v, sanitize(bin(arith_op(), ident(v), atom())), false), std::nullopt);
      if (nested_if) close();
      updated.push_back(v);
    }
    expect(assign(counter, bin("+", ident(counter), lit(1)), false), std::nullopt);
    close();
    protected_.erase(counter);
    return updated;
  }

  void seg_guard() {
    const std::string b = pick(defined());
    if (chance(0.5)) {
      if (auto d = fresh_name()) {
        expect(assign(*d, call("assert_nonzero", {ident(b)}), true), std::nullopt);
        return;
      }
    }
    if (protected_.count(b) == 0) expect(assign(b, call("assert_nonzero", {ident(b)}), false), std::nullopt);
  }

  std::string ensure_guarded() {
    auto g = matching(true, false);
    if (g.empty()) {
      const std::string b = pick(defined());
      std::string d = b;
      bool decl = false;
      if (auto n = fresh_name()) {
        d = *n;
        decl = true;
      }
      expect(assign(d, call("assert_nonzero", {ident(b)}), decl), std::nullopt);
      return d;
    }
    return pick(g);
  }

  void decoy_div() {
    bool decl = false;
    switch (uniform(0, 2)) {
      case 0: {
        const std::string t = target(decl);
        expect(assign(t, bin("/", atom(), lit(uniform(2, 9))), decl), std::nullopt);
        break;
      }
      case 1: {
        const std::string d = ensure_guarded();
        const std::string t = target(decl);
        expect(assign(t, bin("/", atom(), ident(d)), decl), std::nullopt);
        break;
      }
      default: {
        const std::string d = ensure_guarded();
        std::string e = d;
        if (auto n = fresh_name()) {
          e = *n;
          expect(assign(e, ident(d), true), std::nullopt);
        }
        const std::string t = target(decl);
        expect(assign(t, bin("/", atom(), ident(e)), decl), std::nullopt);
        break;
      }
    }
  }

  void decoy_taint() {
    bool decl = false;
    const int variant = uniform(0, 2);
    if (variant == 2) {
      // Updated under a branch inside the loop: the branch is the nearest control.
      const std::string v = pick(seg_loop(true));
      const std::string t = target(decl);
      expect(assign(t, sanitize(bin("+", ident(v), atom())), decl), std::nullopt);
      return;
    }
    auto tv = matching(false, true);
    if (tv.empty()) {
      seg_loop();
      tv = matching(false, true);
    }
    const std::string v = pick(tv);
    if (variant == 1 && protected_.count(v) == 0) {
      expect(assign(v, sanitize(bin("*", ident(v), atom())), false), std::nullopt);
      const std::string t = target(decl);
      expect(assign(t, sanitize(bin("+", ident(v), atom())), decl), std::nullopt);
      return;
    }
    const std::string t = target(decl);
    expect(assign(t, bin(chance(0.5) ? "*" : "-", ident(v), atom()), decl), std::nullopt);
  }

  void decoy_ext() {
    open_if(condition());
    if (chance(0.5)) filler();
    std::string s;
    if (chance(0.7)) {
      bool decl = false;
      s = target(decl);
      expect(assign(s, call("ext_call", {var_atom()}), decl), std::nullopt);
    } else {
      exec(call("ext_call", {var_atom()}));
    }
    close();
    if (!s.empty() && chance(0.6)) {
      bool decl = false;
      const std::string t = target(decl);
      expect(assign(t, sanitize(bin(arith_op(), ident(s), atom())), decl), std::nullopt);
    }
  }

  void plant_div() {
    std::vector<std::string> unguarded;
    for (const auto& [name, info] : vars_) {
      if (!info.guarded) unguarded.push_back(name);
    }
    std::string d;
    if (unguarded.empty() || chance(0.4)) {
      bool decl = false;
      d = target(decl);
      expect(assign(d, filler_expr(), decl), std::nullopt);
      if (chance(0.5)) filler();
      if (guarded(d)) throw Retry{};
    } else {
      d = pick(unguarded);
    }
    const bool nested = chance(0.25);
    if (nested) open_if(condition());
    bool decl = false;
    const std::string t = target(decl);
    expect(assign(t, bin("/", atom(), ident(d)), decl), VulnClass::UncheckedDiv);
    if (nested) close();
  }

  void plant_overflow() {
    auto tv = matching(false, true);
    if (tv.empty() || chance(0.7)) {
      seg_loop();
      tv = matching(false, true);
    }
    const std::string v = pick(tv);
    protected_.insert(v);
    const int gap = uniform(0, 2);
    for (int i = 0; i < gap; ++i) filler();
    protected_.erase(v);
    bool decl = false;
    const std::string t = target(decl);
    const GExpr other = atom();
    const GExpr rhs = chance(0.6) ? bin("+", ident(v), other) : bin("+", other, ident(v));
    expect(assign(t, rhs, decl), VulnClass::LoopOverflow);
  }

  // ext_call result read by one or two later assignments of the same block.
  void plant_dead_here(bool in_loop = false) {
    bool decl = false;
    const std::string s = target(decl);
    expect(assign(s, call("ext_call", {var_atom()}), decl), std::nullopt);
    const int n = !in_loop && chance(0.3) ? 2 : 1;
    for (int i = 0; i < n; ++i) {
      bool d = false;
      const std::string t = target(d);
      expect(assign(t, bin(arith_op(), ident(s), atom()), d), VulnClass::DeadAfterCall);
    }
  }

  void plant_dead_if() {
    open_if(condition());
    if (chance(0.5)) filler();
    plant_dead_here();
    close();
  }

  // The counter moves before the call so that every dead line reads its result.
  void plant_dead_loop() {
    bool decl = false;
    const std::string counter = target(decl);
    expect(assign(counter, lit(0), decl), std::nullopt);
    std::vector<std::string> bounds;
    for (const auto& n : defined()) {
      if (n != counter) bounds.push_back(n);
    }
    protected_.insert(counter);
    open_loop(bin("<", ident(counter), ident(pick(bounds))));
    if (chance(0.5)) filler();
    expect(assign(counter, bin("+", ident(counter), lit(1)), false), std::nullopt);
    plant_dead_here(true);
    close();
    protected_.erase(counter);
  }

  void run_action(Action a) {
    switch (a) {
      case Action::PlantDiv: plant_div(); break;
      case Action::PlantOverflow: plant_overflow(); break;
      case Action::PlantDeadIf: plant_dead_if(); break;
      case Action::PlantDeadLoop: plant_dead_loop(); break;
      case Action::DecoyDiv: decoy_div(); break;
      case Action::DecoyTaint: decoy_taint(); break;
      case Action::DecoyExt: decoy_ext(); break;
      case Action::Guard: seg_guard(); break;
    }
  }

  void helper() {
    const std::string name = fresh_function_name(kHelperNames);
    begin_function(name, uniform(1, 2));
    const int arity = static_cast<int>(vars_.size());
    const int n = uniform(1, 2);
    for (int i = 0; i < n; ++i) filler();
    ret(chance(0.5) ? var_atom() : filler_expr());
    end_function();
    lines_.push_back("");
    helpers_.emplace_back(name, arity);
  }
};

bool well_formed(const GeneratedProgram& g, const SizeSpec& spec) {
  const int n = g.program.line_count();
  if (n < spec.min_lines || n > spec.max_lines || n > 128) return false;
  try {
    const auto ast = frontend::parse_source(g.program);
    if (frontend::pretty_print(ast) != g.program.source) return false;
  } catch (const Error&) {
    return false;
  }
  std::vector<int> realized(3, 0);
  for (const auto& l : g.labels) {
    if (l.vuln) ++realized[static_cast<std::size_t>(*l.vuln)];
  }
  for (VulnClass v : g.planted) {
    if (realized[static_cast<std::size_t>(v)] == 0) return false;
  }
  return true;
}

}  // namespace

GeneratedProgram generate_program(std::uint64_t seed, const SizeSpec& spec, const std::string& id) {
  if (spec.min_lines > spec.max_lines || spec.max_lines < 1) {
    throw Error(ErrorCategory::Usage, "size spec needs 1 <= min_lines <= max_lines");
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    Builder b(sub_seed(seed, "attempt:" + std::to_string(attempt)));
    try {
      GeneratedProgram g = b.run(spec, id);
      if (well_formed(g, spec)) return g;
    } catch (const Retry&) {
    }
  }
  throw GenerationRetryExceeded("no program of " + std::to_string(spec.min_lines) + "-" +
                                std::to_string(spec.max_lines) + " lines fits the requested plants");
}

Corpus generate_corpus(const CorpusSpec& spec) {
  Corpus corpus;
  corpus.reserve(static_cast<std::size_t>(std::max(0, spec.programs)));
  for (int i = 0; i < spec.programs; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "p%04d", i);
    GeneratedProgram g = generate_program(sub_seed(spec.seed, "program:" + std::to_string(i)), spec.size, id);
    corpus.push_back({std::move(g.program), std::move(g.labels), Split::Train});
  }
  assign_splits(corpus, sub_seed(spec.seed, "splits"));
  if (spec.label_noise > 0.0) apply_label_noise(corpus, spec.label_noise, sub_seed(spec.seed, "noise"));
  return corpus;
}

void assign_splits(Corpus& corpus, std::uint64_t seed) {
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(corpus.size());
  const auto n_train = static_cast<std::size_t>(std::llround(0.70 * n));
  const auto n_val = static_cast<std::size_t>(std::llround(0.15 * n));
  for (std::size_t k = 0; k < order.size(); ++k) {
    corpus[order[k]].split = k < n_train ? Split::Train : k < n_train + n_val ? Split::Val : Split::Test;
  }
}

void apply_label_noise(Corpus& corpus, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, 2);
  for (auto& rec : corpus) {
    for (auto& l : rec.labels) {
      if (coin(rng) >= p) continue;
      if (l.label == 1) {
        l.label = 0;
        l.vuln.reset();
      } else {
        l.label = 1;
        l.vuln = static_cast<VulnClass>(cls(rng));
      }
    }
  }
}

Corpus subsample_negatives(const Corpus& train, double ratio, std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> negatives;
  std::size_t positives = 0;
  for (std::size_t r = 0; r < train.size(); ++r) {
    for (std::size_t i = 0; i < train[r].labels.size(); ++i) {
      if (train[r].labels[i].label == 1) {
        ++positives;
      } else {
        negatives.emplace_back(r, i);
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(negatives.begin(), negatives.end(), rng);
  const auto keep = std::min(negatives.size(), static_cast<std::size_t>(std::floor(ratio * static_cast<double>(positives))));
  std::set<std::pair<std::size_t, std::size_t>> kept(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(keep));

  Corpus out = train;
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::vector<LabeledLine> labels;
    for (std::size_t i = 0; i < train[r].labels.size(); ++i) {
      if (train[r].labels[i].label == 1 || kept.count({r, i}) > 0) labels.push_back(train[r].labels[i]);
    }
    out[r].labels = std::move(labels);
  }
  return out;
}

}  // namespace vulcan::corpus
