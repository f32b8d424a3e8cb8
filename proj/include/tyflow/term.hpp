#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tyflow {

using SortId = std::uint32_t;
using SymbolId = std::uint32_t;
using PredId = std::uint32_t;
using VarId = std::uint64_t;

// A contract violation (ill-sorted binding, non-ground constraint argument,
// oracle reply outside the offered legal set, ...). Domain failures such as
// unification clashes or parse errors are reported as values, never thrown.
struct Fault : std::logic_error {
  using std::logic_error::logic_error;
};

enum class SortKind { Inductive, Text, Int };

class Term;
using TermPtr = std::shared_ptr<const Term>;

// Immutable first-order terms. Leaves are named constants (arity-0 table
// entries of some sort), text atoms / int literals (values of the builtin
// sorts), and sorted variables; interior nodes are constructor applications.
// Terms are shared freely; equality is structural.
class Term {
public:
  struct Constant {
    SymbolId sym;
  };
  struct TextAtom {
    std::string atom;
  };
  struct IntLit {
    std::int64_t value;
  };
  struct Variable {
    VarId id;
    std::string hint;  // display name, not identity
  };
  struct Apply {
    SymbolId ctor;
    std::vector<TermPtr> children;
  };
  using Node = std::variant<Constant, TextAtom, IntLit, Variable, Apply>;

  static TermPtr constant(SymbolId sym, SortId sort);
  static TermPtr text(std::string atom, SortId sort);
  static TermPtr int_lit(std::int64_t value, SortId sort);
  static TermPtr var(VarId id, SortId sort, std::string hint);
  static TermPtr apply(SymbolId ctor, SortId sort, std::vector<TermPtr> children);

  SortId sort() const { return sort_; }
  bool ground() const { return ground_; }
  const Node& node() const { return node_; }

  const Variable* as_var() const { return std::get_if<Variable>(&node_); }
  const Apply* as_apply() const { return std::get_if<Apply>(&node_); }
  const Constant* as_constant() const { return std::get_if<Constant>(&node_); }
  const TextAtom* as_text() const { return std::get_if<TextAtom>(&node_); }
  const IntLit* as_int() const { return std::get_if<IntLit>(&node_); }

  struct Key {};  // pass-key: constructible through the factories only
  Term(Key, SortId sort, bool ground, Node node)
      : sort_(sort), ground_(ground), node_(std::move(node)) {}

private:
  SortId sort_;
  bool ground_;
  Node node_;
};

bool equal(const TermPtr& a, const TermPtr& b);
bool equal(std::span<const TermPtr> a, std::span<const TermPtr> b);

// Whether `v` (a variable term) occurs free in `t`.
bool occurs(const TermPtr& v, const TermPtr& t);

// Free variables in first-occurrence pre-order, each listed once. The list
// form is the ordered union over the terms, left to right.
std::vector<TermPtr> free_vars(const TermPtr& t);
std::vector<TermPtr> free_vars(std::span<const TermPtr> ts);

// Process-wide monotone fresh-variable supply (thread-safe).
VarId fresh_var_id();
TermPtr fresh_var(SortId sort, std::string hint);

}  // namespace tyflow
