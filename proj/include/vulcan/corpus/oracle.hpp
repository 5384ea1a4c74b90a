#pragma once

#include <vector>

#include "vulcan/corpus/types.hpp"
#include "vulcan/frontend/ast.hpp"

namespace vulcan::corpus {

/// Labels for every assignment line, recomputed from the AST and the
/// dependence end-points alone:
///  - DeadAfterCall: an earlier statement of the same block calls ext_call
///    in its own expression;
///  - UncheckedDiv: a '/' whose denominator is not a nonzero literal and is
///    not a variable whose end-point value went through assert_nonzero
///    (directly, or by plain copy of such a variable);
///  - LoopOverflow: a '+' with a variable operand whose end-point statement
///    has a loop as its nearest enclosing branch/loop.
/// When several apply the first in this order wins.
std::vector<LabeledLine> oracle_labels(const frontend::Ast& ast);
std::vector<LabeledLine> oracle_labels(const SourceProgram& program);

}  // namespace vulcan::corpus
