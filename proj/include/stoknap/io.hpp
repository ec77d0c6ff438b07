#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "stoknap/model.hpp"
#include "stoknap/polytope.hpp"

namespace stoknap {

// Instance files are JSON. Either base items (expanded=false), which are
// run through the size-cap expansion on load, or pre-expanded items with
// explicit partitions. Probabilities may be numbers or decimal strings.
// Objective parameters may be keyed by expanded item id or by base id
// (base keys broadcast to all caps of that item).
Instance read_instance_json(std::istream& is);
Instance read_instance_file(const std::string& path);
void write_instance_json(const Instance& instance, std::ostream& os);
void write_instance_file(const Instance& instance, const std::string& path);

struct SolutionMeta {
  double b = 0.5;
  double delta = 0.0;
  uint64_t seed = 0;
};

// Solution files carry xbar and the start-node values; transient values
// are elided unless include_mid is set (they are re-derivable from the
// equality constraints, and the loader re-derives them).
void write_solution_json(const ConstraintSystem& system, const FractionalSolution& solution,
                         const SolutionMeta& meta, std::ostream& os, bool include_mid = false);
void write_solution_file(const ConstraintSystem& system, const FractionalSolution& solution,
                         const SolutionMeta& meta, const std::string& path,
                         bool include_mid = false);
FractionalSolution read_solution_json(const ConstraintSystem& system, std::istream& is,
                                      SolutionMeta* meta = nullptr);
FractionalSolution read_solution_file(const ConstraintSystem& system, const std::string& path,
                                      SolutionMeta* meta = nullptr);

}  // namespace stoknap
