#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "abae/core.hpp"

namespace abae {

struct IngestResult {
  Dataset dataset;
  std::vector<std::string> warnings;
};

/// Parses `id,proxy,value[,predicate]` rows after a header line. With
/// require_predicate the predicate column must be present (inline oracle
/// mode). Throws ParseError with the 1-based line number, DuplicateId.
IngestResult parse_csv(std::istream& in, const std::string& name, bool require_predicate);

/// Opens and parses a file; a missing file is a ParseError at line 0.
IngestResult ingest_csv(const std::string& path, bool require_predicate);

/// Writes the dataset in the format parse_csv reads, with round-trip precision.
void write_csv(const Dataset& dataset, std::ostream& out);

/// Evaluates records by running a shell command once per batch: the child
/// gets the record ids on stdin, one per line, and answers `id,pred,value`
/// lines in any order. Throws OracleProtocolError on a malformed line, an id
/// that was not requested, or ids left unanswered when the child exits.
class SubprocessOracle final : public PredicateOracle {
 public:
  explicit SubprocessOracle(std::string command);

  std::vector<Reveal> evaluate(const Dataset& dataset,
                               std::span<const std::size_t> indices) override;

  const std::string& command() const noexcept { return command_; }

 private:
  std::string command_;
};

}  // namespace abae
