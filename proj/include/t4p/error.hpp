#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace t4p {

enum class ErrorKind {
  kLoad,
  kConflict,
  kParse,
  kNotFound,
  kGrammarSyntax,
  kUndefinedNonterminal,
  kUnreachableNonterminal,
  kNonproductiveNonterminal,
  kOracle,
  kEvaluation,
  kPatch,
  kCheckout,
  kCompile,
  kEnvironment,
  kTemplate,
  kGenerationExhausted,
  kUsage,
};

const char* to_string(ErrorKind kind);

/// Base class for every error raised by the framework. The kind is what
/// callers dispatch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Grammar load failures carry the 1-based source line (0 when the problem
/// is global, e.g. an unreachable rule reported by name).
class GrammarError : public Error {
 public:
  GrammarError(ErrorKind kind, std::size_t line, const std::string& message)
      : Error(kind, message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class PatchError : public Error {
 public:
  PatchError(std::string file, std::size_t hunk, const std::string& message)
      : Error(ErrorKind::kPatch, message), file_(std::move(file)), hunk_(hunk) {}

  const std::string& file() const noexcept { return file_; }
  /// 1-based hunk index within the file; 0 for file-level problems.
  std::size_t hunk() const noexcept { return hunk_; }

 private:
  std::string file_;
  std::size_t hunk_;
};

class CompileError : public Error {
 public:
  CompileError(std::size_t command_index, int exit_code, std::filesystem::path log,
               const std::string& message)
      : Error(ErrorKind::kCompile, message),
        command_index_(command_index),
        exit_code_(exit_code),
        log_(std::move(log)) {}

  std::size_t command_index() const noexcept { return command_index_; }
  int exit_code() const noexcept { return exit_code_; }
  const std::filesystem::path& log_path() const noexcept { return log_; }

 private:
  std::size_t command_index_;
  int exit_code_;
  std::filesystem::path log_;
};

class GenerationExhausted : public Error {
 public:
  GenerationExhausted(std::size_t failing_done, std::size_t failing_wanted,
                      std::size_t passing_done, std::size_t passing_wanted);

  std::size_t failing_done() const noexcept { return failing_done_; }
  std::size_t failing_wanted() const noexcept { return failing_wanted_; }
  std::size_t passing_done() const noexcept { return passing_done_; }
  std::size_t passing_wanted() const noexcept { return passing_wanted_; }

 private:
  std::size_t failing_done_;
  std::size_t failing_wanted_;
  std::size_t passing_done_;
  std::size_t passing_wanted_;
};

}  // namespace t4p
