#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace caustix {

enum class ErrorKind {
  Input,
  Parse,
  Eval,
  DegenerateMember,
  NumericalFailure,
  SingularPoint,
  LightLikeNormal,
  GrazingHit,
  Escape,
  DegenerateSecondFundamentalForm,
  DegenerateField,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "InputError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Eval: return "EvalError";
    case ErrorKind::DegenerateMember: return "DegenerateMember";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::LightLikeNormal: return "LightLikeNormal";
    case ErrorKind::GrazingHit: return "GrazingHit";
    case ErrorKind::Escape: return "Escape";
    case ErrorKind::DegenerateSecondFundamentalForm: return "DegenerateSecondFundamentalForm";
    case ErrorKind::DegenerateField: return "DegenerateField";
  }
  return "Error";
}

/// Base of every error raised by the library. `kind()` is what the CLI maps
/// onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for errors caused by bad user input rather than numerics.
  bool is_input_error() const noexcept {
    return kind_ == ErrorKind::Input || kind_ == ErrorKind::Parse || kind_ == ErrorKind::Eval ||
           kind_ == ErrorKind::DegenerateMember;
  }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(ErrorKind::Parse, what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public Error {
 public:
  EvalError(std::string node, const std::string& what)
      : Error(ErrorKind::Eval, what + " in '" + node + "'"), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

class DegenerateMember : public Error {
 public:
  DegenerateMember(double lambda, int index)
      : Error(ErrorKind::DegenerateMember, "pencil member lambda=" + std::to_string(lambda) +
                                                " is singular in coordinate " + std::to_string(index)),
        lambda_(lambda),
        index_(index) {}
  double lambda() const noexcept { return lambda_; }
  /// 1-based coordinate whose denominator vanishes.
  int index() const noexcept { return index_; }

 private:
  double lambda_;
  int index_;
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what) : Error(ErrorKind::NumericalFailure, what) {}
};

class SingularPoint : public Error {
 public:
  explicit SingularPoint(const std::string& what) : Error(ErrorKind::SingularPoint, what) {}
};

class LightLikeNormal : public Error {
 public:
  explicit LightLikeNormal(const std::string& what) : Error(ErrorKind::LightLikeNormal, what) {}
};

class GrazingHit : public Error {
 public:
  explicit GrazingHit(const std::string& what) : Error(ErrorKind::GrazingHit, what) {}
};

class Escape : public Error {
 public:
  explicit Escape(const std::string& what) : Error(ErrorKind::Escape, what) {}
};

class DegenerateSecondFundamentalForm : public Error {
 public:
  explicit DegenerateSecondFundamentalForm(const std::string& what)
      : Error(ErrorKind::DegenerateSecondFundamentalForm, what) {}
};

class DegenerateField : public Error {
 public:
  explicit DegenerateField(const std::string& what) : Error(ErrorKind::DegenerateField, what) {}
};

}  // namespace caustix
