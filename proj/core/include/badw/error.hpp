#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace badw {

enum class Errc {
  InvalidBase,
  InvalidShape,
  InvalidArgument,
  DegreeOverflow,
  FactorMismatch,
  PrecisionExhausted,
  DependentInput,
  PreconditionViolated,
  Degenerate,
  OracleViolation,
  IllegalMove,
  ExtractionGap,
  NoLegalMove,
  BudgetExceeded,
  ParamInfeasible,
  CertificateFailure,
};

std::string_view errc_name(Errc c);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc c, const std::string& what) { throw Error(c, what); }

inline void require(bool ok, Errc c, const std::string& what) {
  if (!ok) fail(c, what);
}

}  // namespace badw
