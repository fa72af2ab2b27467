#pragma once

#include <stdexcept>
#include <string>

namespace mc2 {

// Maps onto CLI exit codes: Config 2, Solver 3, Infeasible 4.
enum class ErrorKind { Config, Solver, Infeasible };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void solver_error(const std::string& msg) { throw Error(ErrorKind::Solver, msg); }
[[noreturn]] inline void infeasible_error(const std::string& msg) { throw Error(ErrorKind::Infeasible, msg); }

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Solver: return 3;
    case ErrorKind::Infeasible: return 4;
  }
  return 3;
}

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Infeasible: return "infeasible";
  }
  return "solver";
}

}  // namespace mc2
