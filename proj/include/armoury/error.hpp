#pragma once

#include <stdexcept>
#include <string>

namespace armoury {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Source text could not be parsed; message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

// A bytecode word or wire frame refers to something the current profile
// or protocol does not know about.
class UnknownOpcodeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Runtime fault while interpreting a program: fuel exhausted, bad jump
// target, out-of-bounds context access.
class VmError : public Error {
public:
    using Error::Error;
};

} // namespace armoury
