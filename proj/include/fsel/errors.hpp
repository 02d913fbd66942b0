#pragma once

#include <stdexcept>
#include <string>

namespace fsel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: bad weights, non-canonical automata, bad config.
class ValidationError : public Error {
public:
  using Error::Error;
};

class InvalidSymbol : public Error {
public:
  using Error::Error;
};

class InvalidState : public Error {
public:
  using Error::Error;
};

/// A tabular probability map was queried beyond its depth.
class WordTooLong : public Error {
public:
  using Error::Error;
};

class EmptyPattern : public Error {
public:
  using Error::Error;
};

class IncompleteProbeSet : public Error {
public:
  using Error::Error;
};

class AlphabetMismatch : public Error {
public:
  using Error::Error;
};

class NotStronglyConnected : public Error {
public:
  using Error::Error;
};

class NotIrreducible : public Error {
public:
  using Error::Error;
};

/// The witness prefix has zero mass, so the gap ratio is undefined.
class ZeroPrefixMass : public Error {
public:
  using Error::Error;
};

class NoWitness : public Error {
public:
  using Error::Error;
};

}  // namespace fsel
